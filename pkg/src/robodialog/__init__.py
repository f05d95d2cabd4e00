"""Adaptive explanation dialogs for robot error recovery.

A deterministic cube-sorting robot raises two kinds of errors; an adaptive
dialog explains them at four levels of detail, steered by the user's what/why
questions. The package bundles the dialog state machines, a rule-based intent
parser, the explanation templates, the task simulator, a scripted-user batch
harness, an HTTP session service, and a CLI.
"""

from .explain import (
    ErrorKind,
    ExplanationTemplateSet,
    default_templates,
    fallback_utterance,
    render,
)
from .intent import RuleSet, classify, default_ruleset, normalize
from .levels import (
    DialogVariant,
    ExplanationLevel,
    Intent,
    JustificationLevel,
    TransitionTable,
    VerbosityLevel,
    default_transition_table,
    loe_components,
    loe_from_components,
    next_level,
    validate_table,
)
from .policies import BUILTIN_POLICIES, make_policy, run_batch, run_session
from .session import (
    DialogSession,
    SessionError,
    SessionMetrics,
    SessionStatus,
    TranscriptEvent,
    advance,
    create_session,
    handle_continue,
    handle_repair,
    handle_utterance,
    metrics,
    replay_transcript,
    serialize_transcript,
)
from .sim import (
    Cube,
    MoveCube,
    SwapCube,
    WorldState,
    apply_repair,
    new_world,
    shelf_for,
    step_robot,
)

__version__ = "0.1.0"
