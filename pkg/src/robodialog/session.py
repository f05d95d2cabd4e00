"""One dialog session: robot stepping, error dialogs, repairs, transcript.

A session owns a world, a transition table, templates, and parser rules. The
robot advances until it raises an error; that opens a dialog at the Low level.
User questions move the level per the variant's transition table, repairs fix
the world, and continue closes the dialog and resumes the robot. Every action
lands in an append-only, logically-clocked transcript, which is the unit of
replay, golden testing, and metrics.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, replace as dc_replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Union

from . import sim
from .explain import (
    ErrorKind,
    ExplanationTemplateSet,
    default_templates,
    fallback_utterance,
    has_justification,
    render,
    templates_from_dict,
)
from .intent import RuleSet, classify, default_ruleset, ruleset_from_dict
from .levels import (
    DialogVariant,
    ExplanationLevel,
    Intent,
    TransitionTable,
    default_transition_table,
    level_leq,
    next_level,
    tables_from_records,
    validate_table,
)
from .sim import MoveCube, RepairAction, SwapCube, WorldState


class SessionError(Exception):
    """A session-layer contract violation (wrong status or dialog state)."""


class SessionStatus(Enum):
    RUNNING = "Running"
    RESOLVED = "Resolved"
    ABANDONED = "Abandoned"


class Actor(Enum):
    ROBOT = "Robot"
    USER = "User"
    SYSTEM = "System"


class EventKind(Enum):
    ERROR_RAISED = "ErrorRaised"
    ROBOT_UTTERANCE = "RobotUtterance"
    USER_UTTERANCE = "UserUtterance"
    INTENT_CLASSIFIED = "IntentClassified"
    CONTINUE = "Continue"
    REPAIR = "Repair"
    SORTED = "Sorted"
    SESSION_RESOLVED = "SessionResolved"
    FALLBACK = "Fallback"


#: Event kinds that count as a user turn.
USER_TURN_KINDS = (EventKind.USER_UTTERANCE, EventKind.CONTINUE, EventKind.REPAIR)


@dataclass(frozen=True)
class TranscriptEvent:
    turn: int
    actor: Actor
    kind: EventKind
    payload: dict


@dataclass
class DialogState:
    """Open error dialog; created at Low whenever an error is raised."""

    error: ErrorKind
    cube_id: int
    current_level: ExplanationLevel


def repair_action_to_wire(action: RepairAction) -> dict:
    if isinstance(action, SwapCube):
        return {"type": "swap", "cube_id": action.cube_id, "new_qr": action.new_qr}
    if isinstance(action, MoveCube):
        return {"type": "move", "cube_id": action.cube_id,
                "position": [action.new_position[0], action.new_position[1]]}
    raise ValueError(f"unknown repair action {action!r}")


def repair_action_from_wire(data: Mapping) -> RepairAction:
    try:
        if data["type"] == "swap":
            return SwapCube(cube_id=int(data["cube_id"]), new_qr=str(data["new_qr"]))
        if data["type"] == "move":
            x, y = data["position"]
            return MoveCube(cube_id=int(data["cube_id"]), new_position=(int(x), int(y)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed repair action: {exc}") from exc
    raise ValueError(f"unknown repair action type {data.get('type')!r}")


@dataclass
class DialogSession:
    id: str
    variant: DialogVariant
    scenario: Union[str, dict]
    seed: int
    world: WorldState
    table: TransitionTable
    templates: ExplanationTemplateSet
    rules: RuleSet
    dialog_state: DialogState | None = None
    transcript: list[TranscriptEvent] = field(default_factory=list)
    status: SessionStatus = SessionStatus.RUNNING
    logical_clock: int = 0
    # Overrides are remembered so the transcript header can reproduce them.
    custom_table: bool = False
    custom_templates: bool = False
    custom_rules: bool = False

    def emit(self, actor: Actor, kind: EventKind, payload: dict) -> TranscriptEvent:
        self.logical_clock += 1
        event = TranscriptEvent(turn=self.logical_clock, actor=actor, kind=kind,
                                payload=payload)
        self.transcript.append(event)
        return event


def create_session(
    variant: DialogVariant,
    scenario: Union[str, Mapping],
    seed: int,
    *,
    table: TransitionTable | None = None,
    templates: ExplanationTemplateSet | None = None,
    rules: RuleSet | None = None,
    session_id: str | None = None,
) -> DialogSession:
    """Build a Running session with an initialized world and empty transcript.

    Does not auto-step the robot; call :func:`advance` to start it.
    """
    if table is None:
        table = default_transition_table(variant)
    if table.variant is not variant:
        raise SessionError(f"table is for {table.variant.value}, session is {variant.value}")
    result = validate_table(table)
    if not result:
        raise SessionError(f"invalid transition table: {result.error} at {result.entry}")
    world = sim.new_world(dict(scenario) if isinstance(scenario, Mapping) else scenario, seed)
    return DialogSession(
        id=session_id or uuid.uuid4().hex[:12],
        variant=variant,
        scenario=dict(scenario) if isinstance(scenario, Mapping) else scenario,
        seed=seed,
        world=world,
        table=table,
        templates=templates if templates is not None else default_templates(),
        rules=rules if rules is not None else default_ruleset(),
        custom_table=table.entries != default_transition_table(variant).entries,
        custom_templates=templates is not None,
        custom_rules=rules is not None,
    )


def _advance_loop(session: DialogSession) -> list[TranscriptEvent]:
    """Step the robot until an error opens a dialog or the task completes."""
    events = []
    while True:
        session.world, outcome = sim.step_robot(session.world)
        if isinstance(outcome, sim.Sorted):
            events.append(session.emit(Actor.ROBOT, EventKind.SORTED,
                                       {"cube_id": outcome.cube_id, "shelf": outcome.shelf}))
            continue
        if isinstance(outcome, sim.ErrorRaised):
            session.dialog_state = DialogState(
                error=outcome.kind, cube_id=outcome.cube_id,
                current_level=ExplanationLevel.LOW,
            )
            events.append(session.emit(Actor.ROBOT, EventKind.ERROR_RAISED,
                                       {"cube_id": outcome.cube_id,
                                        "error": outcome.kind.value}))
            text = render(outcome.kind, ExplanationLevel.LOW, session.templates)
            events.append(session.emit(Actor.ROBOT, EventKind.ROBOT_UTTERANCE,
                                       {"level": ExplanationLevel.LOW.value, "text": text}))
            return events
        # Done
        session.status = SessionStatus.RESOLVED
        events.append(session.emit(Actor.SYSTEM, EventKind.SESSION_RESOLVED, {}))
        return events


def advance(session: DialogSession) -> list[TranscriptEvent]:
    """Run the robot until it errors or finishes; only legal with no open dialog."""
    if session.status is not SessionStatus.RUNNING:
        raise SessionError(f"cannot advance a {session.status.value} session")
    if session.dialog_state is not None:
        raise SessionError("cannot advance while an error dialog is open")
    return _advance_loop(session)


def handle_utterance(session: DialogSession, text: str) -> list[TranscriptEvent]:
    """Classify user text and answer: re-leveled explanation, fallback, or continue."""
    if session.status is not SessionStatus.RUNNING:
        raise SessionError(f"cannot accept an utterance in a {session.status.value} session")
    if session.dialog_state is None:
        raise SessionError("no error dialog is open")
    intent = classify(text, session.rules)
    events = [
        session.emit(Actor.USER, EventKind.USER_UTTERANCE, {"text": text}),
        session.emit(Actor.SYSTEM, EventKind.INTENT_CLASSIFIED, {"intent": intent.value}),
    ]
    if intent in (Intent.WHAT, Intent.WHY):
        state = session.dialog_state
        state.current_level = next_level(session.table, state.current_level, intent)
        reply = render(state.error, state.current_level, session.templates)
        events.append(session.emit(Actor.ROBOT, EventKind.ROBOT_UTTERANCE,
                                   {"level": state.current_level.value, "text": reply}))
    elif intent is Intent.OUT_OF_SCOPE:
        events.append(session.emit(Actor.ROBOT, EventKind.FALLBACK,
                                   {"text": fallback_utterance(session.templates)}))
    else:  # Continue typed as text; same semantics as the button
        events.extend(_do_continue(session, source="utterance"))
    return events


def handle_continue(session: DialogSession) -> list[TranscriptEvent]:
    """The continue button: close any open dialog and let the robot retry."""
    if session.status is SessionStatus.RESOLVED:
        return []  # terminal; continuing is a no-op
    if session.status is not SessionStatus.RUNNING:
        raise SessionError(f"cannot continue a {session.status.value} session")
    return _do_continue(session, source="button")


def _do_continue(session: DialogSession, source: str) -> list[TranscriptEvent]:
    events = [session.emit(Actor.USER, EventKind.CONTINUE, {"source": source})]
    session.dialog_state = None
    if session.world.robot_phase.kind is sim.PhaseKind.ERRORED:
        # The robot re-attempts detection; an unrepaired condition re-raises
        # the error and the dialog restarts at Low.
        session.world = dc_replace(session.world, robot_phase=sim.RobotPhase.idle())
    events.extend(_advance_loop(session))
    return events


def handle_repair(session: DialogSession, action: RepairAction) -> list[TranscriptEvent]:
    """Apply a world repair; the dialog stays open until the user continues."""
    if session.status is not SessionStatus.RUNNING:
        raise SessionError(f"cannot repair in a {session.status.value} session")
    session.world = sim.apply_repair(session.world, action)
    return [session.emit(Actor.USER, EventKind.REPAIR,
                         {"action": repair_action_to_wire(action)})]


@dataclass(frozen=True)
class SessionMetrics:
    resolved: bool
    user_turns: int
    levels_reached: tuple[ExplanationLevel, ...]
    max_level_reached: ExplanationLevel | None
    high_justification_count: int
    fallback_count: int
    errors_encountered: tuple[ErrorKind, ...]

    def to_dict(self) -> dict:
        return {
            "resolved": self.resolved,
            "user_turns": self.user_turns,
            "levels_reached": [lv.value for lv in self.levels_reached],
            "max_level_reached":
                self.max_level_reached.value if self.max_level_reached else None,
            "high_justification_count": self.high_justification_count,
            "fallback_count": self.fallback_count,
            "errors_encountered": [e.value for e in self.errors_encountered],
        }


def metrics(session: DialogSession) -> SessionMetrics:
    """Pure fold over the transcript.

    Levels are reported as the set reached (Medium1/Medium2 are incomparable);
    max_level_reached is filled only when the set has a unique maximum.
    errors_encountered lists distinct error kinds in first-seen order.
    """
    resolved = False
    user_turns = 0
    levels: list[ExplanationLevel] = []
    fallback_count = 0
    high_justification = 0
    errors: list[ErrorKind] = []
    for event in session.transcript:
        if event.kind is EventKind.SESSION_RESOLVED:
            resolved = True
        if event.kind in USER_TURN_KINDS:
            user_turns += 1
        if event.kind is EventKind.ROBOT_UTTERANCE:
            level = ExplanationLevel(event.payload["level"])
            if level not in levels:
                levels.append(level)
            if has_justification(level):
                high_justification += 1
        if event.kind is EventKind.FALLBACK:
            fallback_count += 1
        if event.kind is EventKind.ERROR_RAISED:
            kind = ErrorKind(event.payload["error"])
            if kind not in errors:
                errors.append(kind)
    ordered = tuple(lv for lv in ExplanationLevel if lv in levels)
    maxima = [a for a in ordered if not any(level_leq(a, b) and a is not b for b in ordered)]
    return SessionMetrics(
        resolved=resolved,
        user_turns=user_turns,
        levels_reached=ordered,
        max_level_reached=maxima[0] if len(maxima) == 1 else None,
        high_justification_count=high_justification,
        fallback_count=fallback_count,
        errors_encountered=tuple(errors),
    )


def world_summary(session: DialogSession) -> dict:
    """World plus dialog view, enough for a UI grid and a scripted user."""
    state = session.dialog_state
    return {
        "world": sim.world_to_dict(session.world),
        "dialog": None if state is None else {
            "error": state.error.value,
            "cube_id": state.cube_id,
            "current_level": state.current_level.value,
        },
        "status": session.status.value,
    }


# --- Transcript persistence and replay ---------------------------------------

def _canonical(value):
    if isinstance(value, dict):
        return {k: _canonical(value[k]) for k in sorted(value)}
    if isinstance(value, list):
        return [_canonical(v) for v in value]
    return value


def event_to_record(event: TranscriptEvent) -> dict:
    return {
        "turn": event.turn,
        "actor": event.actor.value,
        "kind": event.kind.value,
        "payload": _canonical(event.payload),
    }


def event_from_record(record: Mapping) -> TranscriptEvent:
    return TranscriptEvent(
        turn=int(record["turn"]),
        actor=Actor(record["actor"]),
        kind=EventKind(record["kind"]),
        payload=dict(record["payload"]),
    )


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def session_header(session: DialogSession) -> dict:
    return {
        "header": {
            "session_id": session.id,
            "variant": session.variant.value,
            "scenario": session.scenario,
            "seed": session.seed,
            "table": session.table.to_records() if session.custom_table else None,
            "templates": session.templates.to_dict() if session.custom_templates else None,
            "rules": session.rules.to_dict() if session.custom_rules else None,
        }
    }


def serialize_transcript(session: DialogSession) -> str:
    """Header line plus one canonical JSON record per event."""
    lines = [_dumps(_canonical(session_header(session)))]
    lines.extend(_dumps(event_to_record(e)) for e in session.transcript)
    return "\n".join(lines) + "\n"


def write_transcript(session: DialogSession, path: str | Path) -> None:
    Path(path).write_text(serialize_transcript(session), encoding="utf-8")


def parse_transcript(text: str) -> tuple[dict, list[dict]]:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty transcript")
    first = json.loads(lines[0])
    if "header" not in first:
        raise ValueError("transcript must start with a header line")
    records = [json.loads(line) for line in lines[1:]]
    return first["header"], records


def session_from_header(header: Mapping) -> DialogSession:
    table = None
    if header.get("table"):
        tables = tables_from_records(header["table"])
        table = tables[DialogVariant(header["variant"])]
    templates = templates_from_dict(header["templates"]) if header.get("templates") else None
    rules = ruleset_from_dict(header["rules"]) if header.get("rules") else None
    return create_session(
        DialogVariant(header["variant"]),
        header["scenario"],
        int(header["seed"]),
        table=table,
        templates=templates,
        rules=rules,
        session_id=header["session_id"],
    )


@dataclass(frozen=True)
class Divergence:
    line: int  # 1-based line in the transcript file
    expected: str | None
    actual: str | None

    def describe(self) -> str:
        return (f"first divergence at line {self.line}:\n"
                f"  expected: {self.expected!r}\n"
                f"  actual:   {self.actual!r}")


def replay_transcript(text: str) -> tuple[DialogSession, Divergence | None]:
    """Re-run the recorded user actions against a fresh session and diff.

    Robot and system events are regenerated, never injected; a transcript
    replays cleanly iff the regenerated lines match the recorded ones
    byte-exact.
    """
    header, records = parse_transcript(text)
    session = session_from_header(header)
    if records and records[0]["actor"] in (Actor.ROBOT.value, Actor.SYSTEM.value):
        advance(session)
    for record in records:
        kind = EventKind(record["kind"])
        try:
            if kind is EventKind.USER_UTTERANCE:
                handle_utterance(session, record["payload"]["text"])
            elif kind is EventKind.CONTINUE and record["payload"].get("source") == "button":
                handle_continue(session)
            elif kind is EventKind.REPAIR:
                handle_repair(session, repair_action_from_wire(record["payload"]["action"]))
        except (sim.SimError, SessionError):
            break  # the diff below reports where things went off the rails
    expected_lines = text.splitlines()
    actual_lines = serialize_transcript(session).splitlines()
    for i in range(max(len(expected_lines), len(actual_lines))):
        expected = expected_lines[i] if i < len(expected_lines) else None
        actual = actual_lines[i] if i < len(actual_lines) else None
        if expected != actual:
            return session, Divergence(line=i + 1, expected=expected, actual=actual)
    return session, None
