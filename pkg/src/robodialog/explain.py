"""Template-based rendering of robot error explanations at each level.

One template set holds, per error kind, a terse and a verbose descriptor plus
a justification clause and a remedy clause. A single composition rule builds
all (error kind, level) cells from those slots:

    Low      -> shared low text
    Medium1  -> verbose descriptor
    Medium2  -> terse descriptor + justification + remedy
    High     -> verbose descriptor + justification + remedy

The justification continues the descriptor's sentence (space join); the
remedy starts a new sentence (". " join). The defaults reproduce the recorded
robot phrasings exactly, quirks included: the out-of-range descriptor is
worded slightly differently when a justification follows ("item on table" vs
"item on the table"), so the template carries that variant in an optional
`justified_descriptor` slot. All eight rendered cells are frozen in
data/golden_responses.json.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

from .levels import ExplanationLevel, JustificationLevel, loe_components

GOLDEN_PATH = Path(__file__).parent / "data" / "golden_responses.json"


class ErrorKind(Enum):
    INCORRECT_ITEM = "IncorrectItem"
    OUT_OF_RANGE = "OutOfRange"


class TemplateConfigError(ValueError):
    """Raised for malformed or incomplete template configuration data."""


@dataclass(frozen=True)
class ErrorTemplates:
    """Slots for one error kind."""

    terse_descriptor: str
    verbose_descriptor: str
    justification_clause: str
    remedy_clause: str
    # Wording of the verbose descriptor when a justification follows; falls
    # back to verbose_descriptor when None.
    justified_descriptor: str | None = None

    def __post_init__(self) -> None:
        for name in ("terse_descriptor", "verbose_descriptor",
                     "justification_clause", "remedy_clause"):
            if not getattr(self, name):
                raise TemplateConfigError(f"{name} must be non-empty")


@dataclass(frozen=True)
class ExplanationTemplateSet:
    """Per-error-kind slots plus the shared low-level text and fallback."""

    low_text: str
    fallback_text: str
    by_kind: Mapping[ErrorKind, ErrorTemplates]

    def __post_init__(self) -> None:
        if not self.low_text or not self.fallback_text:
            raise TemplateConfigError("low_text and fallback_text must be non-empty")
        for kind in ErrorKind:
            if kind not in self.by_kind:
                raise TemplateConfigError(f"missing templates for {kind.value}")

    def to_dict(self) -> dict:
        doc: dict = {"low_text": self.low_text, "fallback_text": self.fallback_text}
        for kind in ErrorKind:
            t = self.by_kind[kind]
            entry = {
                "terse_descriptor": t.terse_descriptor,
                "verbose_descriptor": t.verbose_descriptor,
                "justification_clause": t.justification_clause,
                "remedy_clause": t.remedy_clause,
            }
            if t.justified_descriptor is not None:
                entry["justified_descriptor"] = t.justified_descriptor
            doc[kind.value] = entry
        return doc


_SENTENCE_END = (".", "!", "?")


def _continue_sentence(head: str, clause: str) -> str:
    return f"{head} {clause}" if clause else head


def _new_sentence(head: str, clause: str) -> str:
    if not clause:
        return head
    if head.endswith(_SENTENCE_END):
        return f"{head} {clause}"
    return f"{head}. {clause}"


def render(kind: ErrorKind, level: ExplanationLevel,
           templates: ExplanationTemplateSet) -> str:
    """Compose the robot's explanation for an error at the given level."""
    if level is ExplanationLevel.LOW:
        return templates.low_text
    slots = templates.by_kind[kind]
    if level is ExplanationLevel.MEDIUM1:
        return slots.verbose_descriptor
    if level is ExplanationLevel.MEDIUM2:
        descriptor = slots.terse_descriptor
    else:  # HIGH
        descriptor = slots.justified_descriptor or slots.verbose_descriptor
    justified = _continue_sentence(descriptor, slots.justification_clause)
    return _new_sentence(justified, slots.remedy_clause)


def fallback_utterance(templates: ExplanationTemplateSet) -> str:
    """The fixed apology for utterances outside the what/why/continue scope."""
    return templates.fallback_text


def has_justification(level: ExplanationLevel) -> bool:
    return loe_components(level)[1] is JustificationLevel.HIGH


def default_templates() -> ExplanationTemplateSet:
    """Templates reproducing the recorded robot responses byte-exact."""
    return ExplanationTemplateSet(
        low_text="Error occurred",
        fallback_text="I am sorry, please ask different question.",
        by_kind={
            ErrorKind.INCORRECT_ITEM: ErrorTemplates(
                terse_descriptor="Error",
                verbose_descriptor="Error, I am unable to put the item on the shelf",
                justification_clause="due to incorrect item",
                remedy_clause="Swap the cube",
            ),
            ErrorKind.OUT_OF_RANGE: ErrorTemplates(
                terse_descriptor="Error",
                verbose_descriptor="Error I'm unable to reach the item on table",
                justified_descriptor="Error I'm unable to reach the item on the table",
                justification_clause="because it is outside my camera vision",
                remedy_clause="Please move it inside the square",
            ),
        },
    )


def templates_from_dict(data: Mapping) -> ExplanationTemplateSet:
    """Build a template set from a document keyed by error kind and slot name."""
    by_kind = {}
    for kind in ErrorKind:
        entry = data.get(kind.value)
        if not isinstance(entry, Mapping):
            raise TemplateConfigError(f"missing or malformed section {kind.value!r}")
        try:
            by_kind[kind] = ErrorTemplates(
                terse_descriptor=str(entry["terse_descriptor"]),
                verbose_descriptor=str(entry["verbose_descriptor"]),
                justification_clause=str(entry["justification_clause"]),
                remedy_clause=str(entry["remedy_clause"]),
                justified_descriptor=(
                    str(entry["justified_descriptor"])
                    if "justified_descriptor" in entry else None
                ),
            )
        except KeyError as exc:
            raise TemplateConfigError(f"{kind.value}: missing slot {exc}") from exc
    try:
        return ExplanationTemplateSet(
            low_text=str(data["low_text"]),
            fallback_text=str(data["fallback_text"]),
            by_kind=by_kind,
        )
    except KeyError as exc:
        raise TemplateConfigError(f"missing field {exc}") from exc


def load_templates(path: str | Path) -> ExplanationTemplateSet:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise TemplateConfigError("template config must be an object")
    return templates_from_dict(data)


def load_golden_responses(path: str | Path = GOLDEN_PATH) -> dict:
    """The frozen rendered text for all eight (error kind, level) cells."""
    return json.loads(Path(path).read_text(encoding="utf-8"))
