"""Explanation-level lattice and the adaptive dialog transition tables.

An explanation level combines a verbosity axis (how much descriptive detail
the robot gives) with a justification axis (whether it gives the reason).
Crossing the two binary axes yields four levels; the two adaptive dialog
variants move between them in response to the user's what/why questions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping


class VerbosityLevel(Enum):
    LOW = "Low"
    HIGH = "High"


class JustificationLevel(Enum):
    LOW = "Low"
    HIGH = "High"


class ExplanationLevel(Enum):
    LOW = "Low"
    MEDIUM1 = "Medium1"
    MEDIUM2 = "Medium2"
    HIGH = "High"


class DialogVariant(Enum):
    AD1 = "AD1"
    AD2 = "AD2"


class Intent(Enum):
    WHAT = "What"
    WHY = "Why"
    CONTINUE = "Continue"
    OUT_OF_SCOPE = "OutOfScope"


#: The intents that may move the dialog to another level.
QUESTION_INTENTS = (Intent.WHAT, Intent.WHY)

_LEVEL_COMPONENTS = {
    ExplanationLevel.LOW: (VerbosityLevel.LOW, JustificationLevel.LOW),
    ExplanationLevel.MEDIUM1: (VerbosityLevel.HIGH, JustificationLevel.LOW),
    ExplanationLevel.MEDIUM2: (VerbosityLevel.LOW, JustificationLevel.HIGH),
    ExplanationLevel.HIGH: (VerbosityLevel.HIGH, JustificationLevel.HIGH),
}

_COMPONENTS_LEVEL = {pair: level for level, pair in _LEVEL_COMPONENTS.items()}


def loe_components(level: ExplanationLevel) -> tuple[VerbosityLevel, JustificationLevel]:
    """Split a level into its (verbosity, justification) pair."""
    return _LEVEL_COMPONENTS[level]


def loe_from_components(
    verbosity: VerbosityLevel, justification: JustificationLevel
) -> ExplanationLevel:
    """Inverse of :func:`loe_components`."""
    return _COMPONENTS_LEVEL[(verbosity, justification)]


def level_leq(a: ExplanationLevel, b: ExplanationLevel) -> bool:
    """Lattice order: a <= b iff both axes are <=. Medium1/Medium2 are incomparable."""
    va, ja = loe_components(a)
    vb, jb = loe_components(b)
    rank = {VerbosityLevel.LOW: 0, VerbosityLevel.HIGH: 1,
            JustificationLevel.LOW: 0, JustificationLevel.HIGH: 1}
    return rank[va] <= rank[vb] and rank[ja] <= rank[jb]


TransitionKey = tuple[ExplanationLevel, Intent]


@dataclass(frozen=True)
class TransitionTable:
    """Total map (current level, question intent) -> next level for one dialog variant."""

    variant: DialogVariant
    entries: Mapping[TransitionKey, ExplanationLevel]

    def lookup(self, current: ExplanationLevel, intent: Intent) -> ExplanationLevel:
        return self.entries[(current, intent)]

    def to_records(self) -> list[dict]:
        """Serialize as the loadable record list (stable order)."""
        records = []
        for level in ExplanationLevel:
            for intent in QUESTION_INTENTS:
                records.append(
                    {
                        "variant": self.variant.value,
                        "from": level.value,
                        "intent": intent.value,
                        "to": self.entries[(level, intent)].value,
                    }
                )
        return records


@dataclass(frozen=True)
class TableValidation:
    """Outcome of :func:`validate_table`; `entry` pinpoints the first offending cell."""

    ok: bool
    error: str | None = None
    entry: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


_AD1_TRANSITIONS = {
    (ExplanationLevel.LOW, Intent.WHAT): ExplanationLevel.MEDIUM1,
    (ExplanationLevel.LOW, Intent.WHY): ExplanationLevel.MEDIUM2,
    (ExplanationLevel.MEDIUM1, Intent.WHAT): ExplanationLevel.MEDIUM1,
    (ExplanationLevel.MEDIUM1, Intent.WHY): ExplanationLevel.MEDIUM2,
    (ExplanationLevel.MEDIUM2, Intent.WHAT): ExplanationLevel.MEDIUM2,
    (ExplanationLevel.MEDIUM2, Intent.WHY): ExplanationLevel.MEDIUM2,
    # Unreachable from Low; kept so the table stays total.
    (ExplanationLevel.HIGH, Intent.WHAT): ExplanationLevel.HIGH,
    (ExplanationLevel.HIGH, Intent.WHY): ExplanationLevel.HIGH,
}

_AD2_TRANSITIONS = {
    (ExplanationLevel.LOW, Intent.WHAT): ExplanationLevel.MEDIUM1,
    (ExplanationLevel.LOW, Intent.WHY): ExplanationLevel.MEDIUM2,
    (ExplanationLevel.MEDIUM1, Intent.WHAT): ExplanationLevel.MEDIUM1,
    (ExplanationLevel.MEDIUM1, Intent.WHY): ExplanationLevel.HIGH,
    (ExplanationLevel.MEDIUM2, Intent.WHAT): ExplanationLevel.HIGH,
    (ExplanationLevel.MEDIUM2, Intent.WHY): ExplanationLevel.MEDIUM2,
    (ExplanationLevel.HIGH, Intent.WHAT): ExplanationLevel.HIGH,
    (ExplanationLevel.HIGH, Intent.WHY): ExplanationLevel.HIGH,
}


def default_transition_table(variant: DialogVariant) -> TransitionTable:
    """Built-in table for the variant.

    AD1 answers each question by raising the matching axis but never grants
    full verbosity-plus-justification; AD2 escalates a second question to the
    top level. Non-question intents never consult the table.
    """
    entries = _AD1_TRANSITIONS if variant is DialogVariant.AD1 else _AD2_TRANSITIONS
    return TransitionTable(variant=variant, entries=dict(entries))


def next_level(
    table: TransitionTable, current: ExplanationLevel, intent: Intent
) -> ExplanationLevel:
    """Next level after a classified user intent; non-questions leave it unchanged."""
    if intent in (Intent.CONTINUE, Intent.OUT_OF_SCOPE):
        return current
    return table.lookup(current, intent)


def reachable_levels(
    table: TransitionTable, start: ExplanationLevel = ExplanationLevel.LOW
) -> set[ExplanationLevel]:
    """All levels reachable from `start` under any sequence of intents."""
    seen = {start}
    frontier = [start]
    while frontier:
        level = frontier.pop()
        for intent in QUESTION_INTENTS:
            target = table.entries.get((level, intent))
            if target is not None and target not in seen:
                seen.add(target)
                frontier.append(target)
    return seen


def validate_table(table: TransitionTable) -> TableValidation:
    """Check totality, closure, and (for AD1) that High stays unreachable from Low."""
    for key in table.entries:
        level, intent = key if isinstance(key, tuple) and len(key) == 2 else (key, None)
        if not isinstance(level, ExplanationLevel) or intent not in QUESTION_INTENTS:
            return TableValidation(False, "entry key is not a (level, question-intent) pair", key)
    for level in ExplanationLevel:
        for intent in QUESTION_INTENTS:
            if (level, intent) not in table.entries:
                return TableValidation(False, "table is not total", (level, intent))
    for key, target in table.entries.items():
        if not isinstance(target, ExplanationLevel):
            return TableValidation(False, "entry target is not a valid level", key)
    if table.variant is DialogVariant.AD1:
        reached = reachable_levels(table)
        if ExplanationLevel.HIGH in reached:
            # Report the first reachable edge into High, in enum order.
            for level in ExplanationLevel:
                if level is ExplanationLevel.HIGH or level not in reached:
                    continue
                for intent in QUESTION_INTENTS:
                    if table.entries[(level, intent)] is ExplanationLevel.HIGH:
                        return TableValidation(
                            False, "High is reachable under AD1", (level, intent)
                        )
    return TableValidation(True)


class TableConfigError(ValueError):
    """Raised for malformed or invalid transition-table configuration data."""


def tables_from_records(records: Iterable[Mapping]) -> dict[DialogVariant, TransitionTable]:
    """Build per-variant tables from {variant, from, intent, to} records.

    Every variant present must come out total and valid; duplicate cells are
    rejected rather than silently overwritten.
    """
    raw: dict[DialogVariant, dict[TransitionKey, ExplanationLevel]] = {}
    for i, record in enumerate(records):
        try:
            variant = DialogVariant(record["variant"])
            source = ExplanationLevel(record["from"])
            intent = Intent(record["intent"])
            target = ExplanationLevel(record["to"])
        except (KeyError, ValueError) as exc:
            raise TableConfigError(f"record {i}: {exc}") from exc
        if intent not in QUESTION_INTENTS:
            raise TableConfigError(f"record {i}: intent must be What or Why, got {intent.value}")
        cells = raw.setdefault(variant, {})
        if (source, intent) in cells:
            raise TableConfigError(
                f"record {i}: duplicate cell ({variant.value}, {source.value}, {intent.value})"
            )
        cells[(source, intent)] = target
    tables = {}
    for variant, cells in raw.items():
        table = TransitionTable(variant=variant, entries=cells)
        result = validate_table(table)
        if not result:
            raise TableConfigError(f"{variant.value}: {result.error} at {result.entry}")
        tables[variant] = table
    return tables


def load_tables(path: str | Path) -> dict[DialogVariant, TransitionTable]:
    """Load transition tables from a JSON record list on disk."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise TableConfigError("table config must be a list of records")
    return tables_from_records(data)
