"""Scripted user policies and the batch experiment harness.

A policy is a deterministic automaton standing in for a study participant: it
looks at the visible transcript plus a world summary and picks the next user
action. The batch runner drives n seeded sessions per configuration to
termination (or a turn cap) and aggregates resolution rates, turn counts, and
the distribution of explanation levels reached.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Union

from .explain import ErrorKind
from .levels import DialogVariant, ExplanationLevel, Intent
from .session import (
    DialogSession,
    EventKind,
    SessionMetrics,
    SessionStatus,
    TranscriptEvent,
    advance,
    create_session,
    handle_continue,
    handle_repair,
    handle_utterance,
    metrics,
)
from .sim import MoveCube, Position, RepairAction, SwapCube

DEFAULT_TURN_CAP = 50


@dataclass(frozen=True)
class Say:
    text: str


@dataclass(frozen=True)
class PressContinue:
    pass


@dataclass(frozen=True)
class DoRepair:
    action: RepairAction


PolicyAction = Union[Say, PressContinue, DoRepair]


@dataclass(frozen=True)
class SessionView:
    """What a scripted user can see: the transcript plus a world summary."""

    transcript: tuple[TranscriptEvent, ...]
    dialog_open: bool
    error_kind: ErrorKind | None
    errored_cube_id: int | None
    last_robot_text: str | None
    qr_codes: tuple[str, ...]
    reach_bounds: tuple[int, int, int, int]
    occupied: frozenset[Position]

    def since_last_error(self) -> tuple[TranscriptEvent, ...]:
        """Events after the most recent ErrorRaised (the current dialog's turn span)."""
        for i in range(len(self.transcript) - 1, -1, -1):
            if self.transcript[i].kind is EventKind.ERROR_RAISED:
                return self.transcript[i + 1:]
        return self.transcript

    def asked_intents(self) -> set[Intent]:
        return {
            Intent(e.payload["intent"])
            for e in self.since_last_error()
            if e.kind is EventKind.INTENT_CLASSIFIED
        }

    def repaired_since_error(self) -> bool:
        return any(e.kind is EventKind.REPAIR for e in self.since_last_error())

    def fallbacks_since_error(self) -> int:
        return sum(1 for e in self.since_last_error() if e.kind is EventKind.FALLBACK)


def build_view(session: DialogSession) -> SessionView:
    state = session.dialog_state
    last_text = None
    for event in reversed(session.transcript):
        if event.kind is EventKind.ROBOT_UTTERANCE:
            last_text = event.payload["text"]
            break
    occupied = frozenset(c.position for c in session.world.cubes if c.position is not None)
    reach = session.world.reach_region
    return SessionView(
        transcript=tuple(session.transcript),
        dialog_open=state is not None,
        error_kind=state.error if state else None,
        errored_cube_id=state.cube_id if state else None,
        last_robot_text=last_text,
        qr_codes=tuple(sorted(session.world.qr_database)),
        reach_bounds=(reach.x0, reach.y0, reach.x1, reach.y1),
        occupied=occupied,
    )


class ScriptedUserPolicy(Protocol):
    name: str

    def decide(self, view: SessionView) -> PolicyAction: ...


def _free_reach_cell(view: SessionView) -> Position:
    """The reach-region center, or the first free in-reach cell after it (row-major)."""
    x0, y0, x1, y1 = view.reach_bounds
    center = ((x0 + x1) // 2, (y0 + y1) // 2)
    if center not in view.occupied:
        return center
    for y in range(y0, y1 + 1):
        for x in range(x0, x1 + 1):
            if (x, y) not in view.occupied:
                return (x, y)
    return center


def _repair_from_remedy(view: SessionView) -> PolicyAction:
    """Follow the remedy clause of the robot's last utterance literally."""
    text = view.last_robot_text or ""
    cube_id = view.errored_cube_id
    if cube_id is None:
        return PressContinue()
    if "Swap" in text:
        return DoRepair(SwapCube(cube_id=cube_id, new_qr=view.qr_codes[0]))
    if "move it inside" in text:
        return DoRepair(MoveCube(cube_id=cube_id, new_position=_free_reach_cell(view)))
    return PressContinue()


class ContinueOnlyUser:
    """Always presses continue; never asks, never repairs."""

    name = "ContinueOnlyUser"

    def decide(self, view: SessionView) -> PolicyAction:
        return PressContinue()


class WhatWhyRepairUser:
    """Asks what, then why, repairs per the stated remedy, then continues."""

    name = "WhatWhyRepairUser"

    def decide(self, view: SessionView) -> PolicyAction:
        if not view.dialog_open:
            return PressContinue()
        asked = view.asked_intents()
        if Intent.WHAT not in asked:
            return Say("What is the error")
        if Intent.WHY not in asked:
            return Say("why has the error occurred")
        if not view.repaired_since_error():
            return _repair_from_remedy(view)
        return PressContinue()


class WhatOnlyUser:
    """Asks what once per error, then continues repeatedly; never repairs."""

    name = "WhatOnlyUser"

    def decide(self, view: SessionView) -> PolicyAction:
        if view.dialog_open and Intent.WHAT not in view.asked_intents():
            return Say("What is the error")
        return PressContinue()


class ChattyUser:
    """WhatWhyRepair flow with one out-of-scope remark before each question."""

    name = "ChattyUser"

    def decide(self, view: SessionView) -> PolicyAction:
        if not view.dialog_open:
            return PressContinue()
        asked = view.asked_intents()
        fallbacks = view.fallbacks_since_error()
        if Intent.WHAT not in asked:
            if fallbacks < 1:
                return Say("by the way nice weather today")
            return Say("What is the error")
        if Intent.WHY not in asked:
            if fallbacks < 2:
                return Say("also do you enjoy sorting")
            return Say("why has the error occurred")
        if not view.repaired_since_error():
            return _repair_from_remedy(view)
        return PressContinue()


BUILTIN_POLICIES: dict[str, type] = {
    policy.name: policy
    for policy in (ContinueOnlyUser, WhatWhyRepairUser, WhatOnlyUser, ChattyUser)
}


def make_policy(name: str) -> ScriptedUserPolicy:
    try:
        return BUILTIN_POLICIES[name]()
    except KeyError:
        raise ValueError(
            f"unknown policy {name!r}; known: {', '.join(sorted(BUILTIN_POLICIES))}"
        ) from None


def run_session(
    session: DialogSession,
    policy: ScriptedUserPolicy,
    turn_cap: int = DEFAULT_TURN_CAP,
) -> SessionMetrics:
    """Drive one session with a policy until it terminates or hits the cap."""
    if session.status is SessionStatus.RUNNING and not session.transcript:
        advance(session)
    actions = 0
    while session.status is SessionStatus.RUNNING:
        if actions >= turn_cap:
            session.status = SessionStatus.ABANDONED
            break
        action = policy.decide(build_view(session))
        if isinstance(action, Say):
            handle_utterance(session, action.text)
        elif isinstance(action, DoRepair):
            handle_repair(session, action.action)
        else:
            handle_continue(session)
        actions += 1
    return metrics(session)


@dataclass(frozen=True)
class BatchResult:
    variant: DialogVariant
    policy: str
    scenario: str
    n: int
    seeds: tuple[int, ...]
    resolution_rate: float
    mean_turns: float
    level_distribution: dict[str, int]
    per_session: tuple[SessionMetrics, ...]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "policy": self.policy,
            "scenario": self.scenario,
            "n": self.n,
            "seeds": list(self.seeds),
            "resolution_rate": self.resolution_rate,
            "mean_turns": self.mean_turns,
            "level_distribution": self.level_distribution,
            "per_session": [m.to_dict() for m in self.per_session],
        }

    def summary_line(self) -> str:
        dist = " ".join(f"{k}:{v}" for k, v in self.level_distribution.items() if v)
        return (f"{self.variant.value:4} {self.policy:20} {self.scenario:18} "
                f"n={self.n:<3} resolved={self.resolution_rate:.2f} "
                f"mean_turns={self.mean_turns:.1f} levels[{dist}]")


def run_batch(
    policy: ScriptedUserPolicy,
    variant: DialogVariant,
    scenario: Union[str, Mapping],
    n_sessions: int,
    seed: int,
    turn_cap: int = DEFAULT_TURN_CAP,
    overrides: Mapping | None = None,
    sessions_out: list[DialogSession] | None = None,
) -> BatchResult:
    """Run n independent seeded sessions (seeds seed..seed+n-1) and aggregate."""
    if n_sessions < 1:
        raise ValueError("n_sessions must be >= 1")
    seeds = tuple(range(seed, seed + n_sessions))
    results = []
    for s in seeds:
        sess = create_session(variant, scenario, s, **dict(overrides or {}))
        results.append(run_session(sess, policy, turn_cap=turn_cap))
        if sessions_out is not None:
            sessions_out.append(sess)
    resolution_rate = sum(1 for m in results if m.resolved) / n_sessions
    mean_turns = sum(m.user_turns for m in results) / n_sessions
    distribution = {
        level.value: sum(1 for m in results if level in m.levels_reached)
        for level in ExplanationLevel
    }
    scenario_name = scenario if isinstance(scenario, str) else str(
        scenario.get("builtin", "custom"))
    return BatchResult(
        variant=variant,
        policy=policy.name,
        scenario=scenario_name,
        n=n_sessions,
        seeds=seeds,
        resolution_rate=resolution_rate,
        mean_turns=mean_turns,
        level_distribution=distribution,
        per_session=tuple(results),
    )
