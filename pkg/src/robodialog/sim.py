"""Deterministic simulation of the collaborative cube-sorting task.

The robot repeatedly picks the unsorted cube nearest its origin, reads the
cube's QR code, and places it on the shelf the code maps to. Two failure
predicates stand in for the physical failure modes: a cube outside the
rectangular reach region ("the square") cannot be picked, and a QR code
missing from the database cannot be sorted. Geometry is an integer grid; no
kinematics. All operations are pure state -> state functions over immutable
values, so identical (scenario, seed, operation sequence) always produces an
identical world.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Union

from .explain import ErrorKind

Position = tuple[int, int]

ROBOT_ORIGIN: Position = (0, 0)


class SimError(Exception):
    """Base class for simulator contract violations."""


class ScenarioConfigError(SimError):
    """Scenario config violates a world invariant or is malformed."""


class RobotErroredError(SimError):
    """step_robot was called while the robot is in an error phase."""


class UnknownCubeError(SimError):
    """Repair targeted a cube id that does not exist."""


class CubeAlreadySortedError(SimError):
    """Repair targeted a cube that is already on a shelf."""


class BadDestinationError(SimError):
    """Move destination is outside the table or occupied."""


class PhaseKind(Enum):
    IDLE = "Idle"
    DETECTING = "Detecting"
    HOLDING = "Holding"
    ERRORED = "Errored"
    DONE = "Done"


@dataclass(frozen=True)
class RobotPhase:
    kind: PhaseKind
    cube_id: int | None = None
    error: ErrorKind | None = None

    @staticmethod
    def idle() -> "RobotPhase":
        return RobotPhase(PhaseKind.IDLE)

    @staticmethod
    def errored(error: ErrorKind, cube_id: int) -> "RobotPhase":
        return RobotPhase(PhaseKind.ERRORED, cube_id=cube_id, error=error)

    @staticmethod
    def done() -> "RobotPhase":
        return RobotPhase(PhaseKind.DONE)


@dataclass(frozen=True)
class Cube:
    """On the table (position set) xor on a shelf (shelf set)."""

    id: int
    qr: str
    position: Position | None
    shelf: str | None = None

    @property
    def sorted(self) -> bool:
        return self.shelf is not None


@dataclass(frozen=True)
class Rect:
    """Axis-aligned inclusive rectangle in grid coordinates."""

    x0: int
    y0: int
    x1: int
    y1: int

    def contains(self, pos: Position) -> bool:
        return self.x0 <= pos[0] <= self.x1 and self.y0 <= pos[1] <= self.y1

    @property
    def center(self) -> Position:
        return ((self.x0 + self.x1) // 2, (self.y0 + self.y1) // 2)


@dataclass(frozen=True)
class WorldState:
    table_extent: tuple[int, int]
    reach_region: Rect
    cubes: tuple[Cube, ...]
    shelves: tuple[str, str]
    qr_database: Mapping[str, str]
    robot_phase: RobotPhase
    rng_seed: int

    def cube(self, cube_id: int) -> Cube:
        for cube in self.cubes:
            if cube.id == cube_id:
                return cube
        raise UnknownCubeError(f"no cube with id {cube_id}")

    def on_table(self, pos: Position) -> bool:
        w, h = self.table_extent
        return 0 <= pos[0] < w and 0 <= pos[1] < h

    def in_reach(self, pos: Position) -> bool:
        return self.reach_region.contains(pos)

    def unsorted_cubes(self) -> list[Cube]:
        return [c for c in self.cubes if not c.sorted]

    def all_sorted(self) -> bool:
        return all(c.sorted for c in self.cubes)


@dataclass(frozen=True)
class SwapCube:
    cube_id: int
    new_qr: str


@dataclass(frozen=True)
class MoveCube:
    cube_id: int
    new_position: Position


RepairAction = Union[SwapCube, MoveCube]


@dataclass(frozen=True)
class Sorted:
    cube_id: int
    shelf: str


@dataclass(frozen=True)
class ErrorRaised:
    kind: ErrorKind
    cube_id: int


@dataclass(frozen=True)
class Done:
    pass


@dataclass(frozen=True)
class NoChange:
    pass


RobotOutcome = Union[Sorted, ErrorRaised, Done, NoChange]

BUILTIN_SCENARIOS = ("clean", "incorrect_item", "out_of_range", "both_random_order")

_BASE = {
    "table_extent": (8, 6),
    "reach_region": Rect(0, 0, 4, 4),
    "shelves": ("shelf1", "shelf2"),
    "qr_database": {"A1": "shelf1", "B2": "shelf2"},
}


def _builtin_cubes(name: str, seed: int) -> list[Cube]:
    if name == "clean":
        return [
            Cube(id=1, qr="A1", position=(1, 1)),
            Cube(id=2, qr="B2", position=(2, 2)),
        ]
    if name == "incorrect_item":
        return [Cube(id=1, qr="X9", position=(1, 1))]
    if name == "out_of_range":
        return [Cube(id=1, qr="A1", position=(6, 3))]
    if name == "both_random_order":
        # Cube 1 carries the unknown QR, cube 2 sits outside reach, cube 3 is
        # clean. The seed decides whether cube 1 is nearer than cube 2, which
        # fixes the order the robot encounters the two errors.
        incorrect_first = random.Random(seed).random() < 0.5
        incorrect_pos = (1, 1) if incorrect_first else (4, 4)
        return [
            Cube(id=1, qr="X9", position=incorrect_pos),
            Cube(id=2, qr="A1", position=(5, 0)),
            Cube(id=3, qr="B2", position=(2, 2)),
        ]
    raise ScenarioConfigError(f"unknown builtin scenario {name!r}")


def _validate_world(world: WorldState) -> WorldState:
    w, h = world.table_extent
    if w < 1 or h < 1:
        raise ScenarioConfigError("table extent must be at least 1x1")
    r = world.reach_region
    if not (0 <= r.x0 <= r.x1 < w and 0 <= r.y0 <= r.y1 < h):
        raise ScenarioConfigError("reach region must lie within the table extent")
    if len(world.shelves) != 2 or len(set(world.shelves)) != 2:
        raise ScenarioConfigError("exactly two distinct shelves required")
    for qr, shelf in world.qr_database.items():
        if shelf not in world.shelves:
            raise ScenarioConfigError(f"QR {qr!r} maps to unknown shelf {shelf!r}")
    ids = [c.id for c in world.cubes]
    if len(ids) != len(set(ids)):
        raise ScenarioConfigError("cube ids must be unique")
    positions = [c.position for c in world.cubes if c.position is not None]
    if len(positions) != len(set(positions)):
        raise ScenarioConfigError("cube positions must be pairwise distinct")
    for cube in world.cubes:
        if (cube.position is None) == (cube.shelf is None):
            raise ScenarioConfigError(f"cube {cube.id} must be on the table xor on a shelf")
        if cube.position is not None and not world.on_table(cube.position):
            raise ScenarioConfigError(f"cube {cube.id} position {cube.position} off the table")
        if cube.shelf is not None and cube.shelf not in world.shelves:
            raise ScenarioConfigError(f"cube {cube.id} on unknown shelf {cube.shelf!r}")
    return world


def new_world(scenario: Union[str, Mapping], seed: int) -> WorldState:
    """Build the initial world for a builtin scenario name or a config document."""
    if isinstance(scenario, str) or (isinstance(scenario, Mapping) and "builtin" in scenario):
        name = scenario if isinstance(scenario, str) else str(scenario["builtin"])
        if name not in BUILTIN_SCENARIOS:
            raise ScenarioConfigError(f"unknown builtin scenario {name!r}")
        world = WorldState(
            table_extent=_BASE["table_extent"],
            reach_region=_BASE["reach_region"],
            cubes=tuple(_builtin_cubes(name, seed)),
            shelves=_BASE["shelves"],
            qr_database=dict(_BASE["qr_database"]),
            robot_phase=RobotPhase.idle(),
            rng_seed=seed,
        )
        return _validate_world(world)
    if not isinstance(scenario, Mapping):
        raise ScenarioConfigError("scenario must be a builtin name or a config object")
    try:
        extent = tuple(int(v) for v in scenario["table_extent"])
        rx = [int(v) for v in scenario["reach_region"]]
        shelves = tuple(str(s) for s in scenario["shelves"])
        db = {str(k): str(v) for k, v in scenario["qr_database"].items()}
        cubes = tuple(
            Cube(id=int(c["id"]), qr=str(c["qr"]),
                 position=(int(c["position"][0]), int(c["position"][1])))
            for c in scenario["cubes"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioConfigError(f"malformed scenario config: {exc}") from exc
    if len(extent) != 2 or len(rx) != 4 or len(shelves) != 2:
        raise ScenarioConfigError("bad table_extent/reach_region/shelves shape")
    world = WorldState(
        table_extent=(extent[0], extent[1]),
        reach_region=Rect(rx[0], rx[1], rx[2], rx[3]),
        cubes=cubes,
        shelves=(shelves[0], shelves[1]),
        qr_database=db,
        robot_phase=RobotPhase.idle(),
        rng_seed=seed,
    )
    return _validate_world(world)


def _nearest_unsorted(world: WorldState) -> Cube | None:
    candidates = world.unsorted_cubes()
    if not candidates:
        return None
    ox, oy = ROBOT_ORIGIN

    def key(cube: Cube) -> tuple[int, int]:
        x, y = cube.position  # unsorted cubes are always on the table
        return ((x - ox) ** 2 + (y - oy) ** 2, cube.id)

    return min(candidates, key=key)


def _replace_cube(world: WorldState, cube: Cube) -> WorldState:
    cubes = tuple(cube if c.id == cube.id else c for c in world.cubes)
    return replace(world, cubes=cubes)


def step_robot(world: WorldState) -> tuple[WorldState, RobotOutcome]:
    """One robot work cycle: detect the nearest unsorted cube, then sort or error.

    Reach is checked before the QR code is read, so a cube that is both out of
    reach and unknown raises the out-of-range error.
    """
    if world.robot_phase.kind is PhaseKind.ERRORED:
        raise RobotErroredError("cannot step an errored robot; repair and continue first")
    target = _nearest_unsorted(world)
    if target is None:
        return replace(world, robot_phase=RobotPhase.done()), Done()
    if not world.in_reach(target.position):
        phase = RobotPhase.errored(ErrorKind.OUT_OF_RANGE, target.id)
        return replace(world, robot_phase=phase), ErrorRaised(ErrorKind.OUT_OF_RANGE, target.id)
    shelf = world.qr_database.get(target.qr)
    if shelf is None:
        phase = RobotPhase.errored(ErrorKind.INCORRECT_ITEM, target.id)
        return replace(world, robot_phase=phase), ErrorRaised(ErrorKind.INCORRECT_ITEM, target.id)
    sorted_cube = replace(target, position=None, shelf=shelf)
    world = _replace_cube(world, sorted_cube)
    world = replace(world, robot_phase=RobotPhase.idle())
    return world, Sorted(cube_id=target.id, shelf=shelf)


def apply_repair(world: WorldState, action: RepairAction) -> WorldState:
    """Apply a user repair; resets an error phase only for the erroring cube."""
    cube = world.cube(action.cube_id)
    if cube.sorted:
        raise CubeAlreadySortedError(f"cube {cube.id} is already sorted")
    if isinstance(action, SwapCube):
        world = _replace_cube(world, replace(cube, qr=action.new_qr))
    elif isinstance(action, MoveCube):
        dest = (int(action.new_position[0]), int(action.new_position[1]))
        if not world.on_table(dest):
            raise BadDestinationError(f"{dest} is outside the table")
        for other in world.cubes:
            if other.id != cube.id and other.position == dest:
                raise BadDestinationError(f"{dest} is occupied by cube {other.id}")
        world = _replace_cube(world, replace(cube, position=dest))
    else:
        raise SimError(f"unknown repair action {action!r}")
    phase = world.robot_phase
    if phase.kind is PhaseKind.ERRORED and phase.cube_id == action.cube_id:
        world = replace(world, robot_phase=RobotPhase.idle())
    return world


def shelf_for(qr: str, world: WorldState) -> str | None:
    """Database lookup; None signals the incorrect-item condition."""
    return world.qr_database.get(qr)


def world_to_dict(world: WorldState) -> dict:
    """Canonical serialization: stable field and element order."""
    shelf_contents = {
        shelf: [c.id for c in world.cubes if c.shelf == shelf] for shelf in world.shelves
    }
    phase = world.robot_phase
    return {
        "table_extent": list(world.table_extent),
        "reach_region": [world.reach_region.x0, world.reach_region.y0,
                         world.reach_region.x1, world.reach_region.y1],
        "shelves": shelf_contents,
        "qr_database": {qr: world.qr_database[qr] for qr in sorted(world.qr_database)},
        "cubes": [
            {
                "id": c.id,
                "qr": c.qr,
                "position": list(c.position) if c.position is not None else None,
                "shelf": c.shelf,
                "sorted": c.sorted,
            }
            for c in sorted(world.cubes, key=lambda c: c.id)
        ],
        "robot_phase": {
            "kind": phase.kind.value,
            "cube_id": phase.cube_id,
            "error": phase.error.value if phase.error else None,
        },
        "rng_seed": world.rng_seed,
    }


def world_from_dict(data: Mapping) -> WorldState:
    rx = data["reach_region"]
    phase_data = data["robot_phase"]
    phase = RobotPhase(
        kind=PhaseKind(phase_data["kind"]),
        cube_id=phase_data.get("cube_id"),
        error=ErrorKind(phase_data["error"]) if phase_data.get("error") else None,
    )
    cubes = tuple(
        Cube(
            id=int(c["id"]),
            qr=str(c["qr"]),
            position=tuple(c["position"]) if c.get("position") is not None else None,
            shelf=c.get("shelf"),
        )
        for c in data["cubes"]
    )
    shelves = tuple(data["shelves"].keys())
    return WorldState(
        table_extent=tuple(data["table_extent"]),
        reach_region=Rect(rx[0], rx[1], rx[2], rx[3]),
        cubes=cubes,
        shelves=(shelves[0], shelves[1]),
        qr_database=dict(data["qr_database"]),
        robot_phase=phase,
        rng_seed=int(data["rng_seed"]),
    )


def canonical_world_json(world: WorldState) -> str:
    return json.dumps(world_to_dict(world), separators=(",", ":"), ensure_ascii=False)


def load_scenario(path: str | Path) -> dict:
    """Load a scenario config document from disk."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ScenarioConfigError("scenario config must be an object")
    return data
