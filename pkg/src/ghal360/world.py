"""Grid world, map files, simulated 360-degree detection, virtual human.

Grid frame: row 0 at the top, columns increasing rightward.  Headings are
45-degree quantized, h=0 pointing east (+col) and increasing
counterclockwise, so the heading unit vectors in (row, col) terms are::

    h: 0      1       2       3       4      5      6     7
       (0,1)  (-1,1)  (-1,0)  (-1,-1) (0,-1) (1,-1) (1,0) (1,1)

A bearing seen from a robot at heading h is ``atan2(-drow, dcol) - h*pi/4``;
quantized to wedges this becomes ``(world_wedge - h) mod 8``, which is how
the detection model maps precomputed world-frame wedges into robot frame.

Map file grammar: a rectangular character grid ('#' blocked, '.' free,
'R' free cell marking the default robot start, exactly one), a line
containing only ``---``, then a YAML document::

    target: mug
    cell_size_m: 0.5        # optional, default 0.5
    objects:
      - [mug, 2, 11]        # name, row, col
      - [chair, 5, 3]

Object names may repeat except the target's, which must occur exactly once.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from .wedges import (
    NUM_WEDGES,
    GuidanceAction,
    WedgeValue,
    Wedges,
    wedge_of_bearing,
)

Cell = tuple[int, int]

HEADING_VECTORS: tuple[Cell, ...] = (
    (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1),
)

DEFAULT_CELL_SIZE_M = 0.5


class ControlCommand(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    ROTATE_LEFT = "rotate_left"
    ROTATE_RIGHT = "rotate_right"
    STOP = "stop"


class HumanMove(str, Enum):
    LOOK_LEFT = "look_left"
    LOOK_RIGHT = "look_right"
    MOVE_FORWARD = "move_forward"
    MOVE_BACKWARD = "move_backward"


HUMAN_MOVES: tuple[HumanMove, ...] = (
    HumanMove.LOOK_LEFT,
    HumanMove.LOOK_RIGHT,
    HumanMove.MOVE_FORWARD,
    HumanMove.MOVE_BACKWARD,
)


class HeadMotion(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    NONE = "none"


@dataclass(frozen=True)
class MapObject:
    name: str
    cell: Cell


@dataclass(frozen=True)
class RobotPose:
    cell: Cell
    heading: int

    def __post_init__(self) -> None:
        if not 0 <= self.heading < NUM_WEDGES:
            raise ValueError(f"heading must be in [0, 8), got {self.heading}")


@dataclass(frozen=True)
class HumanState:
    focus: int = 0
    last_motion: HeadMotion = HeadMotion.NONE

    def __post_init__(self) -> None:
        if not 0 <= self.focus < NUM_WEDGES:
            raise ValueError(f"focus must be in [0, 8), got {self.focus}")


class MapError(ValueError):
    pass


@dataclass(frozen=True)
class World:
    walls: np.ndarray  # bool (H, W), True = blocked
    robot_start: Cell
    objects: tuple[MapObject, ...]
    target_name: str
    cell_size_m: float = DEFAULT_CELL_SIZE_M
    name: str = "world"

    @property
    def height(self) -> int:
        return int(self.walls.shape[0])

    @property
    def width(self) -> int:
        return int(self.walls.shape[1])

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and not bool(self.walls[cell])

    @property
    def target(self) -> MapObject:
        return next(o for o in self.objects if o.name == self.target_name)

    @cached_property
    def detection_model(self) -> "DetectionModel":
        return DetectionModel(self)


def parse_map(text: str, name: str = "world") -> World:
    if "\n---\n" in text:
        grid_text, meta_text = text.split("\n---\n", 1)
    else:
        raise MapError("missing '---' separator between grid and metadata")
    rows = [line for line in grid_text.splitlines() if line.strip()]
    if not rows:
        raise MapError("empty grid")
    width = len(rows[0])
    starts: list[Cell] = []
    for r, line in enumerate(rows):
        if len(line) != width:
            raise MapError(f"ragged grid: row {r} has length {len(line)}, expected {width}")
        for c, ch in enumerate(line):
            if ch == "R":
                starts.append((r, c))
            elif ch not in "#.":
                raise MapError(f"unknown grid character {ch!r} at ({r}, {c})")
    if len(starts) != 1:
        raise MapError(f"expected exactly one 'R' start cell, found {len(starts)}")
    walls = np.array([[ch == "#" for ch in line] for line in rows], dtype=bool)

    try:
        meta = yaml.safe_load(meta_text) or {}
    except yaml.YAMLError as exc:
        raise MapError(f"bad metadata: {exc}") from exc
    if not isinstance(meta, dict):
        raise MapError("metadata must be a mapping")
    if "target" not in meta:
        raise MapError("metadata must name a target")
    target_name = str(meta["target"])
    cell_size = float(meta.get("cell_size_m", DEFAULT_CELL_SIZE_M))
    if cell_size <= 0:
        raise MapError(f"cell_size_m must be positive, got {cell_size}")

    objects: list[MapObject] = []
    for entry in meta.get("objects", []) or []:
        if not (isinstance(entry, (list, tuple)) and len(entry) == 3):
            raise MapError(f"object entries must be [name, row, col], got {entry!r}")
        obj = MapObject(str(entry[0]), (int(entry[1]), int(entry[2])))
        r, c = obj.cell
        if not (0 <= r < walls.shape[0] and 0 <= c < walls.shape[1]):
            raise MapError(f"object {obj.name!r} at ({r}, {c}) is out of bounds")
        if walls[r, c]:
            raise MapError(f"object {obj.name!r} at ({r}, {c}) sits on a blocked cell")
        objects.append(obj)

    n_targets = sum(1 for o in objects if o.name == target_name)
    if n_targets == 0:
        raise MapError(f"target {target_name!r} not among the placed objects")
    if n_targets > 1:
        raise MapError(f"target {target_name!r} placed {n_targets} times; it must be unique")

    return World(
        walls=walls,
        robot_start=starts[0],
        objects=tuple(objects),
        target_name=target_name,
        cell_size_m=cell_size,
        name=name,
    )


def load_map(path: str | Path) -> World:
    p = Path(path)
    return parse_map(p.read_text(encoding="utf-8"), name=p.stem)


def step_robot(world: World, pose: RobotPose, command: ControlCommand) -> RobotPose:
    """One-cell translation or 45-degree rotation; blocked moves keep the pose."""
    if command is ControlCommand.STOP:
        return pose
    if command is ControlCommand.ROTATE_LEFT:
        return replace(pose, heading=(pose.heading + 1) % NUM_WEDGES)
    if command is ControlCommand.ROTATE_RIGHT:
        return replace(pose, heading=(pose.heading - 1) % NUM_WEDGES)
    dr, dc = HEADING_VECTORS[pose.heading]
    if command is ControlCommand.BACKWARD:
        dr, dc = -dr, -dc
    dest = (pose.cell[0] + dr, pose.cell[1] + dc)
    if world.is_free(dest):
        return replace(pose, cell=dest)
    return pose


def apply_human_move(h: HumanState, move: HumanMove) -> tuple[HumanState, ControlCommand | None]:
    """Look moves steer the focus; move moves emit a base command."""
    if move is HumanMove.LOOK_LEFT:
        return HumanState((h.focus + 1) % NUM_WEDGES, HeadMotion.LEFT), None
    if move is HumanMove.LOOK_RIGHT:
        return HumanState((h.focus - 1) % NUM_WEDGES, HeadMotion.RIGHT), None
    if move is HumanMove.MOVE_FORWARD:
        return HumanState(h.focus, HeadMotion.NONE), ControlCommand.FORWARD
    return HumanState(h.focus, HeadMotion.NONE), ControlCommand.BACKWARD


@dataclass(frozen=True)
class HumanConfig:
    p_follow: float = 0.95

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_follow <= 1.0:
            raise ValueError(f"p_follow must be in [0, 1], got {self.p_follow}")


def virtual_human_step(
    indicator: GuidanceAction | None,
    cfg: HumanConfig,
    rng: np.random.Generator,
) -> HumanMove:
    """Sample the human's next move.

    With a left/right indicator the human follows it with ``p_follow`` and
    otherwise picks uniformly among all four moves; with no indicator every
    move is equally likely.  Confirm is not a steerable indication.
    """
    if indicator is GuidanceAction.CONFIRM:
        raise ValueError("confirm cannot be handed to the virtual human")
    if indicator is not None and rng.random() < cfg.p_follow:
        return HumanMove.LOOK_LEFT if indicator is GuidanceAction.LEFT else HumanMove.LOOK_RIGHT
    return HUMAN_MOVES[int(rng.integers(len(HUMAN_MOVES)))]


@dataclass(frozen=True)
class DetectorConfig:
    range_m: float = 6.0
    p_false_negative: float = 0.05
    p_false_positive: float = 0.05

    def __post_init__(self) -> None:
        if self.range_m <= 0:
            raise ValueError(f"range_m must be positive, got {self.range_m}")
        for name in ("p_false_negative", "p_false_positive"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


def line_of_sight(walls: np.ndarray, a: Cell, b: Cell) -> bool:
    """Unobstructed straight line between cell centers; endpoints never occlude.

    Endpoints are ordered canonically before the grid walk so visibility is
    symmetric by construction.
    """
    if a == b:
        return True
    if b < a:
        a, b = b, a
    # Amanatides-Woo traversal between cell centers; on exact corner
    # crossings both axes advance, so corner-touching walls do not occlude.
    r, c = a
    rb, cb = b
    dr, dc = rb - r, cb - c
    step_r = 1 if dr > 0 else -1 if dr < 0 else 0
    step_c = 1 if dc > 0 else -1 if dc < 0 else 0
    t_max_r = math.inf if dr == 0 else 0.5 / abs(dr)
    t_max_c = math.inf if dc == 0 else 0.5 / abs(dc)
    t_delta_r = math.inf if dr == 0 else 1.0 / abs(dr)
    t_delta_c = math.inf if dc == 0 else 1.0 / abs(dc)
    while (r, c) != (rb, cb):
        if math.isclose(t_max_r, t_max_c):
            r += step_r
            c += step_c
            t_max_r += t_delta_r
            t_max_c += t_delta_c
        elif t_max_r < t_max_c:
            r += step_r
            t_max_r += t_delta_r
        else:
            c += step_c
            t_max_c += t_delta_c
        if (r, c) != (rb, cb) and walls[r, c]:
            return False
    return True


@dataclass(frozen=True)
class WedgeDetection:
    """One wedge of a detailed detection: value plus the object names in it.

    Phantom clutter injected by detector noise is labeled ``"?"``.
    """

    value: WedgeValue
    labels: tuple[str, ...] = ()


class DetectionModel:
    """Per-world precomputation making detect() O(objects) per call.

    For every object and every cell the model caches straight-line
    visibility, the world-frame wedge of the object as seen from the cell,
    and the center distance in meters.  All of this is independent of the
    detector config; range and noise apply at detect time.
    """

    def __init__(self, world: World):
        self.world = world
        h, w = world.walls.shape
        n = len(world.objects)
        self.visible = np.zeros((n, h, w), dtype=bool)
        self.world_wedge = np.zeros((n, h, w), dtype=np.int8)
        self.dist_m = np.zeros((n, h, w), dtype=float)
        rows, cols = np.indices((h, w))
        for k, obj in enumerate(world.objects):
            orow, ocol = obj.cell
            drow = (orow - rows).astype(float)
            dcol = (ocol - cols).astype(float)
            self.dist_m[k] = np.hypot(drow, dcol) * world.cell_size_m
            bearing = np.arctan2(-drow, dcol)
            for r in range(h):
                for c in range(w):
                    if world.walls[r, c]:
                        continue
                    if (r, c) == obj.cell:
                        self.world_wedge[k, r, c] = 0
                        self.visible[k, r, c] = True
                        continue
                    self.world_wedge[k, r, c] = wedge_of_bearing(float(bearing[r, c]))
                    self.visible[k, r, c] = line_of_sight(world.walls, (r, c), obj.cell)

    def detect_detailed(
        self,
        pose: RobotPose,
        cfg: DetectorConfig,
        rng: np.random.Generator | None,
    ) -> tuple[WedgeDetection, ...]:
        """Noisy wedge classification with object labels.

        Draw order is part of the determinism contract: one false-negative
        draw per visible in-range object in placement order, then one
        false-positive draw per still-empty wedge in index order.  Passing
        ``rng=None`` disables noise entirely.
        """
        r, c = pose.cell
        values = [WedgeValue.EMPTY] * NUM_WEDGES
        labels: list[list[str]] = [[] for _ in range(NUM_WEDGES)]
        for k, obj in enumerate(self.world.objects):
            if not self.visible[k, r, c] or self.dist_m[k, r, c] > cfg.range_m:
                continue
            if rng is not None and rng.random() < cfg.p_false_negative:
                continue
            wedge = (int(self.world_wedge[k, r, c]) - pose.heading) % NUM_WEDGES
            is_target = obj.name == self.world.target_name
            v = values[wedge]
            if is_target:
                v = WedgeValue.TARGET_CLUTTER if v.contains_clutter else WedgeValue.TARGET
            else:
                v = WedgeValue.TARGET_CLUTTER if v.contains_target else WedgeValue.CLUTTER
            values[wedge] = v
            labels[wedge].append(obj.name)
        if rng is not None and cfg.p_false_positive > 0.0:
            for wedge in range(NUM_WEDGES):
                if values[wedge] is WedgeValue.EMPTY and rng.random() < cfg.p_false_positive:
                    values[wedge] = WedgeValue.CLUTTER
                    labels[wedge].append("?")
        return tuple(WedgeDetection(v, tuple(ls)) for v, ls in zip(values, labels))

    def detect(
        self,
        pose: RobotPose,
        cfg: DetectorConfig,
        rng: np.random.Generator | None,
    ) -> Wedges:
        return tuple(d.value for d in self.detect_detailed(pose, cfg, rng))

    def noise_free(self, pose: RobotPose, cfg: DetectorConfig) -> Wedges:
        return self.detect(pose, cfg, None)


def detect(
    world: World,
    pose: RobotPose,
    cfg: DetectorConfig,
    rng: np.random.Generator | None,
) -> Wedges:
    return world.detection_model.detect(pose, cfg, rng)


def target_in_focus(
    world: World, pose: RobotPose, human: HumanState, cfg: DetectorConfig
) -> bool:
    """Ground truth: does noise-free detection put the target in the focus wedge?"""
    return world.detection_model.noise_free(pose, cfg)[human.focus].contains_target


def geodesic_distances(world: World, source: Cell) -> np.ndarray:
    """Shortest free-cell path length in meters from ``source`` to every cell.

    8-connected moves, diagonal cost sqrt(2); blocked or unreachable cells
    get +inf.
    """
    if not world.is_free(source):
        raise ValueError(f"source cell {source} is not free")
    dist = np.full(world.walls.shape, np.inf)
    dist[source] = 0.0
    queue: list[tuple[float, Cell]] = [(0.0, source)]
    while queue:
        d, (r, c) = heapq.heappop(queue)
        if d > dist[r, c]:
            continue
        for dr, dc in HEADING_VECTORS:
            nxt = (r + dr, c + dc)
            if not world.is_free(nxt):
                continue
            nd = d + (math.sqrt(2.0) if dr and dc else 1.0)
            if nd < dist[nxt]:
                dist[nxt] = nd
                heapq.heappush(queue, (nd, nxt))
    return dist * world.cell_size_m
