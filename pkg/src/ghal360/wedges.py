"""Wedge abstraction shared by every layer of the simulator.

The robot's 360-degree horizontal view is split into eight 45-degree
wedges, indexed 0..7 counterclockwise in the robot frame.  Wedge 0 is
centered on the robot's forward axis (it covers -22.5 to +22.5 degrees).
"Left" always means counterclockwise: a left look increments the focused
wedge index by one (mod 8).
"""

from __future__ import annotations

import math
from enum import Enum, IntEnum

NUM_WEDGES = 8
NUM_WEDGE_VALUES = 4
NUM_STATES = NUM_WEDGE_VALUES**NUM_WEDGES  # 65536
NUM_ACTIONS = 3
WEDGE_SPAN = 2.0 * math.pi / NUM_WEDGES


class WedgeValue(IntEnum):
    """Content class of a single wedge."""

    EMPTY = 0
    CLUTTER = 1
    TARGET = 2
    TARGET_CLUTTER = 3

    @property
    def contains_target(self) -> bool:
        return self in (WedgeValue.TARGET, WedgeValue.TARGET_CLUTTER)

    @property
    def contains_clutter(self) -> bool:
        return self in (WedgeValue.CLUTTER, WedgeValue.TARGET_CLUTTER)


class GuidanceAction(IntEnum):
    """Guidance decision shown to (or about) the human operator.

    Integer values fix the action axis order of Q tables and the
    documented argmax tie order (confirm < left < right).
    """

    CONFIRM = 0
    LEFT = 1
    RIGHT = 2


class Rotation(str, Enum):
    """Rotation sense around the wedge ring."""

    NONE = "none"
    LEFT = "left"
    RIGHT = "right"
    TIE = "tie"


# A full scene description: one WedgeValue per wedge.  The same tuple shape
# is used in two frames; functions say which one they expect:
#   WedgeVector -- robot frame, index 0 is the robot-forward wedge.
#   EgoState    -- egocentric, index 0 is the wedge the human focuses on,
#                  index k is k wedges counterclockwise from the focus.
Wedges = tuple[WedgeValue, ...]
WedgeVector = Wedges
EgoState = Wedges


def as_wedges(values) -> Wedges:
    """Validate and normalize an 8-element wedge description."""
    vals = tuple(WedgeValue(v) for v in values)
    if len(vals) != NUM_WEDGES:
        raise ValueError(f"expected {NUM_WEDGES} wedge values, got {len(vals)}")
    return vals


def uniform_wedges(value: WedgeValue = WedgeValue.EMPTY) -> Wedges:
    return (WedgeValue(value),) * NUM_WEDGES


def rotate_wedges(v: Wedges, k: int) -> Wedges:
    """Rotate so that result[i] = v[(i + k) mod 8].

    k=+1 is what a single left (counterclockwise) look does to an
    egocentric state: every wedge slides one slot toward index 0.
    """
    k %= NUM_WEDGES
    return v[k:] + v[:k]


def mirror_wedges(v: Wedges) -> Wedges:
    """Reflect left/right around the index-0 axis: result[k] = v[-k mod 8]."""
    return (v[0],) + v[:0:-1]


def to_egocentric(v: WedgeVector, focus: int) -> EgoState:
    """Re-index a robot-frame vector relative to the focused wedge."""
    if not 0 <= focus < NUM_WEDGES:
        raise ValueError(f"focus index {focus} out of [0, {NUM_WEDGES})")
    return rotate_wedges(v, focus)


def encode_state(s: EgoState) -> int:
    """Base-4 positional encoding of an egocentric state.

    The focus wedge (index 0) is the least significant digit; the result
    lies in [0, 65536).  Bijective with :func:`decode_state`.
    """
    index = 0
    for k in range(NUM_WEDGES - 1, -1, -1):
        index = index * NUM_WEDGE_VALUES + int(s[k])
    return index


def decode_state(index: int) -> EgoState:
    """Inverse of :func:`encode_state`."""
    if not 0 <= index < NUM_STATES:
        raise ValueError(f"state index {index} out of [0, {NUM_STATES})")
    digits = []
    for _ in range(NUM_WEDGES):
        digits.append(WedgeValue(index % NUM_WEDGE_VALUES))
        index //= NUM_WEDGE_VALUES
    return tuple(digits)


def circular_distance(a: int, b: int) -> tuple[int, Rotation]:
    """Ring distance between two wedge indices and the shorter rotation sense.

    Returns (distance in [0, 4], direction), where direction is the sense
    that moves a onto b in `distance` steps: NONE when a == b, TIE when the
    wedges are antipodal, otherwise LEFT/RIGHT.
    """
    if not (0 <= a < NUM_WEDGES and 0 <= b < NUM_WEDGES):
        raise ValueError(f"wedge indices must be in [0, {NUM_WEDGES}): got {a}, {b}")
    ccw = (b - a) % NUM_WEDGES  # left steps taking a to b
    cw = (a - b) % NUM_WEDGES
    if ccw == 0:
        return 0, Rotation.NONE
    if ccw == cw:
        return ccw, Rotation.TIE
    if ccw < cw:
        return ccw, Rotation.LEFT
    return cw, Rotation.RIGHT


def wedge_of_bearing(angle: float) -> int:
    """Map a robot-frame bearing (radians, counterclockwise) to a wedge index.

    Wedge 0 covers [-pi/8, pi/8); the function is 2*pi periodic.
    """
    if not math.isfinite(angle):
        raise ValueError(f"bearing must be finite, got {angle!r}")
    shifted = (angle + WEDGE_SPAN / 2.0) % (2.0 * math.pi)
    return int(shifted // WEDGE_SPAN) % NUM_WEDGES
