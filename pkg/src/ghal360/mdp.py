"""Abstract attention-guidance MDP used to train the guidance policy.

States are egocentric 8-wedge scenes; actions are left/right guidance
indicators plus confirm.  Guidance moves the human's focus one wedge in
the indicated direction with probability ``p_comply``; otherwise the human
looks around at random (one wedge in a uniformly random direction).
Confirm is deterministic and ends the episode.

Rewards depend on the wedge value the focus lands on:

    confirm, landing has target      -> +250
    confirm, landing has no target   -> -250
    left/right, landing w0 or w2     -> -3
    left/right, landing w1 or w3     -> -15
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .wedges import (
    NUM_STATES,
    NUM_WEDGES,
    EgoState,
    GuidanceAction,
    WedgeValue,
    rotate_wedges,
)

if TYPE_CHECKING:
    from .learning import QTable


@dataclass(frozen=True)
class MdpConfig:
    p_comply: float = 0.8
    r_confirm_hit: float = 250.0
    r_confirm_miss: float = -250.0
    c_small: float = -3.0
    c_large: float = -15.0
    max_steps: int = 100

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_comply <= 1.0:
            raise ValueError(f"p_comply must be in [0, 1], got {self.p_comply}")
        if not self.r_confirm_hit > 0.0 > self.r_confirm_miss:
            raise ValueError("confirm rewards must straddle zero")
        if not self.c_large < self.c_small < 0.0:
            raise ValueError("move costs must satisfy c_large < c_small < 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Initial-state distribution for training and evaluation episodes.

    ``n_clutter_wedges`` counts cluttered wedges among the seven non-target
    ones; None draws the count uniformly from [0, 7] per episode, and a
    tuple draws uniformly from its entries (repeats allowed, so a multiset
    acts as a weighting).  ``target_coincides_clutter`` selects w3 vs w2
    for the target wedge; None flips a fair coin per episode.
    """

    n_clutter_wedges: int | tuple[int, ...] | None = None
    target_coincides_clutter: bool | None = None

    @classmethod
    def pattern_uniform(cls, max_clutter: int = 3) -> "ScenarioConfig":
        """Scenario drawing every clutter pattern of size <= max_clutter
        with equal probability.

        Weighting the count draw by the number of patterns of that size
        gives each of the sum(C(7, k)) subsets the same chance, so the
        rarely-hit larger patterns are started as often as the common
        small ones.  Capping the size at 3 matches what closed-loop
        detections actually produce (a handful of nearby objects plus an
        occasional phantom) and concentrates training on the states the
        guidance policy is consulted in.
        """
        counts = tuple(k for k in range(max_clutter + 1) for _ in range(math.comb(NUM_WEDGES - 1, k)))
        return cls(n_clutter_wedges=counts)

    def __post_init__(self) -> None:
        counts = self.n_clutter_wedges
        if counts is None:
            return
        if isinstance(counts, tuple):
            if not counts:
                raise ValueError("n_clutter_wedges tuple must be non-empty")
        else:
            counts = (counts,)
        for k in counts:
            if not 0 <= k <= NUM_WEDGES - 1:
                raise ValueError(f"n_clutter_wedges must be in [0, 7], got {k}")


@dataclass(frozen=True)
class StepOutcome:
    next_state: EgoState
    reward: float
    terminal: bool


def initial_state(cfg: ScenarioConfig, rng: np.random.Generator) -> EgoState:
    """Sample an episode start: exactly one target wedge, uniform clutter.

    The human focus is at ego index 0 by construction.  Draw order is part
    of the reproducibility contract: clutter count, coincidence flag,
    target position, then the clutter subset.
    """
    n_clutter = cfg.n_clutter_wedges
    if n_clutter is None:
        n_clutter = int(rng.integers(NUM_WEDGES))
    elif isinstance(n_clutter, tuple):
        n_clutter = n_clutter[int(rng.integers(len(n_clutter)))]
    coincide = cfg.target_coincides_clutter
    if coincide is None:
        coincide = bool(rng.random() < 0.5)
    target_pos = int(rng.integers(NUM_WEDGES))
    others = [k for k in range(NUM_WEDGES) if k != target_pos]
    clutter_positions = rng.choice(len(others), size=n_clutter, replace=False)

    values = [WedgeValue.EMPTY] * NUM_WEDGES
    values[target_pos] = WedgeValue.TARGET_CLUTTER if coincide else WedgeValue.TARGET
    for j in clutter_positions:
        values[others[int(j)]] = WedgeValue.CLUTTER
    return tuple(values)


def transition(
    s: EgoState, a: GuidanceAction, cfg: MdpConfig, rng: np.random.Generator
) -> EgoState:
    """Sample the next egocentric state."""
    if a is GuidanceAction.CONFIRM:
        return s
    indicated_left = a is GuidanceAction.LEFT
    if rng.random() < cfg.p_comply:
        go_left = indicated_left
    else:
        go_left = bool(rng.random() < 0.5)
    return rotate_wedges(s, 1 if go_left else -1)


def reward(s: EgoState, a: GuidanceAction, s_next: EgoState, cfg: MdpConfig) -> float:
    """Reward for the realized transition, driven by the landing focus wedge."""
    landing = s_next[0]
    if a is GuidanceAction.CONFIRM:
        return cfg.r_confirm_hit if landing.contains_target else cfg.r_confirm_miss
    return cfg.c_large if landing.contains_clutter else cfg.c_small


def step(
    s: EgoState, a: GuidanceAction, cfg: MdpConfig, rng: np.random.Generator
) -> StepOutcome:
    s_next = transition(s, a, cfg, rng)
    return StepOutcome(s_next, reward(s, a, s_next, cfg), a is GuidanceAction.CONFIRM)


class IndexModel(NamedTuple):
    """Vectorized dynamics over encoded state indices.

    ``left[i]`` / ``right[i]`` are the landing indices of a left/right focus
    shift, ``move_reward[i]`` the left/right landing reward at state i, and
    ``confirm_reward[i]`` the confirm reward.  Must agree pointwise with the
    tuple-level transition/reward functions (tested exhaustively).
    """

    left: np.ndarray
    right: np.ndarray
    move_reward: np.ndarray
    confirm_reward: np.ndarray
    p_intended: float


def index_model(cfg: MdpConfig) -> IndexModel:
    idx = np.arange(NUM_STATES, dtype=np.int64)
    low = idx % 4  # focus-wedge digit
    high = NUM_STATES // 4
    # Base-4 digit rotations: left shifts digits down, right shifts them up.
    left = idx // 4 + low * high
    right = (idx % high) * 4 + idx // high
    landing = idx % 4
    move_reward = np.where((landing == 1) | (landing == 3), cfg.c_large, cfg.c_small)
    confirm_reward = np.where(landing >= 2, cfg.r_confirm_hit, cfg.r_confirm_miss)
    # Non-compliance splits evenly between the two rotation senses.
    p_intended = cfg.p_comply + (1.0 - cfg.p_comply) / 2.0
    return IndexModel(left, right, move_reward, confirm_reward, p_intended)


def solve_value_iteration(
    cfg: MdpConfig,
    gamma: float = 0.95,
    tol: float = 1e-9,
    max_iterations: int = 100_000,
) -> "QTable":
    """Exact Bellman-optimal action values for every state.

    Independent of the Q-learning path: sweeps the full transition model
    until the value function moves less than ``tol``.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    model = index_model(cfg)
    p, q = model.p_intended, 1.0 - model.p_intended
    v = np.zeros(NUM_STATES)
    for _ in range(max_iterations):
        backup_left = model.move_reward[model.left] + gamma * v[model.left]
        backup_right = model.move_reward[model.right] + gamma * v[model.right]
        q_left = p * backup_left + q * backup_right
        q_right = p * backup_right + q * backup_left
        v_new = np.maximum(model.confirm_reward, np.maximum(q_left, q_right))
        delta = float(np.max(np.abs(v_new - v)))
        v = v_new
        if delta < tol:
            break
    else:
        raise RuntimeError(
            f"value iteration did not reach tol={tol} within {max_iterations} sweeps"
        )
    backup_left = model.move_reward[model.left] + gamma * v[model.left]
    backup_right = model.move_reward[model.right] + gamma * v[model.right]
    values = np.stack(
        [
            model.confirm_reward.astype(float),
            p * backup_left + q * backup_right,
            p * backup_right + q * backup_left,
        ],
        axis=1,
    )
    from .learning import QTable

    return QTable(values=values, visit_counts=np.zeros_like(values, dtype=np.int64))


def enumerate_single_target_states(cfg: ScenarioConfig | None = None) -> np.ndarray:
    """Indices of every state the scenario generator can reach.

    This is the closure of the generator's support under focus rotations:
    8 target positions x the allowed target flavors x all clutter subsets
    of the remaining seven wedges whose size the scenario permits.  The
    default scenario reaches all 2048 single-target states.
    """
    if cfg is None:
        cfg = ScenarioConfig()
    counts = cfg.n_clutter_wedges
    if counts is None:
        allowed_counts = set(range(NUM_WEDGES))
    elif isinstance(counts, tuple):
        allowed_counts = set(counts)
    else:
        allowed_counts = {counts}
    if cfg.target_coincides_clutter is None:
        flavors = (WedgeValue.TARGET, WedgeValue.TARGET_CLUTTER)
    elif cfg.target_coincides_clutter:
        flavors = (WedgeValue.TARGET_CLUTTER,)
    else:
        flavors = (WedgeValue.TARGET,)

    states = []
    for target_pos in range(NUM_WEDGES):
        for target_val in flavors:
            for mask in range(2 ** (NUM_WEDGES - 1)):
                if bin(mask).count("1") not in allowed_counts:
                    continue
                digits = []
                bit = 0
                for k in range(NUM_WEDGES):
                    if k == target_pos:
                        digits.append(int(target_val))
                    else:
                        digits.append((mask >> bit) & 1)
                        bit += 1
                index = 0
                for d in reversed(digits):
                    index = index * 4 + d
                states.append(index)
    return np.array(sorted(states), dtype=np.int64)


def mirror_state_index(index: int) -> int:
    """Encoded-state counterpart of :func:`ghal360.wedges.mirror_wedges`."""
    digits = [(index >> (2 * k)) & 3 for k in range(NUM_WEDGES)]
    mirrored = [digits[0]] + digits[:0:-1]
    out = 0
    for d in reversed(mirrored):
        out = out * 4 + d
    return out


def episode_cumulative_reward(
    policy_action,
    start: EgoState,
    mdp_cfg: MdpConfig,
    rng: np.random.Generator,
) -> float:
    """Roll out one episode under ``policy_action`` (EgoState -> action)."""
    s = start
    total = 0.0
    for _ in range(mdp_cfg.max_steps):
        a = policy_action(s)
        out = step(s, a, mdp_cfg, rng)
        total += out.reward
        if out.terminal:
            break
        s = out.next_state
    return total
