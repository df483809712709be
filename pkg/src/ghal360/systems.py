"""The five comparison systems run as closed-loop trials in the grid world.

    MFO      single forward wedge, look commands rotate the base, no guidance
    ADV      full 360-degree view, no guidance
    FGS      360 view plus shortest-rotation guidance from noisy detections
    RLGS     360 view plus learned guidance (Q-table policy)
    GHAL360  RLGS plus intent-filter-driven base motion on human-idle ticks

All systems share one tick structure: noisy detect, termination check,
guidance indicator, virtual-human move, robot motion.  A trial terminates
when the noisy detection puts a target in the focused wedge (correctness is
re-checked noise-free) or when the tick budget runs out.

Frame bookkeeping: focus and particle wedges live in the robot frame.  When
the GHAL360 controller rotates the base, both are counter-rotated so the
human's gaze and the belief stay fixed in the world; MFO's look-rotations
are the look, so nothing is counter-rotated there.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .intent import Evidence, FilterConfig, IntentEstimate, IntentFilter, controller
from .learning import QTable, fgs_action
from .mdp import MdpConfig
from .wedges import EgoState, GuidanceAction, Wedges, encode_state, to_egocentric
from .world import (
    ControlCommand,
    DetectorConfig,
    HeadMotion,
    HumanConfig,
    HumanMove,
    HumanState,
    RobotPose,
    World,
    apply_human_move,
    geodesic_distances,
    step_robot,
    target_in_focus,
    virtual_human_step,
)

TICK_SECONDS = 2.0


class SystemKind(str, Enum):
    MFO = "mfo"
    ADV = "adv"
    FGS = "fgs"
    RLGS = "rlgs"
    GHAL360 = "ghal360"

    @property
    def guided(self) -> bool:
        return self in (SystemKind.FGS, SystemKind.RLGS, SystemKind.GHAL360)

    @property
    def needs_policy(self) -> bool:
        return self in (SystemKind.RLGS, SystemKind.GHAL360)


@dataclass(frozen=True)
class TrialConfig:
    human: HumanConfig = field(default_factory=HumanConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    budget_ticks: int = 300
    filter_enabled: bool = True
    learn_online: bool = False
    learn_alpha: float = 0.1
    learn_gamma: float = 0.95
    mdp: MdpConfig = field(default_factory=MdpConfig)
    record_trace: bool = True

    def __post_init__(self) -> None:
        if self.budget_ticks < 1:
            raise ValueError("budget_ticks must be positive")


@dataclass(frozen=True)
class TickRecord:
    t: int
    pose: RobotPose
    focus: int
    wedges: Wedges  # noisy detection, robot frame
    indicator: GuidanceAction | None = None
    intent: int | None = None
    move: HumanMove | None = None
    command: ControlCommand | None = None


@dataclass(frozen=True)
class TrialResult:
    system: SystemKind
    seed: int
    start_distance_m: float
    ticks: int
    elapsed_s: float
    success: bool
    correct: bool
    trajectory: tuple[TickRecord, ...] = ()


def paired_seeds(n_trials: int, base_seed: int) -> np.ndarray:
    """Trial seeds shared verbatim across systems; pairing = same seed list."""
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    return np.random.default_rng(base_seed).integers(2**63, size=n_trials)


def trial_streams(seed: int) -> tuple[np.random.Generator, ...]:
    """Human, detector, and filter generators for one trial.

    Separate spawn keys keep the three noise sources independent, so a
    system that never touches the filter stream (or detector noise) still
    sees identical draws on the streams it does touch.
    """
    return tuple(
        np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        for k in range(3)
    )


def _indicator(
    kind: SystemKind, ego: EgoState, policy: QTable | None
) -> GuidanceAction | None:
    """Guidance for this tick, or None when the system shows nothing.

    Shown iff the system guides and the (noisy) egocentric state contains a
    target wedge.
    """
    if not kind.guided:
        return None
    if not any(v.contains_target for v in ego):
        return None
    if kind is SystemKind.FGS:
        return fgs_action(ego)
    assert policy is not None
    return policy.greedy_action(encode_state(ego))


def run_trial(
    kind: SystemKind,
    world: World,
    start: RobotPose,
    seed: int,
    cfg: TrialConfig | None = None,
    policy: QTable | None = None,
    start_distance_m: float | None = None,
) -> TrialResult:
    cfg = cfg or TrialConfig()
    if kind.needs_policy and policy is None:
        raise ValueError(f"{kind.value} requires a guidance policy")
    if not world.is_free(start.cell):
        raise ValueError(f"start cell {start.cell} is not free")
    if start_distance_m is None:
        start_distance_m = float(
            geodesic_distances(world, world.target.cell)[start.cell]
        )

    rng_human, rng_detector, rng_filter = trial_streams(seed)
    model = world.detection_model
    pose = start
    human = HumanState(focus=0, last_motion=HeadMotion.NONE)
    intent_filter = (
        IntentFilter(cfg.filter, rng_filter)
        if kind is SystemKind.GHAL360 and cfg.filter_enabled
        else None
    )
    trace: list[TickRecord] = []
    prev_ego: EgoState | None = None
    prev_action: GuidanceAction | None = None

    ticks = cfg.budget_ticks
    success = False
    for t in range(cfg.budget_ticks + 1):
        wedges = model.detect(pose, cfg.detector, rng_detector)
        if wedges[human.focus].contains_target:
            ticks, success = t, True
            if cfg.record_trace:
                trace.append(TickRecord(t, pose, human.focus, wedges))
            break
        if t == cfg.budget_ticks:
            if cfg.record_trace:
                trace.append(TickRecord(t, pose, human.focus, wedges))
            break

        ego = to_egocentric(wedges, human.focus)
        action = _indicator(kind, ego, policy)
        steer = action if action in (GuidanceAction.LEFT, GuidanceAction.RIGHT) else None
        move = virtual_human_step(steer, cfg.human, rng_human)

        if kind is SystemKind.MFO:
            # Monocular: the viewport is locked to the heading wedge, so a
            # look is a base rotation.
            command = {
                HumanMove.LOOK_LEFT: ControlCommand.ROTATE_LEFT,
                HumanMove.LOOK_RIGHT: ControlCommand.ROTATE_RIGHT,
                HumanMove.MOVE_FORWARD: ControlCommand.FORWARD,
                HumanMove.MOVE_BACKWARD: ControlCommand.BACKWARD,
            }[move]
            pose = step_robot(world, pose, command)
            intent_wedge = None
        else:
            human, command = apply_human_move(human, move)
            estimate: IntentEstimate | None = None
            if intent_filter is not None:
                estimate = intent_filter.step(Evidence(human.last_motion, human.focus))
            if command is not None:
                pose = step_robot(world, pose, command)
            elif estimate is not None:
                command = controller(estimate)
                new_pose = step_robot(world, pose, command)
                dh = (new_pose.heading - pose.heading) % 8
                if dh:
                    # Keep gaze and belief world-fixed under base rotation.
                    human = replace(human, focus=(human.focus - dh) % 8)
                    intent_filter.rotate(-dh)
                pose = new_pose
            intent_wedge = estimate.wedge if estimate is not None else None

        if cfg.learn_online and policy is not None and prev_ego is not None:
            _online_update(policy, prev_ego, prev_action, ego, cfg)
        prev_ego, prev_action = ego, action

        if cfg.record_trace:
            trace.append(
                TickRecord(t, pose, human.focus, wedges, action, intent_wedge, move, command)
            )

    correct = success and target_in_focus(world, pose, human, cfg.detector)
    return TrialResult(
        system=kind,
        seed=int(seed),
        start_distance_m=start_distance_m,
        ticks=ticks,
        elapsed_s=ticks * TICK_SECONDS,
        success=success,
        correct=correct,
        trajectory=tuple(trace),
    )


def _online_update(
    policy: QTable,
    s: EgoState,
    a: GuidanceAction | None,
    s_next: EgoState,
    cfg: TrialConfig,
) -> None:
    """Optional deployment-time Q update on observed ego transitions."""
    if a is None or a is GuidanceAction.CONFIRM:
        return
    i, j = encode_state(s), encode_state(s_next)
    landing = s_next[0]
    r = cfg.mdp.c_large if landing.contains_clutter else cfg.mdp.c_small
    target = r + cfg.learn_gamma * float(policy.values[j].max())
    policy.values[i, int(a)] += cfg.learn_alpha * (target - policy.values[i, int(a)])
    policy.visit_counts[i, int(a)] += 1
