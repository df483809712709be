"""Closed-loop trial behaviour for the five systems.

Covers termination semantics, per-system motion rules, the indicator
guard, frame bookkeeping under base rotation, paired seeding, and the
optional online Q update.
"""

import numpy as np
import pytest

from ghal360.learning import QTable
from ghal360.systems import (
    TICK_SECONDS,
    SystemKind,
    TrialConfig,
    paired_seeds,
    run_trial,
    trial_streams,
)
from ghal360.wedges import GuidanceAction
from ghal360.world import (
    ControlCommand,
    DetectorConfig,
    HumanMove,
    RobotPose,
    parse_map,
)

NOISE_FREE = DetectorConfig(p_false_negative=0.0, p_false_positive=0.0)

NEAR_TEXT = "\n".join(
    [
        "########",
        "#......#",
        "#......#",
        "#..R...#",
        "#......#",
        "########",
    ]
) + "\n---\ntarget: mug\nobjects:\n  - [mug, 3, 6]\n  - [box, 1, 3]\n"

# target 41 cells east (20.5 m): out of detector range for the whole budget
FAR_TEXT = "\n".join(
    [
        "#" * 44,
        "#R" + "." * 41 + "#",
        "#" * 44,
    ]
) + "\n---\ntarget: mug\nobjects:\n  - [mug, 1, 42]\n"


@pytest.fixture(scope="module")
def near_world():
    return parse_map(NEAR_TEXT, name="near")


@pytest.fixture(scope="module")
def far_world():
    return parse_map(FAR_TEXT, name="far")


class TestSystemKind:
    def test_wire_values(self):
        assert [k.value for k in SystemKind] == ["mfo", "adv", "fgs", "rlgs", "ghal360"]

    def test_guided_and_policy_flags(self):
        assert not SystemKind.MFO.guided and not SystemKind.ADV.guided
        assert SystemKind.FGS.guided and not SystemKind.FGS.needs_policy
        for kind in (SystemKind.RLGS, SystemKind.GHAL360):
            assert kind.guided and kind.needs_policy


def test_trial_config_rejects_zero_budget():
    with pytest.raises(ValueError):
        TrialConfig(budget_ticks=0)


class TestSeeding:
    def test_paired_seeds_deterministic(self):
        a = paired_seeds(5, base_seed=7)
        b = paired_seeds(5, base_seed=7)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (5,)
        with pytest.raises(ValueError):
            paired_seeds(0, base_seed=7)

    def test_trial_streams_are_independent(self):
        first = trial_streams(5)
        first[0].random(1000)  # burn the human stream
        fresh = trial_streams(5)
        assert first[1].random() == fresh[1].random()
        assert first[2].random() == fresh[2].random()


class TestTermination:
    def test_instant_success_when_target_starts_in_focus(self, near_world):
        cfg = TrialConfig(detector=NOISE_FREE)
        start = RobotPose(near_world.robot_start, 0)  # mug due east, wedge 0
        r = run_trial(SystemKind.ADV, near_world, start, seed=1, cfg=cfg)
        assert r.success and r.correct
        assert r.ticks == 0 and r.elapsed_s == 0.0
        assert len(r.trajectory) == 1
        rec = r.trajectory[0]
        assert (rec.t, rec.pose, rec.focus) == (0, start, 0)
        assert rec.wedges[0].contains_target
        assert rec.move is None and rec.indicator is None

    def test_budget_exhaustion(self, far_world):
        cfg = TrialConfig(budget_ticks=25)
        start = RobotPose(far_world.robot_start, 0)
        r = run_trial(SystemKind.MFO, far_world, start, seed=3, cfg=cfg)
        assert not r.success and not r.correct
        assert r.ticks == 25
        assert r.elapsed_s == 25 * TICK_SECONDS
        assert len(r.trajectory) == 26  # 25 acted ticks plus the final detect
        assert r.trajectory[-1].t == 25 and r.trajectory[-1].move is None

    def test_success_always_survives_the_ground_truth_recheck(self, near_world):
        # noisy detection can hide the target but never invent one, so the
        # noise-free recheck at the final pose agrees with the noisy stop
        start = RobotPose(near_world.robot_start, 2)
        for seed in range(20):
            r = run_trial(SystemKind.FGS, near_world, start, seed=seed)
            assert r.correct == r.success

    def test_start_distance_defaults_to_geodesic(self, near_world):
        cfg = TrialConfig(detector=NOISE_FREE)
        start = RobotPose(near_world.robot_start, 0)
        r = run_trial(SystemKind.ADV, near_world, start, seed=1, cfg=cfg)
        assert r.start_distance_m == pytest.approx(1.5)  # 3 cells at 0.5 m
        r = run_trial(
            SystemKind.ADV, near_world, start, seed=1, cfg=cfg, start_distance_m=99.0
        )
        assert r.start_distance_m == 99.0

    def test_record_trace_off_drops_trajectory(self, far_world):
        cfg = TrialConfig(budget_ticks=10, record_trace=False)
        r = run_trial(SystemKind.ADV, far_world, RobotPose(far_world.robot_start, 0), 3, cfg)
        assert r.trajectory == ()


class TestValidation:
    def test_policy_required(self, near_world):
        start = RobotPose(near_world.robot_start, 0)
        for kind in (SystemKind.RLGS, SystemKind.GHAL360):
            with pytest.raises(ValueError, match="policy"):
                run_trial(kind, near_world, start, seed=0)

    def test_blocked_start_rejected(self, near_world):
        with pytest.raises(ValueError, match="not free"):
            run_trial(SystemKind.ADV, near_world, RobotPose((0, 0), 0), seed=0)


class TestMotionRules:
    def test_mfo_focus_locked_and_looks_rotate_the_base(self, far_world):
        cfg = TrialConfig(budget_ticks=30)
        r = run_trial(SystemKind.MFO, far_world, RobotPose(far_world.robot_start, 0), 5, cfg)
        assert all(rec.focus == 0 for rec in r.trajectory)
        prev_heading = 0
        for rec in r.trajectory:
            if rec.command is ControlCommand.ROTATE_LEFT:
                assert rec.pose.heading == (prev_heading + 1) % 8
            elif rec.command is ControlCommand.ROTATE_RIGHT:
                assert rec.pose.heading == (prev_heading - 1) % 8
            else:
                assert rec.pose.heading == prev_heading
            prev_heading = rec.pose.heading

    def test_panoramic_systems_never_rotate_the_base(self, near_world, oracle_table):
        start = RobotPose(near_world.robot_start, 2)
        cfg = TrialConfig(budget_ticks=50)
        for kind in (SystemKind.ADV, SystemKind.FGS, SystemKind.RLGS):
            policy = oracle_table if kind.needs_policy else None
            r = run_trial(kind, near_world, start, seed=11, cfg=cfg, policy=policy)
            assert all(rec.pose.heading == 2 for rec in r.trajectory)

    def test_mfo_and_adv_share_the_human_stream(self, far_world):
        # no object in range and no false positives: the detector consumes
        # no randomness, so both systems see identical human draws
        cfg = TrialConfig(budget_ticks=25, detector=DetectorConfig(p_false_positive=0.0))
        start = RobotPose(far_world.robot_start, 0)
        mfo = run_trial(SystemKind.MFO, far_world, start, seed=21, cfg=cfg)
        adv = run_trial(SystemKind.ADV, far_world, start, seed=21, cfg=cfg)
        assert [r.move for r in mfo.trajectory] == [r.move for r in adv.trajectory]

    def test_adv_and_fgs_identical_while_nothing_is_detected(self, far_world):
        cfg = TrialConfig(budget_ticks=25)
        start = RobotPose(far_world.robot_start, 0)
        adv = run_trial(SystemKind.ADV, far_world, start, seed=9, cfg=cfg)
        fgs = run_trial(SystemKind.FGS, far_world, start, seed=9, cfg=cfg)
        assert adv.trajectory == fgs.trajectory

    def test_ghal360_keeps_gaze_world_fixed(self, near_world, far_world, oracle_table):
        """Base rotations must not move the human's gaze or the belief.

        In world terms the gaze wedge is heading + focus; only explicit
        look moves may change it, by exactly one wedge.  The long corridor
        gives the intent filter time to settle, so some of these runs do
        rotate the base.
        """
        cfg = TrialConfig(budget_ticks=60)
        deltas = {HumanMove.LOOK_LEFT: 1, HumanMove.LOOK_RIGHT: 7}
        rotated = 0
        for world, heading in ((near_world, 2), (far_world, 0)):
            start = RobotPose(world.robot_start, heading)
            for seed in range(10):
                r = run_trial(
                    SystemKind.GHAL360, world, start, seed=seed, cfg=cfg, policy=oracle_table
                )
                gaze = start.heading % 8
                for rec in r.trajectory:
                    new_gaze = (rec.pose.heading + rec.focus) % 8
                    assert (new_gaze - gaze) % 8 == deltas.get(rec.move, 0)
                    gaze = new_gaze
                    rotated += rec.pose.heading != start.heading
        assert rotated > 0  # the controller actually turned the base

    def test_indicator_only_with_a_detected_target(self, near_world, oracle_table):
        start = RobotPose(near_world.robot_start, 2)
        cfg = TrialConfig(budget_ticks=40)
        for kind in (SystemKind.FGS, SystemKind.GHAL360):
            policy = oracle_table if kind.needs_policy else None
            for seed in range(5):
                r = run_trial(kind, near_world, start, seed=seed, cfg=cfg, policy=policy)
                for rec in r.trajectory:
                    if rec.indicator is not None:
                        assert any(v.contains_target for v in rec.wedges)

    def test_unguided_systems_never_show_an_indicator(self, near_world):
        start = RobotPose(near_world.robot_start, 2)
        for kind in (SystemKind.MFO, SystemKind.ADV):
            r = run_trial(kind, near_world, start, seed=4, cfg=TrialConfig(budget_ticks=40))
            assert all(rec.indicator is None for rec in r.trajectory)

    def test_filter_disabled_leaves_the_base_heading_alone(self, near_world, oracle_table):
        start = RobotPose(near_world.robot_start, 2)
        cfg = TrialConfig(budget_ticks=60, filter_enabled=False)
        r = run_trial(
            SystemKind.GHAL360, near_world, start, seed=2, cfg=cfg, policy=oracle_table
        )
        assert all(rec.pose.heading == 2 for rec in r.trajectory)
        assert all(rec.intent is None for rec in r.trajectory)


def test_online_learning_updates_the_table(near_world):
    rng = np.random.default_rng(0)
    policy = QTable(values=rng.normal(scale=0.1, size=(4**8, 3)))
    before = policy.values.copy()
    cfg = TrialConfig(budget_ticks=40, learn_online=True)
    run_trial(
        SystemKind.RLGS,
        near_world,
        RobotPose(near_world.robot_start, 2),
        seed=6,
        cfg=cfg,
        policy=policy,
    )
    assert policy.visit_counts.sum() > 0
    assert not np.array_equal(policy.values, before)


def test_online_learning_off_keeps_the_table_frozen(near_world):
    policy = QTable(values=np.random.default_rng(0).normal(scale=0.1, size=(4**8, 3)))
    before = policy.values.copy()
    run_trial(
        SystemKind.RLGS,
        near_world,
        RobotPose(near_world.robot_start, 2),
        seed=6,
        cfg=TrialConfig(budget_ticks=40),
        policy=policy,
    )
    np.testing.assert_array_equal(policy.values, before)
    assert policy.visit_counts.sum() == 0
