"""Particle filter unit tests.

Each operator (init, predict, update, resample, estimate) is pinned in
isolation, then the stateful wrapper is checked for determinism, rotation
equivariance, and convergence under steady evidence.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghal360.intent import (
    Evidence,
    FilterConfig,
    IntentEstimate,
    IntentFilter,
    ParticleSet,
    controller,
    estimate_intent,
    init_particles,
    predict,
    resample,
    rotate_particles,
    update_weights,
)
from ghal360.world import ControlCommand, HeadMotion


def uniform_set(wedges):
    w = np.asarray(wedges, dtype=np.int8)
    return ParticleSet(wedges=w, weights=np.full(w.shape[0], 1.0 / w.shape[0]))


class TestConfig:
    def test_defaults(self):
        cfg = FilterConfig()
        assert (cfg.m, cfg.p_stay) == (200, 0.7)
        assert (cfg.likelihood_decay, cfg.threshold) == (0.5, 0.7)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"m": 7},
            {"p_stay": -0.1},
            {"p_stay": 1.5},
            {"likelihood_decay": 0.0},
            {"likelihood_decay": 2.0},
            {"threshold": 1.2},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            FilterConfig(**kwargs)

    def test_evidence_wedge_bounds(self):
        Evidence(head_motion=HeadMotion.NONE, focused=7)
        with pytest.raises(ValueError):
            Evidence(head_motion=HeadMotion.NONE, focused=8)
        with pytest.raises(ValueError):
            Evidence(head_motion=HeadMotion.NONE, focused=-1)


def test_init_particles_round_robin():
    ps = init_particles(200)
    assert ps.m == 200
    assert list(np.bincount(ps.wedges, minlength=8)) == [25] * 8
    np.testing.assert_array_equal(ps.weights, np.full(200, 1 / 200))
    assert ps.ess == pytest.approx(200.0)
    with pytest.raises(ValueError):
        init_particles(7)


class TestPredict:
    def test_stay_probability_one_freezes_wedges(self):
        cfg = FilterConfig(p_stay=1.0)
        ps = init_particles(cfg.m)
        out = predict(ps, HeadMotion.NONE, cfg, np.random.default_rng(0))
        np.testing.assert_array_equal(out.wedges, ps.wedges)
        np.testing.assert_array_equal(out.weights, ps.weights)

    def test_left_motion_drifts_counterclockwise(self):
        # p_stay = 0 forces the drift branch for every particle
        cfg = FilterConfig(p_stay=0.0)
        ps = init_particles(cfg.m)
        out = predict(ps, HeadMotion.LEFT, cfg, np.random.default_rng(0))
        np.testing.assert_array_equal(out.wedges, (ps.wedges + 1) % 8)

    def test_right_motion_drifts_clockwise(self):
        cfg = FilterConfig(p_stay=0.0)
        ps = init_particles(cfg.m)
        out = predict(ps, HeadMotion.RIGHT, cfg, np.random.default_rng(0))
        np.testing.assert_array_equal(out.wedges, (ps.wedges - 1) % 8)

    def test_no_motion_splits_drift_both_ways(self):
        cfg = FilterConfig(m=10_000, p_stay=0.0)
        ps = init_particles(cfg.m)
        out = predict(ps, HeadMotion.NONE, cfg, np.random.default_rng(1))
        delta = (out.wedges.astype(int) - ps.wedges) % 8
        left = int(np.sum(delta == 1))
        right = int(np.sum(delta == 7))
        assert left + right == cfg.m  # nobody stays put at p_stay = 0
        assert abs(left - right) < 300

    def test_consumes_exactly_one_vector_draw(self):
        """Replay depends on predict drawing one M-vector, nothing more."""
        cfg = FilterConfig()
        ps = init_particles(cfg.m)
        rng = np.random.default_rng(5)
        predict(ps, HeadMotion.LEFT, cfg, rng)
        ref = np.random.default_rng(5)
        ref.random(cfg.m)
        assert rng.random() == ref.random()


class TestUpdateWeights:
    def test_all_particles_at_focus_keep_weights(self):
        cfg = FilterConfig()
        ps = ParticleSet(wedges=np.zeros(8, dtype=np.int8), weights=np.full(8, 0.125))
        out = update_weights(ps, Evidence(HeadMotion.NONE, focused=0), cfg)
        np.testing.assert_allclose(out.weights, ps.weights)

    def test_one_wedge_away_halves_the_weight(self):
        out = update_weights(
            uniform_set([0, 1]), Evidence(HeadMotion.NONE, focused=0), FilterConfig()
        )
        np.testing.assert_allclose(out.weights, [2 / 3, 1 / 3])

    def test_distance_is_circular(self):
        # wedges 1 and 7 are both one step from focus 0
        out = update_weights(
            uniform_set([1, 7]), Evidence(HeadMotion.NONE, focused=0), FilterConfig()
        )
        np.testing.assert_allclose(out.weights, [0.5, 0.5])

    def test_geometric_kernel_over_all_wedges(self):
        out = update_weights(
            uniform_set(range(8)), Evidence(HeadMotion.NONE, focused=0), FilterConfig()
        )
        kernel = np.array([1, 0.5, 0.25, 0.125, 0.0625, 0.125, 0.25, 0.5])
        np.testing.assert_allclose(out.weights, kernel / kernel.sum())

    @given(
        wedges=st.lists(st.integers(0, 7), min_size=8, max_size=64),
        focused=st.integers(0, 7),
        data=st.data(),
    )
    def test_normalizes_any_input(self, wedges, focused, data):
        m = len(wedges)
        raw = np.array(data.draw(st.lists(st.floats(1e-6, 1.0), min_size=m, max_size=m)))
        ps = ParticleSet(wedges=np.array(wedges, dtype=np.int8), weights=raw / raw.sum())
        out = update_weights(ps, Evidence(HeadMotion.NONE, focused=focused), FilterConfig())
        assert out.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(out.weights >= 0.0)
        np.testing.assert_array_equal(out.wedges, ps.wedges)


class TestResample:
    def test_skipped_at_full_ess(self):
        cfg = FilterConfig()
        ps = init_particles(cfg.m)
        rng = np.random.default_rng(3)
        out = resample(ps, cfg, rng)
        assert out is ps
        # and it consumed no randomness
        assert rng.random() == np.random.default_rng(3).random()

    def test_skipped_at_exactly_half_ess(self):
        # four live particles at 1/4 each: ess == 4 == m/2, the boundary
        cfg = FilterConfig(m=8)
        weights = np.array([0.25] * 4 + [0.0] * 4)
        ps = ParticleSet(wedges=np.arange(8, dtype=np.int8), weights=weights)
        assert ps.ess == pytest.approx(4.0)
        assert resample(ps, cfg, np.random.default_rng(0)) is ps

    def test_degenerate_weight_clones_the_survivor(self):
        cfg = FilterConfig(m=8)
        weights = np.zeros(8)
        weights[5] = 1.0
        ps = ParticleSet(wedges=np.arange(8, dtype=np.int8), weights=weights)
        out = resample(ps, cfg, np.random.default_rng(11))
        np.testing.assert_array_equal(out.wedges, np.full(8, 5, dtype=np.int8))
        np.testing.assert_array_equal(out.weights, np.full(8, 0.125))

    def test_systematic_counts_match_weights(self):
        # weight 1/2 over m=8 yields exactly four copies regardless of
        # where the stratified offset lands
        cfg = FilterConfig(m=8)
        weights = np.array([0.5] + [0.5 / 7] * 7)
        ps = ParticleSet(wedges=np.arange(8, dtype=np.int8), weights=weights)
        assert ps.ess < 4.0
        for seed in range(20):
            out = resample(ps, cfg, np.random.default_rng(seed))
            counts = np.bincount(out.wedges, minlength=8)
            assert counts[0] == 4
            assert np.all(counts[1:] <= 1)
            assert counts.sum() == 8

    def test_consumes_one_scalar_draw_when_triggered(self):
        cfg = FilterConfig(m=8)
        weights = np.zeros(8)
        weights[2] = 1.0
        ps = ParticleSet(wedges=np.arange(8, dtype=np.int8), weights=weights)
        rng = np.random.default_rng(9)
        resample(ps, cfg, rng)
        ref = np.random.default_rng(9)
        ref.random()
        assert rng.random() == ref.random()


class TestEstimate:
    def test_threshold_is_inclusive(self):
        # 6 of 8 uniform particles is exactly 0.75, binary-exact
        ps = uniform_set([3] * 6 + [0, 1])
        est = estimate_intent(ps, threshold=0.75)
        assert est.decided and est.wedge == 3
        assert est.density == pytest.approx(0.75)

    def test_below_threshold_is_undecided(self):
        ps = uniform_set([3] * 5 + [0, 1, 2])
        est = estimate_intent(ps, threshold=0.75)
        assert not est.decided
        assert est.wedge is None
        assert est.density == pytest.approx(0.625)

    def test_default_threshold_at_boundary_mass(self):
        # 140 of 200 particles carry 0.7 of the mass and should decide
        est = estimate_intent(uniform_set([6] * 140 + [2] * 60))
        assert est.decided and est.wedge == 6
        est = estimate_intent(uniform_set([6] * 139 + [2] * 61))
        assert not est.decided


def test_rotate_particles_relabels_wedges():
    ps = init_particles(16)
    out = rotate_particles(ps, 3)
    np.testing.assert_array_equal(out.wedges, (ps.wedges + 3) % 8)
    np.testing.assert_array_equal(out.weights, ps.weights)
    back = rotate_particles(out, 5)  # 3 + 5 = full turn
    np.testing.assert_array_equal(back.wedges, ps.wedges)


@given(
    seed=st.integers(0, 2**31 - 1),
    k=st.integers(1, 7),
    stream=st.lists(
        st.tuples(st.sampled_from(list(HeadMotion)), st.integers(0, 7)),
        min_size=1,
        max_size=12,
    ),
)
@settings(max_examples=60)
def test_filter_is_rotation_equivariant(seed, k, stream):
    """Relabeling every wedge by +k relabels the whole run by +k.

    Predict shifts are label-free, the likelihood depends only on the
    circular distance, and resampling looks only at weights, so once the
    initial particles are relabeled two runs on the same rng stay
    bit-identical up to the relabeling.
    """
    cfg = FilterConfig()
    a = IntentFilter(cfg, np.random.default_rng(seed))
    b = IntentFilter(cfg, np.random.default_rng(seed))
    b.rotate(k)
    for motion, focused in stream:
        ea = a.step(Evidence(motion, focused))
        eb = b.step(Evidence(motion, (focused + k) % 8))
        assert eb.density == ea.density
        assert eb.decided == ea.decided
        if ea.decided:
            assert eb.wedge == (ea.wedge + k) % 8
    np.testing.assert_array_equal(b.particles.wedges, (a.particles.wedges + k) % 8)
    np.testing.assert_array_equal(b.particles.weights, a.particles.weights)


def test_controller_command_map():
    assert controller(IntentEstimate(wedge=None, density=0.4)) is ControlCommand.STOP
    expect = {
        0: ControlCommand.FORWARD,
        1: ControlCommand.ROTATE_LEFT,
        2: ControlCommand.ROTATE_LEFT,
        3: ControlCommand.ROTATE_LEFT,
        4: ControlCommand.BACKWARD,
        5: ControlCommand.ROTATE_RIGHT,
        6: ControlCommand.ROTATE_RIGHT,
        7: ControlCommand.ROTATE_RIGHT,
    }
    for wedge, cmd in expect.items():
        assert controller(IntentEstimate(wedge=wedge, density=0.8)) is cmd


class TestIntentFilter:
    def test_replay_determinism(self):
        cfg = FilterConfig()
        stream = [
            Evidence(HeadMotion.LEFT, 2),
            Evidence(HeadMotion.NONE, 2),
            Evidence(HeadMotion.NONE, 3),
            Evidence(HeadMotion.RIGHT, 3),
            Evidence(HeadMotion.NONE, 3),
        ] * 4
        results = []
        finals = []
        for _ in range(2):
            f = IntentFilter(cfg, np.random.default_rng(77))
            results.append([(e.wedge, e.density) for e in map(f.step, stream)])
            finals.append(f.particles)
        assert results[0] == results[1]
        np.testing.assert_array_equal(finals[0].wedges, finals[1].wedges)
        np.testing.assert_array_equal(finals[0].weights, finals[1].weights)

    def test_rotate_shifts_the_standing_estimate(self):
        f = IntentFilter(FilterConfig(), np.random.default_rng(0))
        for _ in range(10):
            f.step(Evidence(HeadMotion.NONE, 2))
        assert f.estimate().wedge == 2
        f.rotate(3)
        assert f.estimate().wedge == 5

    def test_steady_evidence_decides_quickly_and_correctly(self):
        # 8 wedges x 100 seeds: a decided estimate always names the
        # focused wedge, and nearly every stream decides within ten steps
        cfg = FilterConfig()
        decided = 0
        for wedge in range(8):
            for seed in range(100):
                f = IntentFilter(cfg, np.random.default_rng(seed))
                hit = False
                for _ in range(10):
                    est = f.step(Evidence(HeadMotion.NONE, wedge))
                    if est.decided:
                        assert est.wedge == wedge
                        hit = True
                decided += hit
        assert decided / 800 >= 0.95
