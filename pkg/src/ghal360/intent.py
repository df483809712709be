"""Particle filter estimating which wedge the human intends to move toward.

State space is the eight wedges in the robot frame.  Each filter step is
predict (drift one wedge in the observed head-motion direction with
probability 1 - p_stay), weight update (geometric likelihood in circular
wedge distance to the focused wedge), then systematic resampling when the
effective sample size drops below M/2.  The estimate is the wedge holding
at least ``threshold`` of the total weight, else undecided.

Randomness contract, relied on by replay: predict consumes exactly one
M-vector uniform draw; resample consumes one scalar uniform draw and only
when triggered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wedges import NUM_WEDGES
from .world import ControlCommand, HeadMotion


@dataclass(frozen=True)
class FilterConfig:
    m: int = 200
    p_stay: float = 0.7
    likelihood_decay: float = 0.5
    threshold: float = 0.7

    def __post_init__(self) -> None:
        if self.m < NUM_WEDGES:
            raise ValueError(f"need at least {NUM_WEDGES} particles, got {self.m}")
        for name in ("p_stay", "likelihood_decay", "threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.likelihood_decay == 0.0:
            raise ValueError("likelihood_decay must be positive")


@dataclass(frozen=True)
class Evidence:
    head_motion: HeadMotion
    focused: int

    def __post_init__(self) -> None:
        if not 0 <= self.focused < NUM_WEDGES:
            raise ValueError(f"focused wedge must be in [0, 8), got {self.focused}")


@dataclass(frozen=True)
class ParticleSet:
    wedges: np.ndarray  # int8 (M,)
    weights: np.ndarray  # float64 (M,), sums to 1

    @property
    def m(self) -> int:
        return int(self.wedges.shape[0])

    @property
    def ess(self) -> float:
        return float(1.0 / np.sum(self.weights**2))

    def densities(self) -> np.ndarray:
        return np.bincount(self.wedges, weights=self.weights, minlength=NUM_WEDGES)


@dataclass(frozen=True)
class IntentEstimate:
    wedge: int | None
    density: float

    @property
    def decided(self) -> bool:
        return self.wedge is not None


def init_particles(m: int = 200) -> ParticleSet:
    if m < NUM_WEDGES:
        raise ValueError(f"need at least {NUM_WEDGES} particles, got {m}")
    wedges = (np.arange(m) % NUM_WEDGES).astype(np.int8)
    return ParticleSet(wedges=wedges, weights=np.full(m, 1.0 / m))


def predict(
    ps: ParticleSet, motion: HeadMotion, cfg: FilterConfig, rng: np.random.Generator
) -> ParticleSet:
    """Drift particles with the head-motion model; weights unchanged."""
    u = rng.random(ps.m)
    shift = np.zeros(ps.m, dtype=np.int8)
    if motion is HeadMotion.LEFT:
        shift[u >= cfg.p_stay] = 1
    elif motion is HeadMotion.RIGHT:
        shift[u >= cfg.p_stay] = -1
    else:
        half = cfg.p_stay + (1.0 - cfg.p_stay) / 2.0
        shift[(u >= cfg.p_stay) & (u < half)] = 1
        shift[u >= half] = -1
    return ParticleSet(wedges=(ps.wedges + shift) % NUM_WEDGES, weights=ps.weights)


def update_weights(ps: ParticleSet, e: Evidence, cfg: FilterConfig) -> ParticleSet:
    ccw = (e.focused - ps.wedges) % NUM_WEDGES
    dists = np.minimum(ccw, NUM_WEDGES - ccw).astype(float)
    weights = ps.weights * cfg.likelihood_decay**dists
    total = float(weights.sum())
    if total <= 0.0:
        # Unreachable with a positive likelihood; reset rather than divide by zero.
        weights = np.full(ps.m, 1.0 / ps.m)
    else:
        weights = weights / total
    return ParticleSet(wedges=ps.wedges, weights=weights)


def resample(ps: ParticleSet, cfg: FilterConfig, rng: np.random.Generator) -> ParticleSet:
    """Systematic resampling, triggered below half the nominal sample size."""
    if ps.ess >= ps.m / 2.0:
        return ps
    positions = (np.arange(ps.m) + rng.random()) / ps.m
    cumulative = np.cumsum(ps.weights)
    cumulative[-1] = 1.0  # guard the top edge against rounding
    picks = np.searchsorted(cumulative, positions, side="right")
    return ParticleSet(
        wedges=ps.wedges[picks].astype(np.int8),
        weights=np.full(ps.m, 1.0 / ps.m),
    )


def estimate_intent(ps: ParticleSet, threshold: float = 0.7) -> IntentEstimate:
    densities = ps.densities()
    best = int(np.argmax(densities))
    density = float(densities[best])
    if density >= threshold:
        return IntentEstimate(wedge=best, density=density)
    return IntentEstimate(wedge=None, density=density)


def rotate_particles(ps: ParticleSet, k: int) -> ParticleSet:
    """Relabel wedges after a robot-frame rotation; weights unchanged."""
    return ParticleSet(wedges=(ps.wedges + k) % NUM_WEDGES, weights=ps.weights)


def controller(intent: IntentEstimate, _pose=None) -> ControlCommand:
    """Rotate toward the intended wedge, then drive; stop while undecided."""
    if not intent.decided:
        return ControlCommand.STOP
    w = intent.wedge
    if w == 0:
        return ControlCommand.FORWARD
    if w == NUM_WEDGES // 2:
        return ControlCommand.BACKWARD
    return ControlCommand.ROTATE_LEFT if 0 < w < NUM_WEDGES // 2 else ControlCommand.ROTATE_RIGHT


class IntentFilter:
    """Stateful wrapper binding config, rng, and particle set for one trial."""

    def __init__(self, cfg: FilterConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.particles = init_particles(cfg.m)

    def step(self, evidence: Evidence) -> IntentEstimate:
        ps = predict(self.particles, evidence.head_motion, self.cfg, self.rng)
        ps = update_weights(ps, evidence, self.cfg)
        ps = resample(ps, self.cfg, self.rng)
        self.particles = ps
        return estimate_intent(ps, self.cfg.threshold)

    def rotate(self, k: int) -> None:
        self.particles = rotate_particles(self.particles, k)

    def estimate(self) -> IntentEstimate:
        return estimate_intent(self.particles, self.cfg.threshold)
