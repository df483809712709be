"""Tabular Q-learning for the guidance policy, plus the GHQT file format.

The trainer runs in encoded-index space for speed; its draw sequence is
identical to the tuple-level :mod:`ghal360.mdp` ops (epsilon draw, explore
draw, compliance draw, direction draw), so trajectories are reproducible
either way.

GHQT layout (little-endian throughout)::

    bytes 0..3   magic b"GHQT"
    bytes 4..5   format version, u16 (currently 1)
    payload      65536 x 3 float64 action values, state-major,
                 action order confirm, left, right
    trailer      u64 checksum: sum of payload bytes mod 2**64
"""

from __future__ import annotations

import functools
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .mdp import MdpConfig, ScenarioConfig, index_model, initial_state
from .wedges import (
    NUM_ACTIONS,
    NUM_STATES,
    GuidanceAction,
    Rotation,
    circular_distance,
    decode_state,
    encode_state,
)

GHQT_MAGIC = b"GHQT"
GHQT_VERSION = 1


@dataclass
class QTable:
    values: np.ndarray
    visit_counts: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (NUM_STATES, NUM_ACTIONS):
            raise ValueError(f"expected values shape {(NUM_STATES, NUM_ACTIONS)}, got {self.values.shape}")
        if self.visit_counts is None:
            self.visit_counts = np.zeros((NUM_STATES, NUM_ACTIONS), dtype=np.int64)
        self.visit_counts = np.asarray(self.visit_counts, dtype=np.int64)
        if self.visit_counts.shape != self.values.shape:
            raise ValueError("visit_counts shape must match values")

    @classmethod
    def zeros(cls) -> "QTable":
        return cls(values=np.zeros((NUM_STATES, NUM_ACTIONS)))

    def greedy_action(self, state_index: int) -> GuidanceAction:
        # np.argmax returns the first maximum, so ties resolve
        # confirm < left < right by action encoding.
        return GuidanceAction(int(np.argmax(self.values[state_index])))

    def policy_array(self) -> np.ndarray:
        return np.argmax(self.values, axis=1).astype(np.int8)

    def copy(self) -> "QTable":
        return QTable(values=self.values.copy(), visit_counts=self.visit_counts.copy())


def save_qtable(table: QTable, path: str | Path) -> None:
    payload = np.ascontiguousarray(table.values, dtype="<f8").tobytes()
    checksum = int(np.frombuffer(payload, dtype=np.uint8).sum(dtype=np.uint64))
    with open(path, "wb") as f:
        f.write(GHQT_MAGIC)
        f.write(struct.pack("<H", GHQT_VERSION))
        f.write(payload)
        f.write(struct.pack("<Q", checksum))


def load_qtable(path: str | Path) -> QTable:
    raw = Path(path).read_bytes()
    if raw[:4] != GHQT_MAGIC:
        raise ValueError(f"{path}: not a GHQT file")
    (version,) = struct.unpack_from("<H", raw, 4)
    if version != GHQT_VERSION:
        raise ValueError(f"{path}: unsupported GHQT version {version}")
    expected = 4 + 2 + NUM_STATES * NUM_ACTIONS * 8 + 8
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated or oversized GHQT file ({len(raw)} bytes, want {expected})")
    payload = raw[6:-8]
    (stored,) = struct.unpack_from("<Q", raw, len(raw) - 8)
    checksum = int(np.frombuffer(payload, dtype=np.uint8).sum(dtype=np.uint64))
    if stored != checksum:
        raise ValueError(f"{path}: GHQT checksum mismatch")
    values = np.frombuffer(payload, dtype="<f8").reshape(NUM_STATES, NUM_ACTIONS).copy()
    return QTable(values=values)


@dataclass(frozen=True)
class TrainerConfig:
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon_start: float = 0.1
    epsilon_end: float = 0.01
    episodes: int = 15_000
    checkpoint_every: int = 100

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        for name in ("epsilon_start", "epsilon_end"):
            eps = getattr(self, name)
            if not 0.0 <= eps <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {eps}")
        if self.episodes < 1 or self.checkpoint_every < 1:
            raise ValueError("episodes and checkpoint_every must be positive")


def epsilon_for_episode(cfg: TrainerConfig, episode: int) -> float:
    """Linear decay; episode 0 gets epsilon_start, the last gets epsilon_end."""
    if cfg.episodes == 1:
        return cfg.epsilon_start
    frac = episode / (cfg.episodes - 1)
    return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac


CheckpointSink = Callable[[int, QTable], None]


@dataclass
class TrainResult:
    table: QTable
    checkpoint_episodes: list[int]
    episode_rewards: np.ndarray


def train(
    trainer: TrainerConfig,
    mdp_cfg: MdpConfig,
    scenario: ScenarioConfig,
    seed: int,
    checkpoint_sink: CheckpointSink | None = None,
) -> TrainResult:
    """Run Q-learning from a zero-initialized table.

    ``checkpoint_sink`` receives ``(episodes_completed, snapshot)`` every
    ``checkpoint_every`` episodes; snapshots are copies, safe to keep.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    model = index_model(mdp_cfg)
    q = np.zeros((NUM_STATES, NUM_ACTIONS))
    visits = np.zeros((NUM_STATES, NUM_ACTIONS), dtype=np.int64)
    alpha, gamma = trainer.alpha, trainer.gamma
    checkpoint_episodes: list[int] = []
    episode_rewards = np.zeros(trainer.episodes)

    for ep in range(trainer.episodes):
        epsilon = epsilon_for_episode(trainer, ep)
        s = encode_state(initial_state(scenario, rng))
        total = 0.0
        for _ in range(mdp_cfg.max_steps):
            if rng.random() < epsilon:
                a = int(rng.integers(NUM_ACTIONS))
            else:
                a = int(np.argmax(q[s]))
            if a == GuidanceAction.CONFIRM:
                r = float(model.confirm_reward[s])
                target = r  # terminal: no bootstrap
                terminal = True
                s_next = s
            else:
                if rng.random() < mdp_cfg.p_comply:
                    go_left = a == GuidanceAction.LEFT
                else:
                    go_left = bool(rng.random() < 0.5)
                s_next = int(model.left[s] if go_left else model.right[s])
                r = float(model.move_reward[s_next])
                target = r + gamma * float(q[s_next].max())
                terminal = False
            q[s, a] += alpha * (target - q[s, a])
            visits[s, a] += 1
            total += r
            if terminal:
                break
            s = s_next
        episode_rewards[ep] = total
        done = ep + 1
        if checkpoint_sink is not None and done % trainer.checkpoint_every == 0:
            checkpoint_episodes.append(done)
            checkpoint_sink(done, QTable(values=q.copy(), visit_counts=visits.copy()))

    return TrainResult(
        table=QTable(values=q, visit_counts=visits),
        checkpoint_episodes=checkpoint_episodes,
        episode_rewards=episode_rewards,
    )


def fgs_action(state) -> GuidanceAction:
    """Shortest-rotation guidance toward the nearest target wedge.

    Confirms when the focus wedge already holds the target; the antipodal
    tie breaks left.  States with no target confirm (unreachable in
    single-target scenarios, but the policy must be total).
    """
    targets = [k for k, v in enumerate(state) if v.contains_target]
    if not targets:
        return GuidanceAction.CONFIRM
    nearest = min(targets, key=lambda k: circular_distance(0, k)[0])
    dist, rotation = circular_distance(0, nearest)
    if dist == 0:
        return GuidanceAction.CONFIRM
    if rotation in (Rotation.LEFT, Rotation.TIE):
        return GuidanceAction.LEFT
    return GuidanceAction.RIGHT


@functools.lru_cache(maxsize=1)
def fgs_policy_array() -> np.ndarray:
    out = np.empty(NUM_STATES, dtype=np.int8)
    for i in range(NUM_STATES):
        out[i] = int(fgs_action(decode_state(i)))
    return out


def _as_policy_array(policy) -> np.ndarray:
    if isinstance(policy, QTable):
        return policy.policy_array()
    arr = np.asarray(policy)
    if arr.shape != (NUM_STATES,):
        raise ValueError(f"policy array must have shape {(NUM_STATES,)}, got {arr.shape}")
    return arr.astype(np.int8)


def _rollout_indexed(
    policy: np.ndarray,
    start_index: int,
    mdp_cfg: MdpConfig,
    model,
    rng: np.random.Generator,
) -> float:
    s = start_index
    total = 0.0
    for _ in range(mdp_cfg.max_steps):
        a = int(policy[s])
        if a == GuidanceAction.CONFIRM:
            total += float(model.confirm_reward[s])
            break
        if rng.random() < mdp_cfg.p_comply:
            go_left = a == GuidanceAction.LEFT
        else:
            go_left = bool(rng.random() < 0.5)
        s = int(model.left[s] if go_left else model.right[s])
        total += float(model.move_reward[s])
    return total


@dataclass
class CheckpointCurve:
    """Mean evaluation reward per checkpoint, with a shortest-rotation
    reference scored on the same episode starts and random streams."""

    episodes: list[int]
    mean_reward: list[float]
    fgs_mean_reward: float
    eval_episodes: int


def evaluate_checkpoints(
    policies: Sequence,
    episodes: Sequence[int],
    mdp_cfg: MdpConfig,
    scenario: ScenarioConfig,
    seed: int,
    eval_episodes: int = 200,
) -> CheckpointCurve:
    """Score checkpoint policies with common random numbers.

    Every policy (and the reference) sees the same initial state and the
    same transition stream in episode ``e``, so curve differences reflect
    the policies alone.
    """
    if len(policies) != len(episodes):
        raise ValueError("policies and episodes must align")
    arrays = [_as_policy_array(p) for p in policies]
    reference = fgs_policy_array()
    model = index_model(mdp_cfg)
    totals = np.zeros(len(arrays))
    fgs_total = 0.0
    for e in range(eval_episodes):
        start_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(e, 0)))
        start = encode_state(initial_state(scenario, start_rng))
        stream_key = np.random.SeedSequence(seed, spawn_key=(e, 1))
        for k, policy in enumerate(arrays):
            rng = np.random.default_rng(stream_key)
            totals[k] += _rollout_indexed(policy, start, mdp_cfg, model, rng)
        fgs_total += _rollout_indexed(
            reference, start, mdp_cfg, model, np.random.default_rng(stream_key)
        )
    return CheckpointCurve(
        episodes=list(episodes),
        mean_reward=[float(t) / eval_episodes for t in totals],
        fgs_mean_reward=fgs_total / eval_episodes,
        eval_episodes=eval_episodes,
    )
