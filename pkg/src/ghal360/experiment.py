"""Batch experiment harness: paired trials over maps, systems, and distances.

Trials are paired by seed: every system replays the same human, detector,
and filter random streams for trial k of a given (map, distance, run)
block, so differences between systems are treatment effects, not sampling
noise.  ``trials_per_distance`` is a total that is divided evenly over
``runs``; statistics are computed over the per-run aggregates.

All randomness derives from ``base_seed`` through fixed spawn keys indexed
by (map, distance, run), never by system or wall clock, so the full
report is byte-identical across re-runs.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .intent import FilterConfig
from .learning import QTable, TrainerConfig
from .mdp import MdpConfig, ScenarioConfig
from .serialize import canonical_json, q6, sha256_hex
from .systems import (
    SystemKind,
    TrialConfig,
    paired_seeds,
    run_trial,
)
from .world import (
    DetectorConfig,
    HumanConfig,
    RobotPose,
    World,
    geodesic_distances,
    load_map,
)

SEED_ENV_VAR = "GHAL_SEED"

DEFAULT_SYSTEMS = (
    SystemKind.MFO,
    SystemKind.ADV,
    SystemKind.FGS,
    SystemKind.RLGS,
    SystemKind.GHAL360,
)
DEFAULT_DISTANCES_M = (4.0, 8.0, 12.0)


def maps_dir() -> Path:
    return Path(__file__).parent / "maps"


def shipped_maps() -> list[str]:
    return sorted(p.stem for p in maps_dir().glob("*.map"))


def resolve_map(spec: str) -> Path:
    """A bare name refers to a shipped map; anything else is a path."""
    p = Path(spec)
    if p.suffix == ".map" or os.sep in spec or p.exists():
        return p
    shipped = maps_dir() / f"{spec}.map"
    if shipped.exists():
        return shipped
    raise FileNotFoundError(f"no such map: {spec!r} (shipped: {', '.join(shipped_maps())})")


@dataclass(frozen=True)
class ExperimentConfig:
    maps: tuple[str, ...] = ("home", "office", "corridor")
    systems: tuple[SystemKind, ...] = DEFAULT_SYSTEMS
    distances_m: tuple[float, ...] = DEFAULT_DISTANCES_M
    trials_per_distance: int = 100
    runs: int = 5
    # Desk-scale calibration: trials are an order of magnitude shorter than
    # the 300-tick default used for single trials, the detector reaches the
    # farthest start band, and the intent filter tracks gaze tightly enough
    # to drive useful recovery motion.
    budget_ticks: int = 90
    base_seed: int = 7
    policy_file: str | None = None
    mdp: MdpConfig = field(default_factory=MdpConfig)
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    detector: DetectorConfig = field(
        default_factory=lambda: DetectorConfig(range_m=12.25)
    )
    filter: FilterConfig = field(
        default_factory=lambda: FilterConfig(p_stay=0.97, likelihood_decay=0.2)
    )
    human: HumanConfig = field(default_factory=HumanConfig)

    def __post_init__(self) -> None:
        if not self.maps or not self.systems or not self.distances_m:
            raise ValueError("maps, systems, and distances_m must be nonempty")
        if any(d <= 0 for d in self.distances_m):
            raise ValueError("distances must be positive")
        if self.trials_per_distance < 1 or self.runs < 1:
            raise ValueError("trials_per_distance and runs must be positive")
        if self.trials_per_distance % self.runs:
            raise ValueError(
                f"trials_per_distance ({self.trials_per_distance}) must divide evenly "
                f"over runs ({self.runs})"
            )

    @property
    def trials_per_run(self) -> int:
        return self.trials_per_distance // self.runs

    def to_dict(self) -> dict:
        return {
            "experiment": {
                "maps": list(self.maps),
                "systems": [s.value for s in self.systems],
                "distances_m": [q6(d) for d in self.distances_m],
                "trials_per_distance": self.trials_per_distance,
                "runs": self.runs,
                "budget_ticks": self.budget_ticks,
                "base_seed": self.base_seed,
                "policy_file": self.policy_file,
            },
            "mdp": {
                "p_comply": q6(self.mdp.p_comply),
                "r_confirm_hit": q6(self.mdp.r_confirm_hit),
                "r_confirm_miss": q6(self.mdp.r_confirm_miss),
                "c_small": q6(self.mdp.c_small),
                "c_large": q6(self.mdp.c_large),
                "max_steps": self.mdp.max_steps,
            },
            "trainer": {
                "alpha": q6(self.trainer.alpha),
                "gamma": q6(self.trainer.gamma),
                "epsilon_start": q6(self.trainer.epsilon_start),
                "epsilon_end": q6(self.trainer.epsilon_end),
                "episodes": self.trainer.episodes,
                "checkpoint_every": self.trainer.checkpoint_every,
            },
            "scenario": {
                "n_clutter_wedges": self.scenario.n_clutter_wedges,
                "target_coincides_clutter": self.scenario.target_coincides_clutter,
            },
            "detector": {
                "range_m": q6(self.detector.range_m),
                "p_false_negative": q6(self.detector.p_false_negative),
                "p_false_positive": q6(self.detector.p_false_positive),
            },
            "filter": {
                "m": self.filter.m,
                "p_stay": q6(self.filter.p_stay),
                "likelihood_decay": q6(self.filter.likelihood_decay),
                "threshold": q6(self.filter.threshold),
            },
            "human": {"p_follow": q6(self.human.p_follow)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        exp = dict(data.get("experiment", {}))
        kwargs: dict = {}
        for key in ("trials_per_distance", "runs", "budget_ticks", "base_seed", "policy_file"):
            if key in exp:
                kwargs[key] = exp[key]
        if "maps" in exp:
            kwargs["maps"] = tuple(exp["maps"])
        if "systems" in exp:
            kwargs["systems"] = tuple(SystemKind(s) for s in exp["systems"])
        if "distances_m" in exp:
            kwargs["distances_m"] = tuple(float(d) for d in exp["distances_m"])
        for name, typ in (
            ("mdp", MdpConfig),
            ("trainer", TrainerConfig),
            ("scenario", ScenarioConfig),
            ("detector", DetectorConfig),
            ("filter", FilterConfig),
            ("human", HumanConfig),
        ):
            if name in data and data[name] is not None:
                section = dict(data[name])
                if name == "scenario" and isinstance(section.get("n_clutter_wedges"), list):
                    section["n_clutter_wedges"] = tuple(section["n_clutter_wedges"])
                kwargs[name] = typ(**section)
        return cls(**kwargs)

    def config_hash(self) -> str:
        """Hash of everything that can change results, including map contents."""
        payload = self.to_dict()
        payload["map_contents"] = {
            m: sha256_hex(resolve_map(m).read_text(encoding="utf-8")) for m in self.maps
        }
        return sha256_hex(canonical_json(payload))


def base_seed_override(default: int) -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


class EmptyBandError(ValueError):
    def __init__(self, distance_m: float, nearest_m: float | None):
        self.distance_m = distance_m
        self.nearest_m = nearest_m
        hint = "no free cells at any distance" if nearest_m is None else (
            f"nearest achievable distance is {nearest_m:.2f} m"
        )
        super().__init__(f"no start cells at {distance_m} m (+/- half a cell); {hint}")


def sample_start_poses(
    world: World,
    distance_m: float,
    n: int,
    rng: np.random.Generator,
    distance_field: np.ndarray | None = None,
) -> list[RobotPose]:
    """Uniform poses over the geodesic distance band around ``distance_m``.

    Band half-width is half a cell.  The target cell itself never
    qualifies.  Cells are drawn with replacement, headings uniformly.
    """
    if distance_field is None:
        distance_field = geodesic_distances(world, world.target.cell)
    half = world.cell_size_m / 2.0
    band = np.argwhere(
        (np.abs(distance_field - distance_m) <= half) & (distance_field > 0)
    )
    if band.shape[0] == 0:
        finite = distance_field[np.isfinite(distance_field) & (distance_field > 0)]
        nearest = None
        if finite.size:
            nearest = float(finite[np.abs(finite - distance_m).argmin()])
        raise EmptyBandError(distance_m, nearest)
    cells = rng.integers(band.shape[0], size=n)
    headings = rng.integers(8, size=n)
    return [
        RobotPose(cell=(int(band[i][0]), int(band[i][1])), heading=int(h))
        for i, h in zip(cells, headings)
    ]


@dataclass(frozen=True)
class TimeCell:
    map: str
    system: SystemKind
    distance_m: float
    run_means_s: tuple[float, ...]
    mean_s: float
    std_s: float


@dataclass(frozen=True)
class AccuracyCell:
    map: str
    system: SystemKind
    run_values: tuple[float, ...]
    mean: float
    std: float


@dataclass(frozen=True)
class PooledAccuracyCell:
    system: SystemKind
    run_values: tuple[float, ...]
    mean: float
    std: float


@dataclass(frozen=True)
class ExperimentReport:
    config_hash: str
    base_seed: int
    times: tuple[TimeCell, ...]
    accuracy: tuple[AccuracyCell, ...]
    pooled_accuracy: tuple[PooledAccuracyCell, ...]

    def time_cell(self, map_name: str, system: SystemKind, distance_m: float) -> TimeCell:
        for cell in self.times:
            if (
                cell.map == map_name
                and cell.system == system
                and math.isclose(cell.distance_m, distance_m)
            ):
                return cell
        raise KeyError((map_name, system, distance_m))

    def accuracy_cell(self, map_name: str, system: SystemKind) -> AccuracyCell:
        for cell in self.accuracy:
            if cell.map == map_name and cell.system == system:
                return cell
        raise KeyError((map_name, system))

    def pooled_accuracy_cell(self, system: SystemKind) -> PooledAccuracyCell:
        for cell in self.pooled_accuracy:
            if cell.system == system:
                return cell
        raise KeyError(system)

    def to_dict(self) -> dict:
        return {
            "schema": "ghal360-report",
            "v": 1,
            "config_hash": self.config_hash,
            "base_seed": self.base_seed,
            "times": [
                {
                    "map": c.map,
                    "system": c.system.value,
                    "distance_m": c.distance_m,
                    "run_means_s": list(c.run_means_s),
                    "mean_s": c.mean_s,
                    "std_s": c.std_s,
                }
                for c in self.times
            ],
            "accuracy": [
                {
                    "map": c.map,
                    "system": c.system.value,
                    "run_values": list(c.run_values),
                    "mean": c.mean,
                    "std": c.std,
                }
                for c in self.accuracy
            ],
            "pooled_accuracy": [
                {
                    "system": c.system.value,
                    "run_values": list(c.run_values),
                    "mean": c.mean,
                    "std": c.std,
                }
                for c in self.pooled_accuracy
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(
            config_hash=data["config_hash"],
            base_seed=data["base_seed"],
            times=tuple(
                TimeCell(
                    map=c["map"],
                    system=SystemKind(c["system"]),
                    distance_m=c["distance_m"],
                    run_means_s=tuple(c["run_means_s"]),
                    mean_s=c["mean_s"],
                    std_s=c["std_s"],
                )
                for c in data["times"]
            ),
            accuracy=tuple(
                AccuracyCell(
                    map=c["map"],
                    system=SystemKind(c["system"]),
                    run_values=tuple(c["run_values"]),
                    mean=c["mean"],
                    std=c["std"],
                )
                for c in data["accuracy"]
            ),
            pooled_accuracy=tuple(
                PooledAccuracyCell(
                    system=SystemKind(c["system"]),
                    run_values=tuple(c["run_values"]),
                    mean=c["mean"],
                    std=c["std"],
                )
                for c in data["pooled_accuracy"]
            ),
        )


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def _block_seed(base_seed: int, m: int, d: int, r: int, lane: int) -> int:
    ss = np.random.SeedSequence(base_seed, spawn_key=(m, d, r, lane))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_experiment(
    cfg: ExperimentConfig,
    policy: QTable | None = None,
    progress=None,
) -> ExperimentReport:
    """Full factorial over maps x systems x distances x runs x trials.

    ``policy`` overrides ``cfg.policy_file``; one of them is required when
    a learning system is in ``cfg.systems``.  ``progress`` is an optional
    callable receiving short status strings.
    """
    needs_policy = any(s.needs_policy for s in cfg.systems)
    if policy is None and needs_policy:
        if cfg.policy_file is None:
            raise ValueError("RLGS/GHAL360 requested but no policy given")
        from .learning import load_qtable

        policy = load_qtable(cfg.policy_file)

    trial_cfg = TrialConfig(
        human=cfg.human,
        detector=cfg.detector,
        filter=cfg.filter,
        budget_ticks=cfg.budget_ticks,
        mdp=cfg.mdp,
        record_trace=False,
    )
    block = cfg.trials_per_run

    # correct[map][system][distance][run] -> list of per-trial outcomes
    times: list[TimeCell] = []
    correct: dict[tuple[int, int], dict[int, list[list[bool]]]] = {}

    worlds: list[World] = []
    fields: list[np.ndarray] = []
    for name in cfg.maps:
        world = load_map(resolve_map(name))
        worlds.append(world)
        fields.append(geodesic_distances(world, world.target.cell))

    for mi, world in enumerate(worlds):
        dist_field = fields[mi]
        for di, distance in enumerate(cfg.distances_m):
            # One pose list and one seed list per run, shared by all systems.
            run_poses = []
            run_seeds = []
            for ri in range(cfg.runs):
                pose_rng = np.random.default_rng(
                    np.random.SeedSequence(cfg.base_seed, spawn_key=(mi, di, ri, 0))
                )
                run_poses.append(
                    sample_start_poses(world, distance, block, pose_rng, dist_field)
                )
                run_seeds.append(paired_seeds(block, _block_seed(cfg.base_seed, mi, di, ri, 1)))
            for si, system in enumerate(cfg.systems):
                if progress is not None:
                    progress(
                        f"{world.name} {system.value} {distance:g}m "
                        f"({cfg.runs} runs x {block} trials)"
                    )
                run_means = []
                for ri in range(cfg.runs):
                    elapsed = []
                    oks = []
                    for pose, seed in zip(run_poses[ri], run_seeds[ri]):
                        result = run_trial(
                            system,
                            world,
                            pose,
                            int(seed),
                            cfg=trial_cfg,
                            policy=policy if system.needs_policy else None,
                            start_distance_m=float(dist_field[pose.cell]),
                        )
                        elapsed.append(result.elapsed_s)
                        oks.append(result.correct)
                    run_means.append(float(np.mean(elapsed)))
                    correct.setdefault((mi, si), {}).setdefault(di, []).append(oks)
                mean_s, std_s = _mean_std(run_means)
                times.append(
                    TimeCell(
                        map=world.name,
                        system=system,
                        distance_m=q6(distance),
                        run_means_s=tuple(q6(v) for v in run_means),
                        mean_s=q6(mean_s),
                        std_s=q6(std_s),
                    )
                )

    accuracy: list[AccuracyCell] = []
    pooled_runs: dict[int, list[list[bool]]] = {}
    for mi, world in enumerate(worlds):
        for si, system in enumerate(cfg.systems):
            per_run: list[list[bool]] = [[] for _ in range(cfg.runs)]
            for di in range(len(cfg.distances_m)):
                for ri in range(cfg.runs):
                    per_run[ri].extend(correct[(mi, si)][di][ri])
            values = [float(np.mean(r)) for r in per_run]
            mean, std = _mean_std(values)
            accuracy.append(
                AccuracyCell(
                    map=world.name,
                    system=system,
                    run_values=tuple(q6(v) for v in values),
                    mean=q6(mean),
                    std=q6(std),
                )
            )
            bucket = pooled_runs.setdefault(si, [[] for _ in range(cfg.runs)])
            for ri in range(cfg.runs):
                bucket[ri].extend(per_run[ri])

    pooled: list[PooledAccuracyCell] = []
    for si, system in enumerate(cfg.systems):
        values = [float(np.mean(r)) for r in pooled_runs[si]]
        mean, std = _mean_std(values)
        pooled.append(
            PooledAccuracyCell(
                system=system,
                run_values=tuple(q6(v) for v in values),
                mean=q6(mean),
                std=q6(std),
            )
        )

    return ExperimentReport(
        config_hash=cfg.config_hash(),
        base_seed=cfg.base_seed,
        times=tuple(times),
        accuracy=tuple(accuracy),
        pooled_accuracy=tuple(pooled),
    )


TIMES_CSV_HEADER = "map,system,distance_m,mean_time_s,std_time_s"
ACCURACY_CSV_HEADER = "map,system,accuracy_mean,accuracy_std"


def emit(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """Write report.json, times.csv, and accuracy.csv; byte-stable."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    json_path = out / "report.json"
    json_path.write_text(canonical_json(report.to_dict()) + "\n", encoding="utf-8")
    paths.append(json_path)

    lines = [TIMES_CSV_HEADER]
    for c in report.times:
        lines.append(
            f"{c.map},{c.system.value},{c.distance_m:.6g},{c.mean_s:.6g},{c.std_s:.6g}"
        )
    times_path = out / "times.csv"
    times_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    paths.append(times_path)

    lines = [ACCURACY_CSV_HEADER]
    for c in report.accuracy:
        lines.append(f"{c.map},{c.system.value},{c.mean:.6g},{c.std:.6g}")
    lines.append("")
    lines.append("system,pooled_accuracy_mean,pooled_accuracy_std")
    for p in report.pooled_accuracy:
        lines.append(f"{p.system.value},{p.mean:.6g},{p.std:.6g}")
    acc_path = out / "accuracy.csv"
    acc_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    paths.append(acc_path)
    return paths
