"""Command-line entry points.

Verbs: train, solve, eval-checkpoints, experiment, replay, serve.  Every
verb is deterministic given its flags: the same invocation produces
byte-identical output files.  The GHAL_SEED environment variable, when
set, overrides the seed of any verb that takes one.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .experiment import (
    SEED_ENV_VAR,
    ExperimentConfig,
    base_seed_override,
    emit,
    resolve_map,
    run_experiment,
    shipped_maps,
)
from .learning import (
    TrainerConfig,
    evaluate_checkpoints,
    load_qtable,
    save_qtable,
    train,
)
from .mdp import MdpConfig, ScenarioConfig, solve_value_iteration
from .serialize import canonical_json, q6
from .systems import SystemKind
from .trace import replay
from .world import load_map

CHECKPOINT_PATTERN = "checkpoint_{episodes:06d}.ghqt"


def _scenario_from_flags(args: argparse.Namespace) -> ScenarioConfig:
    if args.scenario == "uniform":
        return ScenarioConfig()
    return ScenarioConfig.pattern_uniform(args.max_clutter)


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--scenario",
        choices=("patterns", "uniform"),
        default="patterns",
        help="episode start distribution: every clutter pattern up to "
        "--max-clutter equally likely, or clutter count uniform over [0, 7]",
    )
    p.add_argument("--max-clutter", type=int, default=3, metavar="K")


def _cmd_train(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = base_seed_override(args.seed)
    trainer = TrainerConfig(
        alpha=args.alpha,
        gamma=args.gamma,
        epsilon_start=args.epsilon_start,
        epsilon_end=args.epsilon_end,
        episodes=args.episodes,
        checkpoint_every=args.checkpoint_every,
    )
    scenario = _scenario_from_flags(args)

    sink = None
    if args.save_checkpoints:
        ckpt_dir = out / "checkpoints"
        ckpt_dir.mkdir(exist_ok=True)

        def sink(episodes: int, table) -> None:
            save_qtable(table, ckpt_dir / CHECKPOINT_PATTERN.format(episodes=episodes))

    result = train(trainer, MdpConfig(), scenario, seed, checkpoint_sink=sink)
    save_qtable(result.table, out / "policy.ghqt")
    with (out / "rewards.csv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("episode,reward\n")
        for ep, r in enumerate(result.episode_rewards):
            fh.write(f"{ep},{r:.10g}\n")
    meta = {
        "seed": seed,
        "episodes": trainer.episodes,
        "alpha": q6(trainer.alpha),
        "gamma": q6(trainer.gamma),
        "epsilon_start": q6(trainer.epsilon_start),
        "epsilon_end": q6(trainer.epsilon_end),
        "checkpoint_every": trainer.checkpoint_every,
        "scenario": args.scenario,
        "max_clutter": args.max_clutter if args.scenario == "patterns" else None,
        "checkpoints": result.checkpoint_episodes,
    }
    (out / "train.json").write_text(canonical_json(meta) + "\n", encoding="utf-8")
    print(f"trained {trainer.episodes} episodes (seed {seed}) -> {out / 'policy.ghqt'}")
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    table = solve_value_iteration(MdpConfig(), gamma=args.gamma, tol=args.tol)
    save_qtable(table, args.out)
    print(f"value iteration (gamma {args.gamma}) -> {args.out}")
    return 0


def _cmd_eval_checkpoints(args: argparse.Namespace) -> int:
    ckpt_dir = Path(args.checkpoints)
    files = sorted(ckpt_dir.glob("checkpoint_*.ghqt"))
    if not files:
        print(f"no checkpoint_*.ghqt files in {ckpt_dir}", file=sys.stderr)
        return 2
    episodes = [int(f.stem.split("_")[1]) for f in files]
    policies = [load_qtable(f) for f in files]
    seed = base_seed_override(args.seed)
    curve = evaluate_checkpoints(
        policies,
        episodes,
        MdpConfig(),
        _scenario_from_flags(args),
        seed,
        eval_episodes=args.eval_episodes,
    )
    with Path(args.out).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("episodes,mean_reward,fgs_mean_reward\n")
        for ep, r in zip(curve.episodes, curve.mean_reward):
            fh.write(f"{ep},{q6(r)},{q6(curve.fgs_mean_reward)}\n")
    print(
        f"evaluated {len(files)} checkpoints (seed {seed}); "
        f"final {q6(curve.mean_reward[-1])} vs reference {q6(curve.fgs_mean_reward)}"
    )
    return 0


def _parse_systems(raw: str) -> tuple[SystemKind, ...]:
    return tuple(SystemKind(s.strip()) for s in raw.split(","))


def _cmd_experiment(args: argparse.Namespace) -> int:
    if args.config:
        import yaml

        data = yaml.safe_load(Path(args.config).read_text(encoding="utf-8")) or {}
        cfg = ExperimentConfig.from_dict(data)
    else:
        cfg = ExperimentConfig()

    from dataclasses import replace

    overrides: dict = {}
    if args.maps:
        overrides["maps"] = tuple(m.strip() for m in args.maps.split(","))
    if args.systems:
        overrides["systems"] = _parse_systems(args.systems)
    if args.distances:
        overrides["distances_m"] = tuple(float(d) for d in args.distances.split(","))
    if args.trials is not None:
        overrides["trials_per_distance"] = args.trials
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.budget is not None:
        overrides["budget_ticks"] = args.budget
    if args.policy is not None:
        overrides["policy_file"] = args.policy
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if overrides:
        cfg = replace(cfg, **overrides)
    cfg = replace(cfg, base_seed=base_seed_override(cfg.base_seed))

    progress = None if args.quiet else lambda line: print(line, flush=True)
    report = run_experiment(cfg, progress=progress)
    paths = emit(report, args.out)
    for p in paths:
        print(p)
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    frames = replay(args.trace, every=args.every)
    if args.out:
        Path(args.out).write_text("\n".join(frames) + "\n", encoding="utf-8")
    else:
        for frame in frames:
            print(frame)
            print()
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .teleop import SessionConfig, serve_session

    world = load_map(resolve_map(args.map))
    policy = load_qtable(args.policy) if args.policy else None
    cfg = SessionConfig(seed=base_seed_override(args.seed), cadence_ms=args.cadence_ms)
    print(f"serving {world.name} on ws://{args.host}:{args.port}/session")
    serve_session(world, policy, host=args.host, port=args.port, cfg=cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghal360",
        description="Wedge-guidance target-search simulator and experiment harness.",
        epilog=f"Shipped maps: {', '.join(shipped_maps())}. "
        f"{SEED_ENV_VAR} overrides any verb's seed.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("train", help="Q-learn a guidance policy on the abstract scene MDP")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=TrainerConfig.episodes)
    p.add_argument("--alpha", type=float, default=TrainerConfig.alpha)
    p.add_argument("--gamma", type=float, default=TrainerConfig.gamma)
    p.add_argument("--epsilon-start", type=float, default=TrainerConfig.epsilon_start)
    p.add_argument("--epsilon-end", type=float, default=TrainerConfig.epsilon_end)
    p.add_argument("--checkpoint-every", type=int, default=TrainerConfig.checkpoint_every)
    p.add_argument("--save-checkpoints", action="store_true")
    _add_scenario_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("solve", help="exact value-iteration policy for the same MDP")
    p.add_argument("--out", required=True, help="output .ghqt file")
    p.add_argument("--gamma", type=float, default=0.95)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("eval-checkpoints", help="score checkpoint policies against the greedy-sweep reference")
    p.add_argument("--checkpoints", required=True, help="directory of checkpoint_*.ghqt")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-episodes", type=int, default=400)
    _add_scenario_flags(p)
    p.set_defaults(func=_cmd_eval_checkpoints)

    p = sub.add_parser("experiment", help="paired-trial comparison across systems")
    p.add_argument("--config", help="YAML config; flags override its fields")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--maps", help="comma-separated map names or paths")
    p.add_argument("--systems", help="comma-separated subset of mfo,adv,fgs,rlgs,ghal360")
    p.add_argument("--distances", help="comma-separated start distances in meters")
    p.add_argument("--trials", type=int, help="trials per distance (split over runs)")
    p.add_argument("--runs", type=int)
    p.add_argument("--budget", type=int, help="tick budget per trial")
    p.add_argument("--policy", help="GHQT policy file for rlgs/ghal360")
    p.add_argument("--seed", type=int)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("replay", help="render a recorded trace as text frames")
    p.add_argument("trace")
    p.add_argument("--every", type=int, default=1, metavar="N", help="render every Nth tick")
    p.add_argument("--out", help="write frames to a file instead of stdout")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("serve", help="live teleoperation session over WebSocket")
    p.add_argument("--map", required=True)
    p.add_argument("--policy", help="GHQT policy file; greedy-sweep guidance if omitted")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8360)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cadence-ms", type=int, default=2000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
