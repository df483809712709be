"""Run the five systems head to head on one shipped map.

Uses the exact value-iteration policy as the guidance table so the script
stays fast; swap in a trained table (see train_and_inspect.py) for the
full pipeline.  Trials are paired: every system replays the same human,
detector, and filter randomness, so the spread between rows is treatment,
not luck.
"""

from ghal360 import (
    ExperimentConfig,
    MdpConfig,
    emit,
    run_experiment,
    solve_value_iteration,
)

policy = solve_value_iteration(MdpConfig())

cfg = ExperimentConfig(
    maps=("home",),
    distances_m=(4.0, 8.0, 12.0),
    trials_per_distance=50,
    runs=5,
)
report = run_experiment(cfg, policy=policy, progress=print)

# --- completion time by start distance ---------------------------------------

print("\nmean completion time (s) on the home map")
print(f"{'system':>8}", *(f"{d:>10.0f}m" for d in cfg.distances_m))
for system in cfg.systems:
    row = [report.time_cell("home", system, d) for d in cfg.distances_m]
    print(
        f"{system.value:>8}",
        *(f"{c.mean_s:7.1f}+-{c.std_s:<4.1f}" for c in row),
    )

# --- identification accuracy -------------------------------------------------

print("\nfraction of trials ending on the true target")
for system in cfg.systems:
    c = report.accuracy_cell("home", system)
    print(f"{system.value:>8}  {c.mean:.3f} +- {c.std:.3f}")

paths = emit(report, "out/compare_systems")
print("\nwrote", *[str(p) for p in paths])
