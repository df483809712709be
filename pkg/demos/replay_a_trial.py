"""Record one guided trial and play it back as text frames.

The trace file is plain JSON lines (header, one line per tick, result
footer), so anything downstream can parse it; the bundled renderer just
draws the grid with the robot glyph showing its heading.
"""

from pathlib import Path

from ghal360 import (
    MdpConfig,
    RobotPose,
    SystemKind,
    TrialConfig,
    load_map,
    read_trace,
    replay,
    run_trial,
    solve_value_iteration,
    write_trace,
)
from ghal360.experiment import resolve_map, sample_start_poses
from ghal360.world import geodesic_distances
import numpy as np

world = load_map(resolve_map("corridor"))
policy = solve_value_iteration(MdpConfig())

# start somewhere on the 8 m geodesic band around the target
rng = np.random.default_rng(4)
start = sample_start_poses(world, 8.0, 1, rng)[0]
print(f"start {start.cell} heading {start.heading}, "
      f"target {world.target.cell} ({world.target_name})")

result = run_trial(
    SystemKind.GHAL360,
    world,
    start,
    seed=3,
    cfg=TrialConfig(budget_ticks=90),
    policy=policy,
)
print(f"success={result.success} correct={result.correct} "
      f"ticks={result.ticks} elapsed={result.elapsed_s:.0f}s")

out = Path("out/corridor_trial.jsonl")
out.parent.mkdir(exist_ok=True)
write_trace(result, world, out)

header, ticks, footer = read_trace(out)
print(f"trace: {len(ticks)} tick lines, map {header['map']!r}\n")

# every 8th frame keeps the printout short; the result line always shows
for frame in replay(out, every=8):
    print(frame)
    print()
