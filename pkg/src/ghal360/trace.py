"""Trial trace logs: JSON-lines files, one record per tick, replayable as text.

Layout: a header line (schema tag, system, map, seed, start pose, target),
one line per tick, and a result footer.  Live teleop sessions write the
same schema, so the replay renderer serves both.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterator

from .serialize import canonical_json, q6
from .systems import TickRecord, TrialResult
from .world import World

TRACE_SCHEMA = "ghal360-trace"
TRACE_VERSION = 1

HEADING_GLYPHS = ">/^\\</v\\"  # 8 headings, east first, counterclockwise


def _pose_obj(pose) -> dict:
    return {"cell": [int(pose.cell[0]), int(pose.cell[1])], "heading": int(pose.heading)}


def tick_line(rec: TickRecord) -> str:
    return canonical_json(
        {
            "t": rec.t,
            "pose": _pose_obj(rec.pose),
            "focus": rec.focus,
            "wedges": [int(v) for v in rec.wedges],
            "indicator": rec.indicator.name.lower() if rec.indicator is not None else None,
            "intent": rec.intent,
            "move": rec.move.value if rec.move is not None else None,
            "command": rec.command.value if rec.command is not None else None,
        }
    )


def write_trace(result: TrialResult, world: World, out: IO[str] | str | Path) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8") as f:
            write_trace(result, world, f)
        return
    header = {
        "schema": TRACE_SCHEMA,
        "v": TRACE_VERSION,
        "system": result.system.value,
        "map": world.name,
        "grid": ["".join("#" if world.walls[r, c] else "." for c in range(world.width)) for r in range(world.height)],
        "objects": [{"name": o.name, "cell": [o.cell[0], o.cell[1]]} for o in world.objects],
        "target": world.target_name,
        "seed": result.seed,
        "cell_size_m": q6(world.cell_size_m),
    }
    out.write(canonical_json(header) + "\n")
    for rec in result.trajectory:
        out.write(tick_line(rec) + "\n")
    footer = {
        "result": {
            "ticks": result.ticks,
            "elapsed_s": q6(result.elapsed_s),
            "success": result.success,
            "correct": result.correct,
            "start_distance_m": q6(result.start_distance_m),
        }
    }
    out.write(canonical_json(footer) + "\n")


def read_trace(path: str | Path) -> tuple[dict, list[dict], dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty trace")
    header = json.loads(lines[0])
    if header.get("schema") != TRACE_SCHEMA:
        raise ValueError(f"{path}: not a trace file")
    footer = json.loads(lines[-1])
    if "result" not in footer:
        raise ValueError(f"{path}: missing result footer")
    ticks = [json.loads(line) for line in lines[1:-1]]
    return header, ticks, footer


def render_frames(header: dict, ticks: list[dict], footer: dict) -> Iterator[str]:
    """ASCII frames: status line, then the grid with robot/target/objects."""
    grid = [list(row) for row in header["grid"]]
    target = header["target"]
    overlay_base = [row[:] for row in grid]
    for obj in header["objects"]:
        r, c = obj["cell"]
        overlay_base[r][c] = "T" if obj["name"] == target else "o"
    for rec in ticks:
        rows = [row[:] for row in overlay_base]
        (r, c), heading = rec["pose"]["cell"], rec["pose"]["heading"]
        rows[r][c] = HEADING_GLYPHS[heading]
        status = (
            f"t={rec['t']} heading={heading} focus={rec['focus']}"
            f" wedges={''.join(str(v) for v in rec['wedges'])}"
            f" indicator={rec['indicator'] or '-'}"
            f" intent={'-' if rec['intent'] is None else rec['intent']}"
            f" move={rec['move'] or '-'} command={rec['command'] or '-'}"
        )
        yield status + "\n" + "\n".join("".join(row) for row in rows)
    res = footer["result"]
    yield (
        f"result: success={res['success']} correct={res['correct']}"
        f" ticks={res['ticks']} elapsed_s={res['elapsed_s']}"
        f" start_distance_m={res['start_distance_m']}"
    )


def replay(path: str | Path, every: int = 1) -> Iterator[str]:
    header, ticks, footer = read_trace(path)
    frames = list(render_frames(header, ticks, footer))
    body, tail = frames[:-1], frames[-1]
    yield from body[::every]
    yield tail
