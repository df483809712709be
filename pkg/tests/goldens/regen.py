"""Regenerate the teleop protocol goldens.

Run only when the wire protocol changes on purpose; the frontend test
suite consumes the same files, so regeneration is a protocol version
event, not routine maintenance.

    python3 tests/goldens/regen.py
"""

import json
from pathlib import Path

from ghal360 import SessionConfig, SessionCore
from ghal360.serialize import canonical_json
from ghal360.world import parse_map

HERE = Path(__file__).parent

SCRIPT = [
    '{"type":"look_left","v":1}',
    '{"type":"tick","v":1}',
    '{"type":"tick","v":1}',
    '{"type":"set_fov","v":1,"wedges":4}',
    '{"type":"move_forward","v":1}',
    'not-json{',
    '{"type":"confirm","v":1}',
    '{"type":"move_backward","v":1}',
    '{"type":"reset","v":1}',
    '{"type":"look_right","v":1}',
]


def main() -> None:
    map_text = (HERE / "session_map.map").read_text(encoding="utf-8")
    world = parse_map(map_text, name="session-room")
    core = SessionCore(world, policy=None, cfg=SessionConfig(seed=0, cadence_ms=0))
    broadcasts = [canonical_json(core.broadcast())]
    for frame in SCRIPT:
        broadcasts.extend(core.handle_text(frame))
    (HERE / "session_script.json").write_text(
        json.dumps({"v": 1, "map": "session_map.map", "seed": 0, "frames": SCRIPT}, indent=2)
        + "\n",
        encoding="utf-8",
    )
    (HERE / "session_broadcasts.jsonl").write_text(
        "\n".join(broadcasts) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(SCRIPT)} script frames, {len(broadcasts)} broadcasts")


if __name__ == "__main__":
    main()
