"""Drive a teleop session by hand, no sockets involved.

SessionCore speaks the exact wire protocol of the WebSocket endpoint but
synchronously: feed it JSON frames, get back state broadcasts.  The same
sequence over a real socket comes from `ghal360 serve --map office` (or
serve_session below).
"""

import json
from pathlib import Path

from ghal360 import SessionConfig, SessionCore, load_map, record_session
from ghal360.experiment import resolve_map

world = load_map(resolve_map("office"))
core = SessionCore(world, policy=None, cfg=SessionConfig(seed=2, cadence_ms=0))


def show(b):
    intent = b["intent"]
    intent_s = f"{intent['wedge']}@{intent['density']:.2f}" if intent["decided"] else "-"
    print(
        f"tick {b['tick']:2d}  phase={b['phase']:8s} focus={b['focus']} "
        f"robot=({b['map']['robot']['row']},{b['map']['robot']['col']}) "
        f"heading={b['map']['robot']['heading']} "
        f"indicator={b['indicator'] or '-'} intent={intent_s}"
    )


show(core.broadcast())

# the opening broadcast already shows indicator=right: the guidance
# policy wants the gaze swung clockwise.  dawdle a bit first, then obey.
script = [
    {"type": "set_fov", "wedges": 4},
    {"type": "tick"},
    {"type": "move_forward"},
    {"type": "tick"},
    {"type": "look_right"},
    {"type": "look_right"},
    {"type": "tick"},
    {"type": "confirm"},
]
for msg in script:
    for frame in core.handle_text(json.dumps(dict(msg, v=1))):
        show(json.loads(frame))
    if core.phase != "running":
        break

result = core.result()
print(f"\nsession over: phase={core.phase}, {result.ticks} ticks, "
      f"{result.elapsed_s:.0f} simulated seconds")

Path("out").mkdir(exist_ok=True)
record_session(core, "out/session.jsonl")
print("wrote out/session.jsonl (replayable with `ghal360 replay`)")

# to serve the same thing over ws://127.0.0.1:8360/session:
#   from ghal360 import serve_session
#   serve_session(world, policy=None)
