"""Live teleoperation sessions: a human operator replaces the virtual human.

The simulation core is synchronous and IO-free; :class:`SessionCore`
consumes client messages (dicts) and produces broadcast dicts, so the
protocol can be golden-tested without sockets.  :func:`create_app` wraps a
core per WebSocket connection and adds the wall-clock cadence.

Wire protocol (UTF-8 JSON, one object per WebSocket text frame), all
messages carry ``"v": 1``:

    client -> server  {"type": "look_left" | "look_right" | "move_forward"
                       | "move_backward" | "confirm" | "tick"
                       | "set_fov", "wedges": 1..8
                       | "reset"}
    server -> client  {"type": "state", ...}   one per client message
                      {"type": "error", "error": str}  malformed input only

A ``tick`` message advances one idle cadence step (the filter/controller
path).  With ``cadence_ms > 0`` the server also fires that step on its own
whenever the client stays quiet for the period, so manual ticks and
wall-clock ticks never stack.  Unknown message types or a missing/wrong
version close the socket with code 4400; malformed JSON gets an error
reply and changes nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .intent import Evidence, FilterConfig, IntentFilter, controller
from .learning import QTable
from .serialize import canonical_json, q6
from .systems import TICK_SECONDS, SystemKind, TickRecord, TrialResult, _indicator, trial_streams
from .trace import write_trace
from .wedges import GuidanceAction, to_egocentric
from .world import (
    NUM_WEDGES,
    ControlCommand,
    DetectorConfig,
    HeadMotion,
    HumanMove,
    HumanState,
    RobotPose,
    World,
    apply_human_move,
    step_robot,
    target_in_focus,
)

PROTOCOL_VERSION = 1
CLOSE_BAD_MESSAGE = 4400

_MOVE_MESSAGES = {
    "look_left": HumanMove.LOOK_LEFT,
    "look_right": HumanMove.LOOK_RIGHT,
    "move_forward": HumanMove.MOVE_FORWARD,
    "move_backward": HumanMove.MOVE_BACKWARD,
}


class ProtocolError(Exception):
    """Client violation that closes the session."""

    def __init__(self, reason: str, code: int = CLOSE_BAD_MESSAGE) -> None:
        super().__init__(reason)
        self.reason = reason
        self.code = code


@dataclass(frozen=True)
class SessionConfig:
    seed: int = 0
    detector: DetectorConfig = DetectorConfig()
    filter: FilterConfig = FilterConfig()
    cadence_ms: int = 2000
    fov_wedges: int = 2

    def __post_init__(self) -> None:
        if self.cadence_ms < 0:
            raise ValueError("cadence_ms must be >= 0 (0 disables the timer)")
        if not 1 <= self.fov_wedges <= NUM_WEDGES:
            raise ValueError("fov_wedges must be in [1, 8]")


class SessionCore:
    """Deterministic session state machine.

    State is a function of (world, policy, seed, message sequence); the
    detector and filter streams are the same ones a :func:`run_trial` with
    this seed would use, so a session and a virtual-human trial with equal
    inputs draw identical noise.
    """

    def __init__(self, world: World, policy: QTable | None, cfg: SessionConfig | None = None):
        self.world = world
        self.policy = policy
        self.cfg = cfg or SessionConfig()
        self.system = SystemKind.GHAL360 if policy is not None else SystemKind.FGS
        self._reset_state()

    def _reset_state(self) -> None:
        _, self._rng_detector, rng_filter = trial_streams(self.cfg.seed)
        self.pose = RobotPose(self.world.robot_start, heading=0)
        self.human = HumanState(focus=0, last_motion=HeadMotion.NONE)
        self.filter = IntentFilter(self.cfg.filter, rng_filter)
        self.tick = 0
        self.phase = "running"
        self.fov_wedges = self.cfg.fov_wedges
        self.trace: list[TickRecord] = []
        self._observe()
        self._check_found()

    def _observe(self) -> None:
        """Draw the panorama the operator currently sees."""
        self._detection = tuple(
            self.world.detection_model.detect_detailed(
                self.pose, self.cfg.detector, self._rng_detector
            )
        )
        self._wedges = tuple(d.value for d in self._detection)
        self._refresh_indicator()

    def _refresh_indicator(self) -> None:
        """Recompute guidance from the already-drawn panorama."""
        ego = to_egocentric(self._wedges, self.human.focus)
        self._indicator_action = (
            _indicator(self.system, ego, self.policy) if self.phase == "running" else None
        )

    # -- message handling ------------------------------------------------

    def handle_text(self, text: str) -> list[str]:
        """Process one raw frame; returns reply frames (canonical JSON)."""
        try:
            msg = json.loads(text)
        except json.JSONDecodeError:
            return [canonical_json({"v": PROTOCOL_VERSION, "type": "error", "error": "malformed json"})]
        if not isinstance(msg, dict):
            return [canonical_json({"v": PROTOCOL_VERSION, "type": "error", "error": "malformed json"})]
        return [canonical_json(b) for b in self.handle_message(msg)]

    def handle_message(self, msg: dict) -> list[dict]:
        if msg.get("v") != PROTOCOL_VERSION:
            raise ProtocolError("unsupported protocol version")
        mtype = msg.get("type")
        if mtype in _MOVE_MESSAGES:
            self._step_move(_MOVE_MESSAGES[mtype])
        elif mtype == "tick":
            self._step_idle()
        elif mtype == "confirm":
            self._step_confirm()
        elif mtype == "set_fov":
            self._step_fov(msg)
        elif mtype == "reset":
            self._reset_state()
            return [self.broadcast()]
        else:
            raise ProtocolError(f"unknown message type: {mtype!r}")
        return [self.broadcast()]

    def _finished(self) -> bool:
        return self.phase != "running"

    def _record(self, move: HumanMove | None, command: ControlCommand | None) -> None:
        estimate = self.filter.estimate()
        self.trace.append(
            TickRecord(
                self.tick,
                self.pose,
                self.human.focus,
                self._wedges,
                self._indicator_action,
                estimate.wedge,
                move,
                command,
            )
        )
        self.tick += 1

    def _step_move(self, move: HumanMove) -> None:
        if self._finished():
            self._record(None, None)
            return
        self.human, command = apply_human_move(self.human, move)
        if command is not None:
            self.pose = step_robot(self.world, self.pose, command)
        self.filter.step(Evidence(self.human.last_motion, self.human.focus))
        self._record(move, command)
        self._observe()
        self._check_found()

    def _step_idle(self) -> None:
        if self._finished():
            self._record(None, None)
            return
        self.human = replace(self.human, last_motion=HeadMotion.NONE)
        estimate = self.filter.step(Evidence(HeadMotion.NONE, self.human.focus))
        command = controller(estimate)
        new_pose = step_robot(self.world, self.pose, command)
        dh = (new_pose.heading - self.pose.heading) % NUM_WEDGES
        if dh:
            # keep gaze and belief world-fixed under base rotation
            self.human = replace(self.human, focus=(self.human.focus - dh) % NUM_WEDGES)
            self.filter.rotate(-dh)
        self.pose = new_pose
        self._record(None, command)
        self._observe()
        self._check_found()

    def _step_confirm(self) -> None:
        if not self._finished():
            hit = target_in_focus(self.world, self.pose, self.human, self.cfg.detector)
            self.phase = "found" if hit else "aborted"
            self._refresh_indicator()
        self._record(None, None)

    def _step_fov(self, msg: dict) -> None:
        wedges = msg.get("wedges")
        if not isinstance(wedges, int) or isinstance(wedges, bool) or not 1 <= wedges <= NUM_WEDGES:
            raise ProtocolError("set_fov wedges must be an integer in [1, 8]")
        self.fov_wedges = wedges
        self._record(None, None)

    def _check_found(self) -> None:
        if target_in_focus(self.world, self.pose, self.human, self.cfg.detector):
            self.phase = "found"
            self._refresh_indicator()

    # -- outputs -----------------------------------------------------------

    def broadcast(self) -> dict:
        indicator = self._indicator_action
        estimate = self.filter.estimate()
        return {
            "v": PROTOCOL_VERSION,
            "type": "state",
            "tick": self.tick,
            "phase": self.phase,
            "focus": self.human.focus,
            "focus_world_wedge": (self.pose.heading + self.human.focus) % NUM_WEDGES,
            "fov_wedges": self.fov_wedges,
            "indicator": None if indicator is None else indicator.name.lower(),
            "panorama": [
                {"value": int(d.value), "labels": list(d.labels)} for d in self._detection
            ],
            "intent": {
                "wedge": estimate.wedge,
                "density": q6(estimate.density),
                "decided": estimate.decided,
            },
            "map": {
                "rows": ["".join("#" if w else "." for w in row) for row in self.world.walls],
                "cell_size_m": q6(self.world.cell_size_m),
                "robot": {
                    "row": self.pose.cell[0],
                    "col": self.pose.cell[1],
                    "heading": self.pose.heading,
                },
            },
        }

    def result(self) -> TrialResult:
        """Session outcome in the exact shape of a virtual-human trial."""
        found = self.phase == "found"
        return TrialResult(
            system=self.system,
            seed=int(self.cfg.seed),
            start_distance_m=0.0,
            ticks=self.tick,
            elapsed_s=self.tick * TICK_SECONDS,
            success=found,
            correct=found,
            trajectory=tuple(self.trace),
        )


def record_session(core: SessionCore, out) -> None:
    """Write the session so far as a replayable trace log."""
    write_trace(core.result(), core.world, out)


def create_app(world: World, policy: QTable | None, cfg: SessionConfig | None = None):
    """FastAPI app exposing one SessionCore per /session connection."""
    import asyncio

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    cfg = cfg or SessionConfig()
    app = FastAPI()

    async def session(ws: WebSocket) -> None:
        await ws.accept()
        core = SessionCore(world, policy, cfg)
        await ws.send_text(canonical_json(core.broadcast()))
        try:
            while True:
                if cfg.cadence_ms > 0:
                    try:
                        text = await asyncio.wait_for(
                            ws.receive_text(), timeout=cfg.cadence_ms / 1000.0
                        )
                    except asyncio.TimeoutError:
                        core._step_idle()
                        await ws.send_text(canonical_json(core.broadcast()))
                        continue
                else:
                    text = await ws.receive_text()
                try:
                    for frame in core.handle_text(text):
                        await ws.send_text(frame)
                except ProtocolError as err:
                    await ws.close(code=err.code, reason=err.reason)
                    return
        except WebSocketDisconnect:
            return

    # bind the annotation to the class, not the lazy-import string form
    session.__annotations__["ws"] = WebSocket
    app.websocket("/session")(session)
    return app


def serve_session(
    world: World,
    policy: QTable | None,
    host: str = "127.0.0.1",
    port: int = 8360,
    cfg: SessionConfig | None = None,
) -> None:
    """Run the session server until interrupted."""
    import uvicorn

    uvicorn.run(create_app(world, policy, cfg), host=host, port=port, log_level="warning")
