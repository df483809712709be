/**
 * Wire protocol of the session endpoint: UTF-8 JSON, one object per
 * WebSocket text frame, every message carrying `"v": 1`.
 *
 * The server emits canonical JSON (sorted keys, no whitespace) and the
 * golden protocol files pin those exact bytes, so client messages are
 * serialized the same way: a gesture always maps to one exact string.
 */

export const PROTOCOL_VERSION = 1;
export const NUM_WEDGES = 8;
export const DEFAULT_SERVER_URL = "ws://127.0.0.1:8360/session";

export type Phase = "running" | "found" | "aborted";
export type Indicator = "left" | "right" | "confirm" | null;

export interface WedgeView {
  /** 0 empty, 1 clutter, 2 target, 3 target plus clutter */
  value: number;
  labels: string[];
}

export interface IntentView {
  decided: boolean;
  density: number;
  wedge: number | null;
}

export interface RobotView {
  row: number;
  col: number;
  heading: number;
}

export interface MapView {
  cell_size_m: number;
  rows: string[];
  robot: RobotView;
}

export interface StateFrame {
  v: typeof PROTOCOL_VERSION;
  type: "state";
  tick: number;
  phase: Phase;
  focus: number;
  focus_world_wedge: number;
  fov_wedges: number;
  indicator: Indicator;
  intent: IntentView;
  panorama: WedgeView[];
  map: MapView;
}

export interface ErrorFrame {
  v: typeof PROTOCOL_VERSION;
  type: "error";
  error: string;
}

export type ServerFrame = StateFrame | ErrorFrame;

export class ProtocolError extends Error {}

/** JSON with recursively sorted keys and no whitespace, matching the server. */
export function canonicalJson(value: unknown): string {
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  if (value !== null && typeof value === "object") {
    const record = value as Record<string, unknown>;
    const body = Object.keys(record)
      .sort()
      .map((key) => JSON.stringify(key) + ":" + canonicalJson(record[key]))
      .join(",");
    return "{" + body + "}";
  }
  return JSON.stringify(value);
}

export type Gesture =
  | { kind: "look"; dir: "left" | "right" }
  | { kind: "move"; dir: "forward" | "backward" }
  | { kind: "confirm" }
  | { kind: "tick" }
  | { kind: "reset" }
  | { kind: "fov"; wedges: number };

/** The one client message a gesture stands for; there is no other sender. */
export function messageForGesture(gesture: Gesture): string {
  switch (gesture.kind) {
    case "look":
      return canonicalJson({ v: PROTOCOL_VERSION, type: `look_${gesture.dir}` });
    case "move":
      return canonicalJson({ v: PROTOCOL_VERSION, type: `move_${gesture.dir}` });
    case "confirm":
    case "tick":
    case "reset":
      return canonicalJson({ v: PROTOCOL_VERSION, type: gesture.kind });
    case "fov": {
      const w = gesture.wedges;
      if (!Number.isInteger(w) || w < 1 || w > NUM_WEDGES) {
        throw new ProtocolError(`fov wedges must be an integer in 1..${NUM_WEDGES}, got ${w}`);
      }
      return canonicalJson({ v: PROTOCOL_VERSION, type: "set_fov", wedges: w });
    }
  }
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

/** Parse and validate one server frame; throws ProtocolError on anything off. */
export function parseServerFrame(text: string): ServerFrame {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new ProtocolError("server frame is not JSON");
  }
  if (!isRecord(raw) || raw.v !== PROTOCOL_VERSION) {
    throw new ProtocolError("missing or unsupported protocol version");
  }
  if (raw.type === "error") {
    if (typeof raw.error !== "string") throw new ProtocolError("error frame without message");
    return { v: PROTOCOL_VERSION, type: "error", error: raw.error };
  }
  if (raw.type !== "state") {
    throw new ProtocolError(`unknown frame type ${JSON.stringify(raw.type)}`);
  }
  const frame = raw as unknown as StateFrame;
  if (!Number.isInteger(frame.tick) || frame.tick < 0) {
    throw new ProtocolError("bad tick");
  }
  if (!["running", "found", "aborted"].includes(frame.phase)) {
    throw new ProtocolError(`bad phase ${JSON.stringify(frame.phase)}`);
  }
  if (!Number.isInteger(frame.focus) || frame.focus < 0 || frame.focus >= NUM_WEDGES) {
    throw new ProtocolError("focus out of range");
  }
  if (!Array.isArray(frame.panorama) || frame.panorama.length !== NUM_WEDGES) {
    throw new ProtocolError("panorama must list all 8 wedges");
  }
  if (!isRecord(frame.map) || !Array.isArray(frame.map.rows) || !isRecord(frame.map.robot)) {
    throw new ProtocolError("bad map block");
  }
  return frame;
}
