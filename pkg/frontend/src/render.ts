/**
 * Rendering as data: both panes reduce a ViewModel to a flat list of draw
 * ops. The canvas code in main.ts interprets ops; tests assert on them
 * directly, so pixel concerns never leak into the protocol logic.
 */

import { NUM_WEDGES, StateFrame } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

export type DrawOp =
  | { op: "banner"; text: string }
  | {
      op: "wedge";
      /** 0-based screen slot, left to right */
      slot: number;
      wedge: number;
      value: number;
      labels: string[];
      focused: boolean;
    }
  | { op: "arrow"; dir: "left" | "right" }
  | { op: "highlight"; wedge: number }
  | { op: "strip_offset"; wedges: number }
  | { op: "grid"; rows: string[] }
  | { op: "robot"; row: number; col: number }
  | { op: "orientation"; wedge: number }
  | { op: "intent"; wedge: number; density: number }
  | { op: "status"; tick: number; phase: string };

const RECONNECT_BANNER: DrawOp = { op: "banner", text: "disconnected, reconnecting" };

/**
 * Wedges shown for a display width: the focused wedge plus neighbors,
 * biased left when the width is even. Wedge index grows counterclockwise,
 * so screen-left neighbors are focus+1, focus+2, ...
 */
export function visibleWedges(focus: number, fovWedges: number): number[] {
  const left = Math.ceil((fovWedges - 1) / 2);
  const out: number[] = [];
  for (let i = 0; i < fovWedges; i++) {
    out.push((focus + left - i + NUM_WEDGES) % NUM_WEDGES);
  }
  return out;
}

export function viewportOps(vm: ViewModel): DrawOp[] {
  if (!vm.ready()) return [RECONNECT_BANNER];
  const s = vm.state as StateFrame;
  const ops: DrawOp[] = [];
  if (vm.dragOffset !== 0) {
    ops.push({ op: "strip_offset", wedges: vm.dragOffset });
  }
  visibleWedges(s.focus, s.fov_wedges).forEach((wedge, slot) => {
    const view = s.panorama[wedge];
    if (view === undefined) return;
    ops.push({
      op: "wedge",
      slot,
      wedge,
      value: view.value,
      labels: view.labels,
      focused: wedge === s.focus,
    });
  });
  if (s.indicator === "left" || s.indicator === "right") {
    ops.push({ op: "arrow", dir: s.indicator });
  } else if (s.indicator === "confirm") {
    ops.push({ op: "highlight", wedge: s.focus });
  }
  ops.push({ op: "status", tick: s.tick, phase: s.phase });
  return ops;
}

export function mapOps(vm: ViewModel): DrawOp[] {
  if (!vm.ready()) return [RECONNECT_BANNER];
  const s = vm.state as StateFrame;
  const ops: DrawOp[] = [
    { op: "grid", rows: s.map.rows },
    { op: "robot", row: s.map.robot.row, col: s.map.robot.col },
    { op: "orientation", wedge: s.focus_world_wedge },
  ];
  if (s.intent.decided && s.intent.wedge !== null) {
    ops.push({ op: "intent", wedge: s.intent.wedge, density: s.intent.density });
  }
  if (s.phase !== "running") {
    ops.push({ op: "banner", text: s.phase === "found" ? "target found" : "search aborted" });
  }
  return ops;
}
