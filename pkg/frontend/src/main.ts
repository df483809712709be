/**
 * Browser wiring: one WebSocket, one ViewModel, two canvases.
 *
 * Everything protocol-shaped lives in protocol/viewmodel/render/input and
 * is covered by tests; this file only moves bytes and pixels. The server
 * URL comes from the `server` query parameter when present:
 *
 *     index.html?server=ws://somehost:8360/session
 */

import { DEFAULT_SERVER_URL, Gesture, messageForGesture } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";
import { DrawOp, mapOps, viewportOps } from "./render.js";
import { DragTracker, keyToGesture } from "./input.js";

const WEDGE_FILL: Record<number, string> = {
  0: "#1c1f26",
  1: "#7a5c3a",
  2: "#2e7d4f",
  3: "#3f7d6a",
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

const viewportCanvas = el<HTMLCanvasElement>("viewport");
const mapCanvas = el<HTMLCanvasElement>("map");
const statusLine = el<HTMLDivElement>("status");
const fovSlider = el<HTMLInputElement>("fov");

const vm = new ViewModel();
const drag = new DragTracker();
let socket: WebSocket | null = null;

function serverUrl(): string {
  return new URLSearchParams(location.search).get("server") ?? DEFAULT_SERVER_URL;
}

function send(gesture: Gesture): void {
  if (socket === null || socket.readyState !== WebSocket.OPEN) return;
  socket.send(messageForGesture(gesture));
}

function connect(): void {
  vm.connection = "connecting";
  render();
  socket = new WebSocket(serverUrl());
  socket.onopen = () => {
    vm.markOpen();
    render();
  };
  socket.onmessage = (ev) => {
    vm.applyText(String(ev.data));
    if (vm.state !== null) fovSlider.value = String(vm.state.fov_wedges);
    render();
  };
  socket.onclose = () => {
    vm.markClosed();
    render();
    // the model is stateless across reconnects, so just try again
    setTimeout(connect, 1500);
  };
}

function drawBanner(ctx: CanvasRenderingContext2D, text: string): void {
  ctx.fillStyle = "rgba(0,0,0,0.55)";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.fillStyle = "#fff";
  ctx.font = "20px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(text, ctx.canvas.width / 2, ctx.canvas.height / 2);
}

function drawViewport(ops: DrawOp[]): void {
  const ctx = viewportCanvas.getContext("2d");
  if (ctx === null) return;
  const { width, height } = viewportCanvas;
  ctx.clearRect(0, 0, width, height);
  const wedgeOps = ops.filter((o) => o.op === "wedge");
  const slots = Math.max(wedgeOps.length, 1);
  const w = width / slots;
  let shift = 0;
  for (const op of ops) {
    if (op.op === "strip_offset") shift = op.wedges * w;
  }
  for (const op of ops) {
    switch (op.op) {
      case "wedge": {
        const x = op.slot * w + shift;
        ctx.fillStyle = WEDGE_FILL[op.value] ?? "#555";
        ctx.fillRect(x + 2, 2, w - 4, height - 4);
        ctx.strokeStyle = op.focused ? "#ffd54a" : "#444";
        ctx.lineWidth = op.focused ? 3 : 1;
        ctx.strokeRect(x + 2, 2, w - 4, height - 4);
        ctx.fillStyle = "#ddd";
        ctx.font = "13px sans-serif";
        ctx.textAlign = "center";
        ctx.fillText(`w${op.wedge}`, x + w / 2, 20);
        op.labels.forEach((label, i) => {
          ctx.fillText(label, x + w / 2, height / 2 + 16 * i);
        });
        break;
      }
      case "arrow": {
        ctx.fillStyle = "#ffd54a";
        ctx.font = "48px sans-serif";
        ctx.textAlign = "center";
        const x = op.dir === "left" ? width * 0.12 : width * 0.88;
        ctx.fillText(op.dir === "left" ? "←" : "→", x, height / 2 + 16);
        break;
      }
      case "highlight": {
        ctx.strokeStyle = "#ffeb3b";
        ctx.lineWidth = 5;
        ctx.strokeRect(4, 4, width - 8, height - 8);
        break;
      }
      case "banner":
        drawBanner(ctx, op.text);
        break;
      default:
        break;
    }
  }
}

function drawMap(ops: DrawOp[]): void {
  const ctx = mapCanvas.getContext("2d");
  if (ctx === null) return;
  const { width, height } = mapCanvas;
  ctx.clearRect(0, 0, width, height);
  const grid = ops.find((o) => o.op === "grid");
  if (grid === undefined || grid.op !== "grid") {
    const banner = ops.find((o) => o.op === "banner");
    if (banner !== undefined && banner.op === "banner") drawBanner(ctx, banner.text);
    return;
  }
  const rows = grid.rows.length;
  const cols = rows > 0 ? (grid.rows[0] ?? "").length : 0;
  const cell = Math.min(width / Math.max(cols, 1), height / Math.max(rows, 1));
  grid.rows.forEach((row, r) => {
    for (let c = 0; c < row.length; c++) {
      ctx.fillStyle = row[c] === "#" ? "#30343c" : "#e8e6df";
      ctx.fillRect(c * cell, r * cell, cell - 1, cell - 1);
    }
  });
  const center = (r: number, c: number): [number, number] => [
    c * cell + cell / 2,
    r * cell + cell / 2,
  ];
  for (const op of ops) {
    switch (op.op) {
      case "robot": {
        const [x, y] = center(op.row, op.col);
        ctx.fillStyle = "#d32f2f";
        ctx.beginPath();
        ctx.arc(x, y, cell * 0.35, 0, 2 * Math.PI);
        ctx.fill();
        break;
      }
      case "orientation":
      case "intent": {
        const robot = ops.find((o) => o.op === "robot");
        if (robot === undefined || robot.op !== "robot") break;
        const [x, y] = center(robot.row, robot.col);
        // wedge 0 east, counterclockwise; canvas y grows downward
        const angle = (-op.wedge * Math.PI) / 4;
        const len = op.op === "orientation" ? cell * 1.4 : cell * 2.2;
        ctx.strokeStyle = op.op === "orientation" ? "#d32f2f" : "#00acc1";
        ctx.lineWidth = op.op === "orientation" ? 3 : 2;
        ctx.beginPath();
        ctx.moveTo(x, y);
        ctx.lineTo(x + len * Math.cos(angle), y + len * Math.sin(angle));
        ctx.stroke();
        break;
      }
      case "banner":
        drawBanner(ctx, op.text);
        break;
      default:
        break;
    }
  }
}

function render(): void {
  drawViewport(viewportOps(vm));
  drawMap(mapOps(vm));
  const s = vm.state;
  const parts = [
    `connection: ${vm.connection}`,
    s === null ? "no state yet" : `tick ${s.tick}, phase ${s.phase}, focus w${s.focus}`,
  ];
  if (vm.lastError !== null) parts.push(`server error: ${vm.lastError}`);
  statusLine.textContent = parts.join("  |  ");
}

for (const [id, gesture] of Object.entries({
  "btn-look-left": { kind: "look", dir: "left" },
  "btn-look-right": { kind: "look", dir: "right" },
  "btn-forward": { kind: "move", dir: "forward" },
  "btn-backward": { kind: "move", dir: "backward" },
  "btn-confirm": { kind: "confirm" },
  "btn-tick": { kind: "tick" },
  "btn-reset": { kind: "reset" },
} as Record<string, Gesture>)) {
  el<HTMLButtonElement>(id).addEventListener("click", () => send(gesture));
}

fovSlider.addEventListener("change", () => {
  send({ kind: "fov", wedges: Number(fovSlider.value) });
});

document.addEventListener("keydown", (ev) => {
  const gesture = keyToGesture(ev.key);
  if (gesture !== null) {
    ev.preventDefault();
    send(gesture);
  }
});

let dragging = false;
let lastX = 0;
viewportCanvas.addEventListener("pointerdown", (ev) => {
  dragging = true;
  lastX = ev.clientX;
  viewportCanvas.setPointerCapture(ev.pointerId);
});
viewportCanvas.addEventListener("pointermove", (ev) => {
  if (!dragging || vm.state === null) return;
  const wedgeWidth = viewportCanvas.width / Math.max(vm.state.fov_wedges, 1);
  const gestures = drag.update((ev.clientX - lastX) / wedgeWidth);
  lastX = ev.clientX;
  gestures.forEach(send);
  vm.dragOffset = drag.fraction;
  render();
});
const endDrag = (): void => {
  dragging = false;
  drag.release();
  vm.dragOffset = 0;
  render();
};
viewportCanvas.addEventListener("pointerup", endDrag);
viewportCanvas.addEventListener("pointercancel", endDrag);

connect();
