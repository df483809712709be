/** Keyboard and drag input, reduced to protocol gestures. */

import { Gesture } from "./protocol.js";

/** Arrows look and move, Enter confirms; anything else is not ours. */
export function keyToGesture(key: string): Gesture | null {
  switch (key) {
    case "ArrowLeft":
      return { kind: "look", dir: "left" };
    case "ArrowRight":
      return { kind: "look", dir: "right" };
    case "ArrowUp":
      return { kind: "move", dir: "forward" };
    case "ArrowDown":
      return { kind: "move", dir: "backward" };
    case "Enter":
      return { kind: "confirm" };
    default:
      return null;
  }
}

/**
 * Accumulates a pointer drag in wedge widths and emits one look gesture
 * per whole wedge crossed, holding the fractional residue as display
 * offset. Dragging the strip right pans the view left (photo-pan
 * convention), so positive deltas emit look_left.
 */
export class DragTracker {
  private accum = 0;

  /** Feed a movement in wedge widths; returns the gestures it crossed into. */
  update(deltaWedges: number): Gesture[] {
    this.accum += deltaWedges;
    const gestures: Gesture[] = [];
    while (this.accum >= 1) {
      gestures.push({ kind: "look", dir: "left" });
      this.accum -= 1;
    }
    while (this.accum <= -1) {
      gestures.push({ kind: "look", dir: "right" });
      this.accum += 1;
    }
    return gestures;
  }

  /** Sub-wedge residue, for the optimistic strip offset. */
  get fraction(): number {
    return this.accum;
  }

  /** Pointer released: the residue snaps back, nothing is sent. */
  release(): void {
    this.accum = 0;
  }
}
