/**
 * Client-side session state: the last server-acknowledged frame plus
 * purely local display state (drag offset, connection status).
 *
 * The model is deliberately forgetful. Nothing accumulates across frames,
 * so a fresh ViewModel fed only the latest broadcast renders exactly what
 * a long-lived one would: reconnecting costs nothing.
 */

import { ServerFrame, StateFrame, parseServerFrame } from "./protocol.js";

export type Connection = "connecting" | "open" | "closed";

export class ViewModel {
  connection: Connection = "connecting";
  /** last acknowledged state; rendering never reads anything newer */
  state: StateFrame | null = null;
  lastError: string | null = null;
  /** fractional wedge offset of an in-flight drag, display only */
  dragOffset = 0;

  markOpen(): void {
    this.connection = "open";
  }

  /** Socket is gone; acked state is kept only to grey it out behind the banner. */
  markClosed(): void {
    this.connection = "closed";
  }

  /** Feed one raw text frame from the socket. */
  applyText(text: string): void {
    this.apply(parseServerFrame(text));
  }

  apply(frame: ServerFrame): void {
    if (frame.type === "error") {
      // the server changed nothing, so neither do we
      this.lastError = frame.error;
      return;
    }
    this.state = frame;
    this.lastError = null;
    // whole wedges were already sent as look messages when the drag
    // crossed them; the ack makes the residue the only unexplained part
    this.dragOffset = this.dragOffset - Math.trunc(this.dragOffset);
  }

  /** Focus is always the server's word, never the drag's. */
  focus(): number | null {
    return this.state === null ? null : this.state.focus;
  }

  ready(): boolean {
    return this.connection === "open" && this.state !== null;
  }
}
