/** Session state as the operator sees it, plus per-session request
 * serialization: a mutating request is only sent after the previous reply
 * arrived, so outlines can never interleave out of order. */

import { GraspReply, OpReply, Outline, SelectionApi } from "./api.js";

export type Mode = "select" | "add" | "subtract" | "grasp" | "place";

export interface UiSessionState {
  sessionId: string;
  width: number;
  height: number;
  mode: Mode;
  activeNode: number | null;
  activeOutline: Outline;
  maskOutline: Outline;
  maskPixels: number;
  lastClick: [number, number] | null;
  lastStatus: string;
  graspPoint: [number, number] | null;
  placePoint: [number, number] | null;
  saliencyVisible: boolean;
}

export class SessionController {
  state: UiSessionState | null = null;
  private queue: Promise<unknown> = Promise.resolve();
  readonly listeners: Array<() => void> = [];

  constructor(readonly api: SelectionApi) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  /** Serialize mutating requests: each waits for the previous to settle. */
  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.queue.then(task, task);
    this.queue = next.catch(() => undefined);
    return next;
  }

  async open(imageBytes: Uint8Array, filename?: string): Promise<void> {
    const info = await this.api.openSession(imageBytes, filename);
    this.state = {
      sessionId: info.session_id,
      width: info.width,
      height: info.height,
      mode: "select",
      activeNode: null,
      activeOutline: [],
      maskOutline: [],
      maskPixels: 0,
      lastClick: null,
      lastStatus: "session opened",
      graspPoint: null,
      placePoint: null,
      saliencyVisible: false,
    };
    this.notify();
  }

  setMode(mode: Mode): void {
    if (!this.state) return;
    this.state.mode = mode;
    this.state.lastStatus = `mode: ${mode}`;
    this.notify();
  }

  toggleSaliency(): void {
    if (!this.state) return;
    this.state.saliencyVisible = !this.state.saliencyVisible;
    this.notify();
  }

  private applyReply(reply: OpReply, status: string): OpReply {
    const s = this.state!;
    s.activeNode = reply.active_node;
    s.activeOutline = reply.outline;
    s.maskOutline = reply.mask_outline;
    s.maskPixels = reply.mask_pixels;
    s.lastStatus = reply.noop ? `${status}: no-op (${reply.reason})` : status;
    this.notify();
    return reply;
  }

  inBounds(x: number, y: number): boolean {
    const s = this.state;
    return !!s && x >= 0 && y >= 0 && x < s.width && y < s.height;
  }

  /** Route a canvas click by the current mode. Returns null when no request
   * was sent (no session, out of bounds). */
  clickAt(x: number, y: number): Promise<OpReply | GraspReply | null> | null {
    const s = this.state;
    if (!s || !this.inBounds(x, y)) return null;
    s.lastClick = [x, y];
    switch (s.mode) {
      case "select":
        return this.enqueue(() =>
          this.api.click(s.sessionId, x, y).then((r) => this.applyReply(r, "selected")),
        );
      case "add":
        return this.enqueue(() =>
          this.api.add(s.sessionId, x, y).then((r) => this.applyReply(r, "added part")),
        );
      case "subtract":
        return this.enqueue(() =>
          this.api
            .subtract(s.sessionId, x, y)
            .then((r) => this.applyReply(r, "subtracted part")),
        );
      case "grasp":
        return this.enqueue(() =>
          this.api
            .confirmGraspPoint(s.sessionId, x, y)
            .then((reply) => {
              s.graspPoint = [reply.point.x, reply.point.y];
              s.lastStatus = `grasp point confirmed at (${reply.point.x}, ${reply.point.y})`;
              this.notify();
              return reply;
            })
            .catch((err) => {
              s.lastStatus = `grasp point rejected: ${err.message}; choose another point`;
              this.notify();
              throw err;
            }),
        );
      case "place":
        // coordinate echo only; placement execution does not exist here
        s.placePoint = [x, y];
        s.lastStatus = `place point noted at (${x}, ${y})`;
        this.notify();
        return Promise.resolve(null);
    }
  }

  grow(): Promise<OpReply> | null {
    const s = this.state;
    if (!s) return null;
    return this.enqueue(() =>
      this.api.grow(s.sessionId).then((r) => this.applyReply(r, "grew segment")),
    );
  }

  shrink(): Promise<OpReply> | null {
    const s = this.state;
    if (!s || !s.lastClick) return null;
    const [x, y] = s.lastClick;
    return this.enqueue(() =>
      this.api.shrink(s.sessionId, x, y).then((r) => this.applyReply(r, "shrank segment")),
    );
  }

  reset(): Promise<OpReply> | null {
    const s = this.state;
    if (!s) return null;
    return this.enqueue(() =>
      this.api.reset(s.sessionId).then((r) => this.applyReply(r, "cleared parts")),
    );
  }

  deleteSelection(): Promise<OpReply> | null {
    const s = this.state;
    if (!s) return null;
    return this.enqueue(() =>
      this.api
        .deleteSelection(s.sessionId)
        .then((r) => this.applyReply(r, "selection deleted")),
    );
  }
}
