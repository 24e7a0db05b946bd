// Drives one labelling session: a long-poll loop for label requests, a
// slower snapshot loop for progress, and guarded submits in between.
// Time is injected so tests can run the loops to completion instantly.

import { ApiError, Client } from "./api.js";
import {
  canSubmit,
  initialState,
  reduce,
  type Event,
  type UiState,
} from "./store.js";
import type { Label, SessionConfig } from "./types.js";

export type Sleep = (ms: number) => Promise<void>;

export const SNAPSHOT_INTERVAL_MS = 500;
export const REQUEST_TIMEOUT_MS = 25000;

const realSleep: Sleep = (ms) => new Promise((r) => setTimeout(r, ms));

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export class SessionDriver {
  state: UiState = initialState();

  private stopped = false;
  private loops: Promise<void>[] = [];

  constructor(
    private readonly client: Client,
    private readonly onChange: (state: UiState) => void = () => {},
    private readonly sleep: Sleep = realSleep,
  ) {}

  private dispatch(event: Event): void {
    this.state = reduce(this.state, event);
    this.onChange(this.state);
  }

  private get active(): boolean {
    return (
      !this.stopped &&
      this.state.session !== null &&
      this.state.phase !== "done" &&
      this.state.phase !== "aborted" &&
      this.state.phase !== "failed"
    );
  }

  async start(config: SessionConfig): Promise<void> {
    this.dispatch({ type: "start" });
    let snapshot;
    try {
      snapshot = await this.client.createSession(config);
    } catch (err) {
      this.dispatch({ type: "fail", error: message(err) });
      return;
    }
    this.dispatch({ type: "session", snapshot });
    this.loops = [this.requestLoop(), this.snapshotLoop()];
  }

  /** Resolves when both polling loops have wound down. */
  async settled(): Promise<void> {
    await Promise.all(this.loops);
  }

  async submit(label: Label): Promise<void> {
    const pending = this.state.pending;
    const session = this.state.session;
    if (pending === null || session === null || !canSubmit(this.state)) {
      return;
    }
    this.dispatch({ type: "submit", requestId: pending.id, label });
    if (this.state.inFlight !== pending.id) return;
    try {
      await this.client.submitLabel(session, pending.id, label);
      this.dispatch({ type: "ack", requestId: pending.id });
    } catch (err) {
      // A stale 409 means the session moved past the request; surface
      // the message but keep the session alive.
      this.dispatch({
        type: "submit-failed",
        requestId: pending.id,
        error: message(err),
      });
    }
  }

  async abort(): Promise<void> {
    const session = this.state.session;
    if (session === null) return;
    try {
      const snapshot = await this.client.abort(session);
      this.dispatch({ type: "snapshot", snapshot });
    } catch (err) {
      this.dispatch({ type: "fail", error: message(err) });
    }
  }

  stop(): void {
    this.stopped = true;
  }

  private async requestLoop(): Promise<void> {
    while (this.active) {
      const session = this.state.session;
      if (session === null) return;
      try {
        const request = await this.client.nextRequest(
          session,
          REQUEST_TIMEOUT_MS,
        );
        this.dispatch({ type: "request", request });
        if (request === null) {
          // Timed-out poll; refresh the snapshot before parking again
          // so a finished session is noticed promptly.
          const snapshot = await this.client.getSession(session);
          this.dispatch({ type: "snapshot", snapshot });
        }
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          this.dispatch({ type: "fail", error: message(err) });
          return;
        }
        await this.sleep(SNAPSHOT_INTERVAL_MS);
      }
    }
  }

  private async snapshotLoop(): Promise<void> {
    while (this.active) {
      await this.sleep(SNAPSHOT_INTERVAL_MS);
      if (!this.active) return;
      const session = this.state.session;
      if (session === null) return;
      try {
        const snapshot = await this.client.getSession(session);
        this.dispatch({ type: "snapshot", snapshot });
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          this.dispatch({ type: "fail", error: message(err) });
          return;
        }
      }
    }
  }
}
