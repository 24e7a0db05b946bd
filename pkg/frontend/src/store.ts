// Pure session state. Every wire event reduces into a new UiState; the
// invariants the UI depends on (at most one in-flight submit, a pending
// pair never silently swapped mid-submit) live here, not in the DOM code.

import type { Label, PendingRequest, Snapshot } from "./types.js";

export type Phase =
  | "idle"
  | "starting"
  | "running"
  | "awaiting_label"
  | "done"
  | "aborted"
  | "failed";

export interface UiState {
  phase: Phase;
  session: string | null;
  snapshot: Snapshot | null;
  pending: PendingRequest | null;
  /** Request id of the submit currently on the wire, if any. */
  inFlight: string | null;
  lastLabel: Label | null;
  answered: number;
  lastError: string | null;
}

export type Event =
  | { type: "start" }
  | { type: "session"; snapshot: Snapshot }
  | { type: "snapshot"; snapshot: Snapshot }
  | { type: "request"; request: PendingRequest | null }
  | { type: "submit"; requestId: string; label: Label }
  | { type: "ack"; requestId: string }
  | { type: "submit-failed"; requestId: string; error: string }
  | { type: "fail"; error: string }
  | { type: "reset" };

export function initialState(): UiState {
  return {
    phase: "idle",
    session: null,
    snapshot: null,
    pending: null,
    inFlight: null,
    lastLabel: null,
    answered: 0,
    lastError: null,
  };
}

export function canSubmit(state: UiState): boolean {
  return (
    state.pending !== null &&
    state.inFlight === null &&
    (state.phase === "awaiting_label" || state.phase === "running")
  );
}

const TERMINAL: ReadonlySet<string> = new Set(["done", "aborted"]);

function applySnapshot(state: UiState, snapshot: Snapshot): UiState {
  const next: UiState = {
    ...state,
    phase: snapshot.status,
    session: snapshot.session,
    snapshot,
  };
  if (TERMINAL.has(snapshot.status)) {
    next.pending = null;
    next.inFlight = null;
    return next;
  }
  // While a submit is on the wire the shown pair must not change under
  // the user's cursor; the poll loop will deliver the successor.
  if (state.inFlight === null) {
    next.pending = snapshot.pending ?? state.pending;
  }
  return next;
}

export function reduce(state: UiState, event: Event): UiState {
  switch (event.type) {
    case "start":
      return { ...initialState(), phase: "starting" };

    case "session":
    case "snapshot": {
      if (state.phase === "idle") return state; // stale poll after reset
      return applySnapshot(state, event.snapshot);
    }

    case "request": {
      if (TERMINAL.has(state.phase) || state.phase === "idle") return state;
      if (event.request === null) return state;
      if (state.inFlight !== null) return state;
      if (state.pending !== null && state.pending.id === event.request.id) {
        return state; // repeated poll of the same request
      }
      return { ...state, pending: event.request, phase: "awaiting_label" };
    }

    case "submit": {
      if (!canSubmit(state)) return state;
      if (state.pending === null || state.pending.id !== event.requestId) {
        return state;
      }
      return { ...state, inFlight: event.requestId, lastLabel: event.label };
    }

    case "ack": {
      if (state.inFlight !== event.requestId) return state;
      const cleared =
        state.pending !== null && state.pending.id === event.requestId
          ? null
          : state.pending;
      return {
        ...state,
        inFlight: null,
        pending: cleared,
        answered: state.answered + 1,
        lastError: null,
      };
    }

    case "submit-failed": {
      if (state.inFlight !== event.requestId) return state;
      return { ...state, inFlight: null, lastError: event.error };
    }

    case "fail":
      return {
        ...state,
        phase: "failed",
        pending: null,
        inFlight: null,
        lastError: event.error,
      };

    case "reset":
      return initialState();
  }
}
