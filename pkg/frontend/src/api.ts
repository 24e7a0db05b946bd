// Typed client over the five session endpoints. The fetch function is
// injectable so tests can script the wire without a server.

import type {
  Label,
  LabelAck,
  PendingRequest,
  SessionConfig,
  Snapshot,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export class Client {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  /** `base` is the service origin, "" for same-origin deployments. */
  constructor(base = "", fetchFn?: FetchLike) {
    this.base = base.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const resp = await this.fetchFn(this.base + path, init);
    let payload: unknown = null;
    try {
      payload = await resp.json();
    } catch {
      // non-JSON error body; fall through to the status check
    }
    if (!resp.ok) {
      const detail =
        payload !== null &&
        typeof payload === "object" &&
        typeof (payload as { detail?: unknown }).detail === "string"
          ? (payload as { detail: string }).detail
          : `HTTP ${resp.status}`;
      throw new ApiError(resp.status, detail);
    }
    return payload as T;
  }

  createSession(config: SessionConfig): Promise<Snapshot> {
    return this.request<Snapshot>("POST", "/sessions", config);
  }

  getSession(id: string): Promise<Snapshot> {
    return this.request<Snapshot>("GET", `/sessions/${id}`);
  }

  /** Long-poll the next label request; null when none arrived in time. */
  async nextRequest(
    id: string,
    timeoutMs = 25000,
  ): Promise<PendingRequest | null> {
    const out = await this.request<{ request: PendingRequest | null }>(
      "GET",
      `/sessions/${id}/request?timeout_ms=${timeoutMs}`,
    );
    return out.request;
  }

  submitLabel(id: string, requestId: string, label: Label): Promise<LabelAck> {
    return this.request<LabelAck>("POST", `/sessions/${id}/labels`, {
      request_id: requestId,
      label,
    });
  }

  abort(id: string): Promise<Snapshot> {
    return this.request<Snapshot>("POST", `/sessions/${id}/abort`);
  }
}
