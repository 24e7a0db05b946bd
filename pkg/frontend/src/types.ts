// Payload shapes of the labelling service. Field names mirror the JSON
// exactly; snake_case stays snake_case.

export type Algorithm = "asl" | "naive_sky" | "active_sky" | "pro_sky";

export type SessionStatus = "running" | "awaiting_label" | "done" | "aborted";

export type Label = "M" | "N";

export interface SessionConfig {
  algorithm: Algorithm;
  budget: number;
  seed?: number;
  epsilon?: number;
  delta?: number;
  l?: number;
  k?: number;
  sampler?: "active" | "random";
}

export interface RecordView {
  id: string;
  values: Record<string, string>;
}

export interface PendingRequest {
  id: string;
  left: RecordView;
  right: RecordView;
}

/** Skyline point as tracked live during a run (empirical coordinates). */
export interface LivePoint {
  scheme: string;
  pc: number;
  pq: number;
}

export interface ResultPoint {
  scheme: string;
  pc_empirical: number;
  pq_empirical: number;
}

export interface SessionResult {
  points: ResultPoint[];
  labels_used: number;
  trace: unknown;
}

export interface Snapshot {
  session: string;
  status: SessionStatus;
  algorithm: string;
  seed: number;
  budget: number;
  labels_used: number;
  pending: PendingRequest | null;
  points: LivePoint[];
  result?: SessionResult | null;
  error?: string | null;
}

export interface LabelAck {
  status: "accepted" | "duplicate";
}
