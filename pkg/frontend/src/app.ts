// Browser entry point: wires the form, the pair card and the skyline
// chart to a SessionDriver. All rendering funnels through render(), so
// the page is a pure function of the driver's state.

import { Client } from "./api.js";
import { SessionDriver } from "./driver.js";
import { pairCardHtml } from "./pair.js";
import { skylineSvg, type ChartPoint } from "./skyline.js";
import { canSubmit, type UiState } from "./store.js";
import { escapeHtml } from "./pair.js";
import type { Algorithm, SessionConfig } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function numberOrUndefined(raw: string): number | undefined {
  const trimmed = raw.trim();
  if (trimmed === "") return undefined;
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : undefined;
}

function readConfig(): SessionConfig {
  const algorithm = el<HTMLSelectElement>("algorithm").value as Algorithm;
  const config: SessionConfig = {
    algorithm,
    budget: numberOrUndefined(el<HTMLInputElement>("budget").value) ?? 0,
  };
  const seed = numberOrUndefined(el<HTMLInputElement>("seed").value);
  if (seed !== undefined) config.seed = seed;
  const k = numberOrUndefined(el<HTMLInputElement>("k").value);
  if (k !== undefined) config.k = k;
  const epsilon = numberOrUndefined(el<HTMLInputElement>("epsilon").value);
  const delta = numberOrUndefined(el<HTMLInputElement>("delta").value);
  const l = numberOrUndefined(el<HTMLInputElement>("l").value);
  if (algorithm === "asl" && epsilon !== undefined) config.epsilon = epsilon;
  if (
    (algorithm === "naive_sky" || algorithm === "active_sky") &&
    delta !== undefined
  ) {
    config.delta = delta;
  }
  if (algorithm === "pro_sky" && l !== undefined) config.l = l;
  const sampler = el<HTMLSelectElement>("sampler").value;
  if (sampler === "random" && algorithm !== "pro_sky") {
    config.sampler = "random";
  }
  return config;
}

function statusHtml(state: UiState): string {
  const snap = state.snapshot;
  const bits: string[] = [`<span class="phase ${state.phase}">${state.phase}</span>`];
  if (snap !== null) {
    bits.push(
      `<span>labels ${snap.labels_used}/${snap.budget}</span>`,
      `<span>answered here: ${state.answered}</span>`,
    );
  }
  if (state.lastError !== null) {
    bits.push(`<span class="error">${escapeHtml(state.lastError)}</span>`);
  }
  return bits.join(" ");
}

function chartPoints(state: UiState): ChartPoint[] {
  const snap = state.snapshot;
  if (snap === null) return [];
  if (snap.status === "done" && snap.result != null) {
    return snap.result.points.map((p) => ({
      scheme: p.scheme,
      pc: p.pc_empirical,
      pq: p.pq_empirical,
    }));
  }
  return snap.points;
}

function resultHtml(state: UiState): string {
  const snap = state.snapshot;
  if (snap === null || snap.status !== "done") return "";
  if (snap.error != null) {
    return `<p class="error">run failed: ${escapeHtml(snap.error)}</p>`;
  }
  if (snap.result == null) return `<p>run produced no result</p>`;
  const rows = snap.result.points
    .map(
      (p) =>
        `<tr><td><code>${escapeHtml(p.scheme)}</code></td>` +
        `<td>${p.pc_empirical.toFixed(3)}</td>` +
        `<td>${p.pq_empirical.toFixed(3)}</td></tr>`,
    )
    .join("");
  return (
    `<h3>Learned skyline (${snap.result.labels_used} labels)</h3>` +
    `<table class="result"><thead><tr><th>scheme</th><th>pc</th><th>pq</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

function main(): void {
  let driver: SessionDriver | null = null;

  const pairHost = el<HTMLDivElement>("pair");
  const chartHost = el<HTMLDivElement>("chart");
  const statusHost = el<HTMLDivElement>("status");
  const resultHost = el<HTMLDivElement>("result");
  const abortButton = el<HTMLButtonElement>("abort");
  const startButton = el<HTMLButtonElement>("start");

  const render = (state: UiState): void => {
    statusHost.innerHTML = statusHtml(state);
    pairHost.innerHTML = pairCardHtml(
      state.pending,
      state.inFlight !== null,
    );
    chartHost.innerHTML = skylineSvg(chartPoints(state));
    resultHost.innerHTML = resultHtml(state);
    const running = state.phase === "running" || state.phase === "awaiting_label";
    abortButton.disabled = !running;
    startButton.disabled = state.phase === "starting" || running;
  };

  startButton.addEventListener("click", () => {
    const base = el<HTMLInputElement>("base").value.trim();
    driver?.stop();
    driver = new SessionDriver(new Client(base), render);
    void driver.start(readConfig());
  });

  abortButton.addEventListener("click", () => {
    void driver?.abort();
  });

  pairHost.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    const action = target?.closest("button")?.dataset["action"];
    if (action === "label-match") void driver?.submit("M");
    if (action === "label-nonmatch") void driver?.submit("N");
  });

  document.addEventListener("keydown", (event) => {
    if (driver === null || !canSubmit(driver.state)) return;
    const tag = (event.target as HTMLElement | null)?.tagName;
    if (tag === "INPUT" || tag === "SELECT" || tag === "TEXTAREA") return;
    if (event.key === "m") void driver.submit("M");
    if (event.key === "n") void driver.submit("N");
  });

  render(
    driver?.state ?? {
      phase: "idle",
      session: null,
      snapshot: null,
      pending: null,
      inFlight: null,
      lastLabel: null,
      answered: 0,
      lastError: null,
    },
  );
}

main();
