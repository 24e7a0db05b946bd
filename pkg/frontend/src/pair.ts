// The pair card: the two records of the pending request side by side,
// one row per attribute, agreements highlighted. Rendered as an HTML
// string so the logic stays testable without a DOM.

import type { PendingRequest } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const norm = (v: string) => v.trim().toLowerCase();

export function pairCardHtml(
  request: PendingRequest | null,
  submitting: boolean,
): string {
  const disabled = request === null || submitting ? " disabled" : "";
  const rows: string[] = [];
  if (request !== null) {
    const attrs = Object.keys(request.left.values);
    for (const key of Object.keys(request.right.values)) {
      if (!attrs.includes(key)) attrs.push(key);
    }
    for (const attr of attrs) {
      const left = request.left.values[attr] ?? "";
      const right = request.right.values[attr] ?? "";
      const agree = left !== "" && norm(left) === norm(right);
      rows.push(
        `<tr class="${agree ? "agree" : "differ"}">` +
          `<th>${escapeHtml(attr)}</th>` +
          `<td>${escapeHtml(left)}</td>` +
          `<td>${escapeHtml(right)}</td>` +
          `</tr>`,
      );
    }
  }
  const heading =
    request === null
      ? `<p class="placeholder">No pair awaiting a label.</p>`
      : `<p class="ids"><code>${escapeHtml(request.left.id)}</code> vs ` +
        `<code>${escapeHtml(request.right.id)}</code></p>`;
  const table =
    rows.length === 0
      ? ""
      : `<table class="pair"><thead><tr><th></th><th>left</th><th>right</th>` +
        `</tr></thead><tbody>${rows.join("")}</tbody></table>`;
  return (
    `<div class="pair-card">` +
    heading +
    table +
    `<div class="actions">` +
    `<button type="button" data-action="label-match"${disabled}>Match</button>` +
    `<button type="button" data-action="label-nonmatch"${disabled}>Non-match</button>` +
    `</div></div>`
  );
}
