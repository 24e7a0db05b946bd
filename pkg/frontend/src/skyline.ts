// Skyline chart as an SVG string. The axes are always the full [0,1]
// square in both coordinates, whatever the data, so successive renders
// of a running session never rescale under the viewer.

export interface ChartPoint {
  scheme: string;
  pc: number;
  pq: number;
}

export interface Placed extends ChartPoint {
  x: number;
  y: number;
}

export const CHART_W = 340;
export const CHART_H = 340;
export const CHART_PAD = 40;

const clamp01 = (v: number) => Math.min(1, Math.max(0, v));

/** Map pc/pq in [0,1] to pixel coordinates (y grows downward). */
export function place(
  points: readonly ChartPoint[],
  width = CHART_W,
  height = CHART_H,
  pad = CHART_PAD,
): Placed[] {
  const spanX = width - 2 * pad;
  const spanY = height - 2 * pad;
  return points.map((p) => ({
    ...p,
    x: pad + clamp01(p.pc) * spanX,
    y: height - pad - clamp01(p.pq) * spanY,
  }));
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const TICKS = [0, 0.25, 0.5, 0.75, 1];

export function skylineSvg(points: readonly ChartPoint[]): string {
  const placed = place(points).sort((a, b) => a.pc - b.pc || a.pq - b.pq);
  const parts: string[] = [];
  parts.push(
    `<svg class="skyline" viewBox="0 0 ${CHART_W} ${CHART_H}" role="img" ` +
      `aria-label="completeness versus precision skyline">`,
  );
  const x0 = CHART_PAD;
  const x1 = CHART_W - CHART_PAD;
  const y0 = CHART_H - CHART_PAD;
  const y1 = CHART_PAD;
  for (const t of TICKS) {
    const gx = x0 + t * (x1 - x0);
    const gy = y0 - t * (y0 - y1);
    parts.push(
      `<line class="grid" x1="${gx}" y1="${y0}" x2="${gx}" y2="${y1}"/>`,
      `<line class="grid" x1="${x0}" y1="${gy}" x2="${x1}" y2="${gy}"/>`,
      `<text class="tick" x="${gx}" y="${y0 + 16}" text-anchor="middle">${t}</text>`,
      `<text class="tick" x="${x0 - 8}" y="${gy + 4}" text-anchor="end">${t}</text>`,
    );
  }
  parts.push(
    `<line class="axis" x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}"/>`,
    `<line class="axis" x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}"/>`,
    `<text class="label" x="${(x0 + x1) / 2}" y="${CHART_H - 6}" text-anchor="middle">pair completeness</text>`,
    `<text class="label" x="12" y="${(y0 + y1) / 2}" text-anchor="middle" transform="rotate(-90 12 ${(y0 + y1) / 2})">pair quality</text>`,
  );
  if (placed.length > 1) {
    const path = placed
      .map((p, i) => (i === 0 ? `M ${p.x} ${p.y}` : `L ${p.x} ${p.y}`))
      .join(" ");
    parts.push(`<path class="front" d="${path}" fill="none"/>`);
  }
  for (const p of placed) {
    parts.push(
      `<circle class="pt" cx="${p.x}" cy="${p.y}" r="5">` +
        `<title>${esc(p.scheme)} (pc ${p.pc.toFixed(3)}, pq ${p.pq.toFixed(3)})</title>` +
        `</circle>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
