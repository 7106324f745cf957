/** Dependency-free SVG line chart of accuracy over labeled-set size. */

import type { HistoryPoint } from "./state.js";

const PAD = 28;

function xScale(sizes: readonly number[], width: number): (size: number) => number {
  const lo = Math.min(...sizes);
  const hi = Math.max(...sizes);
  const span = hi - lo;
  return (size) =>
    span === 0
      ? width / 2
      : PAD + ((size - lo) / span) * (width - 2 * PAD);
}

function yScale(height: number): (accuracy: number) => number {
  // accuracy axis is fixed to [0, 1]
  return (accuracy) =>
    height - PAD - Math.min(Math.max(accuracy, 0), 1) * (height - 2 * PAD);
}

function fmt(value: number): string {
  return String(Math.round(value * 100) / 100);
}

export function renderHistoryChart(
  history: readonly HistoryPoint[],
  width = 420,
  height = 160,
): string {
  const open = `<svg class="history-chart" viewBox="0 0 ${width} ${height}" role="img">`;
  if (history.length === 0) {
    return `${open}<text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="chart-empty">no retrains yet</text></svg>`;
  }
  const sizes = history.map((p) => p.size);
  const sx = xScale(sizes, width);
  const sy = yScale(height);

  const upper = history.map((p) => `${fmt(sx(p.size))},${fmt(sy(p.accuracy + p.spread))}`);
  const lower = [...history]
    .reverse()
    .map((p) => `${fmt(sx(p.size))},${fmt(sy(p.accuracy - p.spread))}`);
  const band = `<polygon class="spread-band" points="${[...upper, ...lower].join(" ")}"/>`;

  const line = `<polyline class="accuracy-line" fill="none" points="${history
    .map((p) => `${fmt(sx(p.size))},${fmt(sy(p.accuracy))}`)
    .join(" ")}"/>`;

  const dots = history
    .map(
      (p) =>
        `<circle class="accuracy-point" r="3" cx="${fmt(sx(p.size))}" cy="${fmt(
          sy(p.accuracy),
        )}" data-size="${p.size}" data-accuracy="${p.accuracy}"><title>${p.size} texts: ${(
          p.accuracy * 100
        ).toFixed(1)}%</title></circle>`,
    )
    .join("");

  const axis = `<line class="axis" x1="${PAD}" y1="${height - PAD}" x2="${
    width - PAD
  }" y2="${height - PAD}"/><line class="axis" x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${
    height - PAD
  }"/>`;

  return `${open}${axis}${band}${line}${dots}</svg>`;
}
