// Minimal SVG renderers for the engine's chart data series.
// The UI never aggregates: every plotted number comes straight from the
// series rows computed by the engine.

import { ChartJSON } from "./types.js";

const W = 280;
const H = 150;
const PAD = { left: 40, right: 10, top: 10, bottom: 30 };

type Row = Record<string, unknown>;

function svgOpen(): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" ` +
    `class="chart" width="${W}" height="${H}">`;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/"/g, "&quot;");
}

function scale(v: number, lo: number, hi: number, outLo: number, outHi: number): number {
  if (hi === lo) return (outLo + outHi) / 2;
  return outLo + ((v - lo) / (hi - lo)) * (outHi - outLo);
}

function axisLabel(x: number, y: number, text: string, anchor = "middle"): string {
  return `<text x="${x}" y="${y}" text-anchor="${anchor}" class="axis-label">` +
    `${esc(text)}</text>`;
}

const COLOR_WHEEL = ["#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2",
  "#b279a2", "#ff9da6", "#9d755d"];

function colorFor(key: string, keys: string[]): string {
  return COLOR_WHEEL[Math.max(0, keys.indexOf(key)) % COLOR_WHEEL.length];
}

export function renderChartSVG(chart: ChartJSON, data: Row[]): string {
  if (!data.length) {
    return `${svgOpen()}<text x="${W / 2}" y="${H / 2}" text-anchor="middle" ` +
      `class="empty">no rows</text></svg>`;
  }
  switch (chart.kind) {
    case "histogram": return renderHistogram(data);
    case "bar": return renderBar(data);
    case "line": return renderLine(data);
    case "scatter": return renderScatter(data);
    case "heatmap": return renderHeatmap(data);
    default: return `${svgOpen()}</svg>`;
  }
}

function renderHistogram(data: Row[]): string {
  const lo = Math.min(...data.map((r) => r.bin0 as number));
  const hi = Math.max(...data.map((r) => r.bin1 as number));
  const maxY = Math.max(...data.map((r) => r.y as number));
  const colorKeys = [...new Set(data.map((r) => String(r.color ?? "")))];
  const parts = [svgOpen()];
  for (const row of data) {
    const x0 = scale(row.bin0 as number, lo, hi, PAD.left, W - PAD.right);
    const x1 = scale(row.bin1 as number, lo, hi, PAD.left, W - PAD.right);
    const y = scale(row.y as number, 0, maxY, H - PAD.bottom, PAD.top);
    const fill = row.color !== undefined
      ? colorFor(String(row.color), colorKeys) : COLOR_WHEEL[0];
    parts.push(`<rect class="bin" data-y="${row.y}" x="${x0}" y="${y}" ` +
      `width="${Math.max(1, x1 - x0 - 1)}" height="${H - PAD.bottom - y}" ` +
      `fill="${fill}"></rect>`);
  }
  parts.push(axisLabel(PAD.left, H - 8, String(lo), "start"));
  parts.push(axisLabel(W - PAD.right, H - 8, String(hi), "end"));
  parts.push(axisLabel(12, PAD.top + 8, String(maxY), "start"));
  parts.push("</svg>");
  return parts.join("");
}

function renderBar(data: Row[]): string {
  const keys = [...new Set(data.map((r) => String(r.x)))];
  const maxY = Math.max(...data.map((r) => r.y as number));
  const band = (W - PAD.left - PAD.right) / keys.length;
  const colorKeys = [...new Set(data.map((r) => String(r.color ?? "")))];
  const parts = [svgOpen()];
  for (const row of data) {
    const i = keys.indexOf(String(row.x));
    const y = scale(row.y as number, 0, maxY, H - PAD.bottom, PAD.top);
    const fill = row.color !== undefined
      ? colorFor(String(row.color), colorKeys) : COLOR_WHEEL[0];
    parts.push(`<rect class="bar" data-x="${esc(String(row.x))}" data-y="${row.y}" ` +
      `x="${PAD.left + i * band + 2}" y="${y}" width="${Math.max(1, band - 4)}" ` +
      `height="${H - PAD.bottom - y}" fill="${fill}"></rect>`);
  }
  keys.forEach((k, i) => {
    parts.push(axisLabel(PAD.left + i * band + band / 2, H - 8, k));
  });
  parts.push(axisLabel(12, PAD.top + 8, String(maxY), "start"));
  parts.push("</svg>");
  return parts.join("");
}

function renderLine(data: Row[]): string {
  const ys = data.map((r) => r.y as number);
  const yLo = Math.min(...ys);
  const yHi = Math.max(...ys);
  const groups = new Map<string, Row[]>();
  for (const row of data) {
    const key = String(row.color ?? "");
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(row);
  }
  const colorKeys = [...groups.keys()];
  const parts = [svgOpen()];
  for (const [key, rows] of groups) {
    const points = rows.map((row, i) => {
      const x = scale(i, 0, Math.max(1, rows.length - 1), PAD.left, W - PAD.right);
      const y = scale(row.y as number, yLo, yHi, H - PAD.bottom, PAD.top);
      return `${x},${y}`;
    }).join(" ");
    parts.push(`<polyline class="series" data-n="${rows.length}" fill="none" ` +
      `stroke="${colorFor(key, colorKeys)}" points="${points}"></polyline>`);
  }
  const first = data[0];
  const last = data[data.length - 1];
  parts.push(axisLabel(PAD.left, H - 8, String(first.x), "start"));
  parts.push(axisLabel(W - PAD.right, H - 8, String(last.x), "end"));
  parts.push("</svg>");
  return parts.join("");
}

function renderScatter(data: Row[]): string {
  const xs = data.map((r) => r.x as number);
  const ys = data.map((r) => r.y as number);
  const xLo = Math.min(...xs), xHi = Math.max(...xs);
  const yLo = Math.min(...ys), yHi = Math.max(...ys);
  const colorKeys = [...new Set(data.map((r) => String(r.color ?? "")))];
  const parts = [svgOpen()];
  for (const row of data) {
    const cx = scale(row.x as number, xLo, xHi, PAD.left, W - PAD.right);
    const cy = scale(row.y as number, yLo, yHi, H - PAD.bottom, PAD.top);
    const fill = row.color !== undefined
      ? colorFor(String(row.color), colorKeys) : COLOR_WHEEL[0];
    parts.push(`<circle class="pt" cx="${cx}" cy="${cy}" r="2.5" ` +
      `fill="${fill}" fill-opacity="0.7"></circle>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

function renderHeatmap(data: Row[]): string {
  const xs = [...new Set(data.map((r) => String(r.x)))];
  const ys = [...new Set(data.map((r) => String(r.y)))];
  const maxC = Math.max(...data.map((r) => r.count as number));
  const bw = (W - PAD.left - PAD.right) / xs.length;
  const bh = (H - PAD.top - PAD.bottom) / ys.length;
  const parts = [svgOpen()];
  for (const row of data) {
    const i = xs.indexOf(String(row.x));
    const j = ys.indexOf(String(row.y));
    const alpha = maxC ? (row.count as number) / maxC : 0;
    parts.push(`<rect class="cell" data-count="${row.count}" ` +
      `x="${PAD.left + i * bw}" y="${PAD.top + j * bh}" width="${bw}" height="${bh}" ` +
      `fill="#4c78a8" fill-opacity="${(0.15 + 0.85 * alpha).toFixed(3)}"></rect>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

export function chartTitle(chart: ChartJSON): string {
  const enc = chart.spec.encoding;
  const describe = (e?: { field?: string; aggregate?: string }) => {
    if (!e) return "";
    if (e.field && e.aggregate) return `${e.aggregate}(${e.field})`;
    return e.field ?? (e.aggregate === "count" ? "count" : "");
  };
  const color = enc.color && enc.color.field ? ` by ${enc.color.field}` : "";
  return `${chart.kind}: ${describe(enc.x)} × ${describe(enc.y)}${color}`;
}
