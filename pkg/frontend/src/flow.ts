// Flow view: stepped columns of table-state nodes, transformation edges,
// version links, and trace-driven coloring.

import { renderChartSVG, chartTitle } from "./charts.js";
import { ViewState } from "./state.js";
import { BundleJSON, TraceJSON } from "./types.js";

const NODE_W = 170;
const NODE_GAP_Y = 26;
const COL_GAP = 70;
const NODE_H = 46;
const CHART_H = 170;

export interface FlowCallbacks {
  onToggleNode?: (nodeId: string) => void;
}

interface Placed {
  x: number;
  y: number;
  height: number;
}

export function renderFlow(container: HTMLElement, bundle: BundleJSON,
                           trace: TraceJSON | null, state: ViewState,
                           callbacks: FlowCallbacks = {}): void {
  container.innerHTML = "";
  container.classList.add("flow-view");
  const related = trace ? new Set(Object.keys(trace.nodes)) : null;

  const placed = new Map<string, Placed>();
  const columns = bundle.graph.columns;
  let x = 10;
  for (const column of columns) {
    let y = 10;
    for (const nodeId of column) {
      const expanded = isExpanded(nodeId, trace, state);
      const height = expanded && trace?.nodes[nodeId]?.data ? NODE_H + CHART_H : NODE_H;
      placed.set(nodeId, { x, y, height });
      y += height + NODE_GAP_Y;
    }
    x += NODE_W + COL_GAP;
  }

  const width = Math.max(x, 400);
  const height = Math.max(...[...placed.values()].map((p) => p.y + p.height + 20), 300);
  const svgParts = [`<svg class="edges" width="${width}" height="${height}" ` +
    `xmlns="http://www.w3.org/2000/svg">`];
  for (const edge of bundle.graph.edges) {
    const a = placed.get(edge.src);
    const b = placed.get(edge.dst);
    if (!a || !b) continue;
    const relatedEdge = related !== null && related.has(edge.src) && related.has(edge.dst);
    const cls = related === null ? "edge neutral" : relatedEdge ? "edge related" : "edge unrelated";
    const stroke = related === null ? "#888" : relatedEdge ? "#111" : "#c5c5c5";
    svgParts.push(`<line class="${cls}" data-src="${edge.src}" data-dst="${edge.dst}" ` +
      `data-transform="${edge.transform}" x1="${a.x + NODE_W / 2}" y1="${a.y + NODE_H}" ` +
      `x2="${b.x + NODE_W / 2}" y2="${b.y}" stroke="${stroke}" ` +
      `marker-end="url(#arrow)"></line>`);
  }
  for (const [src, dst] of bundle.graph.version_links) {
    const a = placed.get(src);
    const b = placed.get(dst);
    if (!a || !b) continue;
    svgParts.push(`<line class="version-link" data-src="${src}" data-dst="${dst}" ` +
      `x1="${a.x + NODE_W}" y1="${a.y + NODE_H / 2}" x2="${b.x}" y2="${b.y + NODE_H / 2}" ` +
      `stroke="#777" stroke-dasharray="5,4"></line>`);
  }
  svgParts.push("</svg>");

  const layer = document.createElement("div");
  layer.className = "flow-canvas";
  layer.style.width = `${width}px`;
  layer.style.height = `${height}px`;
  layer.innerHTML = svgParts.join("");

  for (const [nodeId, pos] of placed) {
    const entry = trace?.nodes[nodeId] ?? null;
    const color = entry ? entry.color : "neutral";
    const expanded = isExpanded(nodeId, trace, state);
    const node = document.createElement("div");
    node.className = `node color-${color}${expanded ? " expanded" : ""}`;
    node.dataset.nodeId = nodeId;
    node.dataset.color = color;
    node.style.left = `${pos.x}px`;
    node.style.top = `${pos.y}px`;
    node.style.width = `${NODE_W}px`;

    const label = document.createElement("div");
    label.className = "node-label";
    label.textContent = nodeId;
    node.appendChild(label);

    if (entry) {
      const status = document.createElement("div");
      status.className = "node-status";
      status.textContent = entry.status === "untraceable"
        ? `untraceable (${entry.reason ?? ""})` : entry.change;
      node.appendChild(status);
      if (expanded && entry.data && entry.chart) {
        const chart = document.createElement("div");
        chart.className = "node-chart";
        chart.innerHTML = renderChartSVG(entry.chart, entry.data);
        chart.title = chartTitle(entry.chart);
        node.appendChild(chart);
      }
      node.addEventListener("click", () => callbacks.onToggleNode?.(nodeId));
    }
    layer.appendChild(node);
  }
  container.appendChild(layer);
}

export function isExpanded(nodeId: string, trace: TraceJSON | null,
                           state: ViewState): boolean {
  const override = state.expanded[nodeId];
  if (override !== undefined) return override;
  const entry = trace?.nodes[nodeId];
  if (!entry || !entry.data) return false;
  // changed charts open by default, similar ones stay collapsed
  return entry.change === "changed" || entry.change === "not_applicable";
}
