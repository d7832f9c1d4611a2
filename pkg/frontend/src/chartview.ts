// Per-cell chart view: merged ranked recommendations with filtering and pins.

import { renderChartSVG, chartTitle } from "./charts.js";
import { Filters } from "./state.js";
import { BundleJSON, RecommendationJSON } from "./types.js";

export interface CellRecommendation extends RecommendationJSON {
  node: string;
  variable: string;
}

export interface PinHandler {
  (node: string, chartIndex: number): void;
}

// rank keys sort descending on the numeric criteria, ascending on the tie
export function compareRankKeys(a: (number | string)[], b: (number | string)[]): number {
  const n = 7;
  for (let i = 0; i < n; i++) {
    const av = a[i] as number;
    const bv = b[i] as number;
    if (av !== bv) return bv - av;
  }
  for (let i = n; i < Math.max(a.length, b.length); i++) {
    const av = String(a[i] ?? "");
    const bv = String(b[i] ?? "");
    if (av !== bv) return av < bv ? -1 : 1;
  }
  return 0;
}

export function cellRecommendations(bundle: BundleJSON, cellExec: number,
                                    filters: Filters): CellRecommendation[] {
  const cellNodes = bundle.graph.nodes.filter((n) => n.cell_exec === cellExec);
  const merged: CellRecommendation[] = [];
  for (const node of cellNodes) {
    const info = bundle.nodes[node.id];
    if (!info) continue;
    for (const rec of info.recommendations) {
      merged.push({ ...rec, node: node.id, variable: node.variable });
    }
  }
  merged.sort((a, b) => compareRankKeys(a.rank_key, b.rank_key));

  let table = filters.table;
  if (!table) {
    // default to the cell's latest assigned variable
    const assigned = cellNodes.filter((n) => !n.is_display);
    const latest = assigned.sort((a, b) =>
      a.epoch - b.epoch || a.line - b.line).at(-1);
    table = latest ? latest.variable : null;
  }
  return merged.filter((rec) => {
    if (table && rec.variable !== table) return false;
    if (filters.columns.length) {
      const fields = Object.values(rec.chart.spec.encoding)
        .map((e) => e.field).filter(Boolean) as string[];
      if (!filters.columns.some((c) => fields.includes(c))) return false;
    }
    if (filters.reasons.length) {
      const names = new Set<string>();
      for (const tag of rec.tags) {
        const detail = tag.transform ?? tag.fact_kind ?? "";
        names.add(tag.reason);
        names.add(detail);
        names.add(`${tag.reason}/${detail}`);
      }
      if (!filters.reasons.some((r) => names.has(r))) return false;
    }
    return true;
  });
}

export function renderChartView(container: HTMLElement, bundle: BundleJSON,
                                cellExec: number, filters: Filters,
                                onPin: PinHandler): void {
  container.innerHTML = "";
  container.classList.add("chart-view");
  const recs = cellRecommendations(bundle, cellExec, filters);
  if (!recs.length) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "no recommendations for this cell";
    container.appendChild(empty);
    return;
  }
  for (const rec of recs) {
    const card = document.createElement("div");
    card.className = "chart-card";
    card.dataset.node = rec.node;
    card.dataset.rank = String(rec.rank);

    const title = document.createElement("div");
    title.className = "card-title";
    title.textContent = chartTitle(rec.chart);
    card.appendChild(title);

    if (rec.data) {
      const body = document.createElement("div");
      body.className = "card-chart";
      body.innerHTML = renderChartSVG(rec.chart, rec.data);
      card.appendChild(body);
    }

    const tags = document.createElement("div");
    tags.className = "card-tags";
    tags.textContent = rec.tags
      .map((t) => `${t.reason}/${t.transform ?? t.fact_kind ?? ""}`).join("  ");
    card.appendChild(tags);

    const meta = document.createElement("div");
    meta.className = "card-columns";
    meta.textContent = `${rec.variable} · ` + Object.entries(rec.chart.spec.encoding)
      .map(([ch, e]) => `${ch}=${e.field ?? "count"}`).join(", ");
    card.appendChild(meta);

    const pin = document.createElement("button");
    pin.className = "pin-button";
    pin.textContent = "pin";
    pin.addEventListener("click", () => onPin(rec.node, rec.rank));
    card.appendChild(pin);

    container.appendChild(card);
  }
}
