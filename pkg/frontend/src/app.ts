// Application shell: wires the flow view, chart views, pinned list and
// control panel over one ViewState. Rendering is synchronous and driven by
// plain data so tests can exercise it without a server.

import { cellRecommendations, renderChartView } from "./chartview.js";
import { renderControlPanel, renderPinnedList } from "./control.js";
import { renderFlow } from "./flow.js";
import { ViewState, activePin, initialState, pinChart, setActivePin,
         toggleExpanded, unpin } from "./state.js";
import { BundleJSON, TraceJSON } from "./types.js";

export interface TraceFetcher {
  (node: string, chartIndex: number): Promise<TraceJSON>;
}

export class App {
  state: ViewState = initialState();
  trace: TraceJSON | null = null;
  private requestToken = 0;

  constructor(public root: HTMLElement, public bundle: BundleJSON,
              private fetchTrace: TraceFetcher,
              private bundleBytes: () => string) {
    root.innerHTML = `
      <header class="topbar">
        <span class="title">noteflow</span>
        <div id="control"></div>
      </header>
      <main>
        <section id="cells"></section>
        <section id="flow"></section>
        <aside id="pinned"></aside>
      </main>`;
    this.render();
  }

  private el(id: string): HTMLElement {
    return this.root.querySelector(`#${id}`) as HTMLElement;
  }

  render(): void {
    this.renderCells();
    renderFlow(this.el("flow"), this.bundle, this.trace, this.state, {
      onToggleNode: (nodeId) => {
        const entry = this.trace?.nodes[nodeId];
        const fallback = !!entry && !!entry.data &&
          (entry.change === "changed" || entry.change === "not_applicable");
        this.state = toggleExpanded(this.state, nodeId, fallback);
        this.render();
      },
    });
    renderPinnedList(this.el("pinned"), this.state, {
      onSelectPin: (i) => this.activate(i),
      onUnpin: (i) => this.removePin(i),
    });
    renderControlPanel(this.el("control"), this.state, {
      onSelectPin: (i) => this.activate(i),
      onUpload: (bundle) => {
        this.bundle = bundle;
        this.state = initialState();
        this.trace = null;
        this.render();
      },
      bundleBytes: this.bundleBytes,
    });
  }

  private renderCells(): void {
    const host = this.el("cells");
    host.innerHTML = "";
    const execs = [...new Set(this.bundle.graph.nodes.map((n) => n.cell_exec))]
      .sort((a, b) => a - b);
    for (const exec of execs) {
      const section = document.createElement("details");
      section.className = "cell";
      section.dataset.cellExec = String(exec);
      const summary = document.createElement("summary");
      const count = cellRecommendations(this.bundle, exec, this.state.filters).length;
      summary.textContent = `cell ${exec} — ${count} charts`;
      section.appendChild(summary);
      const view = document.createElement("div");
      renderChartView(view, this.bundle, exec, this.state.filters,
                      (node, chartIndex) => void this.pin(node, chartIndex));
      section.appendChild(view);
      host.appendChild(section);
    }
  }

  async pin(node: string, chartIndex: number): Promise<void> {
    const info = this.bundle.nodes[node];
    const chart = info.recommendations[chartIndex].chart;
    this.state = pinChart(this.state, { node, chartIndex, chart });
    await this.refreshTrace();
  }

  async activate(index: number): Promise<void> {
    this.state = setActivePin(this.state, index);
    await this.refreshTrace();
  }

  removePin(index: number): void {
    this.state = unpin(this.state, index);
    if (this.state.activePin === null) {
      this.trace = null;
      this.render();
    } else {
      void this.refreshTrace();
    }
  }

  private async refreshTrace(): Promise<void> {
    const pin = activePin(this.state);
    if (!pin) {
      this.trace = null;
      this.render();
      return;
    }
    const token = ++this.requestToken;
    const trace = await this.fetchTrace(pin.node, pin.chartIndex);
    if (token !== this.requestToken) return; // stale response discarded
    this.trace = trace;
    this.render();
  }
}
