// End-to-end UI behavior over the anomaly fixture: pin the top chart, read
// the node colors straight from the DOM and compare them with the trace
// file; unpinning must restore the prior view.

import { readFileSync } from "node:fs";
import { beforeEach, describe, expect, it } from "vitest";

import { App } from "../src/app.js";
import { BundleJSON, TraceJSON } from "../src/types.js";

const bundleText = readFileSync(
  "tests/fixtures/anomaly_bundle.json", "utf-8");
const bundle = JSON.parse(bundleText) as BundleJSON;
const traceFixture = JSON.parse(readFileSync(
  "tests/fixtures/anomaly_trace.json", "utf-8")) as TraceJSON;

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

function makeApp(root: HTMLElement): App {
  const fetchTrace = async (node: string, chart: number): Promise<TraceJSON> => {
    expect(node).toBe(traceFixture.pinned_node);
    expect(chart).toBe(0);
    return structuredClone(traceFixture);
  };
  return new App(root, structuredClone(bundle), fetchTrace, () => bundleText);
}

function domColors(root: HTMLElement): Record<string, string> {
  const out: Record<string, string> = {};
  for (const el of root.querySelectorAll<HTMLElement>(".node[data-node-id]")) {
    out[el.dataset.nodeId!] = el.dataset.color!;
  }
  return out;
}

describe("flow UI end to end", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<div id='app'></div>";
    root = document.getElementById("app") as HTMLElement;
  });

  it("renders all graph nodes neutrally before any pin", () => {
    makeApp(root);
    const colors = domColors(root);
    expect(Object.keys(colors)).toHaveLength(bundle.graph.nodes.length);
    expect(new Set(Object.values(colors))).toEqual(new Set(["neutral"]));
    expect(root.querySelectorAll(".node-chart")).toHaveLength(0);
  });

  it("pinning the top chart colors nodes exactly as the trace file says", async () => {
    const app = makeApp(root);
    const cell = root.querySelector("details.cell[data-cell-exec='6']")!;
    const pinButton = cell.querySelector(".pin-button") as HTMLButtonElement;
    pinButton.click();
    await flush();

    const colors = domColors(root);
    for (const [nodeId, entry] of Object.entries(traceFixture.nodes)) {
      expect(colors[nodeId], nodeId).toBe(entry.color);
    }
    // changed nodes expand by default, similar ones stay collapsed
    for (const [nodeId, entry] of Object.entries(traceFixture.nodes)) {
      const el = root.querySelector(`.node[data-node-id='${nodeId}']`)!;
      const expanded = el.classList.contains("expanded");
      if (entry.change === "similar") expect(expanded, nodeId).toBe(false);
      if (entry.change === "changed") expect(expanded, nodeId).toBe(true);
    }
    // related links are black, the pinned list shows the active pin
    expect(root.querySelectorAll("line.edge.related").length).toBeGreaterThan(0);
    expect(app.state.pinned).toHaveLength(1);
    expect(root.querySelector(".pinned-card.active")).toBeTruthy();
  });

  it("pin then unpin restores the prior flow view", async () => {
    const app = makeApp(root);
    const before = root.querySelector("#flow")!.innerHTML;
    const cell = root.querySelector("details.cell[data-cell-exec='6']")!;
    (cell.querySelector(".pin-button") as HTMLButtonElement).click();
    await flush();
    expect(root.querySelector("#flow")!.innerHTML).not.toBe(before);

    (root.querySelector(".unpin-button") as HTMLButtonElement).click();
    await flush();
    expect(root.querySelector("#flow")!.innerHTML).toBe(before);
    expect(app.state.pinned).toHaveLength(0);
  });

  it("expanded charts show data from the trace entry, not recomputed", async () => {
    makeApp(root);
    const cell = root.querySelector("details.cell[data-cell-exec='6']")!;
    (cell.querySelector(".pin-button") as HTMLButtonElement).click();
    await flush();
    const pinnedEntry = traceFixture.nodes["df_type_C6_L1"];
    const node = root.querySelector(".node[data-node-id='df_type_C6_L1']")!;
    const bars = [...node.querySelectorAll("rect.bar")];
    expect(bars.map((b) => [b.getAttribute("data-x"), Number(b.getAttribute("data-y"))]))
      .toEqual(pinnedEntry.data!.map((row) => [String(row.x), row.y]));
  });

  it("toggling a collapsed similar node expands it", async () => {
    makeApp(root);
    const cell = root.querySelector("details.cell[data-cell-exec='6']")!;
    (cell.querySelector(".pin-button") as HTMLButtonElement).click();
    await flush();
    const similar = Object.entries(traceFixture.nodes)
      .find(([, e]) => e.change === "similar")![0];
    let el = root.querySelector(`.node[data-node-id='${similar}']`) as HTMLElement;
    expect(el.classList.contains("expanded")).toBe(false);
    el.click();
    await flush();
    el = root.querySelector(`.node[data-node-id='${similar}']`) as HTMLElement;
    expect(el.classList.contains("expanded")).toBe(true);
  });

  it("uploading a bundle resets the view to it", async () => {
    const app = makeApp(root);
    const other = structuredClone(bundle);
    other.graph.nodes = other.graph.nodes.slice(0, 2);
    other.graph.columns = [other.graph.nodes.map((n) => n.id)];
    other.graph.edges = [];
    other.graph.version_links = [];
    // simulate the upload handler's effect directly
    app.bundle = other;
    app.state = (await import("../src/state.js")).initialState();
    app.trace = null;
    app.render();
    expect(Object.keys(domColors(root))).toHaveLength(2);
  });
});
