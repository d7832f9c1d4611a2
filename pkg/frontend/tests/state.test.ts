import { describe, expect, it } from "vitest";

import { activePin, initialState, pinChart, setActivePin, toggleExpanded,
         unpin } from "../src/state.js";
import { ChartJSON } from "../src/types.js";

const chart: ChartJSON = {
  kind: "bar",
  spec: { mark: "bar", encoding: { x: { field: "Type", type: "nominal" },
                                   y: { aggregate: "count", type: "quantitative" } } },
};

describe("view state", () => {
  it("pinning appends and activates", () => {
    let s = initialState();
    s = pinChart(s, { node: "df_C1_L1", chartIndex: 0, chart });
    expect(s.pinned).toHaveLength(1);
    expect(s.activePin).toBe(0);
    s = pinChart(s, { node: "df_C2_L1", chartIndex: 1, chart });
    expect(s.pinned).toHaveLength(2);
    expect(s.activePin).toBe(1);
  });

  it("re-pinning an existing chart activates it instead of duplicating", () => {
    let s = initialState();
    s = pinChart(s, { node: "a_C1_L1", chartIndex: 0, chart });
    s = pinChart(s, { node: "b_C1_L1", chartIndex: 0, chart });
    s = pinChart(s, { node: "a_C1_L1", chartIndex: 0, chart });
    expect(s.pinned).toHaveLength(2);
    expect(s.activePin).toBe(0);
  });

  it("active pin always references a pinned chart", () => {
    let s = initialState();
    expect(activePin(s)).toBeNull();
    s = pinChart(s, { node: "a_C1_L1", chartIndex: 0, chart });
    s = pinChart(s, { node: "b_C1_L1", chartIndex: 2, chart });
    s = unpin(s, 1);
    expect(s.activePin).toBe(0);
    expect(activePin(s)?.node).toBe("a_C1_L1");
    s = unpin(s, 0);
    expect(s.activePin).toBeNull();
    expect(() => setActivePin(pinChart(initialState(),
      { node: "a_C1_L1", chartIndex: 0, chart }), 5)).toThrow();
  });

  it("unpinning earlier entries shifts the active index", () => {
    let s = initialState();
    s = pinChart(s, { node: "a_C1_L1", chartIndex: 0, chart });
    s = pinChart(s, { node: "b_C1_L1", chartIndex: 0, chart });
    s = pinChart(s, { node: "c_C1_L1", chartIndex: 0, chart });
    expect(s.activePin).toBe(2);
    s = unpin(s, 0);
    expect(activePin(s)?.node).toBe("c_C1_L1");
  });

  it("expanded overrides toggle against the per-node default", () => {
    let s = initialState();
    s = toggleExpanded(s, "df_C1_L1", true);
    expect(s.expanded["df_C1_L1"]).toBe(false);
    s = toggleExpanded(s, "df_C1_L1", true);
    expect(s.expanded["df_C1_L1"]).toBe(true);
  });
});
