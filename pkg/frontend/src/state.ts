// View state: pinned charts, the active pin, expanded nodes and chart filters.
// All transitions are pure so tests can snapshot and compare states.

import { Pin } from "./types.js";

export interface Filters {
  table: string | null;
  columns: string[];
  reasons: string[];
}

export interface ViewState {
  pinned: Pin[];
  activePin: number | null; // index into pinned
  expanded: Record<string, boolean>; // node id -> explicit override
  filters: Filters;
  selectedColumn: number | null; // layout column highlight
}

export function initialState(): ViewState {
  return {
    pinned: [],
    activePin: null,
    expanded: {},
    filters: { table: null, columns: [], reasons: [] },
    selectedColumn: null,
  };
}

function invariant(state: ViewState): ViewState {
  if (state.activePin !== null &&
      (state.activePin < 0 || state.activePin >= state.pinned.length)) {
    throw new Error("active pin must reference a pinned chart");
  }
  return state;
}

export function pinChart(state: ViewState, pin: Pin): ViewState {
  const existing = state.pinned.findIndex(
    (p) => p.node === pin.node && p.chartIndex === pin.chartIndex);
  if (existing >= 0) {
    return invariant({ ...state, activePin: existing });
  }
  const pinned = [...state.pinned, pin];
  return invariant({ ...state, pinned, activePin: pinned.length - 1 });
}

export function unpin(state: ViewState, index: number): ViewState {
  const pinned = state.pinned.filter((_, i) => i !== index);
  let activePin = state.activePin;
  if (activePin !== null) {
    if (activePin === index) activePin = pinned.length ? pinned.length - 1 : null;
    else if (activePin > index) activePin -= 1;
  }
  if (!pinned.length) activePin = null;
  return invariant({ ...state, pinned, activePin, expanded: {} });
}

export function setActivePin(state: ViewState, index: number | null): ViewState {
  return invariant({ ...state, activePin: index, expanded: {} });
}

export function toggleExpanded(state: ViewState, nodeId: string, fallback: boolean): ViewState {
  const current = state.expanded[nodeId] ?? fallback;
  return { ...state, expanded: { ...state.expanded, [nodeId]: !current } };
}

export function setFilters(state: ViewState, filters: Partial<Filters>): ViewState {
  return { ...state, filters: { ...state.filters, ...filters } };
}

export function activePin(state: ViewState): Pin | null {
  return state.activePin === null ? null : state.pinned[state.activePin];
}
