// Control panel and pinned list: switch the traced chart, download or
// upload the bundle.

import { chartTitle } from "./charts.js";
import { ViewState } from "./state.js";
import { BundleJSON } from "./types.js";

export interface ControlHandlers {
  onSelectPin?: (index: number) => void;
  onUnpin?: (index: number) => void;
  onUpload?: (bundle: BundleJSON) => void;
  bundleBytes?: () => string;
}

export function renderPinnedList(container: HTMLElement, state: ViewState,
                                 handlers: ControlHandlers): void {
  container.innerHTML = "";
  container.classList.add("pinned-list");
  if (!state.pinned.length) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "no pinned charts";
    container.appendChild(empty);
    return;
  }
  state.pinned.forEach((pin, index) => {
    const card = document.createElement("div");
    card.className = "pinned-card" + (index === state.activePin ? " active" : "");
    card.dataset.node = pin.node;

    const title = document.createElement("span");
    title.textContent = `${pin.node} · ${chartTitle(pin.chart)}`;
    title.addEventListener("click", () => handlers.onSelectPin?.(index));
    card.appendChild(title);

    const remove = document.createElement("button");
    remove.className = "unpin-button";
    remove.textContent = "unpin";
    remove.addEventListener("click", () => handlers.onUnpin?.(index));
    card.appendChild(remove);

    container.appendChild(card);
  });
}

export function renderControlPanel(container: HTMLElement, state: ViewState,
                                   handlers: ControlHandlers): void {
  container.innerHTML = "";
  container.classList.add("control-panel");

  const toggle = document.createElement("select");
  toggle.className = "trace-toggle";
  const none = document.createElement("option");
  none.value = "";
  none.textContent = "traced chart…";
  toggle.appendChild(none);
  state.pinned.forEach((pin, index) => {
    const option = document.createElement("option");
    option.value = String(index);
    option.textContent = `${pin.node} #${pin.chartIndex}`;
    option.selected = index === state.activePin;
    toggle.appendChild(option);
  });
  toggle.addEventListener("change", () => {
    if (toggle.value !== "") handlers.onSelectPin?.(Number(toggle.value));
  });
  container.appendChild(toggle);

  const download = document.createElement("button");
  download.className = "download-button";
  download.textContent = "download bundle";
  download.addEventListener("click", () => {
    const bytes = handlers.bundleBytes?.();
    if (bytes === undefined) return;
    const blob = new Blob([bytes], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "bundle.json";
    a.click();
    URL.revokeObjectURL(a.href);
  });
  container.appendChild(download);

  const upload = document.createElement("input");
  upload.type = "file";
  upload.className = "upload-input";
  upload.accept = ".json,application/json";
  upload.addEventListener("change", async () => {
    const file = upload.files?.[0];
    if (!file) return;
    const text = await file.text();
    handlers.onUpload?.(JSON.parse(text) as BundleJSON);
  });
  container.appendChild(upload);
}
