// Browser entry point: loads the served bundle and boots the app.

import { App } from "./app.js";
import { BundleJSON, TraceJSON } from "./types.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  let bundleText: string;
  try {
    const response = await fetch("/bundle.json");
    if (!response.ok) throw new Error(`${response.status}`);
    bundleText = await response.text();
  } catch (err) {
    root.innerHTML = `<p class="error-banner">failed to load bundle: ${err}</p>`;
    return;
  }
  let bundle: BundleJSON;
  try {
    bundle = JSON.parse(bundleText) as BundleJSON;
  } catch (err) {
    root.innerHTML = `<p class="error-banner">malformed bundle: ${err}</p>`;
    return;
  }
  const fetchTrace = async (node: string, chart: number): Promise<TraceJSON> => {
    const response = await fetch(`/trace?node=${encodeURIComponent(node)}&chart=${chart}`);
    if (!response.ok) {
      const detail = await response.json().catch(() => ({}));
      throw new Error((detail as { error?: string }).error ?? `${response.status}`);
    }
    return response.json() as Promise<TraceJSON>;
  };
  new App(root, bundle, fetchTrace, () => bundleText);
}

void boot();
