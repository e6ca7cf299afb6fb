/** Bootstrap: build the static chrome, wire the controller, and either load
 * the trace named in the URL (?trace=<id>) or show a paste-and-submit form. */

import { ApiClient } from "./api.js";
import { App, type AppElements } from "./app.js";
import type { ViewName } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  parent?: HTMLElement,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (parent) parent.appendChild(node);
  return node;
}

function buildChrome(root: HTMLElement): AppElements {
  const header = el("header", "topbar", root);
  const title = el("span", "title", header);
  title.textContent = "retrace";
  const viewSwitch = el("span", "view-switch", header);
  const spacefillButton = el("button", "view-button", viewSwitch);
  spacefillButton.textContent = "Space-Filling Nodes";
  spacefillButton.dataset.view = "spacefill";
  const timelineButton = el("button", "view-button", viewSwitch);
  timelineButton.textContent = "Sequential Timeline";
  timelineButton.dataset.view = "timeline";
  const legend = el("div", "legend", header);

  const error = el("div", "error-panel", root);
  error.hidden = true;
  const scene = el("main", "scene", root);
  const drawer = el("footer", "drawer", root);

  return {
    scene,
    legend,
    drawer,
    error,
    viewButtons: {
      spacefill: spacefillButton,
      timeline: timelineButton,
    } as Record<ViewName, HTMLButtonElement>,
  };
}

function buildSubmitForm(root: HTMLElement, onSubmit: (text: string) => void): void {
  const form = el("div", "submit-form", root);
  const hint = el("p", "submit-hint", form);
  hint.textContent =
    "Paste a raw reasoning trace (or a provider response JSON) and submit.";
  const area = el("textarea", "submit-text", form);
  area.rows = 12;
  const go = el("button", "submit-button", form);
  go.textContent = "Structure this trace";
  go.addEventListener("click", () => {
    if (area.value.trim()) onSubmit(area.value);
  });
}

export async function bootstrap(root: HTMLElement): Promise<App> {
  const api = new ApiClient();
  const elements = buildChrome(root);
  const app = new App(api, elements, () => ({
    width: Math.max(320, window.innerWidth),
    height: Math.max(240, window.innerHeight - 160),
  }));

  const traceId = new URLSearchParams(window.location.search).get("trace");
  if (traceId) {
    await app.load(traceId);
  } else {
    buildSubmitForm(elements.scene, (text) => {
      void (async () => {
        const id = await api.submitTrace(text);
        window.history.replaceState(null, "", `?trace=${id}`);
        await app.load(id);
      })();
    });
  }
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void bootstrap(document.getElementById("app") as HTMLElement);
}
