/**
 * Browser entry point: mounts the store-driven view and wires one
 * delegated click handler plus the keyboard shortcuts. Re-rendering
 * replaces the container's HTML; there is no page reload anywhere.
 */

import { ApiClient } from "./api.js";
import { apiBaseUrl } from "./config.js";
import { renderApp } from "./render.js";
import { LabelingStore } from "./store.js";
import type { Label } from "./types.js";

const container = document.getElementById("app");
if (!container) {
  throw new Error("missing #app container");
}

const store = new LabelingStore(new ApiClient(apiBaseUrl()), {
  raterId: new URLSearchParams(window.location.search).get("rater") ?? "anonymous",
});

store.subscribe(() => {
  container.innerHTML = renderApp(store);
});

container.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) {
    return;
  }
  const id = target.dataset.id ?? "";
  const cls = (target.dataset.class ?? "positive") as Label;
  switch (target.dataset.action) {
    case "label-positive":
      store.decide(id, "positive");
      break;
    case "label-negative":
      store.decide(id, "negative");
      break;
    case "skip":
      store.skip(id);
      break;
    case "clear":
      store.clearDecision(id);
      break;
    case "toggle-feature":
      store.toggleFeature(target.dataset.feature ?? "", cls);
      break;
    case "submit":
      void store.submit();
      break;
    case "retry":
      void store.retry();
      break;
    case "load-more":
      void store.loadMore();
      break;
    case "feature-page-prev":
      store.turnFeaturePage(cls, -1);
      break;
    case "feature-page-next":
      store.turnFeaturePage(cls, 1);
      break;
    case "expand-rule":
      store.toggleRuleExpanded(target.dataset.rule ?? "");
      break;
    case "tag-rule":
      store.toggleRuleTag(target.dataset.rule ?? "");
      break;
  }
});

document.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement || event.target instanceof HTMLTextAreaElement) {
    return;
  }
  if (event.key === "Enter" && (event.ctrlKey || event.metaKey)) {
    void store.submit();
    event.preventDefault();
    return;
  }
  if (store.keyPress(event.key)) {
    event.preventDefault();
  }
});

void store.boot();
