/**
 * The one configurable value: where the annotation service lives.
 *
 * Resolution order: `window.__API_BASE_URL__` (set by an inline script in
 * index.html), then an `?api=` URL parameter, then the page's own origin.
 */

declare global {
  interface Window {
    __API_BASE_URL__?: string;
  }
}

export function apiBaseUrl(): string {
  if (typeof window === "undefined") {
    return "http://127.0.0.1:8030";
  }
  if (window.__API_BASE_URL__) {
    return window.__API_BASE_URL__.replace(/\/$/, "");
  }
  const param = new URLSearchParams(window.location.search).get("api");
  if (param) {
    return param.replace(/\/$/, "");
  }
  return window.location.origin;
}
