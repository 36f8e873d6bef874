/**
 * Application shell: header with run picker, tab navigation, terminology
 * toggle, and the active view.  The shell owns the Store and re-renders on
 * every state change; the URL mirrors the state, so back/forward and
 * shared links land on the same screen.
 */

import { Client, RequestLane } from "./api";
import type { ExportResult } from "./api";
import type { Ctx } from "./context";
import { el, fill } from "./dom";
import { parseState, Store } from "./state";
import type { Tab } from "./state";
import { renderCandidates } from "./views/candidate";
import { renderEnsemble } from "./views/ensemble";
import { renderOverview } from "./views/overview";
import { renderSearch, stopPlay } from "./views/searchspace";
import type { RunsDoc } from "./types";

const TAB_LABELS: Record<Tab, string> = {
  overview: "Overview",
  candidates: "Candidates",
  search: "Search space",
  ensemble: "Ensemble",
};

const TERMINOLOGY_KEY = "runlens-terminology";

function saveToBrowser(result: ExportResult): void {
  let binary = "";
  for (const byte of result.bytes) binary += String.fromCharCode(byte);
  const anchor = el("a", {
    href: `data:${result.mediaType};base64,${btoa(binary)}`,
    download: result.filename,
  });
  document.body.append(anchor);
  anchor.click();
  anchor.remove();
}

export interface AppOptions {
  client?: Client;
  onExport?: (result: ExportResult) => void;
}

export interface AppHandle {
  store: Store;
  ctx: Ctx;
}

function header(ctx: Ctx, runsDoc: RunsDoc, rerender: () => void): HTMLElement {
  const state = ctx.store.state;

  const runPick = el("select", {
    "data-control": "run",
    onchange: (event) => {
      // a new run invalidates every per-run selection
      ctx.store.update({
        run: (event.target as HTMLSelectElement).value,
        candidates: [],
        node: null,
        expanded: [],
        brushes: {},
        at: null,
        targetClass: null,
      });
    },
  });
  for (const run of runsDoc.runs) {
    runPick.append(
      el(
        "option",
        { value: run.run_id, selected: run.run_id === state.run },
        `${run.run_id} (${run.task}, ${run.metric_name})`,
      ),
    );
  }

  const nav = el("nav", { class: "tabs" });
  for (const tab of Object.keys(TAB_LABELS) as Tab[]) {
    nav.append(
      el(
        "button",
        {
          class: tab === state.tab ? "tab active" : "tab",
          "data-tab": tab,
          onclick: () => ctx.store.update({ tab }),
        },
        TAB_LABELS[tab],
      ),
    );
  }

  const terms = el(
    "select",
    {
      "data-control": "terminology",
      onchange: (event) => {
        localStorage.setItem(TERMINOLOGY_KEY, (event.target as HTMLSelectElement).value);
        rerender();
      },
    },
    el("option", { value: "recall", selected: ctx.terminology() === "recall" }, "recall"),
    el(
      "option",
      { value: "sensitivity", selected: ctx.terminology() === "sensitivity" },
      "sensitivity",
    ),
  );

  return el(
    "header",
    { class: "app-header" },
    el("h1", {}, "runlens explorer"),
    el("label", { class: "field" }, "run ", runPick),
    nav,
    el("label", { class: "field" }, "terminology ", terms),
  );
}

function renderView(view: HTMLElement, ctx: Ctx): void {
  switch (ctx.store.state.tab) {
    case "overview":
      renderOverview(view, ctx);
      break;
    case "candidates":
      renderCandidates(view, ctx);
      break;
    case "search":
      renderSearch(view, ctx);
      break;
    case "ensemble":
      renderEnsemble(view, ctx);
      break;
  }
}

export async function initApp(root: HTMLElement, options: AppOptions = {}): Promise<AppHandle> {
  const client = options.client ?? new Client();
  const lane = new RequestLane();
  const store = new Store(parseState(window.location.search));
  const ctx: Ctx = {
    client,
    lane,
    store,
    onExport: options.onExport ?? saveToBrowser,
    terminology: () =>
      localStorage.getItem(TERMINOLOGY_KEY) === "sensitivity" ? "sensitivity" : "recall",
  };

  const runsDoc = await client.runs();
  if (!store.state.run && runsDoc.runs.length > 0) {
    store.update({ run: (runsDoc.runs[0] as { run_id: string }).run_id }, { push: false });
  }

  const view = el("main", { class: "view" });
  const rerender = () => {
    fill(root, header(ctx, runsDoc, rerender), view);
    renderView(view, ctx);
  };

  store.subscribe((state, previous) => {
    if (state.tab !== previous.tab) {
      stopPlay();
      lane.abortAll();
    }
    rerender();
  });
  window.addEventListener("popstate", () => {
    stopPlay();
    store.set(parseState(window.location.search), { push: false });
  });

  rerender();
  return { store, ctx };
}
