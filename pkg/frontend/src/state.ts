/**
 * The view state and its URL form.
 *
 * Everything the explorer shows is a function of this one record: which run
 * is open, which candidates are selected, which pipeline node is active,
 * which axes and cards are expanded, the brush predicates, the time-lapse
 * position, the class a PDP refers to, the surrogate leaf budget, and the
 * row a local explanation inspects.  Serializing it into the query string
 * is what makes back/forward and link sharing work: restoring the URL
 * replays the exact same server requests.
 */

export type Tab = "overview" | "candidates" | "search" | "ensemble";

const TABS: readonly Tab[] = ["overview", "candidates", "search", "ensemble"];

export interface BrushRange {
  min?: number;
  max?: number;
  choices?: string[];
}

export interface ViewState {
  run: string | null;
  tab: Tab;
  /** Multi-selected candidate ids, in selection order. */
  candidates: string[];
  /** Active pipeline node for data previews, or null for the default node. */
  node: string | null;
  /** Expansion tokens: axis ids, "sampling:<hp>", "card:<cid>:<name>". */
  expanded: string[];
  /** Brush predicates keyed by axis id. */
  brushes: Record<string, BrushRange>;
  /** Time-lapse position (a frame time), or null for the final state. */
  at: number | null;
  /** Class label that PDP/ICE and ROC panels refer to. */
  targetClass: string | null;
  /** Leaf budget for the global surrogate. */
  leaves: number;
  /** Row index for the local explanation. */
  row: number;
}

export const DEFAULT_LEAVES = 8;

export function defaultState(): ViewState {
  return {
    run: null,
    tab: "overview",
    candidates: [],
    node: null,
    expanded: [],
    brushes: {},
    at: null,
    targetClass: null,
    leaves: DEFAULT_LEAVES,
    row: 0,
  };
}

export function serializeState(state: ViewState): string {
  const q = new URLSearchParams();
  if (state.run) q.set("run", state.run);
  if (state.tab !== "overview") q.set("tab", state.tab);
  if (state.candidates.length > 0) q.set("sel", state.candidates.join(","));
  if (state.node) q.set("node", state.node);
  if (state.expanded.length > 0) q.set("open", state.expanded.join(","));
  if (Object.keys(state.brushes).length > 0) q.set("brush", JSON.stringify(state.brushes));
  if (state.at !== null) q.set("at", String(state.at));
  if (state.targetClass) q.set("cls", state.targetClass);
  if (state.leaves !== DEFAULT_LEAVES) q.set("leaves", String(state.leaves));
  if (state.row !== 0) q.set("row", String(state.row));
  return q.toString();
}

function parseBrushes(text: string): Record<string, BrushRange> {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return {};
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) return {};
  const brushes: Record<string, BrushRange> = {};
  for (const [axis, value] of Object.entries(raw as Record<string, unknown>)) {
    if (typeof value !== "object" || value === null) continue;
    const entry = value as Record<string, unknown>;
    const brush: BrushRange = {};
    if (typeof entry.min === "number") brush.min = entry.min;
    if (typeof entry.max === "number") brush.max = entry.max;
    if (Array.isArray(entry.choices)) {
      brush.choices = entry.choices.filter((c): c is string => typeof c === "string");
    }
    if (brush.min !== undefined || brush.max !== undefined || brush.choices !== undefined) {
      brushes[axis] = brush;
    }
  }
  return brushes;
}

/** Restores a state from a query string; anything unrecognized is ignored. */
export function parseState(search: string): ViewState {
  const q = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const state = defaultState();
  const run = q.get("run");
  if (run) state.run = run;
  const tab = q.get("tab");
  if (tab && (TABS as readonly string[]).includes(tab)) state.tab = tab as Tab;
  const sel = q.get("sel");
  if (sel) state.candidates = sel.split(",").filter((c) => c.length > 0);
  const node = q.get("node");
  if (node) state.node = node;
  const open = q.get("open");
  if (open) state.expanded = open.split(",").filter((t) => t.length > 0);
  const brush = q.get("brush");
  if (brush) state.brushes = parseBrushes(brush);
  const at = q.get("at");
  if (at !== null && at !== "" && Number.isFinite(Number(at))) state.at = Number(at);
  const cls = q.get("cls");
  if (cls) state.targetClass = cls;
  const leaves = q.get("leaves");
  if (leaves !== null && Number.isInteger(Number(leaves)) && Number(leaves) >= 2) {
    state.leaves = Number(leaves);
  }
  const row = q.get("row");
  if (row !== null && Number.isInteger(Number(row)) && Number(row) >= 0) {
    state.row = Number(row);
  }
  return state;
}

export function toggleItem(list: string[], value: string): string[] {
  return list.includes(value) ? list.filter((v) => v !== value) : [...list, value];
}

export type StateListener = (state: ViewState, previous: ViewState) => void;

/**
 * Holds the current ViewState and tells subscribers when it changes.
 *
 * Updates push the serialized state onto the history stack so the browser's
 * back button walks through earlier views; restoring from a popstate event
 * goes through set() with push disabled.
 */
export class Store {
  private current: ViewState;
  private readonly listeners: StateListener[] = [];
  private readonly pushUrl: (query: string) => void;

  constructor(initial: ViewState, pushUrl?: (query: string) => void) {
    this.current = initial;
    this.pushUrl =
      pushUrl ??
      ((query) => {
        const target = query ? `?${query}` : window.location.pathname;
        window.history.pushState(null, "", target);
      });
  }

  get state(): ViewState {
    return this.current;
  }

  subscribe(listener: StateListener): void {
    this.listeners.push(listener);
  }

  set(next: ViewState, options: { push?: boolean } = {}): void {
    const previous = this.current;
    this.current = next;
    if (options.push !== false) this.pushUrl(serializeState(next));
    for (const listener of this.listeners) listener(next, previous);
  }

  update(patch: Partial<ViewState>, options: { push?: boolean } = {}): void {
    this.set({ ...this.current, ...patch }, options);
  }
}
