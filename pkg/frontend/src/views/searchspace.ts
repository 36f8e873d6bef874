/**
 * Search space exploration.
 *
 * Four linked panels: the merged structure graph as a time lapse, the
 * hierarchical configuration coordinates with expandable axes and brushes,
 * sampling-history panels for opened hyperparameter axes, and the coverage
 * embedding (scatter plus density raster) synced to the same time-lapse
 * position.  Brushing filters both the polylines and the leaderboard.
 */

import { isAbort } from "../api";
import { track } from "../async";
import { matchedCandidates } from "../brush";
import { errorNotice, notice } from "../cards";
import { cornerLabels, extent, frame, linearScale, performanceColor } from "../charts";
import type { Ctx } from "../context";
import { el, fill, svg } from "../dom";
import { fmt } from "../fmt";
import { toggleItem } from "../state";
import type { BrushRange } from "../state";
import type {
  CoverageDoc,
  CpcDoc,
  HpAxisDoc,
  LeaderboardDoc,
  SamplingDoc,
  StepAxisDoc,
  StructureGraphDoc,
} from "../types";

// --- time lapse ---

let playTimer: ReturnType<typeof setInterval> | null = null;

/** Cancels playback; the shell calls this on tab switches and navigation. */
export function stopPlay(): void {
  if (playTimer !== null) clearInterval(playTimer);
  playTimer = null;
}

function frameIndex(frames: number[], at: number | null): number {
  if (at === null) return frames.length - 1;
  let best = frames.length - 1;
  for (let i = 0; i < frames.length; i++) {
    if ((frames[i] as number) <= at) best = i;
    else break;
  }
  return best;
}

function timeLapseBar(ctx: Ctx, frames: number[], atEcho: number | null): HTMLElement {
  const index = frameIndex(frames, ctx.store.state.at);
  const scrub = el("input", {
    type: "range",
    min: 0,
    max: Math.max(0, frames.length - 1),
    step: 1,
    value: index,
    "data-control": "scrub",
    onchange: (event) => {
      stopPlay();
      const i = Number((event.target as HTMLInputElement).value);
      ctx.store.update({ at: frames[i] ?? null });
    },
  });
  const play = el(
    "button",
    {
      "data-control": "play",
      onclick: () => {
        if (playTimer !== null) {
          stopPlay();
          ctx.store.update({}, { push: false });
          return;
        }
        // playback rewrites the position in place; only explicit scrubs
        // leave history entries
        playTimer = setInterval(() => {
          const current = frameIndex(frames, ctx.store.state.at);
          if (current >= frames.length - 1) {
            stopPlay();
            ctx.store.update({ at: null }, { push: false });
            return;
          }
          ctx.store.update({ at: frames[current + 1] ?? null }, { push: false });
        }, 600);
        ctx.store.update({}, { push: false });
      },
    },
    playTimer !== null ? "pause" : "play",
  );
  return el(
    "div",
    { class: "timelapse" },
    play,
    scrub,
    el(
      "span",
      { class: "at-readout" },
      "time ",
      el("span", { "data-field": "at" }, atEcho === null ? "final" : fmt(atEcho)),
    ),
  );
}

function structurePanel(ctx: Ctx, doc: StructureGraphDoc): HTMLElement {
  const layers = new Map<number, number>();
  const position = new Map<string, { x: number; y: number }>();
  for (const node of doc.nodes) {
    const row = layers.get(node.layer) ?? 0;
    layers.set(node.layer, row + 1);
    position.set(node.id, { x: node.layer * 180, y: row * 62 });
  }
  const rows = Math.max(1, ...layers.values());
  const cols = Math.max(1, ...doc.nodes.map((n) => n.layer + 1));
  const f = frame(cols * 180 + 40, rows * 62 + 50, "merged pipeline structures");

  for (const edge of doc.edges) {
    const a = position.get(edge.from);
    const b = position.get(edge.to);
    if (!a || !b) continue;
    f.plot.append(
      svg(
        "line",
        { x1: a.x + 130, y1: a.y + 20, x2: b.x, y2: b.y + 20, class: "pipe-edge" },
        svg("title", {}, edge.columns.join(", ")),
      ),
    );
  }
  for (const node of doc.nodes) {
    const p = position.get(node.id) as { x: number; y: number };
    f.plot.append(
      svg(
        "g",
        { class: "graph-node", "data-node": node.id },
        svg("rect", { x: p.x, y: p.y, width: 130, height: 40, rx: 6 }),
        svg("text", { x: p.x + 8, y: p.y + 17, class: "node-name" }, node.primitive),
        svg(
          "text",
          { x: p.x + 8, y: p.y + 32, class: "node-occurrence", "data-field": "occurrence" },
          fmt(node.occurrence),
        ),
        svg("title", {}, `${node.primitive}: ${node.members.join(", ")}`),
      ),
    );
  }

  return el(
    "section",
    { class: "panel", "data-panel": "structure" },
    el("h2", {}, "Pipeline structures over time"),
    timeLapseBar(ctx, doc.frame_times, doc.at),
    el("div", { class: "scroll-x" }, f.root),
  );
}

// --- configuration coordinates ---

interface VisibleAxis {
  id: string;
  label: string;
  expandable: boolean;
  hp?: HpAxisDoc;
  step?: StepAxisDoc;
}

export function visibleAxes(doc: CpcDoc, expanded: string[]): VisibleAxis[] {
  const out: VisibleAxis[] = [];
  const addHp = (hp: HpAxisDoc) => {
    out.push({ id: hp.axis_id, label: hp.label, expandable: true, hp });
    if (expanded.includes(hp.axis_id)) {
      for (const child of hp.children) addHp(child);
    }
  };
  for (const step of doc.steps) {
    for (const lane of step.lanes) {
      out.push({
        id: lane.axis_id,
        label: lane.label,
        expandable: lane.hyperparameters.length > 0,
        step: lane,
      });
      if (expanded.includes(lane.axis_id)) {
        for (const hp of lane.hyperparameters) addHp(hp);
      }
    }
  }
  for (const hp of doc.global) addHp(hp);
  return out;
}

const AXIS_GAP = 110;
const AXIS_HEIGHT = 220;

function cpcChart(ctx: Ctx, doc: CpcDoc, matched: Set<string>): SVGElement {
  const axes = visibleAxes(doc, ctx.store.state.expanded);
  const f = frame(axes.length * AXIS_GAP + 40, AXIS_HEIGHT + 70, "configuration coordinates");
  const xOf = new Map<string, number>();
  axes.forEach((axis, i) => xOf.set(axis.id, i * AXIS_GAP + 20));

  const brushing = Object.keys(ctx.store.state.brushes).length > 0;
  for (const line of doc.polylines) {
    const vertices: { x: number; y: number; known: boolean }[] = [];
    for (const axis of axes) {
      const coord = line.coordinates.find((c) => c.axis === axis.id);
      if (!coord) continue;
      const x = xOf.get(axis.id) as number;
      if ("missing" in coord) {
        vertices.push({ x, y: AXIS_HEIGHT, known: false });
      } else {
        vertices.push({ x, y: (1 - coord.position) * AXIS_HEIGHT, known: true });
      }
    }
    const selected = ctx.store.state.candidates.includes(line.candidate_id);
    const isMatch = matched.has(line.candidate_id);
    let cls = "polyline";
    if (brushing) cls += isMatch ? " match" : " dim";
    if (selected) cls += " selected";
    const group = svg("g", {
      class: cls,
      "data-candidate": line.candidate_id,
      onclick: () =>
        ctx.store.update({
          candidates: toggleItem(ctx.store.state.candidates, line.candidate_id),
        }),
    });
    group.append(svg("title", {}, `${line.candidate_id}: ${fmt(line.validation_performance)}`));
    for (let i = 1; i < vertices.length; i++) {
      const a = vertices[i - 1] as { x: number; y: number; known: boolean };
      const b = vertices[i] as { x: number; y: number; known: boolean };
      group.append(
        svg("line", {
          x1: a.x,
          y1: a.y,
          x2: b.x,
          y2: b.y,
          class: a.known && b.known ? "seg" : "seg missing",
        }),
      );
    }
    f.plot.append(group);
  }

  axes.forEach((axis) => {
    const x = xOf.get(axis.id) as number;
    f.plot.append(svg("line", { x1: x, y1: 0, x2: x, y2: AXIS_HEIGHT, class: "axis" }));
    const expanded = ctx.store.state.expanded.includes(axis.id);
    const title = svg(
      "text",
      {
        x,
        y: AXIS_HEIGHT + 18,
        "text-anchor": "middle",
        class: axis.expandable ? "axis-name expandable" : "axis-name",
        "data-axis": axis.id,
        onclick: axis.expandable
          ? () =>
              ctx.store.update({
                expanded: toggleItem(ctx.store.state.expanded, axis.id),
              })
          : undefined,
      },
      (axis.expandable ? (expanded ? "▾ " : "▸ ") : "") + axis.label,
    );
    f.plot.append(title);
    if (axis.hp && axis.hp.lower !== undefined && axis.hp.upper !== undefined) {
      f.plot.append(
        svg("text", { x: x + 4, y: AXIS_HEIGHT, class: "axis-bound" }, fmt(axis.hp.lower)),
        svg("text", { x: x + 4, y: 10, class: "axis-bound" }, fmt(axis.hp.upper)),
      );
    }
  });
  return f.root;
}

function brushControls(ctx: Ctx, doc: CpcDoc): HTMLElement {
  const axes = visibleAxes(doc, ctx.store.state.expanded);
  const box = el("div", { class: "brushes" });
  const setBrush = (axisId: string, brush: BrushRange | null) => {
    const brushes = { ...ctx.store.state.brushes };
    if (brush === null) delete brushes[axisId];
    else brushes[axisId] = brush;
    ctx.store.update({ brushes });
  };

  for (const axis of axes) {
    const current = ctx.store.state.brushes[axis.id];
    const fields = el("fieldset", { class: "brush", "data-brush": axis.id });
    fields.append(el("legend", {}, axis.label));

    const choices = axis.step?.choices ?? axis.hp?.choices;
    if (choices !== undefined) {
      for (const choice of choices) {
        const checked = current?.choices?.includes(choice) ?? false;
        fields.append(
          el(
            "label",
            { class: "choice" },
            el("input", {
              type: "checkbox",
              value: choice,
              checked,
              onchange: (event) => {
                const on = (event.target as HTMLInputElement).checked;
                const have = current?.choices ?? [];
                const next = on ? [...have, choice] : have.filter((c) => c !== choice);
                setBrush(axis.id, next.length > 0 ? { choices: next } : null);
              },
            }),
            choice,
          ),
        );
      }
    } else if (axis.hp) {
      const onRange = () => {
        const minInput = fields.querySelector<HTMLInputElement>("input[data-bound=min]");
        const maxInput = fields.querySelector<HTMLInputElement>("input[data-bound=max]");
        const brush: BrushRange = {};
        if (minInput?.value) brush.min = Number(minInput.value);
        if (maxInput?.value) brush.max = Number(maxInput.value);
        setBrush(axis.id, brush.min !== undefined || brush.max !== undefined ? brush : null);
      };
      fields.append(
        el(
          "label",
          { class: "choice" },
          "min ",
          el("input", {
            type: "number",
            step: "any",
            "data-bound": "min",
            value: current?.min ?? "",
            placeholder: fmt(axis.hp.lower),
            onchange: onRange,
          }),
        ),
        el(
          "label",
          { class: "choice" },
          "max ",
          el("input", {
            type: "number",
            step: "any",
            "data-bound": "max",
            value: current?.max ?? "",
            placeholder: fmt(axis.hp.upper),
            onchange: onRange,
          }),
        ),
      );
    }
    if (current) {
      fields.append(
        el("button", { class: "clear-brush", onclick: () => setBrush(axis.id, null) }, "clear"),
      );
    }
    box.append(fields);
  }
  return box;
}

// --- sampling history ---

function samplingPanel(hp: string, doc: SamplingDoc): HTMLElement {
  const f = frame(300, 160, `sampling history of ${hp}`);
  const times = doc.points.map((p) => p.timestamp);
  const [t0, t1] = extent(times);
  const x = linearScale(t0, t1, 0, f.width);

  let yOf: (value: string | number) => number;
  let yLabels: [string, string];
  if (doc.kind === "categorical") {
    const order = [...new Set(doc.points.map((p) => String(p.value)))];
    const y = linearScale(0, Math.max(1, order.length - 1), f.height, 0);
    yOf = (value) => y(order.indexOf(String(value)));
    yLabels = [order[0] ?? "", order[order.length - 1] ?? ""];
  } else {
    const values = doc.points.map((p) => Number(p.value));
    const transform = doc.log_scale ? Math.log : (v: number) => v;
    const [v0, v1] = extent(values.map(transform));
    const y = linearScale(v0, v1, f.height, 0);
    yOf = (value) => y(transform(Number(value)));
    const [lo, hi] = extent(values);
    yLabels = [fmt(lo), fmt(hi)];
  }
  for (const point of doc.points) {
    f.plot.append(
      svg(
        "circle",
        { cx: x(point.timestamp), cy: yOf(point.value), r: 3, class: "dot" },
        svg("title", {}, `t=${fmt(point.timestamp)} ${hp}=${fmt(point.value)} perf=${fmt(point.performance)}`),
      ),
    );
  }
  cornerLabels(f, [fmt(t0), fmt(t1)], yLabels);

  const hist = el("table", { class: "histogram" });
  const body = el("tbody", {});
  const counts = doc.histogram.counts;
  const maxCount = Math.max(1, ...counts);
  counts.forEach((count, i) => {
    let binLabel: string;
    if ("choices" in doc.histogram) {
      binLabel = doc.histogram.choices[i] ?? "";
    } else {
      binLabel = `${fmt(doc.histogram.edges[i])} to ${fmt(doc.histogram.edges[i + 1])}`;
    }
    body.append(
      el(
        "tr",
        { "data-bin": String(i) },
        el("th", {}, binLabel),
        el(
          "td",
          { class: "bar-cell" },
          el("span", { class: "bar", style: `width:${(count / maxCount) * 100}%` }),
          el("span", { "data-field": "count" }, fmt(count)),
        ),
      ),
    );
  });
  hist.append(body);

  return el(
    "section",
    { class: "panel sampling", "data-panel": `sampling:${hp}` },
    el("h3", {}, `Sampling history: ${hp}`),
    el(
      "p",
      { class: "hint" },
      `${doc.kind}${doc.log_scale ? ", log scale" : ""}`,
    ),
    f.root,
    hist,
  );
}

// --- coverage ---

function coveragePanel(ctx: Ctx, doc: CoverageDoc): HTMLElement {
  const f = frame(360, 330, "search space coverage");
  const xs = doc.points.map((p) => p.x);
  const ys = doc.points.map((p) => p.y);
  const xDomain: [number, number] = doc.heatmap
    ? [doc.heatmap.x_min, doc.heatmap.x_max]
    : extent(xs);
  const yDomain: [number, number] = doc.heatmap
    ? [doc.heatmap.y_min, doc.heatmap.y_max]
    : extent(ys);
  const x = linearScale(xDomain[0], xDomain[1], 0, f.width);
  const y = linearScale(yDomain[0], yDomain[1], f.height, 0);

  if (doc.heatmap) {
    const n = doc.heatmap.resolution;
    const cellW = f.width / n;
    const cellH = f.height / n;
    let peak = 0;
    for (const row of doc.heatmap.values) for (const v of row) peak = Math.max(peak, v);
    doc.heatmap.values.forEach((row, iy) => {
      row.forEach((value, ix) => {
        if (value <= 0) return;
        f.plot.append(
          svg("rect", {
            x: ix * cellW,
            y: f.height - (iy + 1) * cellH,
            width: cellW + 0.5,
            height: cellH + 0.5,
            class: "heat",
            style: `opacity:${peak > 0 ? (0.08 + 0.55 * (value / peak)).toFixed(3) : 0}`,
          }),
        );
      });
    });
  }

  const perfs = doc.points
    .filter((p) => p.performance !== null)
    .map((p) => p.performance as number);
  const [p0, p1] = extent(perfs);
  for (const point of doc.points) {
    const label = `${point.id}: x=${fmt(point.x)} y=${fmt(point.y)} perf=${fmt(point.performance)}`;
    if (point.kind === "boundary") {
      f.plot.append(
        svg(
          "rect",
          {
            x: x(point.x) - 3,
            y: y(point.y) - 3,
            width: 6,
            height: 6,
            class: "boundary-point",
            "data-point": point.id,
          },
          svg("title", {}, label),
        ),
      );
    } else {
      f.plot.append(
        svg(
          "circle",
          {
            cx: x(point.x),
            cy: y(point.y),
            r: 4,
            class: "dot",
            "data-point": point.id,
            style: `fill:${performanceColor(point.performance, p0, p1)}`,
          },
          svg("title", {}, label),
        ),
      );
    }
  }
  cornerLabels(f, [fmt(xDomain[0]), fmt(xDomain[1])], [fmt(yDomain[0]), fmt(yDomain[1])]);

  const exportStatus = el("span", { class: "export-status" });
  return el(
    "section",
    { class: "panel", "data-panel": "coverage" },
    el("h2", {}, "Coverage"),
    el(
      "p",
      { class: "hint" },
      "boundary configurations skipped: ",
      el("span", { "data-field": "boundary_skipped" }, fmt(doc.boundary_skipped)),
    ),
    f.root,
    el(
      "div",
      {},
      el(
        "button",
        {
          class: "card-export",
          "data-token": "coverage",
          onclick: () =>
            void track(
              (async () => {
                try {
                  const result = await ctx.client.exportArtifact(
                    ctx.store.state.run as string,
                    "coverage-embedding",
                    { at: ctx.store.state.at },
                  );
                  ctx.onExport(result);
                  exportStatus.textContent = result.filename;
                } catch (error) {
                  exportStatus.textContent =
                    error instanceof Error ? error.message : String(error);
                }
              })(),
            ),
        },
        "export",
      ),
      exportStatus,
    ),
  );
}

// --- filtered leaderboard ---

function boardPanel(
  ctx: Ctx,
  doc: LeaderboardDoc,
  matched: Set<string> | null,
): HTMLElement {
  const table = el("table", { class: "leaderboard" });
  table.append(
    el(
      "thead",
      {},
      el("tr", {}, ...["rank", "candidate", "validation"].map((h) => el("th", {}, h))),
    ),
  );
  const tbody = el("tbody", {});
  const rows = matched === null ? doc.rows : doc.rows.filter((r) => matched.has(r.candidate_id));
  for (const row of rows) {
    const selected = ctx.store.state.candidates.includes(row.candidate_id);
    tbody.append(
      el(
        "tr",
        {
          class: selected ? "selected" : undefined,
          "data-row": row.candidate_id,
          onclick: () =>
            ctx.store.update({
              candidates: toggleItem(ctx.store.state.candidates, row.candidate_id),
            }),
        },
        el("td", { "data-field": "rank" }, fmt(row.rank)),
        el("td", { "data-field": "candidate_id" }, row.candidate_id),
        el("td", { "data-field": "validation_performance" }, fmt(row.validation_performance)),
      ),
    );
  }
  table.append(tbody);
  const heading =
    matched === null
      ? "Leaderboard"
      : "Leaderboard (brushed)";
  return el(
    "section",
    { class: "panel", "data-panel": "board" },
    el("h2", {}, heading),
    table,
  );
}

// --- the view ---

export function renderSearch(root: HTMLElement, ctx: Ctx): void {
  const run = ctx.store.state.run;
  if (!run) {
    fill(root, notice("No run selected."));
    return;
  }
  const work = (async () => {
    try {
      const state = ctx.store.state;
      const [graph, cpc, coverage, board] = await Promise.all([
        ctx.client.structureGraph(run, state.at, ctx.lane.begin("search:graph")),
        ctx.client.cpc(run, ctx.lane.begin("search:cpc")),
        ctx.client.coverage(run, state.at, ctx.lane.begin("search:coverage")),
        ctx.client.leaderboard(run, ctx.lane.begin("search:board")),
      ]);
      const brushing = Object.keys(state.brushes).length > 0;
      const matched = matchedCandidates(cpc.polylines, state.brushes);

      const samplingNames = visibleAxes(cpc, state.expanded)
        .filter((a) => a.hp !== undefined && state.expanded.includes(a.id))
        .map((a) => (a.hp as HpAxisDoc).name);
      const samplingDocs = await Promise.all(
        samplingNames.map((name) =>
          ctx.client
            .sampling(run, name, ctx.lane.begin(`search:sampling:${name}`))
            .then((doc) => ({ name, doc }))
            .catch((error: Error) => ({ name, doc: error })),
        ),
      );

      const cpcPanel = el(
        "section",
        { class: "panel", "data-panel": "cpc" },
        el("h2", {}, "Configuration coordinates"),
        el(
          "p",
          { class: "hint" },
          "Expand axes to reveal hyperparameters; brush below to filter.",
        ),
        el("div", { class: "scroll-x" }, cpcChart(ctx, cpc, matched)),
        brushControls(ctx, cpc),
      );

      const panels: HTMLElement[] = [structurePanel(ctx, graph), cpcPanel];
      for (const { name, doc } of samplingDocs) {
        if (doc instanceof Error) {
          if (!isAbort(doc)) panels.push(errorNotice(doc));
        } else {
          panels.push(samplingPanel(name, doc));
        }
      }
      panels.push(coveragePanel(ctx, coverage));
      panels.push(boardPanel(ctx, board, brushing ? matched : null));
      fill(root, ...panels);
    } catch (error) {
      if (isAbort(error)) return;
      fill(root, errorNotice(error));
    }
  })();
  void track(work);
}
