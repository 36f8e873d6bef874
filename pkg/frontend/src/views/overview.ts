/**
 * Run overview: headline stats, the accuracy-over-time scatter with the
 * incumbent staircase, a ROC overlay for whatever candidates are selected,
 * and the leaderboard.  Scatter points and leaderboard rows toggle the
 * candidate selection that the rest of the explorer works with.
 */

import { track } from "../async";
import { isAbort } from "../api";
import { errorNotice, notice } from "../cards";
import { color, cornerLabels, extent, frame, legend, linearScale } from "../charts";
import type { Ctx } from "../context";
import { el, fill, svg } from "../dom";
import { fmt } from "../fmt";
import { toggleItem } from "../state";
import type { LeaderboardDoc, OverviewDoc, ReportDoc } from "../types";

function statsPanel(ctx: Ctx, doc: OverviewDoc): HTMLElement {
  const dl = el("dl", { class: "stats" });
  const add = (label: string, field: string, value: unknown) => {
    dl.append(
      el("dt", {}, label),
      el("dd", { "data-field": field }, fmt(value)),
    );
  };
  add("run", "run_id", doc.run.run_id);
  add("task", "task", doc.run.task);
  add("metric", "metric_name", doc.run.metric_name);
  add("rows", "n_rows", doc.dataset.n_rows);
  add("features", "n_features", doc.dataset.n_features);
  add("target", "target", doc.dataset.target);
  add("classes", "class_labels", doc.dataset.class_labels.join(", "));
  add("candidates", "n_candidates", doc.n_candidates);
  add("scored", "n_scored", doc.n_scored);
  add("total fit time", "total_fit_duration", doc.total_fit_duration);
  add("ensemble", "ensemble_available", doc.ensemble_available);
  if (doc.best) {
    add("best candidate", "best_candidate_id", doc.best.candidate_id);
    add("best validation", "best_validation_performance", doc.best.validation_performance);
  }
  return el("section", { class: "panel", "data-panel": "stats" }, el("h2", {}, "Run"), dl);
}

function timelineScatter(ctx: Ctx, doc: OverviewDoc): HTMLElement {
  const scored = doc.timeline.filter((t) => t.validation_performance !== null);
  const f = frame(560, 280, "validation performance over time");
  const times = doc.timeline.map((t) => t.timestamp);
  const perfs = scored.map((t) => t.validation_performance as number);
  const [t0, t1] = extent(times);
  const [p0, p1] = extent(perfs);
  const x = linearScale(t0, t1, 0, f.width);
  const y = linearScale(p0, p1, f.height, 0);

  const incumbents = doc.timeline.filter((t) => t.incumbent && t.validation_performance !== null);
  if (incumbents.length > 0) {
    // staircase: performance holds until the next incumbent appears
    let d = "";
    for (const [i, entry] of incumbents.entries()) {
      const px = x(entry.timestamp);
      const py = y(entry.validation_performance as number);
      d += i === 0 ? `M${px},${py}` : `H${px}V${py}`;
    }
    d += `H${f.width}`;
    f.plot.append(svg("path", { d, class: "incumbent-line" }));
  }

  for (const entry of scored) {
    const selected = ctx.store.state.candidates.includes(entry.candidate_id);
    const dot = svg(
      "circle",
      {
        cx: x(entry.timestamp),
        cy: y(entry.validation_performance as number),
        r: selected ? 6 : 4,
        class: selected ? "dot selected" : "dot",
        "data-candidate": entry.candidate_id,
        onclick: () =>
          ctx.store.update({
            candidates: toggleItem(ctx.store.state.candidates, entry.candidate_id),
          }),
      },
      svg("title", {}, `${entry.candidate_id}: ${fmt(entry.validation_performance)}`),
    );
    f.plot.append(dot);
  }
  cornerLabels(f, [fmt(t0), fmt(t1)], [fmt(p0), fmt(p1)]);
  return el(
    "section",
    { class: "panel", "data-panel": "timeline" },
    el("h2", {}, "Validation performance over time"),
    el("p", { class: "hint" }, "Click points to select candidates for comparison."),
    f.root,
  );
}

async function rocPanel(ctx: Ctx, doc: OverviewDoc): Promise<HTMLElement> {
  const state = ctx.store.state;
  const run = state.run as string;
  const classLabel = state.targetClass ?? doc.dataset.class_labels[0] ?? "";
  const reports: (ReportDoc | Error)[] = await Promise.all(
    state.candidates.map((cid) =>
      ctx.client
        .report(run, cid, ctx.lane.begin(`overview:roc:${cid}`))
        .catch((error: Error) => error),
    ),
  );

  const f = frame(300, 300, "ROC curves");
  f.plot.append(
    svg("line", {
      x1: 0,
      y1: f.height,
      x2: f.width,
      y2: 0,
      class: "diagonal",
    }),
  );
  const x = linearScale(0, 1, 0, f.width);
  const y = linearScale(0, 1, f.height, 0);
  const entries: { label: string; color: string }[] = [];
  const problems: HTMLElement[] = [];

  reports.forEach((report, i) => {
    const cid = state.candidates[i] as string;
    if (report instanceof Error) {
      if (!isAbort(report)) problems.push(errorNotice(report));
      return;
    }
    const curve = report.metrics.roc.find((r) => r.label === classLabel);
    if (!curve) return;
    const d = curve.fpr
      .map((fp, k) => `${k === 0 ? "M" : "L"}${x(fp)},${y(curve.tpr[k] as number)}`)
      .join("");
    f.plot.append(
      svg("path", { d, class: "roc", stroke: color(i), "data-roc": cid }),
    );
    const auc = report.metrics.classes.find((c) => c.label === classLabel)?.auc;
    entries.push({ label: `${cid} (auc ${fmt(auc)})`, color: color(i) });
  });
  cornerLabels(f, ["0", "1"], ["0", "1"]);

  const classPick = el("select", {
    class: "class-pick",
    onchange: (event) =>
      ctx.store.update({ targetClass: (event.target as HTMLSelectElement).value }),
  });
  for (const label of doc.dataset.class_labels) {
    classPick.append(
      el("option", { value: label, selected: label === classLabel }, label),
    );
  }

  return el(
    "section",
    { class: "panel", "data-panel": "roc" },
    el("h2", {}, "ROC overlay"),
    el("label", { class: "field" }, "class ", classPick),
    f.root,
    legend(entries),
    ...problems,
  );
}

function leaderboardPanel(ctx: Ctx, doc: LeaderboardDoc): HTMLElement {
  const table = el("table", { class: "leaderboard" });
  table.append(
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        ...["rank", "candidate", "validation", "train", "fit s", "steps", "pipeline"].map(
          (h) => el("th", {}, h),
        ),
      ),
    ),
  );
  const tbody = el("tbody", {});
  for (const row of doc.rows) {
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
        el("td", { "data-field": "train_performance" }, fmt(row.train_performance)),
        el("td", { "data-field": "fit_duration" }, fmt(row.fit_duration)),
        el("td", { "data-field": "n_steps" }, fmt(row.n_steps)),
        el("td", { "data-field": "primitives" }, row.primitives.join(" / ")),
      ),
    );
  }
  table.append(tbody);
  return el(
    "section",
    { class: "panel", "data-panel": "leaderboard" },
    el("h2", {}, `Leaderboard (${doc.metric_name})`),
    el("div", { class: "scroll-x" }, table),
  );
}

export function renderOverview(root: HTMLElement, ctx: Ctx): void {
  const run = ctx.store.state.run;
  if (!run) {
    fill(root, notice("No run selected."));
    return;
  }
  const work = (async () => {
    try {
      const doc = await ctx.client.overview(run, ctx.lane.begin("overview:main"));
      if (doc.n_candidates === 0) {
        fill(
          root,
          statsPanel(ctx, doc),
          notice("This run has no candidates yet; nothing to plot."),
        );
        return;
      }
      const panels: HTMLElement[] = [statsPanel(ctx, doc), timelineScatter(ctx, doc)];
      if (ctx.store.state.candidates.length > 0) {
        panels.push(await rocPanel(ctx, doc));
      }
      const board = await ctx.client.leaderboard(run, ctx.lane.begin("overview:board"));
      panels.push(leaderboardPanel(ctx, board));
      fill(root, ...panels);
    } catch (error) {
      if (isAbort(error)) return;
      fill(root, errorNotice(error));
    }
  })();
  void track(work);
}
