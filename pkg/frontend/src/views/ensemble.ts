/**
 * Ensemble inspection: member weights and refit accuracies, the per-row
 * prediction matrix with a disagreement filter, and decision surfaces in
 * the shared projection, one small multiple per member.  Runs without an
 * ensemble get a plain notice.
 */

import { isAbort } from "../api";
import { track } from "../async";
import { errorNotice, notice } from "../cards";
import { color, cornerLabels, frame, legend, linearScale } from "../charts";
import type { Ctx } from "../context";
import { el, fill, svg } from "../dom";
import { fmt } from "../fmt";
import type {
  EnsembleOverviewDoc,
  EnsemblePredictionsDoc,
  EnsembleSurfacesDoc,
} from "../types";

function warningsList(warnings: string[] | undefined): HTMLElement | null {
  if (!warnings || warnings.length === 0) return null;
  return el(
    "ul",
    { class: "warnings" },
    ...warnings.map((w) => el("li", {}, w)),
  );
}

function overviewPanel(doc: EnsembleOverviewDoc): HTMLElement {
  const table = el("table", { class: "metrics" });
  table.append(
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        ...["member", "weight", "stored validation", "refit accuracy"].map((h) =>
          el("th", {}, h),
        ),
      ),
    ),
  );
  const tbody = el("tbody", {});
  for (const member of doc.members ?? []) {
    tbody.append(
      el(
        "tr",
        { "data-member": member.candidate_id },
        el("td", {}, member.candidate_id),
        el("td", { "data-field": "weight" }, fmt(member.weight)),
        el(
          "td",
          { "data-field": "stored_validation_performance" },
          fmt(member.stored_validation_performance),
        ),
        el("td", { "data-field": "validation_accuracy" }, fmt(member.validation_accuracy)),
      ),
    );
  }
  table.append(tbody);
  return el(
    "section",
    { class: "panel", "data-panel": "ensemble-overview" },
    el("h2", {}, "Ensemble"),
    el(
      "p",
      {},
      "validation accuracy of the weighted vote: ",
      el(
        "strong",
        { "data-field": "ensemble_validation_accuracy" },
        fmt(doc.ensemble_validation_accuracy),
      ),
    ),
    warningsList(doc.warnings),
    table,
  );
}

function predictionsPanel(doc: EnsemblePredictionsDoc): HTMLElement {
  const columns = doc.columns ?? [];
  const rows = doc.rows ?? [];
  const weights = doc.weights ?? {};

  const table = el("table", { class: "matrix" });
  table.append(
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        el("th", {}, "row"),
        el("th", {}, "true"),
        ...columns.map((cid) =>
          el("th", { title: `weight ${fmt(weights[cid])}` }, cid),
        ),
        el("th", {}, "ensemble"),
      ),
    ),
  );
  const tbody = el("tbody", {});

  const renderRows = (disagreementsOnly: boolean) => {
    fill(tbody);
    for (const row of rows) {
      const labels = columns.map((cid) => row.members[cid]);
      const disagree = new Set(labels).size > 1;
      if (disagreementsOnly && !disagree) continue;
      tbody.append(
        el(
          "tr",
          { class: disagree ? "disagree" : undefined, "data-prow": String(row.row) },
          el("td", { "data-field": "row" }, fmt(row.row)),
          el("td", { "data-field": "true" }, row.true),
          ...columns.map((cid) =>
            el(
              "td",
              {
                "data-field": `member:${cid}`,
                class: row.members[cid] === row.true ? "hit" : "miss",
              },
              fmt(row.members[cid]),
            ),
          ),
          el(
            "td",
            {
              "data-field": "ensemble",
              class: row.ensemble === row.true ? "hit" : "miss",
            },
            row.ensemble,
          ),
        ),
      );
    }
  };
  renderRows(false);

  const filter = el("input", {
    type: "checkbox",
    "data-control": "disagreements",
    onchange: (event) => renderRows((event.target as HTMLInputElement).checked),
  });

  return el(
    "section",
    { class: "panel", "data-panel": "ensemble-predictions" },
    el("h2", {}, "Member predictions"),
    warningsList(doc.warnings),
    el("label", { class: "field" }, filter, " disagreements only"),
    el("div", { class: "scroll-x" }, table),
  );
}

function surfacesPanel(doc: EnsembleSurfacesDoc): HTMLElement {
  const classes = doc.classes ?? [];
  const points = doc.points ?? [];
  const n = doc.resolution ?? 0;
  const grid = el("div", { class: "surfaces" });

  for (const surface of doc.surfaces ?? []) {
    const f = frame(240, 240, `decision surface of ${surface.owner}`);
    const x = linearScale(doc.x_min ?? 0, doc.x_max ?? 1, 0, f.width);
    const y = linearScale(doc.y_min ?? 0, doc.y_max ?? 1, f.height, 0);
    const cellW = f.width / Math.max(1, n);
    const cellH = f.height / Math.max(1, n);
    surface.cells.forEach((row, iy) => {
      row.forEach((classIndex, ix) => {
        f.plot.append(
          svg("rect", {
            x: ix * cellW,
            y: f.height - (iy + 1) * cellH,
            width: cellW + 0.5,
            height: cellH + 0.5,
            class: "surface-cell",
            style: `fill:${color(classIndex)}`,
          }),
        );
      });
    });
    for (const point of points) {
      f.plot.append(
        svg(
          "circle",
          {
            cx: x(point.x),
            cy: y(point.y),
            r: 3,
            class: "dot surface-point",
            style: `fill:${color(classes.indexOf(point.label))}`,
          },
          svg("title", {}, point.label),
        ),
      );
    }
    cornerLabels(
      f,
      [fmt(doc.x_min), fmt(doc.x_max)],
      [fmt(doc.y_min), fmt(doc.y_max)],
    );
    grid.append(
      el(
        "figure",
        { class: "surface", "data-owner": surface.owner },
        f.root,
        el("figcaption", {}, surface.owner),
      ),
    );
  }

  return el(
    "section",
    { class: "panel", "data-panel": "ensemble-surfaces" },
    el("h2", {}, "Decision surfaces (shared projection)"),
    warningsList(doc.warnings),
    legend(classes.map((label, i) => ({ label, color: color(i) }))),
    grid,
  );
}

export function renderEnsemble(root: HTMLElement, ctx: Ctx): void {
  const run = ctx.store.state.run;
  if (!run) {
    fill(root, notice("No run selected."));
    return;
  }
  const work = (async () => {
    try {
      const overview = await ctx.client.ensembleOverview(
        run,
        ctx.lane.begin("ensemble:overview"),
      );
      if (!overview.available) {
        fill(root, notice("This run has no ensemble."));
        return;
      }
      const [predictions, surfaces] = await Promise.all([
        ctx.client.ensemblePredictions(run, ctx.lane.begin("ensemble:predictions")),
        ctx.client.ensembleSurfaces(run, ctx.lane.begin("ensemble:surfaces")),
      ]);
      const panels = [overviewPanel(overview)];
      if (predictions.available) panels.push(predictionsPanel(predictions));
      if (surfaces.available) panels.push(surfacesPanel(surfaces));
      fill(root, ...panels);
    } catch (error) {
      if (isAbort(error)) return;
      fill(root, errorNotice(error));
    }
  })();
  void track(work);
}
