/**
 * Candidate inspection: one column of collapsible cards per selected
 * candidate, so two selections sit side by side for comparison.  Cards
 * cover validation performance, the global surrogate, data previews with
 * a local explanation, the configuration with its pipeline snapshot,
 * hyperparameter importance, and feature effects.
 */

import { card, notice } from "../cards";
import { color, cornerLabels, extent, frame, legend, linearScale } from "../charts";
import type { Ctx } from "../context";
import { el, fill, svg } from "../dom";
import { fmt, joinNames } from "../fmt";
import type {
  EffectDoc,
  HpImportanceDoc,
  PipelineDoc,
  ReportDoc,
  TreeNodeDoc,
} from "../types";

const SOURCE_NODE = "__source__";

function kv(label: string, field: string, value: unknown): HTMLElement[] {
  return [el("dt", {}, label), el("dd", { "data-field": field }, fmt(value))];
}

// --- performance card ---

function performanceBody(ctx: Ctx, doc: ReportDoc): HTMLElement {
  const recallWord = ctx.terminology();
  const dl = el(
    "dl",
    { class: "stats" },
    ...kv("validation accuracy", "validation_accuracy", doc.metrics.validation_accuracy),
    ...kv("train accuracy", "train_accuracy", doc.metrics.train_accuracy),
    ...kv("stored validation", "stored_validation", doc.stored.validation_performance),
    ...kv("stored train", "stored_train", doc.stored.train_performance),
    ...kv("fit time", "fit_duration", doc.stored.fit_duration),
    ...kv("predict time", "predict_duration", doc.stored.predict_duration),
    ...kv("budget", "budget", doc.budget),
  );

  const perClass = el("table", { class: "metrics" });
  perClass.append(
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        ...["class", "precision", recallWord, "support", "auc"].map((h) => el("th", {}, h)),
      ),
    ),
  );
  const classBody = el("tbody", {});
  for (const row of doc.metrics.classes) {
    classBody.append(
      el(
        "tr",
        { "data-class": row.label },
        el("td", {}, row.label),
        el("td", { "data-field": "precision" }, fmt(row.precision)),
        el("td", { "data-field": "recall" }, fmt(row.recall)),
        el("td", { "data-field": "support" }, fmt(row.support)),
        el("td", { "data-field": "auc" }, fmt(row.auc)),
      ),
    );
  }
  perClass.append(classBody);

  const labels = doc.metrics.classes.map((c) => c.label);
  const confusion = el("table", { class: "confusion" });
  confusion.append(
    el(
      "thead",
      {},
      el("tr", {}, el("th", {}, "true \\ predicted"), ...labels.map((l) => el("th", {}, l))),
    ),
  );
  const confBody = el("tbody", {});
  doc.metrics.confusion.forEach((row, i) => {
    confBody.append(
      el(
        "tr",
        {},
        el("th", {}, labels[i] ?? String(i)),
        ...row.map((count, j) =>
          el("td", { "data-field": `confusion:${i}:${j}` }, fmt(count)),
        ),
      ),
    );
  });
  confusion.append(confBody);

  return el(
    "div",
    {},
    dl,
    el("h3", {}, "Per-class metrics"),
    perClass,
    el("h3", {}, "Confusion matrix"),
    confusion,
  );
}

// --- surrogate card ---

function treeList(node: TreeNodeDoc): HTMLElement {
  if (node.type === "leaf") {
    const parts = Object.entries(node.probabilities)
      .map(([label, p]) => `${label}: ${fmt(p)}`)
      .join(", ");
    return el("li", { class: "leaf" }, `leaf n=${fmt(node.n)} (${parts})`);
  }
  const test =
    node.threshold !== undefined
      ? `${node.feature} <= ${fmt(node.threshold)}`
      : `${node.feature} = ${fmt(node.category)}`;
  return el(
    "li",
    { class: "split" },
    `${test} (missing goes ${node.missing})`,
    el("ul", {}, treeList(node.left), treeList(node.right)),
  );
}

function surrogateCard(ctx: Ctx, cid: string): HTMLElement {
  const run = ctx.store.state.run as string;
  return card(ctx, {
    token: `card:${cid}:surrogate`,
    title: "Global surrogate",
    doExport: () =>
      ctx.client.exportArtifact(run, "surrogate-tree", {
        candidate_id: cid,
        max_leaf_nodes: ctx.store.state.leaves,
      }),
    render: async (body) => {
      const leaves = ctx.store.state.leaves;
      const doc = await ctx.client.surrogate(
        run,
        cid,
        leaves,
        ctx.lane.begin(`surrogate:${cid}`),
      );
      const slider = el("input", {
        type: "range",
        min: 2,
        max: 64,
        step: 1,
        value: leaves,
        "data-control": "leaves",
        onchange: (event) =>
          ctx.store.update({ leaves: Number((event.target as HTMLInputElement).value) }),
      });
      body.append(
        el("label", { class: "field" }, "leaf budget ", slider, " ", fmt(leaves)),
        el(
          "dl",
          { class: "stats" },
          ...kv("requested leaves", "max_leaf_nodes", doc.max_leaf_nodes),
          ...kv("actual leaves", "n_leaves", doc.n_leaves),
          ...kv("fidelity", "fidelity", doc.fidelity),
        ),
        el(
          "div",
          { class: "meter", title: "fidelity" },
          el("div", {
            class: "meter-fill",
            style: `width:${Math.max(0, Math.min(1, doc.fidelity)) * 100}%`,
          }),
        ),
        el("ul", { class: "tree" }, treeList(doc.tree)),
      );
    },
  });
}

// --- data preview + local explanation card ---

function previewNode(ctx: Ctx): string {
  return ctx.store.state.node ?? SOURCE_NODE;
}

function dataCard(ctx: Ctx, cid: string): HTMLElement {
  const run = ctx.store.state.run as string;
  return card(ctx, {
    token: `card:${cid}:data`,
    title: "Data preview and local explanation",
    doExport: () =>
      ctx.client.exportArtifact(run, "intermediate-dataset", {
        candidate_id: cid,
        node: previewNode(ctx),
      }),
    render: async (body) => {
      const state = ctx.store.state;
      const node = previewNode(ctx);
      const [report, data, local] = await Promise.all([
        ctx.client.report(run, cid, ctx.lane.begin(`data:report:${cid}`)),
        ctx.client.intermediate(run, cid, node, 8, ctx.lane.begin(`data:rows:${cid}`)),
        ctx.client.localSurrogate(run, cid, state.row, ctx.lane.begin(`data:local:${cid}`)),
      ]);

      const pick = el("select", {
        "data-control": "node",
        onchange: (event) => {
          const value = (event.target as HTMLSelectElement).value;
          ctx.store.update({ node: value === SOURCE_NODE ? null : value });
        },
      });
      pick.append(
        el("option", { value: SOURCE_NODE, selected: node === SOURCE_NODE }, "source (raw input)"),
      );
      for (const n of report.pipeline.nodes) {
        pick.append(
          el("option", { value: n.id, selected: n.id === node }, `${n.id} (${n.primitive})`),
        );
      }

      const table = el("table", { class: "preview" });
      table.append(
        el(
          "thead",
          {},
          el(
            "tr",
            {},
            ...data.columns.map((c) => el("th", { title: c.kind }, c.name)),
            el("th", { class: "target-col" }, data.target.name),
          ),
        ),
      );
      const tbody = el("tbody", {});
      data.rows.forEach((row, i) => {
        tbody.append(
          el(
            "tr",
            {},
            ...row.map((value) => el("td", { "data-field": "cell" }, fmt(value))),
            el("td", { class: "target-col" }, fmt(data.target.values[i])),
          ),
        );
      });
      table.append(tbody);

      const rowPick = el("input", {
        type: "number",
        min: 0,
        value: state.row,
        "data-control": "row",
        onchange: (event) =>
          ctx.store.update({ row: Number((event.target as HTMLInputElement).value) }),
      });
      const weights = el("table", { class: "metrics" });
      weights.append(
        el("thead", {}, el("tr", {}, el("th", {}, "feature"), el("th", {}, "weight"))),
      );
      const wbody = el("tbody", {});
      for (const w of local.weights) {
        wbody.append(
          el(
            "tr",
            { "data-weight": w.feature },
            el("td", {}, w.feature),
            el("td", { "data-field": "weight" }, fmt(w.weight)),
          ),
        );
      }
      weights.append(wbody);

      body.append(
        el("label", { class: "field" }, "pipeline node ", pick),
        el(
          "p",
          { class: "hint" },
          "showing ",
          el("span", { "data-field": "preview_rows" }, fmt(data.rows.length)),
          " of ",
          el("span", { "data-field": "n_rows" }, fmt(data.n_rows)),
          ` rows at node ${data.node}`,
        ),
        el("div", { class: "scroll-x" }, table),
        el("h3", {}, "Local explanation"),
        el("label", { class: "field" }, "row ", rowPick),
        el(
          "dl",
          { class: "stats" },
          ...kv("true label", "true_label", local.true_label),
          ...kv("explained class", "explained_class", local.explained_class),
          ...kv("local prediction", "local_prediction", local.local_prediction),
          ...kv("intercept", "intercept", local.intercept),
        ),
        weights,
      );
    },
  });
}

// --- configuration card ---

function pipelineSnapshot(ctx: Ctx, pipeline: PipelineDoc): SVGElement {
  const active = previewNode(ctx);
  const gap = 150;
  const f = frame(Math.max(320, pipeline.nodes.length * gap + 20), 90, "pipeline");
  const position = new Map<string, number>();
  pipeline.nodes.forEach((node, i) => position.set(node.id, i * gap));
  for (const edge of pipeline.edges) {
    const x1 = position.get(edge.from);
    const x2 = position.get(edge.to);
    if (x1 === undefined || x2 === undefined) continue;
    f.plot.append(
      svg("line", { x1: x1 + 120, y1: 24, x2, y2: 24, class: "pipe-edge" }),
    );
  }
  pipeline.nodes.forEach((node, i) => {
    const x = i * gap;
    const group = svg(
      "g",
      {
        class: node.id === active ? "pipe-node active" : "pipe-node",
        "data-node": node.id,
        onclick: () => ctx.store.update({ node: node.id }),
      },
      svg("rect", { x, y: 8, width: 120, height: 32, rx: 6 }),
      svg("text", { x: x + 60, y: 23, "text-anchor": "middle" }, node.id),
      svg("text", { x: x + 60, y: 36, "text-anchor": "middle", class: "pipe-primitive" },
        node.primitive),
    );
    f.plot.append(group);
  });
  return f.root;
}

function configCard(ctx: Ctx, cid: string): HTMLElement {
  const run = ctx.store.state.run as string;
  return card(ctx, {
    token: `card:${cid}:config`,
    title: "Configuration and structure",
    doExport: () => ctx.client.exportArtifact(run, "config", { candidate_id: cid }),
    render: async (body) => {
      const [doc, report] = await Promise.all([
        ctx.client.config(run, cid, ctx.lane.begin(`config:${cid}`)),
        ctx.client.report(run, cid, ctx.lane.begin(`config:report:${cid}`)),
      ]);
      const table = el("table", { class: "config" });
      const tbody = el("tbody", {});
      for (const [key, value] of Object.entries(doc.config)) {
        tbody.append(
          el(
            "tr",
            {},
            el("th", {}, key),
            el("td", { "data-field": `config:${key}` }, fmt(value)),
          ),
        );
      }
      table.append(tbody);
      body.append(
        el("h3", {}, "Pipeline"),
        el("p", { class: "hint" }, "Click a step to preview its output in the data card."),
        el("div", { class: "scroll-x" }, pipelineSnapshot(ctx, report.pipeline)),
        el("h3", {}, "Configuration"),
        table,
      );
    },
  });
}

// --- hyperparameter importance card ---

function importanceTable(
  title: string,
  rows: HpImportanceDoc["singles"],
): HTMLElement {
  const max = rows.reduce((m, r) => Math.max(m, r.importance), 0);
  const table = el("table", { class: "importance" });
  const tbody = el("tbody", {});
  for (const entry of rows) {
    const share = max > 0 ? entry.importance / max : 0;
    tbody.append(
      el(
        "tr",
        { "data-entry": joinNames(entry.hyperparameters) },
        el("th", {}, joinNames(entry.hyperparameters)),
        el(
          "td",
          { class: "bar-cell" },
          el("span", { class: "bar", style: `width:${share * 100}%` }),
          el("span", { "data-field": "importance" }, fmt(entry.importance)),
        ),
      ),
    );
  }
  table.append(tbody);
  return el("div", {}, el("h3", {}, title), table);
}

function importanceCard(ctx: Ctx, cid: string): HTMLElement {
  const run = ctx.store.state.run as string;
  return card(ctx, {
    token: `card:${cid}:importance`,
    title: "Hyperparameter importance",
    doExport: () =>
      ctx.client.exportArtifact(run, "importance-table", { structure_of: cid }),
    render: async (body) => {
      const doc = await ctx.client.hpImportance(
        run,
        cid,
        ctx.lane.begin(`importance:${cid}`),
      );
      body.append(
        el(
          "p",
          { class: "hint" },
          "within structure of ",
          el("span", { "data-field": "structure_of" }, fmt(doc.structure_of)),
          ", ",
          el("span", { "data-field": "n_samples" }, fmt(doc.n_samples)),
          " samples",
        ),
        importanceTable("Single hyperparameters", doc.singles),
        importanceTable("Pairs", doc.pairs),
      );
    },
  });
}

// --- feature effects card ---

function effectChart(effect: EffectDoc, classLabel: string): HTMLElement {
  const pdp = effect.pdp[classLabel] ?? [];
  const ice = effect.ice[classLabel] ?? [];
  const f = frame(260, 140, `effect of ${effect.feature}`);
  const numericGrid = effect.grid.every((g) => typeof g === "number");
  const xs = numericGrid
    ? (effect.grid as number[])
    : effect.grid.map((_, i) => i);
  const [x0, x1] = extent(xs);
  const all = [...pdp, ...ice.flat()];
  const [y0, y1] = extent(all);
  const x = linearScale(x0, x1, 0, f.width);
  const y = linearScale(y0, y1, f.height, 0);
  for (const line of ice) {
    const d = line.map((v, i) => `${i === 0 ? "M" : "L"}${x(xs[i] as number)},${y(v)}`).join("");
    f.plot.append(svg("path", { d, class: "ice" }));
  }
  const d = pdp.map((v, i) => `${i === 0 ? "M" : "L"}${x(xs[i] as number)},${y(v)}`).join("");
  f.plot.append(svg("path", { d, class: "pdp" }));
  cornerLabels(
    f,
    [fmt(effect.grid[0]), fmt(effect.grid[effect.grid.length - 1])],
    [fmt(y0), fmt(y1)],
  );
  return el(
    "figure",
    { class: "effect", "data-feature": effect.feature },
    f.root,
    el("figcaption", {}, `${effect.feature} (${effect.kind})`),
  );
}

function effectsCard(ctx: Ctx, cid: string): HTMLElement {
  const run = ctx.store.state.run as string;
  return card(ctx, {
    token: `card:${cid}:effects`,
    title: "Feature effects",
    doExport: () =>
      ctx.client.exportArtifact(run, "feature-importance", { candidate_id: cid }),
    render: async (body) => {
      const doc = await ctx.client.effects(run, cid, ctx.lane.begin(`effects:${cid}`));
      const classLabel = ctx.store.state.targetClass ?? doc.classes[0] ?? "";

      const permutation = el("table", { class: "metrics" });
      permutation.append(
        el(
          "thead",
          {},
          el("tr", {}, ...["feature", "importance", "sd"].map((h) => el("th", {}, h))),
        ),
      );
      const pbody = el("tbody", {});
      for (const entry of doc.permutation) {
        pbody.append(
          el(
            "tr",
            { "data-perm": entry.feature },
            el("td", {}, entry.feature),
            el("td", { "data-field": "importance" }, fmt(entry.importance)),
            el("td", { "data-field": "sd" }, fmt(entry.sd)),
          ),
        );
      }
      permutation.append(pbody);

      const classPick = el("select", {
        "data-control": "class",
        onchange: (event) =>
          ctx.store.update({ targetClass: (event.target as HTMLSelectElement).value }),
      });
      for (const label of doc.classes) {
        classPick.append(
          el("option", { value: label, selected: label === classLabel }, label),
        );
      }

      const charts = el("div", { class: "effects-grid" });
      for (const effect of doc.effects) charts.append(effectChart(effect, classLabel));

      body.append(
        el(
          "p",
          { class: "hint" },
          "baseline accuracy ",
          el("span", { "data-field": "baseline_accuracy" }, fmt(doc.baseline_accuracy)),
        ),
        el("h3", {}, "Permutation importance"),
        permutation,
        el("h3", {}, "Partial dependence"),
        el("label", { class: "field" }, "class ", classPick),
        charts,
        legend([
          { label: "average effect", color: "#4c78a8" },
          { label: "individual rows", color: "#c5d5ea" },
        ]),
      );
    },
  });
}

// --- the view ---

function performanceCard(ctx: Ctx, cid: string): HTMLElement {
  const run = ctx.store.state.run as string;
  return card(ctx, {
    token: `card:${cid}:performance`,
    title: "Performance",
    render: async (body) => {
      const doc = await ctx.client.report(run, cid, ctx.lane.begin(`perf:${cid}`));
      body.append(performanceBody(ctx, doc));
    },
  });
}

function candidateColumn(ctx: Ctx, cid: string): HTMLElement {
  return el(
    "div",
    { class: "candidate-col", "data-candidate": cid },
    el("h2", {}, cid),
    performanceCard(ctx, cid),
    surrogateCard(ctx, cid),
    dataCard(ctx, cid),
    configCard(ctx, cid),
    importanceCard(ctx, cid),
    effectsCard(ctx, cid),
  );
}

export function renderCandidates(root: HTMLElement, ctx: Ctx): void {
  const state = ctx.store.state;
  if (!state.run) {
    fill(root, notice("No run selected."));
    return;
  }
  if (state.candidates.length === 0) {
    fill(
      root,
      notice("No candidates selected. Pick them on the overview or search space tabs."),
    );
    return;
  }
  const compare = el("div", { class: "compare" });
  for (const cid of state.candidates) compare.append(candidateColumn(ctx, cid));
  fill(root, compare);
}
