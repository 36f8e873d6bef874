/**
 * Bare-bones SVG chart scaffolding.
 *
 * Scales map data values to pixel positions; that is the only arithmetic
 * the UI performs.  Axis corners are labeled with actual values out of the
 * response documents rather than synthesized tick numbers, so every piece
 * of text on a chart still comes from the service.
 */

import { el, svg } from "./dom";
import { fmt } from "./fmt";

export type Scale = (value: number) => number;

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (value) => r0 + ((value - d0) / span) * (r1 - r0);
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) return [0, 1];
  return [lo, hi];
}

export interface Frame {
  root: SVGElement;
  plot: SVGElement;
  width: number;
  height: number;
}

export const MARGIN = { top: 10, right: 14, bottom: 22, left: 44 };

export function frame(width: number, height: number, label?: string): Frame {
  const root = svg("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "chart",
    role: "img",
    "aria-label": label,
  });
  const plot = svg("g", {
    transform: `translate(${MARGIN.left},${MARGIN.top})`,
  });
  root.append(plot);
  return {
    root,
    plot,
    width: width - MARGIN.left - MARGIN.right,
    height: height - MARGIN.top - MARGIN.bottom,
  };
}

/** Writes the extremes of both axes into the chart corners. */
export function cornerLabels(
  f: Frame,
  x: [number | string, number | string],
  y: [number | string, number | string],
): void {
  f.plot.append(
    svg("text", { x: 0, y: f.height + 16, class: "axis-label" }, fmt(x[0])),
    svg(
      "text",
      { x: f.width, y: f.height + 16, "text-anchor": "end", class: "axis-label" },
      fmt(x[1]),
    ),
    svg(
      "text",
      { x: -6, y: f.height, "text-anchor": "end", class: "axis-label" },
      fmt(y[0]),
    ),
    svg("text", { x: -6, y: 10, "text-anchor": "end", class: "axis-label" }, fmt(y[1])),
  );
}

/** A small legend row of colored swatches with labels. */
export function legend(entries: { label: string; color: string }[]): HTMLElement {
  const box = el("div", { class: "legend" });
  for (const entry of entries) {
    box.append(
      el(
        "span",
        { class: "legend-entry" },
        el("span", {
          class: "swatch",
          style: `background:${entry.color}`,
        }),
        entry.label,
      ),
    );
  }
  return box;
}

const PALETTE = [
  "#4c78a8",
  "#f58518",
  "#54a24b",
  "#e45756",
  "#72b7b2",
  "#b279a2",
  "#9d755d",
  "#eeca3b",
];

export function color(index: number): string {
  return PALETTE[index % PALETTE.length] ?? "#666";
}

/** Performance shade from weak (light) to strong (dark blue). */
export function performanceColor(value: number | null, lo: number, hi: number): string {
  if (value === null) return "#bbb";
  const t = hi > lo ? (value - lo) / (hi - lo) : 0.5;
  const r = Math.round(205 - 160 * t);
  const g = Math.round(215 - 130 * t);
  const b = Math.round(235 - 70 * t);
  return `rgb(${r},${g},${b})`;
}
