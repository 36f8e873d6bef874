/**
 * Brush predicate evaluation.
 *
 * The configuration-coordinates document delivers every polyline with its
 * raw per-axis values, so brushing is pure client-side filtering: a line
 * matches when it satisfies every active brush.  A line that has no value
 * on a brushed axis (the hyperparameter never applied to it) never matches.
 */

import type { BrushRange } from "./state";
import type { PolylineDoc } from "./types";

export function coordinateValue(
  line: PolylineDoc,
  axis: string,
): string | number | undefined {
  for (const coord of line.coordinates) {
    if (coord.axis !== axis) continue;
    return "missing" in coord ? undefined : coord.value;
  }
  return undefined;
}

function satisfies(value: string | number, brush: BrushRange): boolean {
  if (brush.choices !== undefined && !brush.choices.includes(String(value))) {
    return false;
  }
  if (brush.min !== undefined || brush.max !== undefined) {
    if (typeof value !== "number") return false;
    if (brush.min !== undefined && value < brush.min) return false;
    if (brush.max !== undefined && value > brush.max) return false;
  }
  return true;
}

export function matchesBrushes(
  line: PolylineDoc,
  brushes: Record<string, BrushRange>,
): boolean {
  for (const [axis, brush] of Object.entries(brushes)) {
    const value = coordinateValue(line, axis);
    if (value === undefined || !satisfies(value, brush)) return false;
  }
  return true;
}

/** The candidate ids whose polylines pass every active brush. */
export function matchedCandidates(
  lines: PolylineDoc[],
  brushes: Record<string, BrushRange>,
): Set<string> {
  const matched = new Set<string>();
  for (const line of lines) {
    if (matchesBrushes(line, brushes)) matched.add(line.candidate_id);
  }
  return matched;
}
