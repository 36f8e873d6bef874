/**
 * Value-to-text conversion for everything the UI displays.
 *
 * Numbers are rendered with String() so the text on screen is exactly the
 * value the service sent, digit for digit.  No rounding happens in the UI;
 * if a number should be shorter, the service is the place to shorten it.
 */

export function fmt(value: unknown): string {
  if (value === null || value === undefined) return "n/a";
  if (typeof value === "boolean") return value ? "yes" : "no";
  return String(value);
}

/** Joins hyperparameter tuples the way the importance table names them. */
export function joinNames(names: string[]): string {
  return names.join(" x ");
}
