/** Unit rendering of server-delivered numbers. Nothing here derives a
 * value; it only formats what the API returned. */

/** Render a yearly rate fraction as a percent string with one decimal. */
export function ratePct(k: number): string {
  return (k * 100).toFixed(1);
}

/** Rate table cell: percent with one decimal, or a placeholder when the
 * domain has no estimate. */
export function rateCell(k: number | null): string {
  return k === null ? "n/a" : ratePct(k);
}

/** Relevance score with three decimals. */
export function mprText(mpr: number): string {
  return mpr.toFixed(3);
}

/** Centrality percentile as a percent with one decimal, or a placeholder
 * for unscored patents. */
export function percentileText(percentile: number | null): string {
  return percentile === null ? "unscored" : `${(percentile * 100).toFixed(1)}%`;
}
