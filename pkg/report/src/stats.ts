/** Five-number summaries with Tukey whiskers for the boxplots. */

export interface BoxStats {
  q1: number;
  median: number;
  q3: number;
  whiskerLow: number;
  whiskerHigh: number;
  outliers: number[];
  count: number;
}

/** Linear-interpolation quantile of a sorted array (type 7). */
export function quantileSorted(sorted: number[], q: number): number {
  if (sorted.length === 0) {
    throw new Error("quantile of an empty sample");
  }
  const pos = (sorted.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) {
    return sorted[lo];
  }
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

export function boxStats(values: number[]): BoxStats {
  const sorted = [...values].sort((a, b) => a - b);
  const q1 = quantileSorted(sorted, 0.25);
  const median = quantileSorted(sorted, 0.5);
  const q3 = quantileSorted(sorted, 0.75);
  const iqr = q3 - q1;
  const loLimit = q1 - 1.5 * iqr;
  const hiLimit = q3 + 1.5 * iqr;
  const inside = sorted.filter((v) => v >= loLimit && v <= hiLimit);
  const whiskerLow = inside.length > 0 ? inside[0] : q1;
  const whiskerHigh = inside.length > 0 ? inside[inside.length - 1] : q3;
  return {
    q1,
    median,
    q3,
    whiskerLow,
    whiskerHigh,
    outliers: sorted.filter((v) => v < loLimit || v > hiLimit),
    count: sorted.length,
  };
}
