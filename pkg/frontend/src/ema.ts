/** Display smoothing: s[0] = x[0], s[t] = alpha*s[t-1] + (1-alpha)*x[t]. */

export const DISPLAY_ALPHA = 0.99;

export function emaSmooth(series: number[], alpha: number = DISPLAY_ALPHA): number[] {
  if (alpha < 0 || alpha >= 1) throw new RangeError("alpha must lie in [0, 1)");
  const out: number[] = [];
  for (let t = 0; t < series.length; t++) {
    out.push(t === 0 ? series[0] : alpha * out[t - 1] + (1 - alpha) * series[t]);
  }
  return out;
}

/** Incremental accumulator so charts update per stream event. */
export class EmaTracker {
  private last: number | null = null;
  readonly values: number[] = [];

  constructor(private alpha: number = DISPLAY_ALPHA) {
    if (alpha < 0 || alpha >= 1) throw new RangeError("alpha must lie in [0, 1)");
  }

  push(value: number): number {
    this.last = this.last === null ? value : this.alpha * this.last + (1 - this.alpha) * value;
    this.values.push(this.last);
    return this.last;
  }

  reset(): void {
    this.last = null;
    this.values.length = 0;
  }
}
