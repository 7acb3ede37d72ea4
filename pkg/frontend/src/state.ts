/** View state: config form domains, live metric series, run status. */

import type { RunSummary, StepRecord } from "./api.js";
import { EmaTracker } from "./ema.js";

// Grid-sweep domains offered in the form; a free-entry escape hatch
// accepts anything parseable.
export const LEARNING_RATES = [0.1, 0.05, 0.002];
export const NPCA_OPTIONS: Array<number | null> = [null, 64, 128, 256, 512];
export const LAYER_OPTIONS = [3, 6, 12];
export const SEED_OPTIONS = [13, 42, 999];

export type RunStatus =
  | "idle"
  | "configuring"
  | "running"
  | "paused"
  | "converged"
  | "capped"
  | "failed";

export interface ConfigValues {
  learningRate: number;
  nPca: number | null;
  layers: number;
  seed: number;
}

export function parseNpca(raw: string): number | null {
  const text = raw.trim().toLowerCase();
  if (text === "" || text === "regular" || text === "none") return null;
  const value = Number(text);
  if (!Number.isFinite(value) || value < 1) throw new RangeError(`bad nPCA: ${raw}`);
  return Math.round(value);
}

export class ViewState {
  sessionId: string | null = null;
  status: RunStatus = "idle";
  statusNote = "";
  config: ConfigValues = {
    learningRate: 0.05,
    nPca: null,
    layers: 3,
    seed: 42,
  };

  readonly motionLoss: number[] = [];
  readonly meanDistance: number[] = [];
  readonly maxDistance: number[] = [];
  readonly motionLossEma = new EmaTracker();
  readonly meanDistanceEma = new EmaTracker();
  summary: RunSummary | null = null;
  lastEventId = 0;
  eventCount = 0;

  resetSeries(): void {
    this.motionLoss.length = 0;
    this.meanDistance.length = 0;
    this.maxDistance.length = 0;
    this.motionLossEma.reset();
    this.meanDistanceEma.reset();
    this.summary = null;
    this.lastEventId = 0;
    this.eventCount = 0;
  }

  appendStep(record: StepRecord, eventId: number): void {
    this.motionLoss.push(record.motion_loss);
    this.meanDistance.push(record.mean_distance);
    this.maxDistance.push(record.max_distance);
    this.motionLossEma.push(record.motion_loss);
    this.meanDistanceEma.push(record.mean_distance);
    this.lastEventId = eventId;
    this.eventCount += 1;
  }

  finish(summary: RunSummary, eventId: number): void {
    this.summary = summary;
    this.lastEventId = eventId;
    this.eventCount += 1;
    this.status = summary.converged ? "converged" : "capped";
  }

  /** Metric arrays stay in lockstep with the received step events. */
  get seriesConsistent(): boolean {
    return (
      this.motionLoss.length === this.meanDistance.length &&
      this.motionLoss.length === this.motionLossEma.values.length
    );
  }

  bannerText(): string {
    if (!this.summary) return "";
    const s = this.summary;
    const flag = s.converged ? "converged" : "capped (x)";
    const ratio =
      s.ssim_per_time == null ? "n/a" : `${(s.ssim_per_time * 100).toFixed(3)}e-2`;
    return (
      `${flag} | iterations ${s.iterations} | t_total ${s.t_total.toFixed(3)}s | ` +
      `SSIM ${s.ssim.toFixed(4)} | SSIM/t ${ratio}`
    );
  }
}
