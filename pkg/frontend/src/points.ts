/** Click pairing: odd clicks drop a blue handle, even clicks the matching
 * red target. Positions are kept in image pixels and converted to
 * feature-grid coordinates only when submitted. */

import type { Pair } from "./api.js";

export type PointKind = "handle" | "target";

export interface CanvasPoint {
  kind: PointKind;
  position: [number, number]; // image pixels
  pairIndex: number;
}

export interface PointEvent {
  type: "placed" | "rejected" | "removed" | "cleared";
  point?: CanvasPoint;
  reason?: string;
}

export class PointStore {
  readonly points: CanvasPoint[] = [];
  private listeners: Array<(event: PointEvent) => void> = [];

  constructor(
    public imageWidth: number,
    public imageHeight: number,
    public featureResolution: number,
  ) {}

  onChange(listener: (event: PointEvent) => void): void {
    this.listeners.push(listener);
  }

  private emit(event: PointEvent): void {
    for (const listener of this.listeners) listener(event);
  }

  /** Place the next point; clicks off the image are ignored with a hint. */
  click(x: number, y: number): CanvasPoint | null {
    if (x < 0 || y < 0 || x > this.imageWidth - 1 || y > this.imageHeight - 1) {
      this.emit({ type: "rejected", reason: "outside the image" });
      return null;
    }
    const kind: PointKind = this.points.length % 2 === 0 ? "handle" : "target";
    const point: CanvasPoint = {
      kind,
      position: [x, y],
      pairIndex: Math.floor(this.points.length / 2),
    };
    this.points.push(point);
    this.emit({ type: "placed", point });
    return point;
  }

  /** Remove the most recently placed point. */
  deleteLast(): CanvasPoint | null {
    const removed = this.points.pop() ?? null;
    if (removed) this.emit({ type: "removed", point: removed });
    return removed;
  }

  clear(): void {
    this.points.length = 0;
    this.emit({ type: "cleared" });
  }

  /** Move an existing point (drag-to-adjust before the run starts). */
  move(index: number, x: number, y: number): boolean {
    const point = this.points[index];
    if (!point) return false;
    if (x < 0 || y < 0 || x > this.imageWidth - 1 || y > this.imageHeight - 1) {
      this.emit({ type: "rejected", reason: "outside the image" });
      return false;
    }
    point.position = [x, y];
    this.emit({ type: "placed", point });
    return true;
  }

  get completePairs(): number {
    return Math.floor(this.points.length / 2);
  }

  get hasDanglingHandle(): boolean {
    return this.points.length % 2 === 1;
  }

  private toFeature(position: [number, number]): [number, number] {
    const scale = this.featureResolution / this.imageWidth;
    const limit = this.featureResolution - 1;
    return [
      Math.min(position[0] * scale, limit),
      Math.min(position[1] * scale, limit),
    ];
  }

  /** Completed pairs in feature-grid coordinates, ready for the config call. */
  pairsForSubmit(): Pair[] {
    const pairs: Pair[] = [];
    for (let i = 0; i + 1 < this.points.length; i += 2) {
      pairs.push({
        handle: this.toFeature(this.points[i].position),
        target: this.toFeature(this.points[i + 1].position),
      });
    }
    return pairs;
  }

  /** Feature-grid coordinates back onto the canvas raster. */
  featureToImage(position: [number, number]): [number, number] {
    const scale = this.imageWidth / this.featureResolution;
    return [position[0] * scale, position[1] * scale];
  }
}
