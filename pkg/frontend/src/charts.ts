/** Minimal canvas line charts: raw series faint, EMA overlay solid. */

export interface ChartSeries {
  values: number[];
  color: string;
  width?: number;
}

export function drawChart(
  canvas: HTMLCanvasElement,
  series: ChartSeries[],
  title: string,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#1e2430";
  ctx.fillRect(0, 0, width, height);
  ctx.fillStyle = "#9aa4b2";
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText(title, 8, 16);

  const populated = series.filter((s) => s.values.length > 0);
  if (populated.length === 0) return;
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of populated) {
    for (const v of s.values) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return;
  if (hi - lo < 1e-12) {
    hi += 1;
    lo -= 1;
  }
  const padX = 8;
  const padTop = 24;
  const padBottom = 8;
  const plotW = width - 2 * padX;
  const plotH = height - padTop - padBottom;
  const n = Math.max(...populated.map((s) => s.values.length));

  for (const s of populated) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width ?? 1;
    ctx.beginPath();
    s.values.forEach((v, i) => {
      const x = padX + (n <= 1 ? 0 : (i / (n - 1)) * plotW);
      const y = padTop + (1 - (v - lo) / (hi - lo)) * plotH;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
  ctx.fillStyle = "#9aa4b2";
  ctx.fillText(hi.toPrecision(4), 8, padTop + 10);
  ctx.fillText(lo.toPrecision(4), 8, height - padBottom - 2);
}
