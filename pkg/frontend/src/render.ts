/** Static SVG rendering of regret curves: one mean line per series with a
 * ±3-standard-deviation band, plus an optional analytic bound overlay. */
import type { CheckpointStat } from "./stats.js";
import { BoundSpec, boundValue } from "./spec.js";

export interface SeriesData {
  label: string;
  color?: string;
  stats: CheckpointStat[];
}

export interface RenderOptions {
  title?: string;
  xScale: "linear" | "log";
  bound?: BoundSpec;
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { top: 48, right: 24, bottom: 48, left: 72 };

function fmt(v: number): string {
  // enough digits that the plotted coordinates are a faithful affine image
  // of the statistics
  return Number(v.toPrecision(12)).toString();
}

function niceTicks(lo: number, hi: number, n = 6): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-9 * s; v += s) ticks.push(v);
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    const v = Math.pow(10, e);
    if (v >= lo && v <= hi) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderChart(series: SeriesData[], opts: RenderOptions): string {
  if (series.length === 0) throw new Error("nothing to plot");
  const width = opts.width ?? 760;
  const height = opts.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const ts = series[0].stats.map((c) => c.t);
  const tMin = Math.min(...ts);
  const tMax = Math.max(...ts);
  let yMax = 0;
  for (const s of series) {
    for (const c of s.stats) yMax = Math.max(yMax, c.mean + 3 * c.std);
  }
  if (opts.bound) yMax = Math.max(yMax, boundValue(opts.bound, tMax));
  if (yMax <= 0) yMax = 1;

  const x = (t: number): number => {
    if (opts.xScale === "log") {
      const lo = Math.log(Math.max(tMin, 1));
      const hi = Math.log(Math.max(tMax, 2));
      return MARGIN.left + ((Math.log(Math.max(t, 1)) - lo) / (hi - lo || 1)) * plotW;
    }
    return MARGIN.left + ((t - tMin) / (tMax - tMin || 1)) * plotW;
  };
  const y = (v: number): number => MARGIN.top + plotH - (v / yMax) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (opts.title) {
    parts.push(
      `<text x="${width / 2}" y="24" text-anchor="middle" font-size="15">` +
        `${escapeXml(opts.title)}</text>`,
    );
  }

  // axes
  const xTicks = opts.xScale === "log" ? logTicks(Math.max(tMin, 1), tMax) : niceTicks(tMin, tMax);
  const yTicks = niceTicks(0, yMax);
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" x2="${MARGIN.left + plotW}" ` +
      `y2="${MARGIN.top + plotH}" stroke="black"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${MARGIN.top + plotH}" stroke="black"/>`,
  );
  for (const t of xTicks) {
    const px = x(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${MARGIN.top + plotH}" x2="${fmt(px)}" ` +
        `y2="${MARGIN.top + plotH + 5}" stroke="black"/>`,
      `<text x="${fmt(px)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle">${t}</text>`,
    );
  }
  for (const v of yTicks) {
    const py = y(v);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${fmt(py)}" x2="${MARGIN.left}" ` +
        `y2="${fmt(py)}" stroke="black"/>`,
      `<text x="${MARGIN.left - 8}" y="${fmt(py + 4)}" text-anchor="end">${fmt(v)}</text>`,
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle">round</text>`,
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">cumulative regret</text>`,
  );

  // series: band first so lines draw on top
  series.forEach((s, idx) => {
    const color = s.color ?? PALETTE[idx % PALETTE.length];
    const upper = s.stats.map((c) => `${fmt(x(c.t))},${fmt(y(c.mean + 3 * c.std))}`);
    const lower = [...s.stats]
      .reverse()
      .map((c) => `${fmt(x(c.t))},${fmt(y(c.mean - 3 * c.std))}`);
    parts.push(
      `<polygon class="band" data-label="${escapeXml(s.label)}" ` +
        `points="${upper.join(" ")} ${lower.join(" ")}" fill="${color}" ` +
        `fill-opacity="0.15" stroke="none"/>`,
    );
  });
  series.forEach((s, idx) => {
    const color = s.color ?? PALETTE[idx % PALETTE.length];
    const pts = s.stats.map((c) => `${fmt(x(c.t))},${fmt(y(c.mean))}`).join(" ");
    parts.push(
      `<polyline class="mean" data-label="${escapeXml(s.label)}" points="${pts}" ` +
        `fill="none" stroke="${color}" stroke-width="1.8"/>`,
    );
  });

  if (opts.bound) {
    const pts = ts.map((t) => `${fmt(x(t))},${fmt(y(boundValue(opts.bound!, t)))}`).join(" ");
    parts.push(
      `<polyline class="bound" points="${pts}" fill="none" stroke="#444" ` +
        `stroke-width="1.2" stroke-dasharray="6 4"/>`,
    );
  }

  // legend
  const entries: Array<{ label: string; color: string; dash: string }> = series.map((s, idx) => ({
    label: s.label,
    color: s.color ?? PALETTE[idx % PALETTE.length],
    dash: "",
  }));
  if (opts.bound) {
    entries.push({ label: opts.bound.label ?? "bound", color: "#444", dash: ' stroke-dasharray="6 4"' });
  }
  entries.forEach((e, i) => {
    const ly = MARGIN.top + 8 + i * 18;
    const lx = MARGIN.left + 12;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" stroke="${e.color}" ` +
        `stroke-width="1.8"${e.dash}/>`,
      `<text x="${lx + 32}" y="${ly + 4}">${escapeXml(e.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}
