/**
 * Minimal deterministic SVG charts: line plots (linear or log-10 y) and
 * bar charts. No timestamps, no randomness, fixed styling -- identical
 * inputs always produce identical bytes, which the figure-regeneration
 * guarantee depends on.
 */

export interface Series {
  label: string;
  points: Array<[number, number]>;
}

export interface Bar {
  label: string;
  value: number;
}

const WIDTH = 720;
const HEIGHT = 460;
const MARGIN = { left: 80, right: 170, top: 40, bottom: 55 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const coord = (v: number): string => v.toFixed(2);

function tickLabel(v: number): string {
  if (v === 0) return "0";
  const mag = Math.abs(v);
  if (mag >= 1e-3 && mag < 1e5) {
    const text = v.toPrecision(6);
    return text.includes(".") ? text.replace(/\.?0+$/, "") : text;
  }
  return v.toExponential(1);
}

function linearTicks(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = Math.pow(10, Math.floor(Math.log10(span / target)));
  let step = step0;
  for (const mult of [1, 2, 5, 10]) {
    if (span / (step0 * mult) <= target) {
      step = step0 * mult;
      break;
    }
  }
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    ticks.push(Math.abs(t) < 1e-12 * span ? 0 : t);
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const eLo = Math.ceil(Math.log10(lo) - 1e-12);
  const eHi = Math.floor(Math.log10(hi) + 1e-12);
  const step = Math.max(1, Math.ceil((eHi - eLo + 1) / 8));
  const ticks: number[] = [];
  for (let e = eLo; e <= eHi; e += step) {
    ticks.push(Math.pow(10, e));
  }
  return ticks.length > 0 ? ticks : [lo];
}

interface Scale {
  (v: number): number;
  ticks: number[];
}

function makeScale(lo: number, hi: number, outLo: number, outHi: number, log: boolean): Scale {
  if (log) {
    const llo = Math.log10(lo);
    const lhi = Math.log10(hi);
    const span = lhi > llo ? lhi - llo : 1;
    const fn = ((v: number) => outLo + ((Math.log10(v) - llo) / span) * (outHi - outLo)) as Scale;
    fn.ticks = decadeTicks(lo, hi);
    return fn;
  }
  const span = hi > lo ? hi - lo : 1;
  const fn = ((v: number) => outLo + ((v - lo) / span) * (outHi - outLo)) as Scale;
  fn.ticks = linearTicks(lo, hi);
  return fn;
}

function header(title: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    `<text x="${WIDTH / 2}" y="${MARGIN.top - 16}" font-family="Helvetica,sans-serif" font-size="15" text-anchor="middle">${escapeXml(title)}</text>`,
  ];
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function axes(xScale: Scale, yScale: Scale, xLabel: string, yLabel: string, logY: boolean): string[] {
  const parts: string[] = [];
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + PLOT_H;
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x0 + PLOT_W}" y2="${y0}" stroke="#000000" stroke-width="1"/>`,
    `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="#000000" stroke-width="1"/>`,
  );
  for (const t of xScale.ticks) {
    const px = xScale(t);
    parts.push(
      `<line x1="${coord(px)}" y1="${y0}" x2="${coord(px)}" y2="${y0 + 5}" stroke="#000000" stroke-width="1"/>`,
      `<text x="${coord(px)}" y="${y0 + 18}" font-family="Helvetica,sans-serif" font-size="11" text-anchor="middle">${tickLabel(t)}</text>`,
    );
  }
  for (const t of yScale.ticks) {
    const py = yScale(t);
    parts.push(
      `<line x1="${x0 - 5}" y1="${coord(py)}" x2="${x0}" y2="${coord(py)}" stroke="#000000" stroke-width="1"/>`,
      `<text x="${x0 - 8}" y="${coord(py + 4)}" font-family="Helvetica,sans-serif" font-size="11" text-anchor="end">${logY ? "1e" + Math.round(Math.log10(t)) : tickLabel(t)}</text>`,
      `<line x1="${x0}" y1="${coord(py)}" x2="${x0 + PLOT_W}" y2="${coord(py)}" stroke="#dddddd" stroke-width="0.5"/>`,
    );
  }
  parts.push(
    `<text x="${x0 + PLOT_W / 2}" y="${y0 + 40}" font-family="Helvetica,sans-serif" font-size="13" text-anchor="middle">${escapeXml(xLabel)}</text>`,
    `<text x="22" y="${MARGIN.top + PLOT_H / 2}" font-family="Helvetica,sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 22 ${MARGIN.top + PLOT_H / 2})">${escapeXml(yLabel)}</text>`,
  );
  return parts;
}

function legend(labels: string[]): string[] {
  const parts: string[] = [];
  const lx = MARGIN.left + PLOT_W + 14;
  labels.forEach((label, i) => {
    const ly = MARGIN.top + 14 + i * 20;
    const color = PALETTE[i % PALETTE.length];
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${color}" stroke-width="2"/>`,
      `<text x="${lx + 28}" y="${ly + 4}" font-family="Helvetica,sans-serif" font-size="12">${escapeXml(label)}</text>`,
    );
  });
  return parts;
}

export function lineChart(opts: {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  logY: boolean;
}): string {
  const usable = opts.series.map((s) => ({
    label: s.label,
    points: opts.logY ? s.points.filter(([, y]) => y > 0) : s.points,
  }));
  const all = usable.flatMap((s) => s.points);
  const parts = header(opts.title);
  if (all.length === 0) {
    // degenerate input: draw empty axes
    const xs = makeScale(0, 1, MARGIN.left, MARGIN.left + PLOT_W, false);
    const ys = makeScale(0, 1, MARGIN.top + PLOT_H, MARGIN.top, false);
    parts.push(...axes(xs, ys, opts.xLabel, opts.yLabel, false));
    parts.push("</svg>");
    return parts.join("\n") + "\n";
  }
  const xLo = Math.min(...all.map(([x]) => x));
  const xHi = Math.max(...all.map(([x]) => x));
  const yLo = Math.min(...all.map(([, y]) => y));
  const yHi = Math.max(...all.map(([, y]) => y));
  const xs = makeScale(xLo, xHi, MARGIN.left, MARGIN.left + PLOT_W, false);
  const ys = makeScale(yLo, yHi, MARGIN.top + PLOT_H, MARGIN.top, opts.logY);
  parts.push(...axes(xs, ys, opts.xLabel, opts.yLabel, opts.logY));
  usable.forEach((s, i) => {
    if (s.points.length === 0) return;
    const color = PALETTE[i % PALETTE.length];
    const path = s.points
      .map(([x, y], k) => `${k === 0 ? "M" : "L"}${coord(xs(x))} ${coord(ys(y))}`)
      .join(" ");
    parts.push(`<path d="${path}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
  });
  parts.push(...legend(usable.map((s) => s.label)));
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function barChart(opts: { title: string; yLabel: string; bars: Bar[] }): string {
  const parts = header(opts.title);
  const n = opts.bars.length;
  const yHi = n > 0 ? Math.max(...opts.bars.map((b) => b.value), 0) : 1;
  const ys = makeScale(0, yHi > 0 ? yHi : 1, MARGIN.top + PLOT_H, MARGIN.top, false);
  const xs = makeScale(0, 1, MARGIN.left, MARGIN.left + PLOT_W, false);
  xs.ticks = [];
  parts.push(...axes(xs, ys, "", opts.yLabel, false));
  const y0 = MARGIN.top + PLOT_H;
  opts.bars.forEach((bar, i) => {
    const slot = PLOT_W / Math.max(n, 1);
    const bw = slot * 0.6;
    const bx = MARGIN.left + slot * i + (slot - bw) / 2;
    const by = ys(bar.value);
    const color = PALETTE[i % PALETTE.length];
    parts.push(
      `<rect x="${coord(bx)}" y="${coord(by)}" width="${coord(bw)}" height="${coord(y0 - by)}" fill="${color}"/>`,
      `<text x="${coord(bx + bw / 2)}" y="${y0 + 18}" font-family="Helvetica,sans-serif" font-size="12" text-anchor="middle">${escapeXml(bar.label)}</text>`,
      `<text x="${coord(bx + bw / 2)}" y="${coord(by - 6)}" font-family="Helvetica,sans-serif" font-size="11" text-anchor="middle">${tickLabel(bar.value)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
