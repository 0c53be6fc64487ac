/** Minimal deterministic SVG chart builder (fixed size, fonts, palette). */

export const WIDTH = 800;
export const HEIGHT = 500;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 72 };
const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export type Scale = "linear" | "log";

export interface Axis {
  label: string;
  scale: Scale;
  min: number;
  max: number;
}

export interface LineSeries {
  label: string;
  color: string;
  points: { x: number; y: number }[];
  /** optional min-max band drawn under the line */
  band?: { x: number; lo: number; hi: number }[];
}

export interface Annotation {
  text: string;
  /** data coordinates */
  x: number;
  y: number;
  color: string;
}

const plotW = WIDTH - MARGIN.left - MARGIN.right;
const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(0).replace("+", "");
  const s = v.toPrecision(4);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

function project(v: number, axis: Axis, extent: number): number {
  if (axis.scale === "log") {
    const lo = Math.log10(axis.min);
    const hi = Math.log10(axis.max);
    return ((Math.log10(v) - lo) / (hi - lo || 1)) * extent;
  }
  return ((v - axis.min) / (axis.max - axis.min || 1)) * extent;
}

export function px(v: number, axis: Axis): number {
  return MARGIN.left + project(v, axis, plotW);
}

export function py(v: number, axis: Axis): number {
  return MARGIN.top + plotH - project(v, axis, plotH);
}

function ticks(axis: Axis): number[] {
  if (axis.scale === "log") {
    const out: number[] = [];
    const lo = Math.ceil(Math.log10(axis.min) - 1e-9);
    const hi = Math.floor(Math.log10(axis.max) + 1e-9);
    for (let e = lo; e <= hi; e++) out.push(10 ** e);
    return out.length >= 2 ? out : [axis.min, axis.max];
  }
  const span = axis.max - axis.min;
  if (span <= 0) return [axis.min];
  const step = 10 ** Math.floor(Math.log10(span / 5));
  const mult = span / step > 25 ? 5 : span / step > 12 ? 2.5 : 1;
  const s = step * mult;
  const out: number[] = [];
  for (let v = Math.ceil(axis.min / s) * s; v <= axis.max + 1e-9 * s; v += s) {
    out.push(Math.abs(v) < 1e-12 * s ? 0 : v);
  }
  return out;
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export interface Chart {
  title: string;
  x: Axis;
  y: Axis;
  series: LineSeries[];
  annotations?: Annotation[];
  note?: string;
}

export function renderChart(chart: Chart): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="28" text-anchor="middle" ${FONT} font-size="18">${esc(chart.title)}</text>`,
  );
  // frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333" stroke-width="1"/>`,
  );
  // grid + tick labels
  for (const t of ticks(chart.x)) {
    const X = px(t, chart.x);
    parts.push(
      `<line x1="${X}" y1="${MARGIN.top}" x2="${X}" y2="${MARGIN.top + plotH}" stroke="#ddd" stroke-width="1"/>`,
      `<text x="${X}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" ${FONT} font-size="12">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(chart.y)) {
    const Y = py(t, chart.y);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${Y}" x2="${MARGIN.left + plotW}" y2="${Y}" stroke="#ddd" stroke-width="1"/>`,
      `<text x="${MARGIN.left - 8}" y="${Y + 4}" text-anchor="end" ${FONT} font-size="12">${fmt(t)}</text>`,
    );
  }
  // axis labels
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle" ${FONT} font-size="14">${esc(chart.x.label)}</text>`,
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ${FONT} font-size="14" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${esc(chart.y.label)}</text>`,
  );
  // bands under lines
  for (const s of chart.series) {
    if (!s.band || s.band.length === 0) continue;
    const fwd = s.band.map((p) => `${px(p.x, chart.x)},${py(p.hi, chart.y)}`);
    const back = [...s.band]
      .reverse()
      .map((p) => `${px(p.x, chart.x)},${py(p.lo, chart.y)}`);
    parts.push(
      `<polygon points="${[...fwd, ...back].join(" ")}" fill="${s.color}" fill-opacity="0.18" stroke="none"/>`,
    );
  }
  // lines (single points drawn as circles)
  for (const s of chart.series) {
    if (s.points.length === 0) continue;
    if (s.points.length === 1) {
      const p = s.points[0];
      parts.push(
        `<circle cx="${px(p.x, chart.x)}" cy="${py(p.y, chart.y)}" r="4" fill="${s.color}"/>`,
      );
      continue;
    }
    const pts = s.points
      .map((p) => `${px(p.x, chart.x)},${py(p.y, chart.y)}`)
      .join(" ");
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="2"/>`,
    );
  }
  // legend
  let ly = MARGIN.top + 10;
  for (const s of chart.series) {
    const lx = MARGIN.left + plotW - 170;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 24}" y2="${ly}" stroke="${s.color}" stroke-width="3"/>`,
      `<text x="${lx + 30}" y="${ly + 4}" ${FONT} font-size="13">${esc(s.label)}</text>`,
    );
    ly += 18;
  }
  // annotations in data space
  for (const a of chart.annotations ?? []) {
    parts.push(
      `<text x="${px(a.x, chart.x)}" y="${py(a.y, chart.y)}" ${FONT} font-size="13" fill="${a.color}">${esc(a.text)}</text>`,
    );
  }
  if (chart.note) {
    parts.push(
      `<text x="${MARGIN.left + plotW / 2}" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ${FONT} font-size="14" fill="#888">${esc(chart.note)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export interface Bar {
  label: string;
  value: number;
  color: string;
}

export function renderBars(title: string, yLabel: string, bars: Bar[],
                           yMax = 1.0): string {
  const y: Axis = { label: yLabel, scale: "linear", min: 0, max: yMax };
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="28" text-anchor="middle" ${FONT} font-size="18">${esc(title)}</text>`,
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333" stroke-width="1"/>`,
  );
  for (const t of ticks(y)) {
    const Y = py(t, y);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${Y}" x2="${MARGIN.left + plotW}" y2="${Y}" stroke="#ddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${Y + 4}" text-anchor="end" ${FONT} font-size="12">${fmt(t)}</text>`,
    );
  }
  const n = Math.max(bars.length, 1);
  const slot = plotW / n;
  bars.forEach((b, i) => {
    const bw = slot * 0.6;
    const x0 = MARGIN.left + i * slot + (slot - bw) / 2;
    const top = py(b.value, y);
    parts.push(
      `<rect x="${x0}" y="${top}" width="${bw}" height="${MARGIN.top + plotH - top}" fill="${b.color}"/>`,
      `<text x="${x0 + bw / 2}" y="${top - 6}" text-anchor="middle" ${FONT} font-size="12">${fmt(b.value)}</text>`,
      `<text x="${x0 + bw / 2}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" ${FONT} font-size="12">${esc(b.label)}</text>`,
    );
  });
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ${FONT} font-size="14" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${esc(yLabel)}</text>`,
    "</svg>",
  );
  return parts.join("\n");
}
