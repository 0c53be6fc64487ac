/** Figure builders: each consumes harness outputs and returns an SVG string. */

import { readFileSync } from "fs";
import { basename, dirname } from "path";
import { loadSeries, Series, XAxis, YColumn } from "./data.js";
import {
  Annotation,
  Axis,
  Bar,
  Chart,
  LineSeries,
  PALETTE,
  renderBars,
  renderChart,
  Scale,
} from "./svg.js";

export class InputError extends Error {}

export interface ConvergenceOptions {
  xAxis: XAxis;
  yColumn: YColumn;
  logY: boolean;
}

function readJson(path: string): any {
  try {
    return JSON.parse(readFileSync(path, "utf8"));
  } catch (e) {
    throw new InputError(`${path}: ${(e as Error).message}`);
  }
}

function domain(values: number[], scale: Scale): { min: number; max: number } {
  const finite = values.filter(
    (v) => Number.isFinite(v) && (scale === "linear" || v > 0),
  );
  if (finite.length === 0) return { min: 0, max: 1 };
  let min = Math.min(...finite);
  let max = Math.max(...finite);
  if (min === max) {
    min = scale === "log" ? min / 2 : min - 1;
    max = scale === "log" ? max * 2 : max + 1;
  } else if (scale === "linear") {
    const pad = (max - min) * 0.05;
    min -= pad;
    max += pad;
  }
  return { min, max };
}

function toLineSeries(series: Series[]): LineSeries[] {
  return series.map((s, i) => ({
    label: s.label,
    color: PALETTE[i % PALETTE.length],
    points: s.points.map((p) => ({ x: p.x, y: p.mean })),
    band: s.points.map((p) => ({ x: p.x, lo: p.min, hi: p.max })),
  }));
}

/** Best score (or accuracy) vs epoch or wall-clock seconds, one mean line +
 * min-max band per experiment directory. */
export function convergenceFigure(
  paths: string[],
  opts: ConvergenceOptions,
): string {
  const series = loadSeries(paths, opts.xAxis, opts.yColumn);
  const lines = toLineSeries(series);
  const allX = lines.flatMap((s) => s.points.map((p) => p.x));
  const allY = lines.flatMap((s) =>
    (s.band ?? []).flatMap((b) => [b.lo, b.hi]),
  );
  const yScale: Scale = opts.logY ? "log" : "linear";
  const chart: Chart = {
    title:
      opts.yColumn === "best_score"
        ? "Convergence: best score"
        : "Convergence: test accuracy",
    x: {
      label: opts.xAxis === "epoch" ? "epoch" : "wall-clock seconds",
      scale: "linear",
      ...domain(allX, "linear"),
    },
    y: { label: opts.yColumn, scale: yScale, ...domain(allY, yScale) },
    series: lines,
    note: allX.length === 0 ? "no data" : undefined,
  };
  return renderChart(chart);
}

/** Test accuracy vs hidden-layer size for ELM ridge fits and trained FFNNs,
 * with the linear ridge baseline. Input: elm_scaling.json. */
export function accuracyNeuronsFigure(paths: string[]): string {
  if (paths.length !== 1) {
    throw new InputError("accuracy-neurons takes exactly one JSON input");
  }
  const data = readJson(paths[0]);
  for (const key of ["elm", "ffnn", "ridge_baseline"]) {
    if (!(key in data)) {
      throw new InputError(`${paths[0]}: missing key '${key}'`);
    }
  }
  const table = (obj: Record<string, number>) =>
    Object.keys(obj)
      .map(Number)
      .sort((a, b) => a - b)
      .map((h) => ({ x: h, y: obj[String(h)] }));
  const elm = table(data.elm);
  const ffnn = table(data.ffnn);
  const sizes = [...elm, ...ffnn].map((p) => p.x);
  const xDom = domain(sizes, "log");
  const series: LineSeries[] = [
    { label: "ELM (ridge output)", color: PALETTE[0], points: elm },
    { label: "FFNN (backprop)", color: PALETTE[1], points: ffnn },
    {
      label: "ridge baseline",
      color: PALETTE[7],
      points: [
        { x: xDom.min, y: data.ridge_baseline },
        { x: xDom.max, y: data.ridge_baseline },
      ],
    },
  ];
  const ys = series.flatMap((s) => s.points.map((p) => p.y));
  return renderChart({
    title: "Test accuracy vs hidden-layer size",
    x: { label: "hidden neurons", scale: "log", ...xDom },
    y: { label: "test accuracy", scale: "linear", ...domain(ys, "linear") },
    series,
  });
}

/** Test accuracy vs weight resolution from the ceiling summary: 2-bit,
 * 4-bit, and the unconstrained float run. */
export function accuracyResolutionFigure(paths: string[]): string {
  if (paths.length !== 1) {
    throw new InputError("accuracy-resolution takes exactly one JSON input");
  }
  const data = readJson(paths[0]);
  const acc = data.mean_accuracy;
  if (!acc) {
    throw new InputError(`${paths[0]}: missing key 'mean_accuracy'`);
  }
  const variants: [string, number][] = [
    ["quantized2", 2],
    ["quantized4", 4],
    ["backprop", 32],
  ];
  for (const [v] of variants) {
    if (acc[v] == null) {
      throw new InputError(`${paths[0]}: missing ceiling variant '${v}'`);
    }
  }
  const points = variants.map(([v, bits]) => ({ x: bits, y: acc[v] }));
  return renderChart({
    title: "Test accuracy vs weight resolution",
    x: { label: "weight bits (32 = float)", scale: "log", min: 1, max: 64 },
    y: {
      label: "test accuracy",
      scale: "linear",
      ...domain(points.map((p) => p.y), "linear"),
    },
    series: [
      { label: "FFNN-100 (trained)", color: PALETTE[0], points },
    ],
  });
}

/** Per-epoch optimizer update time vs dimension (log-log) with the fitted
 * exponents annotated verbatim from summary.json. */
export function scalingFigure(paths: string[]): string {
  if (paths.length !== 1) {
    throw new InputError("scaling takes exactly one summary.json input");
  }
  const data = readJson(paths[0]);
  if (!data.results) {
    throw new InputError(`${paths[0]}: missing key 'results'`);
  }
  const names = Object.keys(data.results).sort();
  const series: LineSeries[] = [];
  const annotations: Annotation[] = [];
  const allX: number[] = [];
  const allY: number[] = [];
  names.forEach((name, i) => {
    const r = data.results[name];
    if (r.error) return;
    const pts = r.dimensions.map((d: number, j: number) => ({
      x: d,
      y: r.update_seconds[j],
    }));
    allX.push(...r.dimensions);
    allY.push(...r.update_seconds);
    const color = PALETTE[i % PALETTE.length];
    series.push({ label: name, color, points: pts });
    const last = pts[pts.length - 1];
    annotations.push({
      text: `${name}: O(N^${r.slope})`,
      x: last.x,
      y: last.y,
      color,
    });
  });
  if (series.length === 0) {
    throw new InputError(`${paths[0]}: no successful scaling results`);
  }
  return renderChart({
    title: "Optimizer update time vs dimension",
    x: { label: "dimension N", scale: "log", ...domain(allX, "log") },
    y: {
      label: "update seconds per epoch",
      scale: "log",
      ...domain(allY, "log"),
    },
    series,
    annotations,
  });
}

/** Bar chart of mean final test accuracy, one bar per experiment summary. */
export function oneVsAllFigure(paths: string[]): string {
  if (paths.length === 0) {
    throw new InputError("one-vs-all needs at least one summary.json input");
  }
  const bars: Bar[] = paths.map((p, i) => {
    const data = readJson(p);
    if (!data.runs) throw new InputError(`${p}: missing key 'runs'`);
    const accs = data.runs
      .map((e: any) => e.final_test_accuracy)
      .filter((a: any) => a != null);
    if (accs.length === 0) {
      throw new InputError(`${p}: no final_test_accuracy values`);
    }
    const mean = accs.reduce((a: number, b: number) => a + b, 0) / accs.length;
    return {
      label: basename(dirname(p)),
      value: mean,
      color: PALETTE[i % PALETTE.length],
    };
  });
  return renderBars("One-vs-all test accuracy", "test accuracy", bars);
}

export const FIGURE_KINDS = [
  "convergence",
  "accuracy-neurons",
  "accuracy-resolution",
  "scaling",
  "one-vs-all",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export function buildFigure(
  kind: FigureKind,
  paths: string[],
  opts: ConvergenceOptions,
): string {
  switch (kind) {
    case "convergence":
      return convergenceFigure(paths, opts);
    case "accuracy-neurons":
      return accuracyNeuronsFigure(paths);
    case "accuracy-resolution":
      return accuracyResolutionFigure(paths);
    case "scaling":
      return scalingFigure(paths);
    case "one-vs-all":
      return oneVsAllFigure(paths);
  }
}
