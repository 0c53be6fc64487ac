/** Grouping and per-epoch aggregation of multi-seed run CSVs. */

import { basename, dirname } from "path";
import { readRunCsv, RunRecord } from "./csv.js";

export interface SeriesPoint {
  x: number;
  mean: number;
  min: number;
  max: number;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
}

/** Group CSV paths by their parent directory (one experiment per directory). */
export function groupByDirectory(paths: string[]): Map<string, string[]> {
  const groups = new Map<string, string[]>();
  for (const p of paths) {
    const key = basename(dirname(p)) || ".";
    const list = groups.get(key) ?? [];
    list.push(p);
    groups.set(key, list);
  }
  for (const list of groups.values()) list.sort();
  return groups;
}

export type XAxis = "epoch" | "seconds";
export type YColumn = "best_score" | "test_accuracy";

function xValue(r: RunRecord, axis: XAxis): number {
  return axis === "epoch" ? r.epoch : r.eval_time_s + r.update_time_s;
}

/**
 * Aggregate seeds row-by-row (rows are aligned by epoch index): the x value
 * is the seed mean, the y value carries mean plus the min-max band.
 * Rows where the y column is null (no accuracy probe) are dropped.
 */
export function aggregateSeeds(
  runs: RunRecord[][],
  axis: XAxis,
  column: YColumn = "best_score",
): SeriesPoint[] {
  const n = Math.min(...runs.map((r) => r.length));
  const points: SeriesPoint[] = [];
  for (let i = 0; i < n; i++) {
    const ys = runs.map((r) => r[i][column]);
    if (ys.some((y) => y === null)) continue;
    const vals = ys as number[];
    const xs = runs.map((r) => xValue(r[i], axis));
    points.push({
      x: xs.reduce((a, b) => a + b, 0) / xs.length,
      mean: vals.reduce((a, b) => a + b, 0) / vals.length,
      min: Math.min(...vals),
      max: Math.max(...vals),
    });
  }
  return points;
}

/** Load every group of seed CSVs into an aggregated series. */
export function loadSeries(
  paths: string[],
  axis: XAxis,
  column: YColumn = "best_score",
): Series[] {
  const out: Series[] = [];
  for (const [label, files] of groupByDirectory(paths)) {
    const runs = files.map(readRunCsv).filter((r) => r.length > 0);
    out.push({
      label,
      points: runs.length ? aggregateSeeds(runs, axis, column) : [],
    });
  }
  out.sort((a, b) => a.label.localeCompare(b.label));
  return out;
}
