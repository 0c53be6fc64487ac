/** Reader for the benchmark run CSVs (one row per epoch). */

import { readFileSync } from "fs";

/** Mandatory column order emitted by the benchmark harness. */
export const RUN_RECORD_FIELDS = [
  "epoch",
  "evals",
  "eval_time_s",
  "update_time_s",
  "best_score",
  "test_accuracy",
] as const;

export interface RunRecord {
  epoch: number;
  evals: number;
  eval_time_s: number;
  update_time_s: number;
  best_score: number;
  /** null when the accuracy probe did not run that epoch */
  test_accuracy: number | null;
}

export class SchemaError extends Error {}

/** Parse one run CSV; throws SchemaError naming the first missing column. */
export function parseRunCsv(text: string, source = "<csv>"): RunRecord[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty file (expected a header row)`);
  }
  const header = lines[0].split(",");
  for (const col of RUN_RECORD_FIELDS) {
    if (!header.includes(col)) {
      throw new SchemaError(`${source}: missing column '${col}'`);
    }
  }
  const idx = RUN_RECORD_FIELDS.map((c) => header.indexOf(c));
  const records: RunRecord[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    const num = (j: number, col: string): number => {
      const v = Number(cells[idx[j]]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(
          `${source}: row ${i}: non-numeric value for '${col}'`,
        );
      }
      return v;
    };
    const accCell = cells[idx[5]];
    records.push({
      epoch: num(0, "epoch"),
      evals: num(1, "evals"),
      eval_time_s: num(2, "eval_time_s"),
      update_time_s: num(3, "update_time_s"),
      best_score: num(4, "best_score"),
      test_accuracy:
        accCell === undefined || accCell === "" ? null : num(5, "test_accuracy"),
    });
  }
  return records;
}

export function readRunCsv(path: string): RunRecord[] {
  return parseRunCsv(readFileSync(path, "utf8"), path);
}
