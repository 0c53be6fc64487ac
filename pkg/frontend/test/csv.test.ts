import { describe, expect, it } from "vitest";
import { parseRunCsv, SchemaError } from "../src/csv.js";

const HEADER = "epoch,evals,eval_time_s,update_time_s,best_score,test_accuracy";

describe("parseRunCsv", () => {
  it("parses rows and keeps column types", () => {
    const rows = parseRunCsv(
      `${HEADER}\n0,10,0.5,0.1,2.5,0.91\n1,20,0.6,0.1,1.25,`,
    );
    expect(rows).toHaveLength(2);
    expect(rows[0]).toEqual({
      epoch: 0,
      evals: 10,
      eval_time_s: 0.5,
      update_time_s: 0.1,
      best_score: 2.5,
      test_accuracy: 0.91,
    });
    expect(rows[1].test_accuracy).toBeNull();
    expect(rows[1].best_score).toBe(1.25);
  });

  it("tolerates reordered and extra columns", () => {
    const rows = parseRunCsv(
      "best_score,epoch,extra,evals,eval_time_s,update_time_s,test_accuracy\n" +
        "3.5,0,x,10,0.1,0.2,0.5",
    );
    expect(rows[0].best_score).toBe(3.5);
    expect(rows[0].epoch).toBe(0);
  });

  it("names the missing column in the error", () => {
    const bad = "epoch,evals,eval_time_s,update_time_s,best_score\n0,1,0,0,1";
    expect(() => parseRunCsv(bad, "run.csv")).toThrowError(
      /run\.csv: missing column 'test_accuracy'/,
    );
    expect(() => parseRunCsv(bad)).toThrowError(SchemaError);
  });

  it("rejects a fully empty file but accepts header-only", () => {
    expect(() => parseRunCsv("", "run.csv")).toThrowError(/empty file/);
    expect(parseRunCsv(`${HEADER}\n`)).toEqual([]);
  });

  it("rejects non-numeric cells", () => {
    expect(() =>
      parseRunCsv(`${HEADER}\n0,1,0,0,oops,0.5`, "run.csv"),
    ).toThrowError(/non-numeric value for 'best_score'/);
  });
});
