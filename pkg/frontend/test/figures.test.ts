import { mkdtempSync, mkdirSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { beforeAll, describe, expect, it } from "vitest";
import {
  accuracyNeuronsFigure,
  accuracyResolutionFigure,
  convergenceFigure,
  oneVsAllFigure,
  scalingFigure,
} from "../src/figures.js";

const HEADER = "epoch,evals,eval_time_s,update_time_s,best_score,test_accuracy";
let root: string;

function seedCsv(dir: string, name: string, rows: string[]): string {
  const d = join(root, dir);
  mkdirSync(d, { recursive: true });
  const p = join(d, name);
  writeFileSync(p, [HEADER, ...rows].join("\n") + "\n");
  return p;
}

function jsonFile(rel: string, data: unknown): string {
  const p = join(root, rel);
  mkdirSync(join(p, ".."), { recursive: true });
  writeFileSync(p, JSON.stringify(data));
  return p;
}

beforeAll(() => {
  root = mkdtempSync(join(tmpdir(), "plots-"));
});

const CONV = { xAxis: "epoch" as const, yColumn: "best_score" as const, logY: false };

describe("convergence", () => {
  it("renders one line and band per experiment directory", () => {
    const paths = [
      seedCsv("pepg", "seed0.csv", ["0,10,0.1,0.1,9,", "1,20,0.1,0.1,3,"]),
      seedCsv("pepg", "seed1.csv", ["0,10,0.1,0.1,7,", "1,20,0.1,0.1,5,"]),
      seedCsv("cma", "seed0.csv", ["0,16,0.1,0.2,8,", "1,32,0.1,0.2,6,"]),
    ];
    const svg = convergenceFigure(paths, CONV);
    expect(svg).toContain("<svg");
    expect(svg).toContain("pepg");
    expect(svg).toContain("cma");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
    expect((svg.match(/<polygon/g) ?? []).length).toBe(2);
  });

  it("renders empty axes with a note for a header-only CSV", () => {
    const p = seedCsv("empty", "seed0.csv", []);
    const svg = convergenceFigure([p], CONV);
    expect(svg).toContain(">no data<");
    expect(svg).toContain("<rect"); // axes frame still present
  });
});

describe("accuracy-neurons", () => {
  it("renders ELM and FFNN curves plus the ridge baseline", () => {
    const p = jsonFile("elm_scaling.json", {
      elm: { "50": 0.84, "200": 0.86, "1000": 0.92 },
      ffnn: { "8": 0.88, "100": 0.97 },
      ridge_baseline: 0.86,
    });
    const svg = accuracyNeuronsFigure([p]);
    expect(svg).toContain("ELM (ridge output)");
    expect(svg).toContain("FFNN (backprop)");
    expect(svg).toContain("ridge baseline");
  });

  it("reports a missing key", () => {
    const p = jsonFile("bad_elm.json", { elm: {} });
    expect(() => accuracyNeuronsFigure([p])).toThrowError(/missing key 'ffnn'/);
  });
});

describe("accuracy-resolution", () => {
  it("renders 2-bit, 4-bit and float accuracies", () => {
    const p = jsonFile("ceiling.json", {
      mean_accuracy: { backprop: 0.972, quantized4: 0.965, quantized2: 0.81 },
    });
    const svg = accuracyResolutionFigure([p]);
    expect(svg).toContain("FFNN-100 (trained)");
    expect(svg).toContain("<polyline");
  });
});

describe("scaling", () => {
  it("annotates the fitted exponents verbatim from summary.json", () => {
    const slopes = { pepg: 1.0412345678901234, cma: 1.87, spsa: 0.95 };
    const p = jsonFile("scaling.json", {
      results: Object.fromEntries(
        Object.entries(slopes).map(([k, slope]) => [
          k,
          {
            dimensions: [100, 1000, 10000],
            update_seconds: [1e-4, 10 ** -4 + slope, 2],
            slope,
            error: null,
          },
        ]),
      ),
    });
    const svg = scalingFigure([p]);
    for (const [name, slope] of Object.entries(slopes)) {
      expect(svg).toContain(`${name}: O(N^${slope})`);
    }
    // full float precision survives, not a rounded rendering
    expect(svg).toContain("O(N^1.0412345678901234)");
  });

  it("skips failed entries but fails when none succeeded", () => {
    const p = jsonFile("scaling_fail.json", {
      results: { cma: { error: "out of memory" } },
    });
    expect(() => scalingFigure([p])).toThrowError(/no successful/);
  });
});

describe("one-vs-all", () => {
  it("draws one bar per summary with the mean accuracy", () => {
    const a = jsonFile("runs/digit3/summary.json", {
      runs: [
        { seed: 0, final_test_accuracy: 0.9 },
        { seed: 1, final_test_accuracy: 0.94 },
      ],
    });
    const svg = oneVsAllFigure([a]);
    expect(svg).toContain("digit3");
    expect(svg).toContain("0.92"); // mean of the two seeds
  });
});
