import { spawnSync } from "child_process";
import { mkdtempSync, readFileSync, statSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { fileURLToPath } from "url";
import { beforeAll, describe, expect, it } from "vitest";

const CLI = fileURLToPath(new URL("../dist/cli.js", import.meta.url));
const HEADER = "epoch,evals,eval_time_s,update_time_s,best_score,test_accuracy";
let dir: string;

function run(args: string[]): { status: number; stdout: string; stderr: string } {
  const r = spawnSync("node", [CLI, ...args], { encoding: "utf8" });
  return { status: r.status ?? 1, stdout: r.stdout, stderr: r.stderr };
}

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
});

describe("plots CLI", () => {
  it("renders a convergence PNG from seed CSVs", () => {
    const csv = join(dir, "seed0.csv");
    writeFileSync(csv, `${HEADER}\n0,10,0.1,0.1,5,\n1,20,0.1,0.1,2,\n`);
    const out = join(dir, "conv.png");
    const r = run(["convergence", "--in", csv, "--out", out]);
    expect(r.status).toBe(0);
    expect(statSync(out).size).toBeGreaterThan(1000);
    // PNG magic bytes
    expect(readFileSync(out).subarray(0, 4)).toEqual(
      Buffer.from([0x89, 0x50, 0x4e, 0x47]),
    );
  });

  it("writes raw SVG when the output ends in .svg", () => {
    const csv = join(dir, "seed1.csv");
    writeFileSync(csv, `${HEADER}\n0,10,0.1,0.1,5,0.5\n`);
    const out = join(dir, "conv.svg");
    const r = run(["convergence", "--in", csv, "--out", out, "--y", "test_accuracy"]);
    expect(r.status).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("<svg");
  });

  it("warns but exits 0 on a header-only CSV", () => {
    const csv = join(dir, "empty.csv");
    writeFileSync(csv, `${HEADER}\n`);
    const out = join(dir, "empty.svg");
    const r = run(["convergence", "--in", csv, "--out", out]);
    expect(r.status).toBe(0);
    expect(r.stderr).toContain("no data rows");
    expect(readFileSync(out, "utf8")).toContain(">no data<");
  });

  it("fails naming the missing column on a schema mismatch", () => {
    const csv = join(dir, "bad.csv");
    writeFileSync(csv, "epoch,score\n0,1\n");
    const r = run(["convergence", "--in", csv, "--out", join(dir, "x.png")]);
    expect(r.status).toBe(1);
    expect(r.stderr).toContain("missing column 'evals'");
  });

  it("rejects an unknown figure kind", () => {
    const r = run(["histogram", "--in", "a.csv", "--out", "x.png"]);
    expect(r.status).toBe(2);
    expect(r.stderr).toContain("unknown figure kind");
  });
});
