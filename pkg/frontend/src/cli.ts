#!/usr/bin/env node
/** plots <figure-kind> --in <csv/json...> --out <png|svg> */

import { Command } from "commander";
import {
  buildFigure,
  ConvergenceOptions,
  FIGURE_KINDS,
  FigureKind,
  InputError,
} from "./figures.js";
import { SchemaError } from "./csv.js";
import { writeFigure } from "./render.js";

const program = new Command();
program
  .name("plots")
  .description("Render benchmark figures from run CSVs and summary JSONs")
  .argument("<figure-kind>", `one of: ${FIGURE_KINDS.join(", ")}`)
  .requiredOption("--in <paths...>", "input CSV/JSON files")
  .requiredOption("--out <path>", "output image (.png, or .svg for raw SVG)")
  .option("--x <axis>", "convergence x axis: epoch or seconds", "epoch")
  .option(
    "--y <column>",
    "convergence y column: best_score or test_accuracy",
    "best_score",
  )
  .option("--log-y", "log-scale the convergence y axis", false)
  .showHelpAfterError();

program.parse();
const kind = program.args[0] as FigureKind;
const opts = program.opts();

if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
  console.error(
    `plots: unknown figure kind '${kind}' (expected ${FIGURE_KINDS.join(", ")})`,
  );
  process.exit(2);
}
if (!["epoch", "seconds"].includes(opts.x)) {
  console.error(`plots: --x must be 'epoch' or 'seconds', got '${opts.x}'`);
  process.exit(2);
}
if (!["best_score", "test_accuracy"].includes(opts.y)) {
  console.error(
    `plots: --y must be 'best_score' or 'test_accuracy', got '${opts.y}'`,
  );
  process.exit(2);
}

const convOpts: ConvergenceOptions = {
  xAxis: opts.x,
  yColumn: opts.y,
  logY: Boolean(opts.logY),
};

try {
  const svg = buildFigure(kind, opts.in, convOpts);
  if (svg.includes(">no data<")) {
    console.warn("plots: warning: inputs contained no data rows");
  }
  writeFigure(svg, opts.out);
  console.log(`wrote ${opts.out}`);
} catch (e) {
  if (e instanceof SchemaError || e instanceof InputError) {
    console.error(`plots: ${e.message}`);
    process.exit(1);
  }
  if ((e as NodeJS.ErrnoException).code === "ENOENT") {
    console.error(`plots: ${(e as Error).message}`);
    process.exit(1);
  }
  throw e;
}
