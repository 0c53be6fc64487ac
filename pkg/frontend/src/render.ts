/** SVG-to-file output: PNG via resvg, or raw SVG passthrough. */

import { writeFileSync } from "fs";
import { Resvg } from "@resvg/resvg-js";

export function writeFigure(svg: string, outPath: string): void {
  if (outPath.toLowerCase().endsWith(".svg")) {
    writeFileSync(outPath, svg);
    return;
  }
  const resvg = new Resvg(svg, {
    fitTo: { mode: "width", value: 1600 },
    background: "white",
  });
  writeFileSync(outPath, resvg.render().asPng());
}
