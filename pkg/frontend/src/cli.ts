#!/usr/bin/env node
/** figkit command line: render one SVG figure from a plot-spec JSON file. */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { CsvError, readCsvFile } from "./csv.js";
import { loadPlotSpec, PlotSpecError } from "./plotspec.js";
import { PlotDataError, renderPlot } from "./svg.js";

export function renderSpecFile(specPath: string): string {
  const { spec, inputPath, outputPath } = loadPlotSpec(specPath);
  const table = readCsvFile(inputPath);
  const svg = renderPlot(table, spec, inputPath);
  mkdirSync(dirname(outputPath), { recursive: true });
  writeFileSync(outputPath, svg);
  return outputPath;
}

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .command("$0 <spec>", "Render the figure described by a plot-spec JSON file",
      (y) => y.positional("spec", { type: "string", demandOption: true }))
    .strict()
    .help()
    .parse();
  const specPath = String((args as Record<string, unknown>).spec);
  try {
    const out = renderSpecFile(specPath);
    console.log(out);
    return 0;
  } catch (err) {
    if (
      err instanceof PlotSpecError ||
      err instanceof CsvError ||
      err instanceof PlotDataError ||
      (err as NodeJS.ErrnoException).code === "ENOENT"
    ) {
      console.error(String((err as Error).message));
      return 2;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
