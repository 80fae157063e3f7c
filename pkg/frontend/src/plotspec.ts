/** Plot description files: schema and loading. */

import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { z } from "zod";

const seriesSchema = z.object({
  column: z.string().min(1),
  label: z.string().optional(),
});

export const plotSpecSchema = z.object({
  title: z.string().optional(),
  /** CSV artifact, relative to the spec file. */
  input: z.string().min(1),
  /** SVG destination, relative to the spec file. */
  output: z.string().min(1),
  x: z.object({
    column: z.string().min(1),
    label: z.string().optional(),
  }),
  y: z
    .object({
      label: z.string().optional(),
      scale: z.enum(["linear", "log"]).default("linear"),
    })
    .default({}),
  series: z.array(seriesSchema).min(1),
  width: z.number().int().min(160).default(640),
  height: z.number().int().min(120).default(420),
});

export type PlotSpec = z.infer<typeof plotSpecSchema>;

export class PlotSpecError extends Error {}

/** Parse and validate a spec; path fields stay relative to `baseDir`. */
export function parsePlotSpec(jsonText: string, source = "<spec>"): PlotSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(jsonText);
  } catch (err) {
    throw new PlotSpecError(`${source}: not valid JSON: ${(err as Error).message}`);
  }
  const result = plotSpecSchema.safeParse(raw);
  if (!result.success) {
    const issues = result.error.issues
      .map((i) => `  ${i.path.join(".") || "(root)"}: ${i.message}`)
      .join("\n");
    throw new PlotSpecError(`${source}: invalid plot spec:\n${issues}`);
  }
  return result.data;
}

export interface LoadedPlotSpec {
  spec: PlotSpec;
  /** Absolute path of the CSV input. */
  inputPath: string;
  /** Absolute path of the SVG output. */
  outputPath: string;
}

export function loadPlotSpec(path: string): LoadedPlotSpec {
  const spec = parsePlotSpec(readFileSync(path, "utf8"), path);
  const base = dirname(resolve(path));
  return {
    spec,
    inputPath: resolve(base, spec.input),
    outputPath: resolve(base, spec.output),
  };
}
