#!/usr/bin/env node
/** `osmdkit-plot plot --spec spec.json`: render regret CSVs to an SVG chart. */
import { readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { renderChart, SeriesData } from "./render.js";
import { parsePlotSpec } from "./spec.js";
import { checkpointStats, parseTraceCsv, sharedGrid } from "./stats.js";

export function renderFromSpecFile(specPath: string): string {
  const doc = JSON.parse(readFileSync(specPath, "utf8"));
  const spec = parsePlotSpec(doc);
  const base = dirname(resolve(specPath));
  const series: SeriesData[] = spec.series.map((s) => ({
    label: s.label,
    color: s.color,
    stats: checkpointStats(parseTraceCsv(readFileSync(resolve(base, s.csv), "utf8"))),
  }));
  sharedGrid(series.map((s) => s.stats));
  const svg = renderChart(series, {
    title: spec.title,
    xScale: spec.xScale,
    bound: spec.bound,
  });
  const outPath = resolve(base, spec.output);
  writeFileSync(outPath, svg);
  return outPath;
}

export async function main(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .command("plot", "render a chart from a plot spec", (y) =>
      y.option("spec", { type: "string", demandOption: true }),
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false);
  let args;
  try {
    args = await parser.parse();
  } catch {
    return 2;
  }
  try {
    const out = renderFromSpecFile(args.spec as string);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

const isDirect =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirect) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
