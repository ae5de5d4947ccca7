#!/usr/bin/env node
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { CsvError } from "./csv.js";
import { isFigureId, render, FIGURE_INPUTS } from "./figures.js";

const USAGE = `usage: codedas-report --figure <id> --in <dir> --out <file.svg> [--fmax <hz>]

ids: ${Object.keys(FIGURE_INPUTS).join(", ")}
--fmax crops the frequency axis (fig3d only).`;

/** Parse argv and render; returns the process exit code. */
export function runCli(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        figure: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
        fmax: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
      allowPositionals: false,
    });
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 2;
  }
  const v = parsed.values;
  if (v.help) {
    console.log(USAGE);
    return 0;
  }
  if (!v.figure || !v.in || !v.out) {
    console.error("error: --figure, --in and --out are all required");
    console.error(USAGE);
    return 2;
  }
  if (!isFigureId(v.figure)) {
    console.error(`error: unknown figure "${v.figure}" (know: ${Object.keys(FIGURE_INPUTS).join(", ")})`);
    return 2;
  }
  let fmaxHz: number | undefined;
  if (v.fmax !== undefined) {
    fmaxHz = Number(v.fmax);
    if (!Number.isFinite(fmaxHz) || fmaxHz <= 0) {
      console.error(`error: --fmax must be a positive number, got "${v.fmax}"`);
      return 2;
    }
  }

  try {
    render({ figure: v.figure, inputDir: v.in, output: v.out, options: { fmaxHz } });
  } catch (err) {
    if (err instanceof CsvError || err instanceof Error) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  console.log(`wrote ${v.out}`);
  return 0;
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  process.exit(runCli(process.argv.slice(2)));
}
