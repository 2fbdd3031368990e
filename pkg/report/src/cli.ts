#!/usr/bin/env node
/** ipf-report --raw <csv> --summary <csv> --out <dir> [--function name] */

import { renderReport } from "./report.js";

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument ${JSON.stringify(arg)}`);
    }
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`missing value for ${arg}`);
    }
    out.set(arg.slice(2), value);
    i += 1;
  }
  return out;
}

function main(): number {
  let args: Map<string, string>;
  try {
    args = parseArgs(process.argv.slice(2));
    for (const required of ["raw", "summary", "out"]) {
      if (!args.has(required)) {
        throw new Error(`--${required} is required`);
      }
    }
  } catch (err) {
    console.error(`ipf-report: ${(err as Error).message}`);
    console.error(
      "usage: ipf-report --raw raw.csv --summary summary.csv --out dir " +
        "[--function name]",
    );
    return 2;
  }
  try {
    const rendered = renderReport({
      rawPath: args.get("raw")!,
      summaryPath: args.get("summary")!,
      outDir: args.get("out")!,
      functionName: args.get("function"),
    });
    for (const panel of rendered.panels) {
      console.log(panel.path);
    }
    console.log(rendered.tablesPath);
    return 0;
  } catch (err) {
    console.error(`ipf-report: ${(err as Error).name}: ${(err as Error).message}`);
    return 1;
  }
}

process.exit(main());
