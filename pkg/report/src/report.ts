/**
 * Report assembly: read the raw and summary CSVs produced by the sampler
 * harness, render one boxplot panel per (N1, N2) cell and the interaction
 * and variance-gain tables.  A pure function of its inputs: rendering the
 * same CSVs twice produces byte-identical files.
 */

import * as fs from "fs";
import * as path from "path";

import { PanelSpec, renderPanel } from "./boxplot.js";
import { Record, readRecords } from "./csv.js";
import { gainTable, interactionTable } from "./tables.js";

export interface ReportSpec {
  rawPath: string;
  summaryPath: string;
  outDir: string;
  /** test function to plot (default: first seen in the raw CSV) */
  functionName?: string;
  /** overlay oracle lines from the summary CSV (default on) */
  overlayOracle?: boolean;
}

const RAW_REQUIRED = ["cell", "within", "across", "N1", "N2", "function", "estimate"];
const SUMMARY_REQUIRED = [
  "cell", "within", "across", "N1", "N2", "function",
  "variance", "mean_interactions",
];

export interface RenderedReport {
  panels: { cell: string; path: string; svg: string }[];
  tablesPath: string;
  tablesMarkdown: string;
}

function cellOrder(a: Record, b: Record): number {
  return Number(a.N1) - Number(b.N1) || Number(a.N2) - Number(b.N2);
}

export function buildPanels(
  raw: Record[],
  summary: Record[],
  functionName?: string,
  overlayOracle = true,
): PanelSpec[] {
  const fn = functionName ?? raw[0]?.function;
  const rows = raw.filter((r) => r.function === fn);
  const cells = new Map<string, Record[]>();
  for (const row of rows) {
    const members = cells.get(row.cell) ?? [];
    members.push(row);
    cells.set(row.cell, members);
  }
  const oracles = new Map<string, number>();
  if (overlayOracle) {
    for (const rec of summary) {
      if (rec.function === fn && rec.oracle !== "" && rec.oracle !== undefined) {
        oracles.set(rec.cell, Number(rec.oracle));
      }
    }
  }
  const specs: PanelSpec[] = [];
  const orderedCells = [...cells.entries()].sort((a, b) =>
    cellOrder(a[1][0], b[1][0]),
  );
  for (const [cell, members] of orderedCells) {
    const groups = new Map<string, { across: string; values: number[] }>();
    for (const row of members) {
      const label = `${row.within}/${row.across}`;
      const g = groups.get(label) ?? { across: row.across, values: [] };
      g.values.push(Number(row.estimate));
      groups.set(label, g);
    }
    specs.push({
      cell,
      groups: [...groups.entries()].map(([label, g]) => ({
        label,
        across: g.across,
        values: g.values,
      })),
      oracle: oracles.get(cell),
      title: `cell ${cell} - ${fn}`,
    });
  }
  return specs;
}

export function renderTablesMarkdown(summary: Record[]): string {
  const across = [...new Set(summary.map((r) => r.across))];
  const alts = across.filter((a) => a !== "bootstrap");
  const parts: string[] = ["# Island interaction and variance tables", ""];
  for (const alt of alts) {
    parts.push(`## ${alt} across`, "");
    parts.push(interactionTable(summary, alt));
    parts.push(gainTable(summary, alt));
  }
  if (alts.length === 0) {
    parts.push("*Only bootstrap-across runs present; nothing to compare.*", "");
  }
  return parts.join("\n");
}

export function renderReport(spec: ReportSpec): RenderedReport {
  const raw = readRecords(
    fs.readFileSync(spec.rawPath, "utf8"), spec.rawPath, RAW_REQUIRED,
  );
  const summary = readRecords(
    fs.readFileSync(spec.summaryPath, "utf8"), spec.summaryPath, SUMMARY_REQUIRED,
  );
  fs.mkdirSync(spec.outDir, { recursive: true });
  const panels = buildPanels(
    raw, summary, spec.functionName, spec.overlayOracle ?? true,
  ).map((panel) => {
    const svg = renderPanel(panel);
    const file = path.join(spec.outDir, `boxplot_${panel.cell}.svg`);
    fs.writeFileSync(file, svg, "utf8");
    return { cell: panel.cell, path: file, svg };
  });
  const tablesMarkdown = renderTablesMarkdown(summary);
  const tablesPath = path.join(spec.outDir, "tables.md");
  fs.writeFileSync(tablesPath, tablesMarkdown, "utf8");
  return { panels, tablesPath, tablesMarkdown };
}
