/**
 * Markdown tables from the summary CSV: island interaction counts per
 * across scheme (each alternative shown next to the bootstrap reference,
 * N1 rows by N2 columns) and variance-gain percentages over the double
 * bootstrap.
 */

import { Record } from "./csv.js";

export class MissingCell extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "MissingCell";
  }
}

interface Key {
  n1: number;
  n2: number;
}

function cellKey(rec: Record): Key {
  return { n1: Number(rec.N1), n2: Number(rec.N2) };
}

function sortedUnique(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

function formatCount(x: number): string {
  return Number.isInteger(x) ? x.toString() : x.toFixed(1);
}

/** Rows for one across scheme keyed "n1,n2" -> mean interaction count. */
function interactionMap(records: Record[], across: string): Map<string, number> {
  const out = new Map<string, number>();
  for (const rec of records) {
    if (rec.across !== across) continue;
    const k = cellKey(rec);
    out.set(`${k.n1},${k.n2}`, Number(rec.mean_interactions));
  }
  return out;
}

export function interactionTable(
  records: Record[],
  altAcross: string,
  baseline = "bootstrap",
): string {
  const alt = interactionMap(records, altAcross);
  const base = interactionMap(records, baseline);
  if (alt.size === 0) {
    return (
      `*No \`${altAcross}\`-across runs in the summary; ` +
      "interaction table omitted.*\n"
    );
  }
  const n1s = sortedUnique(
    records.filter((r) => r.across === altAcross).map((r) => Number(r.N1)),
  );
  const n2s = sortedUnique(
    records.filter((r) => r.across === altAcross).map((r) => Number(r.N2)),
  );
  const lines: string[] = [];
  lines.push(
    `Island interaction count, \`${altAcross}\` vs \`${baseline}\` across ` +
      "(rows N1, columns N2):",
    "",
  );
  lines.push(
    "| N1 \\ N2 | " + n2s.map((n2) => `${n2} |`).join(" "),
    "|---:|" + n2s.map(() => "---:|").join(""),
  );
  for (const n1 of n1s) {
    const cells = n2s.map((n2) => {
      const key = `${n1},${n2}`;
      const a = alt.get(key);
      if (a === undefined) {
        return "- |"; // hole in a non-rectangular grid
      }
      const b = base.get(key);
      if (b === undefined) {
        throw new MissingCell(
          `cell N1=${n1}, N2=${n2} missing for ${baseline}`,
        );
      }
      return `${formatCount(a)} \\| ${formatCount(b)} |`;
    });
    lines.push(`| ${n1} | ` + cells.join(" "));
  }
  lines.push("");
  return lines.join("\n");
}

export interface GainEntry {
  n1: number;
  n2: number;
  across: string;
  gainPercent: number;
}

export function varianceGains(
  records: Record[],
  altAcross: string,
  baseline = "bootstrap",
): GainEntry[] {
  const base = new Map<string, number>();
  for (const rec of records) {
    if (rec.across === baseline) {
      const k = cellKey(rec);
      base.set(`${k.n1},${k.n2}`, Number(rec.variance));
    }
  }
  const out: GainEntry[] = [];
  for (const rec of records) {
    if (rec.across !== altAcross) continue;
    const k = cellKey(rec);
    const b = base.get(`${k.n1},${k.n2}`);
    if (b === undefined) {
      throw new MissingCell(
        `no ${baseline}-across variance for cell N1=${k.n1}, N2=${k.n2}`,
      );
    }
    out.push({
      n1: k.n1,
      n2: k.n2,
      across: altAcross,
      gainPercent: b > 0 ? 100 * (1 - Number(rec.variance) / b) : 0,
    });
  }
  return out.sort((a, b) => a.n1 - b.n1 || a.n2 - b.n2);
}

export function gainTable(
  records: Record[],
  altAcross: string,
  baseline = "bootstrap",
): string {
  const gains = varianceGains(records, altAcross, baseline);
  if (gains.length === 0) {
    return (
      `*No \`${altAcross}\`-across runs in the summary; ` +
      "variance-gain table omitted.*\n"
    );
  }
  const n1s = sortedUnique(gains.map((g) => g.n1));
  const n2s = sortedUnique(gains.map((g) => g.n2));
  const byKey = new Map(gains.map((g) => [`${g.n1},${g.n2}`, g.gainPercent]));
  const lines: string[] = [];
  lines.push(
    `Variance gain of \`${altAcross}\` over \`${baseline}\` across, percent ` +
      "(rows N1, columns N2):",
    "",
  );
  lines.push(
    "| N1 \\ N2 | " + n2s.map((n2) => `${n2} |`).join(" "),
    "|---:|" + n2s.map(() => "---:|").join(""),
  );
  for (const n1 of n1s) {
    const cells = n2s.map((n2) => {
      const v = byKey.get(`${n1},${n2}`);
      return v === undefined ? "- |" : `${v.toFixed(1)} |`;
    });
    lines.push(`| ${n1} | ` + cells.join(" "));
  }
  lines.push("");
  return lines.join("\n");
}
