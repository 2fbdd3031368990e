/**
 * Grouped boxplot panels as standalone SVG strings.
 *
 * One panel per (N1, N2) cell; one box per scheme pairing, ordered the way
 * the island-interaction comparison figures enumerate them:
 * (1) independent, (2) ESS, (3) bootstrap, (4) sup-norm epsilon,
 * (5) empirical epsilon.  An oracle value, when given, is drawn as a
 * dashed horizontal line.
 */

import { BoxStats, boxStats } from "./stats.js";

export class EmptyGroup extends Error {
  constructor(cell: string, scheme: string, count: number) {
    super(
      `group ${scheme} in cell ${cell} has ${count} replication(s); ` +
        "boxplots need at least 2",
    );
    this.name = "EmptyGroup";
  }
}

export const ACROSS_ORDER = [
  "independent",
  "ess",
  "bootstrap",
  "epsilon-supnorm",
  "epsilon-empirical",
  "epsilon-fixed",
];

export interface PanelGroup {
  label: string; // "within/across"
  across: string;
  values: number[];
}

export interface PanelSpec {
  cell: string;
  groups: PanelGroup[];
  oracle?: number;
  title?: string;
}

export function schemeSortKey(across: string, label: string): string {
  const idx = ACROSS_ORDER.indexOf(across);
  return `${idx >= 0 ? idx : ACROSS_ORDER.length}:${label}`;
}

const WIDTH_PER_BOX = 110;
const MARGIN = { top: 42, right: 24, bottom: 64, left: 76 };
const PLOT_HEIGHT = 360;
const BOX_WIDTH = 46;

function fmt(x: number): string {
  return Number(x.toPrecision(6)).toString();
}

function niceTicks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / (n * step);
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const start = Math.ceil(lo / s) * s;
  const ticks: number[] = [];
  for (let v = start; v <= hi + s * 1e-9; v += s) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function renderPanel(spec: PanelSpec): string {
  const groups = [...spec.groups].sort((a, b) =>
    schemeSortKey(a.across, a.label).localeCompare(schemeSortKey(b.across, b.label)),
  );
  for (const g of groups) {
    if (g.values.length < 2) {
      throw new EmptyGroup(spec.cell, g.label, g.values.length);
    }
  }
  const stats = groups.map((g) => boxStats(g.values));
  let lo = Math.min(
    ...stats.map((s) => Math.min(s.whiskerLow, ...s.outliers, s.q1)),
  );
  let hi = Math.max(
    ...stats.map((s) => Math.max(s.whiskerHigh, ...s.outliers, s.q3)),
  );
  if (spec.oracle !== undefined) {
    lo = Math.min(lo, spec.oracle);
    hi = Math.max(hi, spec.oracle);
  }
  if (hi === lo) {
    hi = lo + 1;
    lo = lo - 1;
  }
  const pad = 0.06 * (hi - lo);
  lo -= pad;
  hi += pad;

  const width = MARGIN.left + MARGIN.right + groups.length * WIDTH_PER_BOX;
  const height = MARGIN.top + MARGIN.bottom + PLOT_HEIGHT;
  const y = (v: number) =>
    MARGIN.top + PLOT_HEIGHT * (1 - (v - lo) / (hi - lo));
  const xCenter = (i: number) => MARGIN.left + (i + 0.5) * WIDTH_PER_BOX;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(
    `<rect x="0" y="0" width="${width}" height="${height}" fill="white"/>`,
  );
  const title = spec.title ?? `cell ${spec.cell}`;
  parts.push(
    `<text x="${width / 2}" y="22" text-anchor="middle" font-size="15">${title}</text>`,
  );

  for (const tick of niceTicks(lo, hi)) {
    const ty = y(tick);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${fmt(ty)}" x2="${width - MARGIN.right}" ` +
        `y2="${fmt(ty)}" stroke="#dddddd"/>`,
      `<text x="${MARGIN.left - 9}" y="${fmt(ty + 4)}" text-anchor="end">${fmt(tick)}</text>`,
    );
  }
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${MARGIN.top + PLOT_HEIGHT}" stroke="black"/>`,
  );

  if (spec.oracle !== undefined) {
    const oy = y(spec.oracle);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(oy)}" x2="${width - MARGIN.right}" ` +
        `y2="${fmt(oy)}" stroke="#c0392b" stroke-dasharray="6 4" class="oracle"/>`,
    );
  }

  groups.forEach((g, i) => {
    const s = stats[i];
    const cx = xCenter(i);
    const left = cx - BOX_WIDTH / 2;
    parts.push(`<g class="box" data-scheme="${g.label}">`);
    parts.push(
      `<line x1="${cx}" y1="${fmt(y(s.whiskerLow))}" x2="${cx}" ` +
        `y2="${fmt(y(s.q1))}" stroke="black"/>`,
      `<line x1="${cx}" y1="${fmt(y(s.q3))}" x2="${cx}" ` +
        `y2="${fmt(y(s.whiskerHigh))}" stroke="black"/>`,
      `<line x1="${cx - 14}" y1="${fmt(y(s.whiskerLow))}" x2="${cx + 14}" ` +
        `y2="${fmt(y(s.whiskerLow))}" stroke="black"/>`,
      `<line x1="${cx - 14}" y1="${fmt(y(s.whiskerHigh))}" x2="${cx + 14}" ` +
        `y2="${fmt(y(s.whiskerHigh))}" stroke="black"/>`,
      `<rect x="${left}" y="${fmt(y(s.q3))}" width="${BOX_WIDTH}" ` +
        `height="${fmt(y(s.q1) - y(s.q3))}" fill="#9ecae1" stroke="black"/>`,
      `<line x1="${left}" y1="${fmt(y(s.median))}" x2="${left + BOX_WIDTH}" ` +
        `y2="${fmt(y(s.median))}" stroke="black" stroke-width="2"/>`,
    );
    for (const v of s.outliers) {
      parts.push(
        `<circle cx="${cx}" cy="${fmt(y(v))}" r="2.2" fill="none" stroke="#555555"/>`,
      );
    }
    parts.push(
      `<text x="${cx}" y="${MARGIN.top + PLOT_HEIGHT + 20}" text-anchor="middle">(${i + 1})</text>`,
    );
    parts.push("</g>");
  });

  const legend = groups.map((g, i) => `(${i + 1}) ${g.label}`).join("   ");
  parts.push(
    `<text x="${width / 2}" y="${height - 18}" text-anchor="middle" ` +
      `font-size="11">${legend}</text>`,
  );
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
