/**
 * Minimal RFC-4180 CSV reader: quoted fields, escaped quotes, CRLF or LF
 * line endings.  Returns one record object per data row, keyed by the
 * header row.
 */

export class MissingColumn extends Error {
  constructor(column: string, path: string) {
    super(`column ${JSON.stringify(column)} missing from ${path}`);
    this.name = "MissingColumn";
  }
}

export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let row: string[] = [];
  let field = "";
  let inQuotes = false;
  let i = 0;
  const push = () => {
    row.push(field);
    field = "";
  };
  const endRow = () => {
    push();
    rows.push(row);
    row = [];
  };
  while (i < text.length) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
      continue;
    }
    if (ch === '"') {
      inQuotes = true;
      i += 1;
    } else if (ch === ",") {
      push();
      i += 1;
    } else if (ch === "\r" && text[i + 1] === "\n") {
      endRow();
      i += 2;
    } else if (ch === "\n") {
      endRow();
      i += 1;
    } else {
      field += ch;
      i += 1;
    }
  }
  if (field.length > 0 || row.length > 0) {
    endRow();
  }
  return rows;
}

export type Record = { [column: string]: string };

export function readRecords(
  text: string,
  path: string,
  required: string[] = [],
): Record[] {
  const rows = parseCsv(text);
  if (rows.length === 0) {
    return [];
  }
  const header = rows[0];
  for (const col of required) {
    if (!header.includes(col)) {
      throw new MissingColumn(col, path);
    }
  }
  return rows.slice(1).map((cells) => {
    const rec: Record = {};
    header.forEach((name, idx) => {
      rec[name] = cells[idx] ?? "";
    });
    return rec;
  });
}
