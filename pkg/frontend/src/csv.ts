/** Minimal CSV reader for the rdlab bundle schemas (no quoting in our
 * exports; reject anything that looks quoted rather than mis-parse it). */

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export class CsvError extends Error {
  constructor(public file: string, message: string) {
    super(`${file}: ${message}`);
  }
}

export function parseCsv(text: string, file = "<csv>"): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    return { columns: [], rows: [] };
  }
  if (text.includes('"')) {
    throw new CsvError(file, "quoted fields are not part of the bundle schema");
  }
  const columns = lines[0].split(",");
  if (new Set(columns).size !== columns.length) {
    throw new CsvError(file, "duplicate column names");
  }
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new CsvError(file, `row ${i + 1} has ${parts.length} fields, expected ${columns.length}`);
    }
    const row: Record<string, string> = {};
    columns.forEach((c, j) => (row[c] = parts[j]));
    rows.push(row);
  }
  return { columns, rows };
}

export function numeric(table: Table, column: string, file = "<csv>"): number[] {
  return table.rows.map((r, i) => {
    const v = Number(r[column]);
    if (!Number.isFinite(v)) {
      throw new CsvError(file, `row ${i + 2}: column ${column} is not numeric: ${r[column]}`);
    }
    return v;
  });
}
