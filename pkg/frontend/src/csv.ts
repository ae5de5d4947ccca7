import * as fs from "node:fs";

/** Raised for any malformed or incomplete input table. */
export class CsvError extends Error {}

/** A parsed numeric table: column-major, all cells float64. */
export interface Table {
  path: string;
  columns: string[];
  rows: number;
  data: Map<string, Float64Array>;
}

// The producer writes floats with %.17g, so these literals can show up.
const SPECIAL: Record<string, number> = {
  inf: Infinity,
  "+inf": Infinity,
  "-inf": -Infinity,
  nan: NaN,
  "-nan": NaN,
};

function parseCell(cell: string, row: number, col: string, path: string): number {
  const s = cell.trim();
  const lower = s.toLowerCase();
  if (lower in SPECIAL) return SPECIAL[lower];
  if (s === "") {
    throw new CsvError(`${path}: empty cell in column "${col}" at data row ${row}`);
  }
  const v = Number(s);
  if (Number.isNaN(v)) {
    throw new CsvError(`${path}: non-numeric cell "${s}" in column "${col}" at data row ${row}`);
  }
  return v;
}

/** Parse CSV text with a header line and numeric body. */
export function parseCsv(text: string, path = "<memory>"): Table {
  const lines = text.split("\n");
  while (lines.length > 0 && lines[lines.length - 1].trim() === "") lines.pop();
  if (lines.length === 0) throw new CsvError(`${path}: empty file`);

  const columns = lines[0].split(",").map((c) => c.trim());
  if (columns.some((c) => c === "")) {
    throw new CsvError(`${path}: blank column name in header`);
  }
  const seen = new Set<string>();
  for (const c of columns) {
    if (seen.has(c)) throw new CsvError(`${path}: duplicate column "${c}"`);
    seen.add(c);
  }

  const rows = lines.length - 1;
  const data = new Map<string, Float64Array>();
  for (const c of columns) data.set(c, new Float64Array(rows));

  for (let r = 0; r < rows; r++) {
    const cells = lines[r + 1].split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(
        `${path}: data row ${r} has ${cells.length} cells, header has ${columns.length}`
      );
    }
    for (let j = 0; j < columns.length; j++) {
      data.get(columns[j])![r] = parseCell(cells[j], r, columns[j], path);
    }
  }
  return { path, columns, rows, data };
}

/** Read and parse a CSV file; missing files become CsvError. */
export function readTable(path: string): Table {
  let text: string;
  try {
    text = fs.readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvError(`missing or unreadable input file: ${path}`);
  }
  return parseCsv(text, path);
}

/** Fetch one column, or fail naming the file and the column. */
export function column(table: Table, name: string): Float64Array {
  const values = table.data.get(name);
  if (values === undefined) {
    throw new CsvError(`${table.path}: missing required column "${name}"`);
  }
  return values;
}

/** Assert every listed column is present before any work starts. */
export function requireColumns(table: Table, names: string[]): void {
  for (const n of names) column(table, n);
}
