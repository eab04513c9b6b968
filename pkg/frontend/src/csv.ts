// Strict CSV access for the simulation exports. The files are plain
// comma-separated numerics and path names, never quoted, so a split-based
// parser is enough; what matters is failing fast with the offending file and
// column in the message.

import { readFileSync } from "node:fs";
import { basename } from "node:path";

export class CsvError extends Error {}

export interface CsvTable {
  /** File the table came from, for error messages. */
  file: string;
  header: string[];
  rows: string[][];
}

export function readCsv(filePath: string): CsvTable {
  let raw: string;
  try {
    raw = readFileSync(filePath, "utf-8");
  } catch {
    throw new CsvError(`missing or unreadable CSV file: ${filePath}`);
  }
  const lines = raw.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError(`empty CSV file: ${filePath}`);
  }
  const header = lines[0].split(",");
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new CsvError(
        `${basename(filePath)} row ${i}: expected ${header.length} cells, got ${cells.length}`,
      );
    }
    rows.push(cells);
  }
  return { file: basename(filePath), header, rows };
}

/** Index of a required column, or a CsvError naming it. */
export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(`${table.file}: missing required column "${name}"`);
  }
  return idx;
}

/** Parse one cell as a finite number, or fail naming the column. */
export function numberAt(table: CsvTable, row: string[], col: number): number {
  const value = Number(row[col]);
  if (!Number.isFinite(value)) {
    throw new CsvError(
      `${table.file}: column "${table.header[col]}" holds non-numeric value "${row[col]}"`,
    );
  }
  return value;
}
