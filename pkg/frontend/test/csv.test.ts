import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { CsvError, columnIndex, numberAt, readCsv } from "../src/csv.js";
import { loadField, loadRuns } from "../src/data.js";

const FIXTURE = fileURLToPath(new URL("./fixtures/run", import.meta.url));

describe("readCsv", () => {
  it("parses the fixture runs table", () => {
    const table = readCsv(join(FIXTURE, "runs.csv"));
    expect(table.header).toEqual(["run", "vehicle", "path", "rmse_gpassm", "rmse_cv"]);
    expect(table.rows).toHaveLength(12);
  });

  it("names a missing file", () => {
    expect(() => readCsv(join(FIXTURE, "nope.csv"))).toThrowError(/nope\.csv/);
  });

  it("rejects a ragged row with its line number", () => {
    const dir = mkdtempSync(join(tmpdir(), "csv-"));
    writeFileSync(join(dir, "bad.csv"), "a,b\n1,2\n3\n");
    expect(() => readCsv(join(dir, "bad.csv"))).toThrowError(/bad\.csv row 2/);
  });

  it("names a missing column", () => {
    const table = readCsv(join(FIXTURE, "runs.csv"));
    expect(() => columnIndex(table, "rmse_ekf")).toThrowError(
      /runs\.csv: missing required column "rmse_ekf"/,
    );
  });

  it("names the column holding a non-numeric cell", () => {
    const dir = mkdtempSync(join(tmpdir(), "csv-"));
    writeFileSync(join(dir, "vals.csv"), "x,y\n1,oops\n");
    const table = readCsv(join(dir, "vals.csv"));
    const col = columnIndex(table, "y");
    expect(() => numberAt(table, table.rows[0], col)).toThrowError(/column "y"/);
    expect(numberAt(table, table.rows[0], 0)).toBe(1);
  });
});

describe("typed loaders", () => {
  it("loads runs with both RMSE series", () => {
    const rows = loadRuns(FIXTURE);
    expect(rows).toHaveLength(12);
    for (const row of rows) {
      expect(["left", "right"]).toContain(row.path);
      expect(row.rmseGpassm).toBeGreaterThan(0);
      expect(row.rmseCv).toBeGreaterThan(0);
    }
  });

  it("loads one field row per inducing point", () => {
    const rows = loadField(FIXTURE);
    expect(rows).toHaveLength(310);
  });

  it("fails fast when a required column was dropped", () => {
    const dir = mkdtempSync(join(tmpdir(), "csv-"));
    const lines = readFileSync(join(FIXTURE, "runs.csv"), "utf-8").split("\n");
    const mangled = lines
      .filter((line) => line.length > 0)
      .map((line) => line.split(",").slice(0, 4).join(","))
      .join("\n");
    writeFileSync(join(dir, "runs.csv"), mangled + "\n");
    expect(() => loadRuns(dir)).toThrowError(/missing required column "rmse_cv"/);
    expect(() => loadRuns(dir)).toThrowError(CsvError);
  });
});
