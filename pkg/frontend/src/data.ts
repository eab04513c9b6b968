// Typed loaders for the run-directory CSVs. Each loader requires exactly the
// documented columns; nothing here recomputes filter quantities.

import { join } from "node:path";
import { columnIndex, numberAt, readCsv } from "./csv.js";

export interface RunRow {
  run: number;
  vehicle: number;
  path: string;
  rmseGpassm: number;
  rmseCv: number;
}

export interface ErrorRow {
  run: number;
  vehicle: number;
  step: number;
  errGpassm: number;
  errCv: number;
}

export interface TrajectoryRow {
  run: number;
  vehicle: number;
  path: string;
  step: number;
  truth: [number, number];
  meas: [number, number];
  gpassm: [number, number];
  cv: [number, number];
}

export interface FieldRow {
  point: [number, number];
  mean: [number, number];
  variance: number;
}

export interface TruthAccelRow {
  path: string;
  pos: [number, number];
  acc: [number, number];
}

export function loadRuns(dir: string): RunRow[] {
  const table = readCsv(join(dir, "runs.csv"));
  const run = columnIndex(table, "run");
  const vehicle = columnIndex(table, "vehicle");
  const path = columnIndex(table, "path");
  const g = columnIndex(table, "rmse_gpassm");
  const c = columnIndex(table, "rmse_cv");
  return table.rows.map((row) => ({
    run: numberAt(table, row, run),
    vehicle: numberAt(table, row, vehicle),
    path: row[path],
    rmseGpassm: numberAt(table, row, g),
    rmseCv: numberAt(table, row, c),
  }));
}

export function loadErrors(dir: string): ErrorRow[] {
  const table = readCsv(join(dir, "errors.csv"));
  const run = columnIndex(table, "run");
  const vehicle = columnIndex(table, "vehicle");
  const step = columnIndex(table, "step");
  const g = columnIndex(table, "err_gpassm");
  const c = columnIndex(table, "err_cv");
  return table.rows.map((row) => ({
    run: numberAt(table, row, run),
    vehicle: numberAt(table, row, vehicle),
    step: numberAt(table, row, step),
    errGpassm: numberAt(table, row, g),
    errCv: numberAt(table, row, c),
  }));
}

export function loadTrajectories(dir: string): TrajectoryRow[] {
  const table = readCsv(join(dir, "trajectories.csv"));
  const run = columnIndex(table, "run");
  const vehicle = columnIndex(table, "vehicle");
  const path = columnIndex(table, "path");
  const step = columnIndex(table, "step");
  const cols = [
    "truth_x", "truth_y", "meas_x", "meas_y",
    "gpassm_x", "gpassm_y", "cv_x", "cv_y",
  ].map((name) => columnIndex(table, name));
  return table.rows.map((row) => ({
    run: numberAt(table, row, run),
    vehicle: numberAt(table, row, vehicle),
    path: row[path],
    step: numberAt(table, row, step),
    truth: [numberAt(table, row, cols[0]), numberAt(table, row, cols[1])],
    meas: [numberAt(table, row, cols[2]), numberAt(table, row, cols[3])],
    gpassm: [numberAt(table, row, cols[4]), numberAt(table, row, cols[5])],
    cv: [numberAt(table, row, cols[6]), numberAt(table, row, cols[7])],
  }));
}

export function loadField(dir: string): FieldRow[] {
  const table = readCsv(join(dir, "field.csv"));
  const x = columnIndex(table, "xi_x");
  const y = columnIndex(table, "xi_y");
  const ax = columnIndex(table, "mean_ax");
  const ay = columnIndex(table, "mean_ay");
  const v = columnIndex(table, "var");
  return table.rows.map((row) => ({
    point: [numberAt(table, row, x), numberAt(table, row, y)],
    mean: [numberAt(table, row, ax), numberAt(table, row, ay)],
    variance: numberAt(table, row, v),
  }));
}

export function loadTruthAccel(dir: string): TruthAccelRow[] {
  const table = readCsv(join(dir, "truth_accel.csv"));
  const path = columnIndex(table, "path");
  const px = columnIndex(table, "pos_x");
  const py = columnIndex(table, "pos_y");
  const ax = columnIndex(table, "acc_x");
  const ay = columnIndex(table, "acc_y");
  return table.rows.map((row) => ({
    path: row[path],
    pos: [numberAt(table, row, px), numberAt(table, row, py)],
    acc: [numberAt(table, row, ax), numberAt(table, row, ay)],
  }));
}
