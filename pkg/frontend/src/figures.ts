// The four figures rendered from a completed run directory. Everything is
// drawn from the exported CSVs as-is; no filter quantity is recomputed here.

import { mkdirSync, writeFileSync } from "node:fs";
import { join, resolve } from "node:path";
import {
  ErrorRow, FieldRow, RunRow, TrajectoryRow, TruthAccelRow,
  loadErrors, loadField, loadRuns, loadTrajectories, loadTruthAccel,
} from "./data.js";
import {
  Extent, Scale, arrow, axes, circle, document, extentOf, legend, line,
  polyline, text,
} from "./svg.js";

const GPASSM_COLOR = "#1f77b4";
const CV_COLOR = "#d97706";
const TRUTH_COLOR = "#111111";
const MEAS_COLOR = "#999999";
const TRUTH_ARROW_COLOR = "#15803d";

export const FIGURE_NAMES = ["trajectories", "rmse", "errors", "field"] as const;
export type FigureName = (typeof FIGURE_NAMES)[number];

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/** Equal-aspect world scales inside the given pixel box. */
function worldScales(
  xs: number[], ys: number[], box: [number, number, number, number],
): { sx: Scale; sy: Scale } {
  const [left, top, right, bottom] = box;
  const xExt = extentOf(xs);
  const yExt = extentOf(ys);
  const pxPerX = (right - left) / (xExt.max - xExt.min);
  const pxPerY = (bottom - top) / (yExt.max - yExt.min);
  const scale = Math.min(pxPerX, pxPerY);
  const grow = (ext: Extent, px: number): Extent => {
    const extra = (px / scale - (ext.max - ext.min)) / 2;
    return { min: ext.min - extra, max: ext.max + extra };
  };
  return {
    sx: new Scale(grow(xExt, right - left), [left, right]),
    sy: new Scale(grow(yExt, bottom - top), [top, bottom], true),
  };
}

function groupBy<T>(rows: T[], key: (row: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = out.get(k);
    if (bucket) bucket.push(row);
    else out.set(k, [row]);
  }
  return out;
}

/** First and last vehicle number for each (path) within each run. */
function cohortVehicles(runs: RunRow[]): Map<string, { first: Set<string>; last: Set<string> }> {
  const byPath = new Map<string, { first: Set<string>; last: Set<string> }>();
  const perRunPath = groupBy(runs, (r) => `${r.run}:${r.path}`);
  for (const [key, rows] of perRunPath) {
    const path = key.split(":")[1];
    let lo = rows[0];
    let hi = rows[0];
    for (const r of rows) {
      if (r.vehicle < lo.vehicle) lo = r;
      if (r.vehicle > hi.vehicle) hi = r;
    }
    let entry = byPath.get(path);
    if (!entry) {
      entry = { first: new Set(), last: new Set() };
      byPath.set(path, entry);
    }
    entry.first.add(`${lo.run}:${lo.vehicle}`);
    entry.last.add(`${hi.run}:${hi.vehicle}`);
  }
  return byPath;
}

// ---------------------------------------------------------------------------
// Figures
// ---------------------------------------------------------------------------

/** True vs estimated trajectories for the first and last vehicle per route. */
export function figureTrajectories(rows: TrajectoryRow[]): string {
  const run0 = Math.min(...rows.map((r) => r.run));
  const inRun = rows.filter((r) => r.run === run0);
  const byVehicle = groupBy(inRun, (r) => `${r.path}:${r.vehicle}`);

  const picks: Array<{ rows: TrajectoryRow[]; late: boolean }> = [];
  for (const path of new Set(inRun.map((r) => r.path))) {
    const vehicles = [...new Set(inRun.filter((r) => r.path === path).map((r) => r.vehicle))];
    vehicles.sort((a, b) => a - b);
    const first = byVehicle.get(`${path}:${vehicles[0]}`)!;
    const last = byVehicle.get(`${path}:${vehicles[vehicles.length - 1]}`)!;
    picks.push({ rows: first, late: false });
    if (vehicles.length > 1) picks.push({ rows: last, late: true });
  }

  const xs: number[] = [];
  const ys: number[] = [];
  for (const pick of picks) {
    for (const r of pick.rows) {
      xs.push(r.truth[0], r.gpassm[0], r.cv[0], r.meas[0]);
      ys.push(r.truth[1], r.gpassm[1], r.cv[1], r.meas[1]);
    }
  }
  const box: [number, number, number, number] = [60, 40, 560, 540];
  const { sx, sy } = worldScales(xs, ys, box);
  const project = (p: [number, number]): [number, number] => [sx.apply(p[0]), sy.apply(p[1])];

  const parts: string[] = [];
  for (const pick of picks) {
    const ordered = [...pick.rows].sort((a, b) => a.step - b.step);
    const opacity = pick.late ? "1" : "0.35";
    if (pick.late) {
      for (const r of ordered) {
        const [mx, my] = project(r.meas);
        parts.push(circle(mx, my, 1.5, `fill="${MEAS_COLOR}" fill-opacity="0.6"`));
      }
    }
    parts.push(polyline(ordered.map((r) => project(r.truth)),
      `stroke="${TRUTH_COLOR}" stroke-width="1.2" stroke-opacity="${opacity}"`));
    parts.push(polyline(ordered.map((r) => project(r.cv)),
      `stroke="${CV_COLOR}" stroke-width="1.6" stroke-dasharray="5 3" stroke-opacity="${opacity}"`));
    parts.push(polyline(ordered.map((r) => project(r.gpassm)),
      `stroke="${GPASSM_COLOR}" stroke-width="1.6" stroke-opacity="${opacity}"`));
  }
  parts.push(axes(sx, sy, { xLabel: "x [m]", yLabel: "y [m]", plotBox: box }));
  parts.push(legend(box[0] + 10, box[1] + 14, [
    { label: "truth", color: TRUTH_COLOR },
    { label: "learned-field estimate", color: GPASSM_COLOR },
    { label: "CV estimate", color: CV_COLOR, dash: "5 3" },
    { label: "faint: first vehicle, solid: last", color: "#aaaaaa" },
  ]));
  return document(620, 590, `Trajectories, run ${run0} (first vs last vehicle per route)`,
    parts.join("\n"));
}

/** Per-vehicle RMSE across runs: every run as a dot, the mean as a line. */
export function figureRmse(rows: RunRow[]): string {
  const vehicles = [...new Set(rows.map((r) => r.vehicle))].sort((a, b) => a - b);
  const box: [number, number, number, number] = [60, 40, 560, 380];
  const sx = new Scale(extentOf(vehicles.map((v) => v)), [box[0], box[2]]);
  const allRmse = rows.flatMap((r) => [r.rmseGpassm, r.rmseCv]);
  const sy = new Scale({ min: 0, max: extentOf(allRmse, 0.08).max }, [box[1], box[3]], true);

  const parts: string[] = [];
  for (const r of rows) {
    parts.push(circle(sx.apply(r.vehicle), sy.apply(r.rmseGpassm), 2,
      `fill="${GPASSM_COLOR}" fill-opacity="0.25"`));
    parts.push(circle(sx.apply(r.vehicle), sy.apply(r.rmseCv), 2,
      `fill="${CV_COLOR}" fill-opacity="0.25"`));
  }
  const meanSeries = (pick: (r: RunRow) => number): Array<[number, number]> =>
    vehicles.map((v) => {
      const sample = rows.filter((r) => r.vehicle === v);
      const mean = sample.reduce((acc, r) => acc + pick(r), 0) / sample.length;
      return [sx.apply(v), sy.apply(mean)];
    });
  parts.push(polyline(meanSeries((r) => r.rmseCv), `stroke="${CV_COLOR}" stroke-width="2"`));
  parts.push(polyline(meanSeries((r) => r.rmseGpassm), `stroke="${GPASSM_COLOR}" stroke-width="2"`));
  parts.push(axes(sx, sy, { xLabel: "vehicle", yLabel: "position RMSE [m]", plotBox: box }));
  parts.push(legend(box[2] - 150, box[1] + 14, [
    { label: "learned field (mean)", color: GPASSM_COLOR },
    { label: "CV baseline (mean)", color: CV_COLOR },
  ]));
  return document(620, 430, "Per-vehicle RMSE across runs", parts.join("\n"));
}

/** Mean error over time for the first and last vehicle of each route. */
export function figureErrors(errors: ErrorRow[], runs: RunRow[]): string {
  const cohorts = cohortVehicles(runs);
  const byRecord = groupBy(errors, (e) => `${e.run}:${e.vehicle}`);

  interface Series {
    label: string;
    color: string;
    dash?: string;
    opacity: string;
    mean: Array<[number, number]>; // step, value
  }
  const series: Series[] = [];
  const paths = [...cohorts.keys()].sort();
  for (const path of paths) {
    const entry = cohorts.get(path)!;
    for (const [cohortName, keys] of [["first", entry.first], ["last", entry.last]] as const) {
      for (const [who, pick, color, dash] of [
        ["field", (e: ErrorRow) => e.errGpassm, GPASSM_COLOR, undefined],
        ["CV", (e: ErrorRow) => e.errCv, CV_COLOR, "5 3"],
      ] as const) {
        const sums = new Map<number, { total: number; count: number }>();
        for (const key of keys) {
          for (const e of byRecord.get(key) ?? []) {
            const acc = sums.get(e.step) ?? { total: 0, count: 0 };
            acc.total += pick(e);
            acc.count += 1;
            sums.set(e.step, acc);
          }
        }
        const mean = [...sums.entries()]
          .sort((a, b) => a[0] - b[0])
          .map(([step, acc]): [number, number] => [step, acc.total / acc.count]);
        if (mean.length > 0) {
          series.push({
            label: `${path} ${cohortName} (${who})`,
            color, dash,
            opacity: cohortName === "first" ? "0.4" : "1",
            mean,
          });
        }
      }
    }
  }

  const panelWidth = 290;
  const parts: string[] = [];
  const allValues = series.flatMap((s) => s.mean.map(([, v]) => v));
  const allSteps = series.flatMap((s) => s.mean.map(([step]) => step));
  const yExt = { min: 0, max: extentOf(allValues, 0.08).max };
  paths.forEach((path, i) => {
    const left = 60 + i * (panelWidth + 50);
    const box: [number, number, number, number] = [left, 50, left + panelWidth, 360];
    const sx = new Scale(extentOf(allSteps, 0.02), [box[0], box[2]]);
    const sy = new Scale(yExt, [box[1], box[3]], true);
    for (const s of series) {
      if (!s.label.startsWith(path)) continue;
      const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
      parts.push(polyline(s.mean.map(([step, v]) => [sx.apply(step), sy.apply(v)]),
        `stroke="${s.color}" stroke-width="1.8" stroke-opacity="${s.opacity}"${dash}`));
    }
    parts.push(axes(sx, sy, { xLabel: "time step", yLabel: i === 0 ? "position error [m]" : "", plotBox: box }));
    parts.push(text((box[0] + box[2]) / 2, 42, `${path} route`,
      'font-size="11" text-anchor="middle" fill="#222"'));
  });
  parts.push(legend(62, 385, [
    { label: "learned field, last vehicle", color: GPASSM_COLOR },
    { label: "CV baseline, last vehicle", color: CV_COLOR, dash: "5 3" },
    { label: "faint lines: first vehicle", color: "#aaaaaa" },
  ]));
  return document(60 + paths.length * (panelWidth + 50) + 10, 440,
    "Error over time: first vs last vehicle per route (mean across runs)",
    parts.join("\n"));
}

/** Learned acceleration field as a quiver, true accelerations overlaid. */
export function figureField(field: FieldRow[], truth: TruthAccelRow[]): string {
  const xs = field.map((f) => f.point[0]);
  const ys = field.map((f) => f.point[1]);
  const box: [number, number, number, number] = [60, 40, 620, 560];
  const { sx, sy } = worldScales(xs, ys, box);

  // arrows share one scale chosen so the longest estimate spans ~ one grid cell
  let spacing = Infinity;
  for (let i = 1; i < field.length; i++) {
    const d = Math.hypot(field[i].point[0] - field[0].point[0],
      field[i].point[1] - field[0].point[1]);
    if (d > 1e-9 && d < spacing) spacing = d;
  }
  if (!Number.isFinite(spacing)) spacing = 1;
  const maxMag = Math.max(
    ...field.map((f) => Math.hypot(f.mean[0], f.mean[1])),
    ...truth.map((t) => Math.hypot(t.acc[0], t.acc[1])),
    1e-12,
  );
  const arrowScale = (0.9 * spacing) / maxMag;

  const parts: string[] = [];
  for (const f of field) {
    parts.push(circle(sx.apply(f.point[0]), sy.apply(f.point[1]), 1, 'fill="#cccccc"'));
  }
  for (const t of truth) {
    if (Math.hypot(t.acc[0], t.acc[1]) < 1e-12) continue;
    parts.push(arrow(
      sx.apply(t.pos[0]), sy.apply(t.pos[1]),
      sx.apply(t.pos[0] + t.acc[0] * arrowScale), sy.apply(t.pos[1] + t.acc[1] * arrowScale),
      "truth-arrow", TRUTH_ARROW_COLOR, 1.6,
    ));
  }
  // one arrow per inducing point, zero-length estimates included
  for (const f of field) {
    parts.push(arrow(
      sx.apply(f.point[0]), sy.apply(f.point[1]),
      sx.apply(f.point[0] + f.mean[0] * arrowScale), sy.apply(f.point[1] + f.mean[1] * arrowScale),
      "arrow", GPASSM_COLOR, 1,
    ));
  }
  parts.push(axes(sx, sy, { xLabel: "x [m]", yLabel: "y [m]", plotBox: box }));
  parts.push(legend(box[0] + 10, box[1] + 14, [
    { label: "estimated acceleration", color: GPASSM_COLOR },
    { label: "true acceleration", color: TRUTH_ARROW_COLOR },
  ]));
  return document(680, 610, `Learned acceleration field (${field.length} inducing points)`,
    parts.join("\n"));
}

// ---------------------------------------------------------------------------
// Batch entry point
// ---------------------------------------------------------------------------

export interface PlotOptions {
  figures?: string[];
  warn?: (message: string) => void;
}

/** Render the selected figures from a run directory; returns written paths. */
export function plotAll(inDir: string, outDir: string, options: PlotOptions = {}): string[] {
  const selected = options.figures ?? [...FIGURE_NAMES];
  const warn = options.warn ?? ((message: string) => console.warn(message));
  for (const name of selected) {
    if (!(FIGURE_NAMES as readonly string[]).includes(name)) {
      throw new Error(
        `unknown figure "${name}"; expected one of: ${FIGURE_NAMES.join(", ")}`);
    }
  }
  mkdirSync(outDir, { recursive: true });

  const written: string[] = [];
  const emit = (name: FigureName, svg: string) => {
    const path = resolve(join(outDir, `${name}.svg`));
    writeFileSync(path, svg, "utf-8");
    written.push(path);
  };

  for (const name of FIGURE_NAMES) {
    if (!selected.includes(name)) continue;
    if (name === "trajectories") {
      emit(name, figureTrajectories(loadTrajectories(inDir)));
    } else if (name === "rmse") {
      emit(name, figureRmse(loadRuns(inDir)));
    } else if (name === "errors") {
      const errors = loadErrors(inDir);
      if (errors.length === 0) {
        warn("errors.csv has no rows; skipping the error-curves figure");
        continue;
      }
      emit(name, figureErrors(errors, loadRuns(inDir)));
    } else {
      emit(name, figureField(loadField(inDir), loadTruthAccel(inDir)));
    }
  }
  return written;
}
