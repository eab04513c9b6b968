"""Experiment orchestration and result persistence.

A run processes N vehicles strictly in order against one shared field belief:
each vehicle is filtered with the augmented EKF (which keeps learning the
field) and, independently, with the plain CV-EKF baseline on the identical
measurements. Runs are independent given their derived seeds, so run results
never depend on how many runs execute or in what order.

Everything exported is CSV with fixed headers; floats are written with
repr(), which round-trips exactly and makes reruns byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .field import InducingGrid, cross_covariance_matrix, field_table
from .filtering import (AugmentedBelief, KinematicBelief, augmented_prior, cv_predict,
                        frozen_field_predict, kinematic_update, predict,
                        reinitialize_vehicle, update)
from .models import KINEMATIC_DIM, cv_process_noise, position_observation
from .scenario import (PATH_NAMES, PathSpec, ScenarioConfig, TruthTrajectory, build_paths,
                       choose_path, generate_truth, initial_covariance, initial_state,
                       nearest_on_path, simulate_measurements, write_manifest)
from .validation import NumericalError


@dataclass
class VehicleRunRecord:
    """Everything observed and estimated for one vehicle pass."""

    run: int
    vehicle: int       # 1-based position in the run's sequence
    path_name: str
    truth: TruthTrajectory
    measurements: np.ndarray     # (n, 2)
    est_gpassm: np.ndarray       # (n, 2) position estimates
    est_cv: np.ndarray           # (n, 2)
    err_gpassm: np.ndarray       # (n,) Euclidean position errors
    err_cv: np.ndarray           # (n,)
    rmse_gpassm: float
    rmse_cv: float

    @property
    def n_steps(self) -> int:
        return self.measurements.shape[0]


@dataclass
class RunResult:
    run: int
    records: list[VehicleRunRecord]
    field_means: list[np.ndarray]  # whitened inducing mean after each vehicle


@dataclass
class ExperimentResult:
    config: ScenarioConfig
    grid: InducingGrid
    paths: dict[str, PathSpec]
    runs: list[RunResult]
    final_belief: AugmentedBelief  # end state of the first run, for field export

    def all_records(self):
        for run in self.runs:
            yield from run.records


def compute_rmse(errors: np.ndarray) -> float:
    """sqrt of the mean squared position-error norm over all steps.

    Accepts either a sequence of error norms (n,) or raw error vectors
    (n, 2); vectors are reduced to norms first.
    """
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("cannot compute RMSE of an empty error sequence")
    if errors.ndim == 2:
        errors = np.linalg.norm(errors, axis=1)
    return float(np.sqrt(np.mean(np.square(errors))))


def vehicle_rng(config: ScenarioConfig, run_idx: int, vehicle_idx: int) -> np.random.Generator:
    """Generator derived from (seed, run, vehicle); independent of execution order."""
    return np.random.default_rng(
        np.random.SeedSequence([config.rng_seed, run_idx, vehicle_idx]))


def run_vehicle(belief: AugmentedBelief, truth: TruthTrajectory, measurements: np.ndarray,
                model, grid, config: ScenarioConfig, *, run_idx: int = 0, vehicle_idx: int = 1,
                learn_field: bool = True) -> tuple[AugmentedBelief, VehicleRunRecord]:
    """Filter one vehicle with the augmented EKF and the CV baseline.

    Both filters start from the true initial state and consume the same
    measurement sequence from step 1 on. The returned belief carries the
    field updated by this vehicle (unchanged when learn_field is False).
    """
    n = truth.n_steps
    if measurements.shape != (n, 2):
        raise ValueError(f"measurements must have shape {(n, 2)}, got {measurements.shape}")
    x0 = initial_state(truth)
    p0 = initial_covariance(config)
    obs_aug = position_observation(KINEMATIC_DIM + grid.state_dim, config.filter_meas_var)
    obs_kin = position_observation(KINEMATIC_DIM, config.filter_meas_var)
    q_cv = cv_process_noise(model, config.kernel_var)

    est_g = np.empty((n, 2))
    est_c = np.empty((n, 2))
    est_g[0] = x0[:2]
    est_c[0] = x0[:2]

    kin = KinematicBelief(x0.copy(), p0.copy())
    frozen = belief.field_belief() if not learn_field else None
    frozen_kin = KinematicBelief(x0.copy(), p0.copy()) if not learn_field else None
    if learn_field:
        belief = reinitialize_vehicle(belief, x0, p0)

    try:
        for k in range(1, n):
            y = measurements[k]
            if learn_field:
                belief = predict(belief, model, grid, config.drift_var)
                belief = update(belief, obs_aug, y)
                est_g[k] = belief.mean[:2]
            else:
                frozen_kin = frozen_field_predict(frozen_kin, model, grid, frozen)
                frozen_kin = kinematic_update(frozen_kin, obs_kin, y)
                est_g[k] = frozen_kin.mean[:2]
            kin = cv_predict(kin, model, q_cv)
            kin = kinematic_update(kin, obs_kin, y)
            est_c[k] = kin.mean[:2]
    except NumericalError as exc:
        raise NumericalError(f"run {run_idx}: {exc.message}", step=exc.step,
                             vehicle=vehicle_idx) from exc

    err_g = np.linalg.norm(est_g - truth.positions, axis=1)
    err_c = np.linalg.norm(est_c - truth.positions, axis=1)
    record = VehicleRunRecord(run_idx, vehicle_idx, truth.path_name, truth, measurements,
                              est_g, est_c, err_g, err_c,
                              compute_rmse(err_g), compute_rmse(err_c))
    return belief, record


def _fresh_belief(config: ScenarioConfig, grid) -> AugmentedBelief:
    x0 = np.zeros(KINEMATIC_DIM)
    return augmented_prior(grid, x0, initial_covariance(config), config.drift_var)


def run_single(config: ScenarioConfig, run_idx: int, grid, model,
               paths: dict[str, PathSpec], *, n_vehicles: int | None = None,
               learn_field: bool = True) -> tuple[RunResult, AugmentedBelief]:
    """One run: a fresh field prior, then vehicles in sequence."""
    if n_vehicles is None:
        n_vehicles = config.n_vehicles
    belief = _fresh_belief(config, grid)
    records = []
    means = []
    for vehicle_idx in range(1, n_vehicles + 1):
        rng = vehicle_rng(config, run_idx, vehicle_idx)
        path = paths[choose_path(rng)]
        truth = generate_truth(path, config.speed, config.sampling_interval)
        measurements = simulate_measurements(truth, config.meas_noise_var, rng)
        belief, record = run_vehicle(belief, truth, measurements, model, grid, config,
                                     run_idx=run_idx, vehicle_idx=vehicle_idx,
                                     learn_field=learn_field)
        records.append(record)
        means.append(belief.mean[KINEMATIC_DIM:].copy())
    return RunResult(run_idx, records, means), belief


def run_experiment(config: ScenarioConfig, *, learn_field: bool = True,
                   progress=None) -> ExperimentResult:
    """All M runs. progress, if given, is called with (completed, total) after each run."""
    grid = config.build_grid()
    model = config.motion_model()
    paths = build_paths(config)
    runs = []
    final_belief = None
    for run_idx in range(config.n_runs):
        run_result, belief = run_single(config, run_idx, grid, model, paths,
                                        learn_field=learn_field)
        runs.append(run_result)
        if run_idx == 0:
            final_belief = belief
        if progress is not None:
            progress(run_idx + 1, config.n_runs)
    return ExperimentResult(config, grid, paths, runs, final_belief)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def per_path_cohorts(run: RunResult) -> dict[str, tuple[VehicleRunRecord, VehicleRunRecord]]:
    """(first, last) record per path name for one run; paths nobody took are absent."""
    cohorts: dict[str, tuple[VehicleRunRecord, VehicleRunRecord]] = {}
    for record in run.records:
        if record.path_name not in cohorts:
            cohorts[record.path_name] = (record, record)
        else:
            first, _ = cohorts[record.path_name]
            cohorts[record.path_name] = (first, record)
    return cohorts


@dataclass
class LearningSummary:
    """Aggregates behind the learning-effect comparison."""

    frac_runs_improved: float      # runs where last-cohort GPASSM beats last-cohort CV
    last_mean_gpassm: float        # mean RMSE over all last-vehicle-per-path records
    last_mean_cv: float
    first_mean_gpassm: float       # same over first-vehicle-per-path records


def learning_summary(result: ExperimentResult) -> LearningSummary:
    improved = 0
    last_g, last_c, first_g = [], [], []
    for run in result.runs:
        cohorts = per_path_cohorts(run)
        run_last_g = [last.rmse_gpassm for _, last in cohorts.values()]
        run_last_c = [last.rmse_cv for _, last in cohorts.values()]
        if np.mean(run_last_g) < np.mean(run_last_c):
            improved += 1
        last_g.extend(run_last_g)
        last_c.extend(run_last_c)
        first_g.extend(first.rmse_gpassm for first, _ in cohorts.values())
    return LearningSummary(improved / len(result.runs),
                           float(np.mean(last_g)), float(np.mean(last_c)),
                           float(np.mean(first_g)))


def turn_bias(result: ExperimentResult, last_k: int = 10) -> tuple[float, float]:
    """Mean signed cross-track error during turns over each run's last_k vehicles.

    On an arc the perpendicular distance to the centerline is the distance to
    the turn center minus the radius. Positive means radially outward, so a
    filter that consistently overshoots the curve accumulates the same sign of
    bias on the left and the right route instead of cancelling between them.
    """
    radius = result.config.turn_radius
    num_g = num_c = 0.0
    count = 0
    for run in result.runs:
        for record in run.records[-last_k:]:
            mask = record.truth.turn_mask
            if not mask.any():
                continue
            center = result.paths[record.path_name].turn_center
            dev_g = np.linalg.norm(record.est_gpassm[mask] - center, axis=1) - radius
            dev_c = np.linalg.norm(record.est_cv[mask] - center, axis=1) - radius
            num_g += dev_g.sum()
            num_c += dev_c.sum()
            count += int(mask.sum())
    if count == 0:
        raise ValueError("no turn steps found in the experiment records")
    return num_g / count, num_c / count


@dataclass
class FieldTruth:
    """True accelerations sampled at the on-path subset of inducing points."""

    indices: np.ndarray        # (m,) into grid.points
    accelerations: np.ndarray  # (m, 2)


def field_truth_at_grid(grid, paths: dict[str, PathSpec], speed: float,
                        centerline_tol: float = 1.0, split_exclusion: float = 2.0,
                        split_point=(0.0, 0.0)) -> FieldTruth:
    """Ground-truth field values where ground truth exists.

    True acceleration is defined only on the paths, so the comparison set is
    the inducing points within centerline_tol of some centerline, each scored
    against the nearest path at the nearest arc length. Points within
    split_exclusion of the route split are dropped: both routes pass nearby
    with conflicting curvature, so no single truth value is meaningful there.
    """
    split = np.asarray(split_point, dtype=float)
    indices = []
    accels = []
    for idx, point in enumerate(grid.points):
        if np.linalg.norm(point - split) <= split_exclusion:
            continue
        best = None
        for name in PATH_NAMES:
            dist, s = nearest_on_path(paths[name], point)
            if best is None or dist < best[0]:
                best = (dist, s, name)
        dist, s, name = best
        if dist > centerline_tol:
            continue
        _, tangent, curvature = paths[name].point_at(s)
        left_normal = np.array([-tangent[1], tangent[0]])
        indices.append(idx)
        accels.append(speed * speed * curvature * left_normal)
    if not indices:
        raise ValueError("no inducing points lie within tolerance of a path centerline")
    return FieldTruth(np.array(indices, dtype=int), np.array(accels))


def field_rmse(grid, field_mean: np.ndarray, truth: FieldTruth,
               k_rows: np.ndarray | None = None) -> float:
    """RMSE of the estimated input against truth over the on-path inducing points.

    k_rows, if given, must be cross_covariance_matrix(grid)[truth.indices];
    callers scoring many snapshots precompute it once.
    """
    if k_rows is None:
        k_rows = cross_covariance_matrix(grid)[truth.indices]
    estimates = k_rows @ field_mean.reshape(-1, 2)
    residual = estimates - truth.accelerations
    return float(np.sqrt(np.mean(np.sum(residual * residual, axis=1))))


def field_rmse_curve(result: ExperimentResult, truth: FieldTruth) -> np.ndarray:
    """Mean field RMSE across runs, after each vehicle; shape (n_vehicles,)."""
    n_veh = result.config.n_vehicles
    k_rows = cross_covariance_matrix(result.grid)[truth.indices]
    curve = np.zeros(n_veh)
    for run in result.runs:
        for v, mean in enumerate(run.field_means):
            curve[v] += field_rmse(result.grid, mean, truth, k_rows)
    return curve / len(result.runs)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    return repr(float(value))


def _open_csv(path: Path):
    handle = path.open("w", newline="", encoding="utf-8")
    return handle, csv.writer(handle, lineterminator="\n")


def export_results(result: ExperimentResult, out_dir) -> list[Path]:
    """Write runs.csv, errors.csv, trajectories.csv, and the config manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "runs.csv"
    handle, writer = _open_csv(path)
    with handle:
        writer.writerow(["run", "vehicle", "path", "rmse_gpassm", "rmse_cv"])
        for rec in result.all_records():
            writer.writerow([rec.run, rec.vehicle, rec.path_name,
                             _fmt(rec.rmse_gpassm), _fmt(rec.rmse_cv)])
    written.append(path)

    path = out / "errors.csv"
    handle, writer = _open_csv(path)
    with handle:
        writer.writerow(["run", "vehicle", "step", "err_gpassm", "err_cv"])
        for rec in result.all_records():
            for k in range(rec.n_steps):
                writer.writerow([rec.run, rec.vehicle, k,
                                 _fmt(rec.err_gpassm[k]), _fmt(rec.err_cv[k])])
    written.append(path)

    path = out / "trajectories.csv"
    handle, writer = _open_csv(path)
    with handle:
        writer.writerow(["run", "vehicle", "path", "step", "truth_x", "truth_y",
                         "meas_x", "meas_y", "gpassm_x", "gpassm_y", "cv_x", "cv_y"])
        for rec in result.all_records():
            for k in range(rec.n_steps):
                writer.writerow([rec.run, rec.vehicle, rec.path_name, k,
                                 _fmt(rec.truth.positions[k, 0]), _fmt(rec.truth.positions[k, 1]),
                                 _fmt(rec.measurements[k, 0]), _fmt(rec.measurements[k, 1]),
                                 _fmt(rec.est_gpassm[k, 0]), _fmt(rec.est_gpassm[k, 1]),
                                 _fmt(rec.est_cv[k, 0]), _fmt(rec.est_cv[k, 1])])
    written.append(path)

    manifest = out / "manifest.toml"
    write_manifest(result.config, manifest)
    written.append(manifest)
    return written


def export_field(belief: AugmentedBelief, grid, config: ScenarioConfig, out_dir) -> list[Path]:
    """Write field.csv (estimate at the inducing points) and truth_accel.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    table = field_table(grid, belief.field_belief())
    path = out / "field.csv"
    handle, writer = _open_csv(path)
    with handle:
        writer.writerow(["xi_x", "xi_y", "mean_ax", "mean_ay", "var"])
        for row in table:
            writer.writerow([_fmt(v) for v in row])
    written.append(path)

    paths = build_paths(config)
    path = out / "truth_accel.csv"
    handle, writer = _open_csv(path)
    with handle:
        writer.writerow(["path", "step", "s", "pos_x", "pos_y", "acc_x", "acc_y"])
        for name in PATH_NAMES:
            truth = generate_truth(paths[name], config.speed, config.sampling_interval)
            step_len = config.speed * config.sampling_interval
            for k in range(truth.n_steps):
                writer.writerow([name, k, _fmt(k * step_len),
                                 _fmt(truth.positions[k, 0]), _fmt(truth.positions[k, 1]),
                                 _fmt(truth.accelerations[k, 0]), _fmt(truth.accelerations[k, 1])])
    written.append(path)
    return written
