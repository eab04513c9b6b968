"""Three-way intersection scenario: geometry, ground truth, and configuration.

Vehicles approach a T-junction from the south on a straight road, then turn
left or right (equal probability) onto a perpendicular road. Along a turn the
true motion deviates from constant velocity by the centripetal acceleration
v^2 / R, which is the position-dependent input the filter has to pick up.

Configuration is a flat key = value TOML file; every key has a default, so an
empty file is a valid config.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ._version import __version__
from .field import InducingGrid, Rect, build_grid
from .kernels import KernelParams
from .models import MotionModel, cv_matrices
from .validation import check_finite_array, check_nonnegative, check_positive

PATH_NAMES = ("left", "right")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class ScenarioConfig:
    """Experiment parameters. Defaults reproduce the reference intersection study."""

    # timing and noise
    sampling_rate: float = 2.0          # Hz
    meas_noise_var: float = 0.2         # variance used to corrupt true positions
    filter_meas_var: float = 1.0        # variance the filters assume
    # field model
    kernel_var: float = 0.05            # sigma_f^2
    length_scale: float = 0.5
    grid_spacing: float = 1.0
    jitter: float = -1.0                # < 0 means auto (1e-9 * kernel_var)
    drift_var: float = 0.0              # per-step inducing random-walk variance
    # experiment size
    n_vehicles: int = 30
    n_runs: int = 100
    rng_seed: int = 1
    # geometry (road half-width 2.5 at spacing 1.0 gives 310 lattice points)
    speed: float = 3.5                  # m/s, constant along the path
    approach_length: float = 24.0
    turn_radius: float = 5.0
    exit_length: float = 12.0
    road_half_width: float = 2.5
    # filter initialization around the true initial state
    init_pos_var: float = 0.2
    init_vel_var: float = 0.25

    def __post_init__(self):
        for name in ("sampling_rate", "filter_meas_var", "kernel_var",
                     "length_scale", "grid_spacing", "speed", "approach_length",
                     "turn_radius", "exit_length", "road_half_width",
                     "init_pos_var", "init_vel_var"):
            check_positive(name, getattr(self, name))
        for name in ("meas_noise_var", "drift_var"):
            check_nonnegative(name, getattr(self, name))
        for name in ("n_vehicles", "n_runs"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.rng_seed, int) or self.rng_seed < 0:
            raise ValueError(f"rng_seed must be a non-negative integer, got {self.rng_seed!r}")

    @property
    def sampling_interval(self) -> float:
        return 1.0 / self.sampling_rate

    def kernel_params(self) -> KernelParams:
        return KernelParams(self.kernel_var, self.length_scale, jitter=self.jitter)

    def motion_model(self) -> MotionModel:
        return cv_matrices(self.sampling_interval)

    def road_region(self) -> list[Rect]:
        """Union of the south approach road and the east-west cross road."""
        w = self.road_half_width
        junction_y = self.turn_radius  # centerline of the cross road
        vertical: Rect = (-w, w, -self.approach_length, junction_y + w)
        horizontal: Rect = (-(self.turn_radius + self.exit_length),
                            self.turn_radius + self.exit_length,
                            junction_y - w, junction_y + w)
        return [vertical, horizontal]

    def build_grid(self) -> InducingGrid:
        return build_grid(self.kernel_params(), self.road_region(), self.grid_spacing)


def load_config(path) -> ScenarioConfig:
    """Read a flat TOML config; unknown keys are an error, missing keys default."""
    raw = Path(path).read_bytes()
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ValueError(f"could not parse config {path}: {exc}") from exc
    names = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    # TOML has distinct int/float types; accept ints where floats are expected.
    kwargs = {}
    for f in dataclasses.fields(ScenarioConfig):
        if f.name not in data:
            continue
        value = data[f.name]
        if f.type == "float" and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        kwargs[f.name] = value
    return ScenarioConfig(**kwargs)


def dump_config(config: ScenarioConfig) -> str:
    """Serialize the effective configuration as flat TOML, fields in declaration order."""
    lines = []
    for f in dataclasses.fields(ScenarioConfig):
        value = getattr(config, f.name)
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


def write_manifest(config: ScenarioConfig, path) -> None:
    """Write the effective config (plus producing version) so a run can be replayed.

    The output is itself a valid config file; load_config ignores the comment.
    """
    text = f"# produced by gpassm {__version__}\n" + dump_config(config)
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Path geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Line:
    start: np.ndarray
    direction: np.ndarray  # unit
    length: float

    def point_at(self, s: float) -> tuple[np.ndarray, np.ndarray, float]:
        return self.start + s * self.direction, self.direction, 0.0


@dataclass(frozen=True)
class _Arc:
    center: np.ndarray
    radius: float
    start_angle: float
    sweep: float  # signed radians; positive is counterclockwise

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    def point_at(self, s: float) -> tuple[np.ndarray, np.ndarray, float]:
        sign = 1.0 if self.sweep >= 0 else -1.0
        theta = self.start_angle + sign * s / self.radius
        pos = self.center + self.radius * np.array([math.cos(theta), math.sin(theta)])
        tangent = sign * np.array([-math.sin(theta), math.cos(theta)])
        return pos, tangent, sign / self.radius


@dataclass(frozen=True)
class PathSpec:
    """Piecewise line/arc centerline, parameterized by arc length."""

    name: str
    segments: tuple
    turn_center: np.ndarray
    turn_interval: tuple[float, float]  # arc-length range covered by the turn

    @property
    def length(self) -> float:
        return sum(seg.length for seg in self.segments)

    def point_at(self, s: float) -> tuple[np.ndarray, np.ndarray, float]:
        """Position, unit tangent, and signed curvature at arc length s.

        Each segment owns the half-open range [start, end), so the curvature
        at a joint is the downstream segment's: the input applied at a sample
        is the one acting over the following interval. Beyond the final
        segment the path continues straight, so trajectories a little longer
        than the geometry stay well defined.
        """
        if s < 0:
            raise ValueError(f"arc length must be >= 0, got {s}")
        for seg in self.segments[:-1]:
            if s < seg.length:
                return seg.point_at(s)
            s -= seg.length
        last = self.segments[-1]
        if s <= last.length:
            return last.point_at(s)
        pos, tangent, _ = last.point_at(last.length)
        return pos + (s - last.length) * tangent, tangent, 0.0

    def in_turn(self, s: float) -> bool:
        lo, hi = self.turn_interval
        return lo <= s < hi


def build_paths(config: ScenarioConfig) -> dict[str, PathSpec]:
    """The two routes through the junction, keyed by PATH_NAMES.

    Both start at (0, -approach_length) heading north. The right route turns
    clockwise around (R, 0); the left route is its mirror image across x = 0.
    """
    r = config.turn_radius
    approach = _Line(np.array([0.0, -config.approach_length]), np.array([0.0, 1.0]),
                     config.approach_length)
    turn_start = config.approach_length

    right_arc = _Arc(np.array([r, 0.0]), r, start_angle=math.pi, sweep=-math.pi / 2)
    right_exit = _Line(np.array([r, r]), np.array([1.0, 0.0]), config.exit_length)
    left_arc = _Arc(np.array([-r, 0.0]), r, start_angle=0.0, sweep=math.pi / 2)
    left_exit = _Line(np.array([-r, r]), np.array([-1.0, 0.0]), config.exit_length)

    interval = (turn_start, turn_start + right_arc.length)
    return {
        "left": PathSpec("left", (approach, left_arc, left_exit), left_arc.center, interval),
        "right": PathSpec("right", (approach, right_arc, right_exit), right_arc.center, interval),
    }


def choose_path(rng: np.random.Generator) -> str:
    """Pick one of the two routes with equal probability."""
    return PATH_NAMES[int(rng.integers(2))]


def _wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    return a - 2.0 * math.pi * math.floor((a + math.pi) / (2.0 * math.pi))


def nearest_on_path(path: PathSpec, point) -> tuple[float, float]:
    """Distance from a point to the centerline and the arc length of the closest spot.

    Arc segments clamp angular progress into their sweep, so queries slightly
    past an endpoint resolve to that endpoint rather than wrapping around.
    """
    p = np.asarray(point, dtype=float)
    best_dist = math.inf
    best_s = 0.0
    offset = 0.0
    for seg in path.segments:
        if isinstance(seg, _Line):
            t = float(np.clip(np.dot(p - seg.start, seg.direction), 0.0, seg.length))
            local_s = t
            closest = seg.start + t * seg.direction
        else:
            v = p - seg.center
            norm_v = float(np.linalg.norm(v))
            if norm_v == 0.0:
                local_s = 0.0
                closest, _, _ = seg.point_at(0.0)
            else:
                sign = 1.0 if seg.sweep >= 0 else -1.0
                progress = _wrap_angle(math.atan2(v[1], v[0]) - seg.start_angle) * sign
                along = float(np.clip(progress, 0.0, abs(seg.sweep)))
                local_s = seg.radius * along
                closest, _, _ = seg.point_at(local_s)
        dist = float(np.linalg.norm(p - closest))
        if dist < best_dist:
            best_dist = dist
            best_s = offset + local_s
        offset += seg.length
    return best_dist, best_s


# ---------------------------------------------------------------------------
# Ground truth and measurements
# ---------------------------------------------------------------------------

@dataclass
class TruthTrajectory:
    """Noise-free vehicle motion sampled along a path at constant speed."""

    path_name: str
    sampling_interval: float
    positions: np.ndarray      # (n, 2)
    velocities: np.ndarray     # (n, 2)
    accelerations: np.ndarray  # (n, 2), v^2 * curvature * left-normal
    turn_mask: np.ndarray      # (n,) bool, True while on the arc
    outward: np.ndarray        # (n, 2) unit radial away from the turn center; 0 off-turn

    @property
    def n_steps(self) -> int:
        return self.positions.shape[0]


def generate_truth(path: PathSpec, speed: float, sampling_interval: float,
                   n_steps: int | None = None) -> TruthTrajectory:
    """Sample the path at arc lengths k * speed * T for k = 0 .. n_steps - 1.

    The default step count covers the whole path and no more, so every sample
    lies on the geometry. Acceleration is the exact centripetal value on arcs
    and zero on straights (discontinuous at the joints, as for a real path of
    this shape).
    """
    check_positive("speed", speed)
    check_positive("sampling_interval", sampling_interval)
    step_len = speed * sampling_interval
    if n_steps is None:
        n_steps = int(math.floor(path.length / step_len)) + 1
    if n_steps < 2:
        raise ValueError(f"n_steps must be >= 2, got {n_steps}")

    positions = np.empty((n_steps, 2))
    velocities = np.empty((n_steps, 2))
    accelerations = np.empty((n_steps, 2))
    turn_mask = np.zeros(n_steps, dtype=bool)
    outward = np.zeros((n_steps, 2))
    for k in range(n_steps):
        s = k * step_len
        pos, tangent, curvature = path.point_at(s)
        left_normal = np.array([-tangent[1], tangent[0]])
        positions[k] = pos
        velocities[k] = speed * tangent
        accelerations[k] = speed * speed * curvature * left_normal
        if path.in_turn(s):
            turn_mask[k] = True
            radial = pos - path.turn_center
            outward[k] = radial / np.linalg.norm(radial)
    return TruthTrajectory(path.name, sampling_interval, positions, velocities,
                           accelerations, turn_mask, outward)


def simulate_measurements(truth: TruthTrajectory, meas_noise_var: float,
                          rng: np.random.Generator) -> np.ndarray:
    """Noisy position observations, one per step, shape (n, 2)."""
    check_nonnegative("meas_noise_var", meas_noise_var)
    noise = rng.normal(0.0, math.sqrt(meas_noise_var), size=truth.positions.shape)
    return truth.positions + noise


def initial_state(truth: TruthTrajectory) -> np.ndarray:
    """True initial kinematic state (position and velocity stacked)."""
    return np.concatenate([truth.positions[0], truth.velocities[0]])


def initial_covariance(config: ScenarioConfig) -> np.ndarray:
    return np.diag([config.init_pos_var, config.init_pos_var,
                    config.init_vel_var, config.init_vel_var])
