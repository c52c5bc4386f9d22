"""Batch experiments over model variants: repeated fidelity runs, velocity
scale sweeps, result aggregation and a per-step timing probe.

Every run is a pure function of its inputs and seed, so metric columns are
reproducible bit for bit whether runs execute serially or in worker
processes. Results are always ordered by run id.
"""
import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import vehicle as vm
from .errors import ConfigurationError
from .integrator import DEFAULT_STEP
from .loop import (ControllerConfig, LoopConfig, SensorConfig, load_lap, peak_lateral_acceleration,
                   run_closed_loop, scale_velocity_profile)
from .metrics import DEFAULT_SPACING, disparity, resample
from .track import load_track

BASELINE = vm.ModelVariant.BASE.value
ALL_VARIANTS = tuple(v.value for v in vm.ModelVariant)
# ascending grid; the sweep stops at the first factor the baseline cannot complete
DEFAULT_SWEEP_FACTORS = (0.90, 0.95, 1.00) + tuple(round(1.0 + 0.02 * k, 2) for k in range(1, 16))
FIDELITY_REPETITIONS = 30
SWEEP_REPETITIONS = 5
TIMING_BUDGET_US = 800.0
TIMING_TARGET_US = 200.0

RESULT_COLUMNS = (
    "run_id", "variant", "scale", "seed", "completed", "lap_time_s", "d_max_m",
    "disparity_baseline_m3", "disparity_reference_m3", "peak_lat_accel_mps2",
    "median_load_n", "diagnostic",
)
METRICS = (
    ("lap_time", "lap_time_s"),
    ("d_max", "d_max_m"),
    ("disparity_baseline", "disparity_baseline_m3"),
    ("disparity_reference", "disparity_reference_m3"),
)
# variants whose tires are identified at the baseline's median wheel load
LOAD_FITTED = (vm.ModelVariant.MF_SIMPLE.value, vm.ModelVariant.LINEAR_TIRES.value)


def _resolve_path(value, base_dir):
    """Input paths are relative to the config file, falling back to the shipped
    data. The output directory stays relative to the working directory."""
    if value is None:
        return None
    p = Path(value)
    if p.is_absolute():
        return p
    local = Path(base_dir) / p
    if local.exists():
        return local
    shipped = vm.DATA_DIR / p
    return shipped if shipped.exists() else local


@dataclass(frozen=True)
class ExperimentConfig:
    track: str
    lap: str
    vehicle: str = None
    variants: tuple = ALL_VARIANTS
    # None picks the experiment's own default (30 fidelity, 5 sweep)
    repetitions: int = None
    scale_factors: tuple = (1.0,)
    # None picks the experiment's own default (on for fidelity, off for the sweep)
    noise: bool = None
    base_seed: int = 0
    out_dir: str = "results"
    parallelism: int = 1
    median_load: float = None
    reference_trace: str = None
    controller: dict = field(default_factory=dict)
    sensors: dict = field(default_factory=dict)
    estimator_cutoff_hz: float = None
    write_traces: bool = True

    def __post_init__(self):
        names = []
        for v in self.variants:
            name = vm.ModelVariant.parse(v).value
            if name not in names:
                names.append(name)
        if BASELINE in names:
            names.remove(BASELINE)
        object.__setattr__(self, "variants", (BASELINE, *names))
        factors = tuple(float(f) for f in self.scale_factors)
        if not factors or any(not f > 0 or not math.isfinite(f) for f in factors):
            raise ConfigurationError("scale factors must be positive")
        object.__setattr__(self, "scale_factors", factors)
        if self.repetitions is not None and (int(self.repetitions) != self.repetitions or self.repetitions < 1):
            raise ConfigurationError("repetitions must be a positive integer")
        if int(self.parallelism) != self.parallelism or self.parallelism < 1:
            raise ConfigurationError("parallelism must be a positive integer")
        if self.median_load is not None and not self.median_load > 0:
            raise ConfigurationError("median load must be positive")
        try:
            ControllerConfig(**self.controller)
            SensorConfig(**self.sensors)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid controller or sensor settings: {exc}") from None

    @classmethod
    def from_mapping(cls, data, base_dir="."):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown experiment config keys: {sorted(unknown)}")
        if "track" not in data or "lap" not in data:
            raise ConfigurationError("experiment config needs 'track' and 'lap'")
        data = dict(data)
        for key in ("track", "lap", "vehicle", "reference_trace"):
            if data.get(key) is not None:
                data[key] = str(_resolve_path(data[key], base_dir))
        for key in ("variants", "scale_factors"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    def to_mapping(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["variants"] = list(self.variants)
        out["scale_factors"] = list(self.scale_factors)
        return out

    def validate_paths(self):
        for key in ("track", "lap", "vehicle", "reference_trace"):
            value = getattr(self, key)
            if value is not None and not Path(value).is_file():
                raise ConfigurationError(f"{key} file not found: {value}")

    def loop_config(self, noise):
        cutoff = math.inf if self.estimator_cutoff_hz is None else float(self.estimator_cutoff_hz)
        return LoopConfig(
            controller=ControllerConfig(**self.controller),
            sensors=SensorConfig(**{**self.sensors, "enabled": bool(noise)}),
            estimator_cutoff_hz=cutoff,
            step=DEFAULT_STEP,
        )


def load_config(path, **overrides):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read experiment config {path}: {exc}") from None
    data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = ExperimentConfig.from_mapping(data, base_dir=path.parent)
    cfg.validate_paths()
    return cfg


# --------------------------------------------------------------------------
# run execution

_WORKER = {}


def _init_worker(params, controller_params, track, lap, loop_cfg):
    _WORKER.update(params=params, controller_params=controller_params, track=track, lap=lap, loop_cfg=loop_cfg)


def _execute(job):
    run_id, variant, scale, seed = job
    w = _WORKER
    lap = scale_velocity_profile(w["lap"], scale)
    trace, result = run_closed_loop(
        w["params"][variant], lap, w["track"], w["loop_cfg"], seed=seed,
        controller_params=w["controller_params"], variant=variant, run_id=run_id, scale=scale,
    )
    result.peak_lateral_accel = peak_lateral_acceleration(lap)
    return result, trace.s, trace.d


def _run_jobs(jobs, context, parallelism):
    if parallelism == 1 or len(jobs) == 1:
        _init_worker(*context)
        return [_execute(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=parallelism, initializer=_init_worker, initargs=context) as pool:
        return list(pool.map(_execute, jobs))


def baseline_median_load(params, lap, track, loop_cfg, seed=0):
    """Median wheel load (over all wheels and ticks) of a noise-free baseline lap."""
    quiet = replace(loop_cfg, sensors=replace(loop_cfg.sensors, enabled=False))
    _, result = run_closed_loop(params, lap, track, quiet, seed=seed)
    if not math.isfinite(result.median_load):
        raise ConfigurationError(f"baseline produced no wheel loads: {result.diagnostic}")
    return result.median_load


@dataclass
class _Setup:
    cfg: ExperimentConfig
    base: object
    params: dict
    track: object
    lap: object
    reference: tuple
    out: Path
    median_load: float


def _prepare(cfg, noise):
    cfg.validate_paths()
    base = vm.load_vehicle(cfg.vehicle) if cfg.vehicle else vm.default_vehicle()
    track = load_track(cfg.track)
    lap = load_lap(cfg.lap)
    if abs(lap.s_max - track.s_max) > 1e-6 * track.s_max:
        raise ConfigurationError("reference lap and track lengths differ")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    median = cfg.median_load
    if median is None and any(v in LOAD_FITTED for v in cfg.variants):
        median = baseline_median_load(base, lap, track, cfg.loop_config(noise), seed=cfg.base_seed)
    params = {}
    for v in cfg.variants:
        params[v] = vm.make_variant(base, v, median_load=median)
        if v in LOAD_FITTED:
            (out / "variants").mkdir(exist_ok=True)
            vm.save_vehicle(params[v], out / "variants" / f"{v}.json")
    reference = None
    if cfg.reference_trace:
        reference = _read_trace(cfg.reference_trace)
    return _Setup(cfg, base, params, track, lap, reference, out, median)


def _read_trace(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != ("s_m", "d_m"):
            raise ConfigurationError(f"unexpected trace header {header} in {path}")
        data = np.array([[float(v) for v in row] for row in reader if row])
    return data[:, 0], data[:, 1]


def _grid(s, d, s_max):
    return resample(s, d, s_max, spacing=DEFAULT_SPACING)


def _score(setup, outcomes):
    """Fill the disparity columns in place."""
    s_max = setup.track.s_max
    grids = {}
    for result, s, d in outcomes:
        if result.completed:
            grids[result.run_id] = _grid(s, d, s_max)
    baseline = {(r.scale, r.seed): r.run_id for r, _, _ in outcomes if r.variant == BASELINE and r.completed}
    ref = _grid(*setup.reference, s_max) if setup.reference is not None else None
    for result, _, _ in outcomes:
        if not result.completed:
            continue
        grid, d = grids[result.run_id]
        base_id = baseline.get((result.scale, result.seed))
        if base_id is not None:
            result.disparity_baseline = disparity(grid, d, *grids[base_id])
        if ref is not None:
            result.disparity_reference = disparity(grid, d, *ref)


def _write_outputs(setup, results, traces, kind):
    out = setup.out
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in results:
            w.writerow(result_row(r))
    if setup.cfg.write_traces:
        for run_id, (s, d) in traces.items():
            with open(out / f"trace_{run_id}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(("s_m", "d_m"))
                w.writerows((repr(float(a)), repr(float(b))) for a, b in zip(s, d))
    write_summary(aggregate(results), out / "summary.csv")
    snapshot = setup.cfg.to_mapping()
    snapshot["experiment"] = kind
    snapshot["median_load"] = setup.median_load
    (out / "config.snapshot").write_text(json.dumps(snapshot, indent=2, default=str))


def result_row(r):
    def num(v):
        return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))

    return (r.run_id, r.variant, repr(float(r.scale)), r.seed, int(r.completed), num(r.lap_time),
            num(r.d_max), num(r.disparity_baseline), num(r.disparity_reference),
            num(r.peak_lateral_accel), num(r.median_load), r.diagnostic)


def _batch(setup, factors, repetitions, noise, start_id):
    cfg = setup.cfg
    jobs = []
    run_id = start_id
    for scale in factors:
        for variant in cfg.variants:
            for rep in range(repetitions):
                jobs.append((run_id, variant, scale, cfg.base_seed + rep))
                run_id += 1
    context = (setup.params, setup.base, setup.track, setup.lap, cfg.loop_config(noise))
    outcomes = _run_jobs(jobs, context, cfg.parallelism)
    _score(setup, outcomes)
    return outcomes


def experiment_fidelity(cfg):
    """Every variant, ``repetitions`` times, on the unscaled lap (or the first
    configured scale factor). Returns the results ordered by run id."""
    noise = True if cfg.noise is None else cfg.noise
    reps = cfg.repetitions or FIDELITY_REPETITIONS
    setup = _prepare(cfg, noise)
    outcomes = _batch(setup, cfg.scale_factors[:1], reps, noise, 0)
    results = [r for r, _, _ in outcomes]
    _write_outputs(setup, results, {r.run_id: (s, d) for r, s, d in outcomes}, "fidelity")
    return results


def experiment_acceleration_sweep(cfg):
    """Ascending velocity scale factors until the baseline fails.

    All variants run at a factor before the stopping rule is checked, so the
    factor where the baseline first fails is still recorded.
    """
    factors = cfg.scale_factors
    if list(factors) != sorted(factors):
        raise ConfigurationError("sweep scale factors must be ascending")
    noise = False if cfg.noise is None else cfg.noise
    reps = cfg.repetitions or SWEEP_REPETITIONS
    setup = _prepare(cfg, noise)
    results, traces = [], {}
    for scale in factors:
        outcomes = _batch(setup, (scale,), reps, noise, len(results))
        results.extend(r for r, _, _ in outcomes)
        traces.update({r.run_id: (s, d) for r, s, d in outcomes})
        if not all(r.completed for r, _, _ in outcomes if r.variant == BASELINE):
            break
    _write_outputs(setup, results, traces, "sweep")
    return results


# --------------------------------------------------------------------------
# summaries


def aggregate(results):
    """Per (variant, scale): completion rate and mean/std/min/max of each
    metric over completed runs. ``std`` is the sample standard deviation,
    zero for a single value."""
    groups = {}
    for r in results:
        groups.setdefault((r.variant, r.scale), []).append(r)
    rows = []
    for (variant, scale), runs in groups.items():
        row = {"variant": variant, "scale": scale, "runs": len(runs),
               "completion_rate": sum(r.completed for r in runs) / len(runs)}
        for attr, name in METRICS:
            vals = np.array([getattr(r, attr) for r in runs if r.completed], dtype=float)
            vals = vals[np.isfinite(vals)]
            if vals.size == 0:
                stats = (math.nan,) * 4
            else:
                std = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
                stats = (float(np.mean(vals)), std, float(np.min(vals)), float(np.max(vals)))
            for suffix, value in zip(("mean", "std", "min", "max"), stats):
                row[f"{name}_{suffix}"] = value
        rows.append(row)
    return rows


def write_summary(rows, path):
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()})


# --------------------------------------------------------------------------
# timing


@dataclass(frozen=True)
class TimingSummary:
    variant: str
    steps: int
    mean_us: float
    p99_us: float
    max_us: float
    budget_us: float = TIMING_BUDGET_US
    target_us: float = TIMING_TARGET_US

    @property
    def within_budget(self):
        return self.mean_us < self.budget_us

    def lines(self):
        verdict = "within" if self.within_budget else "OVER"
        return [
            f"variant       {self.variant}",
            f"steps         {self.steps}",
            f"mean          {self.mean_us:.1f} us",
            f"p99           {self.p99_us:.1f} us",
            f"max           {self.max_us:.1f} us",
            f"budget        {self.budget_us:.0f} us ({verdict})",
            f"target        {self.target_us:.0f} us (informational)",
        ]


def step_timing_probe(variant=BASELINE, steps=100_000, params=None, speed=40.0, steer=0.01):
    """Wall time of single integration steps (six derivative evaluations each)
    while the car drives a steady circle."""
    if steps < 1:
        raise ConfigurationError("timing probe needs at least one step")
    base = params or vm.default_vehicle()
    p = vm.make_variant(base, variant)
    x0, u = vm.straight_line_trim(p, speed)
    u[vm.U_STEER] = steer
    args = p.kernel_args()
    h = DEFAULT_STEP
    vm.step(x0, u, h, args)  # compile outside the timed loop
    samples = np.empty(steps)
    x = x0
    clock = time.perf_counter_ns
    for k in range(steps):
        t0 = clock()
        x_next, stage = vm.step(x, u, h, args)
        samples[k] = clock() - t0
        x = x_next if stage == 0 and np.isfinite(x_next[0]) else x0
    us = samples / 1000.0
    return TimingSummary(str(vm.ModelVariant.parse(variant).value), steps, float(np.mean(us)),
                         float(np.percentile(us, 99)), float(np.max(us)))
