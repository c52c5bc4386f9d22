"""Command-line entry point: single runs, batch experiments, timing and generators."""
import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import bench
from . import generate as gen
from . import vehicle as vm
from .errors import SimulationError
from .loop import LoopConfig, SensorConfig, load_lap, run_closed_loop
from .track import load_track

PRESETS = {"oval": gen.OVAL, "road_course": gen.ROAD_COURSE}


def _vehicle(path):
    return vm.load_vehicle(path) if path else vm.default_vehicle()


def cmd_run(args):
    base = _vehicle(args.vehicle)
    track = load_track(args.track)
    lap = load_lap(args.lap)
    cfg = LoopConfig(sensors=SensorConfig(enabled=args.noise))
    variant = vm.ModelVariant.parse(args.variant).value
    median = args.median_load
    if median is None and variant in bench.LOAD_FITTED:
        median = bench.baseline_median_load(base, lap, track, cfg, seed=args.seed)
    params = vm.make_variant(base, variant, median_load=median)
    trace, result = run_closed_loop(params, lap, track, cfg, seed=args.seed, controller_params=base,
                                    variant=variant)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(bench.RESULT_COLUMNS)
        w.writerow(bench.result_row(result))
    with open(out / f"trace_{result.run_id}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("s_m", "d_m"))
        w.writerows((repr(float(s)), repr(float(d))) for s, d in zip(trace.s, trace.d))
    if result.completed:
        print(f"{variant}: lap {result.lap_time:.2f} s, d_max {result.d_max:.3f} m")
    else:
        print(f"{variant}: not completed ({result.diagnostic})")
    return 0


def _overrides(args):
    return {
        "out_dir": args.out,
        "parallelism": args.jobs,
        "repetitions": args.repetitions,
    }


def cmd_bench(args):
    cfg = bench.load_config(args.config, **_overrides(args))
    if args.experiment == "fidelity":
        results = bench.experiment_fidelity(cfg)
    else:
        results = bench.experiment_acceleration_sweep(cfg)
    rows = bench.aggregate(results)
    print(f"{'variant':<18} {'scale':>6} {'done':>5} {'d_max mean':>11} {'disparity mean':>15}")
    for r in rows:
        print(f"{r['variant']:<18} {r['scale']:>6.2f} {r['completion_rate']:>5.2f} "
              f"{r['d_max_m_mean']:>11.4f} {r['disparity_baseline_m3_mean']:>15.3e}")
    failed = sum(not r.completed for r in results)
    print(f"{len(results)} runs, {failed} not completed; results in {cfg.out_dir}")
    return 0


def cmd_timing(args):
    summary = bench.step_timing_probe(args.variant, steps=args.steps)
    print("\n".join(summary.lines()))
    return 0


def _spec_from_json(path):
    data = json.loads(Path(path).read_text())
    corners = tuple(gen.Corner(c["radius"], math.radians(c["angle_deg"]), c.get("bank", 0.0))
                    for c in data.pop("corners", ()))
    if "straights" in data:
        data["straights"] = tuple(data["straights"])
    return gen.GeneratorSpec(corners=corners, **data)


def cmd_gen(args):
    if args.what == "track":
        spec = _spec_from_json(args.spec) if args.spec else PRESETS[args.preset]
        track = gen.generate_track(spec)
        track.to_csv(args.out)
        print(f"{track.name}: {track.s_max:.1f} m, {len(track.s)} samples -> {args.out}")
    else:
        track = load_track(args.track)
        lap = gen.generate_lap(track, _vehicle(args.vehicle), args.fraction)
        lap.to_csv(args.out)
        print(f"lap over {lap.s_max:.1f} m, v {lap.v.min():.1f}..{lap.v.max():.1f} m/s -> {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="drive one closed-loop lap")
    p.add_argument("--vehicle", help="vehicle JSON (default: shipped baseline)")
    p.add_argument("--track", required=True)
    p.add_argument("--lap", required=True)
    p.add_argument("--variant", default="base", choices=[v.value for v in vm.ModelVariant])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", action="store_true", help="enable sensor noise")
    p.add_argument("--median-load", type=float, help="wheel load for fitted tire variants (N)")
    p.add_argument("--out", default="run_out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="batch experiments")
    p.add_argument("experiment", choices=("fidelity", "sweep"))
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the config's output directory")
    p.add_argument("--jobs", type=int, help="override the config's parallelism")
    p.add_argument("--repetitions", type=int, help="override the repetitions per variant")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("timing", help="per-step wall time of the vehicle model")
    p.add_argument("--variant", default="base", choices=[v.value for v in vm.ModelVariant])
    p.add_argument("--steps", type=int, default=100_000)
    p.set_defaults(func=cmd_timing)

    p = sub.add_parser("gen", help="synthetic tracks and reference laps")
    gsub = p.add_subparsers(dest="what", required=True)
    g = gsub.add_parser("track")
    g.add_argument("--preset", choices=sorted(PRESETS), default="road_course")
    g.add_argument("--spec", help="generator spec JSON (overrides --preset)")
    g.add_argument("--out", required=True)
    g = gsub.add_parser("lap")
    g.add_argument("--track", required=True)
    g.add_argument("--vehicle")
    g.add_argument("--fraction", type=float, default=0.6, help="share of the grip limit in corners")
    g.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SimulationError, OSError, json.JSONDecodeError) as exc:
        print(f"sim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
