import csv
import json
import math

import numpy as np
import pytest

from racesim import bench
from racesim.errors import ConfigurationError
from racesim.loop import RunResult


def write_config(path, short_oval, **extra):
    data = {"track": str(short_oval[0]), "lap": str(short_oval[1]), "out_dir": str(path.parent / "out")}
    data.update(extra)
    path.write_text(json.dumps(data))
    return path


def read_results(out):
    with open(out / "results.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def test_config_normalises_variants(short_oval, tmp_path):
    cfg = bench.load_config(write_config(tmp_path / "c.json", short_oval, variants=["cog0", "baseline", "cog0"]))
    assert cfg.variants == ("base", "cog0")
    assert bench.load_config(write_config(tmp_path / "d.json", short_oval)).variants == bench.ALL_VARIANTS


@pytest.mark.parametrize("bad", [{"bogus": 1}, {"variants": ["warp_drive"]}, {"repetitions": 0},
                                 {"scale_factors": [1.0, -1.0]}, {"parallelism": 0},
                                 {"controller": {"omega_n": -1}}, {"track": "/no/such/file.csv"}])
def test_config_rejects(short_oval, tmp_path, bad):
    with pytest.raises(ConfigurationError):
        bench.load_config(write_config(tmp_path / "c.json", short_oval, **bad))


def test_shipped_configs_load():
    for name in ("fidelity.json", "sweep.json"):
        cfg = bench.load_config(bench.vm.DATA_DIR / "configs" / name)
        assert cfg.variants == bench.ALL_VARIANTS


def test_sweep_requires_ascending_factors(short_oval, tmp_path):
    cfg = bench.load_config(write_config(tmp_path / "c.json", short_oval, scale_factors=[1.0, 0.9]))
    with pytest.raises(ConfigurationError):
        bench.experiment_acceleration_sweep(cfg)


def _result(variant, value, completed=True):
    return RunResult(variant=variant, completed=completed, d_max=value, lap_time=10.0)


def test_aggregate_statistics():
    rows = bench.aggregate([_result("base", 0.1), _result("base", 0.3), _result("base", 9.0, completed=False)])
    (row,) = rows
    assert row["runs"] == 3 and row["completion_rate"] == pytest.approx(2 / 3)
    assert row["d_max_m_mean"] == pytest.approx(0.2)
    assert row["d_max_m_std"] == pytest.approx(math.sqrt(0.02))
    assert (row["d_max_m_min"], row["d_max_m_max"]) == (0.1, 0.3)
    assert bench.aggregate([_result("base", 0.1)])[0]["d_max_m_std"] == 0.0
    assert math.isnan(bench.aggregate([_result("base", 0.1, completed=False)])[0]["d_max_m_mean"])


@pytest.mark.slow
def test_fidelity_batch(short_oval, tmp_path):
    cfg = bench.load_config(write_config(tmp_path / "c.json", short_oval, variants=["mf_simple", "cog0"],
                                         repetitions=2, noise=False, base_seed=40))
    results = bench.experiment_fidelity(cfg)
    out = tmp_path / "out"
    assert [r.run_id for r in results] == list(range(6))
    assert [r.variant for r in results] == ["base"] * 2 + ["mf_simple"] * 2 + ["cog0"] * 2
    assert [r.seed for r in results] == [40, 41] * 3
    assert all(r.completed for r in results)
    rows = read_results(out)
    assert len(rows) == 6 and list(rows[0]) == list(bench.RESULT_COLUMNS)
    assert all((out / f"trace_{k}.csv").exists() for k in range(6))
    assert (out / "variants" / "mf_simple.json").exists()
    snapshot = json.loads((out / "config.snapshot").read_text())
    assert snapshot["experiment"] == "fidelity" and snapshot["median_load"] > 0
    base = [r for r in results if r.variant == "base"]
    assert all(r.disparity_baseline == 0.0 for r in base)
    # without noise repetitions are identical
    for v in ("base", "mf_simple", "cog0"):
        a, b = [r for r in results if r.variant == v]
        assert a.d_max == b.d_max and a.disparity_baseline == b.disparity_baseline
    summary = list(csv.DictReader(open(out / "summary.csv")))
    assert [s["variant"] for s in summary] == ["base", "mf_simple", "cog0"]


@pytest.mark.slow
def test_sweep_stops_after_baseline_failure(short_oval, tmp_path):
    cfg = bench.load_config(write_config(tmp_path / "c.json", short_oval, variants=["cog0"], repetitions=1,
                                         scale_factors=[1.0, 2.5, 3.0]))
    results = bench.experiment_acceleration_sweep(cfg)
    scales = sorted({r.scale for r in results})
    assert scales == [1.0, 2.5]
    assert not [r for r in results if r.scale == 2.5 and r.variant == "base"][0].completed
    peaks = {r.scale: r.peak_lateral_accel for r in results}
    assert peaks[2.5] == pytest.approx(6.25 * peaks[1.0], rel=1e-12)


@pytest.mark.slow
def test_sweep_unit_factor_matches_fidelity(short_oval, tmp_path):
    common = dict(variants=["cog0"], repetitions=1, noise=False, base_seed=3)
    fid = bench.experiment_fidelity(bench.load_config(
        write_config(tmp_path / "f.json", short_oval, **common, out_dir=str(tmp_path / "f"))))
    sweep = bench.experiment_acceleration_sweep(bench.load_config(
        write_config(tmp_path / "s.json", short_oval, **common, scale_factors=[1.0], out_dir=str(tmp_path / "s"))))
    assert [(r.variant, r.d_max, r.disparity_baseline) for r in fid] == \
        [(r.variant, r.d_max, r.disparity_baseline) for r in sweep]


def test_timing_probe_summary():
    summary = bench.step_timing_probe(steps=200)
    assert summary.steps == 200
    assert summary.max_us >= summary.p99_us >= 0 and summary.max_us >= summary.mean_us > 0
    assert any("budget" in line for line in summary.lines())
    with pytest.raises(ConfigurationError):
        bench.step_timing_probe(steps=0)
