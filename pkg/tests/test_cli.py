import csv
import json
import shutil
import subprocess

import pytest

from racesim.cli import main


def test_gen_track_and_lap(tmp_path, capsys):
    track = tmp_path / "oval.csv"
    assert main(["gen", "track", "--preset", "oval", "--out", str(track)]) == 0
    assert track.exists() and (tmp_path / "oval.meta.json").exists()
    lap = tmp_path / "lap.csv"
    assert main(["gen", "lap", "--track", str(track), "--fraction", "0.5", "--out", str(lap)]) == 0
    assert "lap over" in capsys.readouterr().out


def test_gen_track_from_spec(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "kind": "road_course", "name": "square",
        "corners": [{"radius": 60, "angle_deg": 90}] * 4,
        "straights": [200, 200, 200, 200],
    }))
    assert main(["gen", "track", "--spec", str(spec), "--out", str(tmp_path / "sq.csv")]) == 0


def test_gen_infeasible_spec_fails_cleanly(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"kind": "oval", "radius": -5}))
    assert main(["gen", "track", "--spec", str(spec), "--out", str(tmp_path / "x.csv")]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path):
    assert main(["run", "--track", str(tmp_path / "none.csv"), "--lap", str(tmp_path / "none.csv")]) == 2


def test_bad_variant_rejected_by_parser():
    with pytest.raises(SystemExit):
        main(["timing", "--variant", "hovercraft"])


def test_timing(capsys):
    assert main(["timing", "--steps", "100"]) == 0
    out = capsys.readouterr().out
    assert "mean" in out and "budget" in out


@pytest.mark.slow
def test_run_writes_results(short_oval, tmp_path):
    out = tmp_path / "run"
    code = main(["run", "--track", str(short_oval[0]), "--lap", str(short_oval[1]), "--variant", "cog0",
                 "--out", str(out)])
    assert code == 0
    (row,) = list(csv.DictReader(open(out / "results.csv")))
    assert row["variant"] == "cog0" and row["completed"] == "1"
    assert (out / "trace_0.csv").exists()


@pytest.mark.slow
def test_console_script_bench(short_oval, tmp_path):
    exe = shutil.which("sim")
    if exe is None:
        pytest.skip("console script not installed")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"track": str(short_oval[0]), "lap": str(short_oval[1]),
                               "variants": ["no_delay"], "noise": False}))
    proc = subprocess.run([exe, "bench", "fidelity", "--config", str(cfg), "--out", str(tmp_path / "o"),
                           "--repetitions", "1"], capture_output=True, text=True, check=True)
    assert "2 runs, 0 not completed" in proc.stdout
