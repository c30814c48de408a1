import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from tactile_climb.gait import AV_MAX
from tactile_climb.harness import (FIGURES, PRESETS, Scenario, ScenarioError, _make, emit_figure_data,
                                   floating_sequence, load_scenario, main, parse_terrain, preset,
                                   read_trace, recompute_duties, run_batch, scenario_from_dict,
                                   trial_offsets, write_trace)
from tactile_climb.sim import run_trial


@pytest.fixture(scope="module")
def short_record():
    return run_trial(_make("box:0.15", "feedback", math.pi / 9, 4))


def write_json(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return p


def test_minimal_file_gets_defaults(tmp_path):
    sc = load_scenario(write_json(tmp_path, {"terrain": "box:0.15", "controller": "feedback"}))
    assert sc.gait.Theta_leg == pytest.approx(math.pi / 6)
    assert sc.gait.Theta_body == pytest.approx(math.pi / 18)
    assert sc.gait.A_v == pytest.approx(math.pi / 9)
    assert sc.gait.xi == 1.5
    assert sc.start_offset == 0.05 and sc.cycles == 14
    assert sc.terrain.max_height == pytest.approx(0.15)


def test_missing_terrain(tmp_path):
    with pytest.raises(ScenarioError) as err:
        load_scenario(write_json(tmp_path, {"controller": "feedback"}))
    assert any("terrain" in p for p in err.value.problems)


def test_stability_limit_rejected(tmp_path):
    with pytest.raises(ScenarioError) as err:
        load_scenario(write_json(tmp_path, {"terrain": "box:0.15", "gait": {"A_v": 0.8}}))
    assert any("stability limit" in p for p in err.value.problems)


def test_problems_listed_exhaustively(tmp_path):
    bad = {"terrain": "box:0.15", "gait": {"A_v": 0.8}, "controller": "fly", "cycles": 0,
           "robot": {"mu": -1}, "extra": 1}
    with pytest.raises(ScenarioError) as err:
        load_scenario(write_json(tmp_path, bad))
    text = " | ".join(err.value.problems)
    for key in ("extra", "robot", "gait", "controller", "cycles"):
        assert key in text


def test_parse_error_reports_line(tmp_path):
    with pytest.raises(ScenarioError) as err:
        load_scenario(write_json(tmp_path, '{\n  "terrain": "box:0.15",\n  oops\n}'))
    assert "line 3" in err.value.problems[0]


@pytest.mark.parametrize("spec,height", [("flat", 0.0), ("box:0.2", 0.2), ("box:0.1:0.3", 0.1),
                                         ("boxes:0.15,0.13:0.5", 0.15), ("cylinders:60deg:0.25", 0.25)])
def test_parse_terrain(spec, height):
    assert parse_terrain(spec).max_height == pytest.approx(height)


@pytest.mark.parametrize("spec", ["", "pyramid:1", "box", "box:a", "boxes:0.1"])
def test_parse_terrain_rejects(spec):
    with pytest.raises(ValueError):
        parse_terrain(spec)


def test_scenario_dict_round_trip():
    sc = _make("box:0.1", "open_loop", AV_MAX, 10)
    again = scenario_from_dict(sc.to_dict())
    assert again == sc


def test_presets():
    assert len(preset("fig5")) == 6
    assert {s.controller for s in preset("fig5")} == {"open_loop"}
    assert all(s.cycles == 14 for s in preset("fig9_box"))
    assert len(preset("sweep")) == 15
    for name in PRESETS:
        assert preset(name)
    with pytest.raises(KeyError):
        preset("nope")


def test_trace_round_trip_and_duties(short_record, tmp_path):
    path = tmp_path / "t.csv"
    write_trace(short_record, path)
    back = read_trace(path)
    assert set(back.columns) == set(short_record.columns)
    for k, v in short_record.columns.items():
        got = back.columns[k]
        if k in ("z_max", "z_min"):
            assert np.array_equal(np.asarray(got), np.asarray(v), equal_nan=True)
        else:
            assert got == [type(g)(x) for g, x in zip(got, v)]
    duties = recompute_duties(back)
    for s in range(1, 7):
        assert np.array_equal(duties[:, s - 1], np.asarray(short_record.columns[f"duty_{s}"]))


def test_read_trace_rejects_bad_header():
    with pytest.raises(ValueError):
        read_trace(io.StringIO("a,b\n1,2\n"))
    with pytest.raises(ValueError):
        read_trace(io.StringIO(""))


def test_fig8_export(short_record):
    rows = list(csv.DictReader(io.StringIO(emit_figure_data(short_record, "fig8"))))
    assert len(rows) == len(short_record)
    assert {"t", "z_max", "z_min", "head_angle", "D2", "D5", "F2", "F5"} <= set(rows[0])
    for r in rows:
        assert not math.isnan(float(r["z_max"])) and not math.isnan(float(r["z_min"]))
        for s in range(2, 6):
            assert r[f"F{s}"] == str(int(float(r[f"D{s}"]) < 0.2))


def test_fig5_flat_export():
    rec = run_trial(_make("flat", "open_loop", AV_MAX, 3))
    rows = list(csv.DictReader(io.StringIO(emit_figure_data(rec, "fig5"))))
    x = np.array([float(r["x"]) for r in rows])
    z = np.array([float(r["z"]) for r in rows])
    assert list(rows[0]) == ["t", "x", "z"]
    assert np.all(np.diff(x) >= 0) and x[-1] > x[0]
    assert z.max() - z.min() > 0.005
    assert np.sum(np.diff(np.sign(np.diff(z))) != 0) >= 4  # oscillates with the wave


def test_fig9_box_end_state():
    # a budget long enough for the whole body to come down the far side
    sc = _make("box:0.2", "feedback", math.pi / 9, 30)
    rec = run_trial(sc)
    rows = list(csv.DictReader(io.StringIO(emit_figure_data(rec, "fig9"))))
    z0, zf, xf = float(rows[0]["z"]), float(rows[-1]["z"]), float(rows[-1]["x"])
    assert xf > sc.terrain.far_edge
    assert sc.terrain.g(xf) == 0.0
    assert abs(zf - z0) < 0.02


def test_unknown_figure(short_record):
    with pytest.raises(ValueError):
        emit_figure_data(short_record, "fig99")
    assert set(FIGURES) == {"fig5", "fig8", "fig9", "fig11"}


def test_floating_sequence_of_constructed_record(short_record):
    fake = type(short_record)({"pitch_joint": [0, 1, 1, 2, 0, 3, 4, 4, 1],
                               "mode": ["drag"] * 8 + ["raise_up"], "tick": list(range(9))}, {})
    assert floating_sequence(fake) == [2, 3, 4, 5]
    assert floating_sequence(fake, stop_tick=3) == [2, 3]


def test_trial_offsets():
    rng = np.random.default_rng(1)
    offs = trial_offsets(0.05, 10, rng)
    assert offs[0] == 0.05
    assert all(abs(o - 0.05) <= 0.005 for o in offs)
    assert trial_offsets(0.05, 0, rng) == []


def test_batch_deterministic_and_files(tmp_path):
    scs = [_make("box:0.05", "open_loop", 0.0, 2), _make("box:0.05", "open_loop", 0.0, 2)]
    a = run_batch(scs, 2, seed=7, out=tmp_path / "a")
    b = run_batch(scs, 2, seed=7)
    strip = [{k: v for k, v in r.items() if k != "wall_time"} for r in a.trials]
    assert strip == [{k: v for k, v in r.items() if k != "wall_time"} for r in b.trials]
    assert len(a.table) == 2 and all(0 <= r["success_rate"] <= 1 for r in a.table)
    traces = sorted((tmp_path / "a" / "traces").glob("*.csv"))
    assert len(traces) == 4
    assert (tmp_path / "a" / "aggregate.csv").exists()
    assert json.loads((tmp_path / "a" / "summary.json").read_text())["table"]


def test_batch_edge_cases():
    sc = _make("box:0.05", "open_loop", 0.0, 1)
    empty = run_batch([sc], 0, seed=0)
    assert empty.trials == [] and empty.table == []
    with pytest.raises(ValueError):
        run_batch([], 1, seed=0)


def test_batch_records_trial_failures():
    broken = Scenario(name="broken", terrain=parse_terrain("box:0.05"), cycles=1)
    object.__setattr__(broken, "controller", "dance")
    out = run_batch([broken, _make("box:0.05", "open_loop", 0.0, 1)], 1, seed=0)
    assert out.trials[0]["error"] and not out.trials[0]["success"]
    assert out.trials[1]["error"] is None


def test_cli_commands(tmp_path, capsys):
    assert main(["bounds"]) == 0
    text = capsys.readouterr().out
    assert "0.2400" in text and "0.3443" in text
    assert main(["run", "--terrain", "box:0.05", "--controller", "open_loop", "--av-deg", "0",
                 "--cycles", "2", "--out", str(tmp_path)]) == 0
    trace = next(tmp_path.glob("*.csv"))
    assert main(["export", str(trace), "--figure", "fig8", "--out", str(tmp_path / "fig")]) == 0
    assert main(["batch", "fig5", "--trials", "0", "--out", str(tmp_path / "b")]) == 0
    bad = write_json(tmp_path, {"terrain": "box:0.1", "gait": {"A_v": 0.8}}, "bad.json")
    assert main(["run", str(bad)]) == 2
    assert "stability limit" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "tactile_climb", "bounds", "--mu", "1.0"],
                         capture_output=True, text=True, check=True)
    assert "bound_friction" in out.stdout
