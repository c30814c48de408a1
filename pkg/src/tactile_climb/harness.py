"""Scenario files, batch trials, trace and figure-data export, and the command line."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bounds import bound_friction, bound_geometry, capacity_from_robot, derived_h0, max_climb_height
from .control import OPEN_LOOP, HeadControllerParams, PitchDownParams, duty_factors
from .gait import AV_MAX, GaitParams
from .morphology import (RobotConfig, TerrainProfile, flat_course, make_box_course,
                         make_cylinder_stack_course, make_multi_box_course)
from .sensing import TICKS_PER_CYCLE, AntennaConfig
from .sim import TrialRecord, run_trial, trace_header

CONTROLLERS = (OPEN_LOOP, "feedback")
FIGURES = ("fig5", "fig8", "fig9", "fig11")
PERTURBATION = 0.005  # half-width of the start-offset jitter for repeated trials, meters
SCENARIO_KEYS = ("name", "terrain", "robot", "gait", "antenna", "head", "pitch", "controller",
                 "cycles", "start_offset")


class ScenarioError(ValueError):
    """Raised with every problem found in a scenario description."""

    def __init__(self, problems: Sequence[str], source: str = "scenario"):
        self.problems = list(problems)
        self.source = source
        super().__init__(f"{source}: " + "; ".join(self.problems))


@dataclass(frozen=True)
class Scenario:
    name: str
    terrain: TerrainProfile
    robot: RobotConfig = field(default_factory=RobotConfig)
    gait: GaitParams = field(default_factory=GaitParams)
    antenna: AntennaConfig = field(default_factory=AntennaConfig)
    head: HeadControllerParams = field(default_factory=HeadControllerParams)
    pitch: PitchDownParams = field(default_factory=PitchDownParams)
    controller: str = "feedback"
    cycles: int = 14
    start_offset: float = 0.05
    terrain_spec: Optional[str] = None

    def __post_init__(self):
        bad = self.problems()
        if bad:
            raise ScenarioError(bad, self.name or "scenario")

    def problems(self) -> list[str]:
        out = []
        if self.controller not in CONTROLLERS:
            out.append(f"controller: must be one of {', '.join(CONTROLLERS)}, got {self.controller!r}")
        if not isinstance(self.cycles, int) or isinstance(self.cycles, bool) or self.cycles < 1:
            out.append(f"cycles: must be an integer >= 1, got {self.cycles!r}")
        if not isinstance(self.start_offset, (int, float)) or not self.start_offset >= 0:
            out.append(f"start_offset: must be a non-negative number, got {self.start_offset!r}")
        if self.gait.n != self.robot.n_segments:
            out.append(f"gait.n ({self.gait.n}) must equal robot.n_segments ({self.robot.n_segments})")
        if not math.isclose(self.antenna.La, self.robot.La):
            out.append("antenna.La must equal robot.La")
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "terrain": self.terrain_spec if self.terrain_spec else self.terrain.to_dict(),
            "robot": self.robot.to_dict(),
            "gait": self.gait.to_dict(),
            "antenna": asdict(self.antenna),
            "head": asdict(self.head),
            "pitch": asdict(self.pitch),
            "controller": self.controller,
            "cycles": self.cycles,
            "start_offset": self.start_offset,
        }


# ---------------------------------------------------------------------------
# terrain specs


def _numbers(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"{what} must be numbers, got {text!r}") from None


def parse_terrain(spec) -> TerrainProfile:
    """Build a course from a short spec string or a vertex dictionary.

    Accepted strings: ``flat[:LENGTH]``, ``box:HEIGHT[:WIDTH]``,
    ``boxes:H1,H2,...:GAP1,...`` and ``cylinders:SLOPE_DEG:TOP[:BASE]``.
    """
    if isinstance(spec, dict):
        return TerrainProfile.from_dict(spec)
    if not isinstance(spec, str) or not spec.strip():
        raise ValueError("terrain must be a spec string or an object with vertices")
    kind, *args = spec.strip().split(":")
    kind = kind.lower()
    if kind == "flat":
        return flat_course(*_numbers(",".join(args), "flat length")) if args else flat_course()
    if kind == "box":
        if not 1 <= len(args) <= 2:
            raise ValueError("box spec is box:HEIGHT[:WIDTH]")
        vals = [_numbers(a, "box size")[0] for a in args]
        return make_box_course(vals[0], *vals[1:])
    if kind == "boxes":
        if len(args) != 2:
            raise ValueError("boxes spec is boxes:H1,H2,...:GAP1,...")
        return make_multi_box_course(_numbers(args[0], "box heights"), _numbers(args[1], "gaps"))
    if kind in ("cylinders", "cylinder"):
        if not 2 <= len(args) <= 3:
            raise ValueError("cylinders spec is cylinders:SLOPE_DEG:TOP[:BASE]")
        slope = _numbers(args[0].lower().removesuffix("deg"), "slope")[0]
        top = _numbers(args[1], "top height")[0]
        base = _numbers(args[2], "base height")[0] if len(args) == 3 else 0.0
        return make_cylinder_stack_course(base, slope, top)
    raise ValueError(f"unknown terrain kind {kind!r}")


# ---------------------------------------------------------------------------
# scenario loading


def _section(cls, data, label: str, problems: list, **defaults):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        problems.append(f"{label}: expected an object, got {type(data).__name__}")
        return None
    known = {f.name for f in fields(cls)}
    for key in sorted(set(data) - known):
        problems.append(f"{label}.{key}: unknown key")
    kwargs = {**defaults, **{k: v for k, v in data.items() if k in known}}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        problems.append(f"{label}: {exc}")
        return None


def scenario_from_dict(data, source: str = "scenario") -> Scenario:
    """Validate a parsed scenario document, filling defaults for absent sections."""
    if not isinstance(data, dict):
        raise ScenarioError(["top level must be a JSON object"], source)
    problems = [f"{k}: unknown key" for k in sorted(set(data) - set(SCENARIO_KEYS))]

    terrain = None
    spec = data.get("terrain")
    if spec is None:
        problems.append("terrain: missing required key")
    else:
        try:
            terrain = parse_terrain(spec)
        except (TypeError, ValueError, KeyError) as exc:
            problems.append(f"terrain: {exc}")

    robot = _section(RobotConfig, data.get("robot"), "robot", problems)
    n = robot.n_segments if robot is not None else RobotConfig().n_segments
    gait = _section(GaitParams, data.get("gait"), "gait", problems, n=n)
    la = robot.La if robot is not None else RobotConfig().La
    antenna = _section(AntennaConfig, data.get("antenna"), "antenna", problems, La=la)
    head = _section(HeadControllerParams, data.get("head"), "head", problems)
    pitch = _section(PitchDownParams, data.get("pitch"), "pitch", problems)

    controller = data.get("controller", "feedback")
    cycles = data.get("cycles", 14)
    offset = data.get("start_offset", 0.05)
    name = data.get("name") or (f"{terrain.name}/{controller}" if terrain is not None else "")
    if not isinstance(name, str):
        problems.append("name: must be a string")

    scenario = None
    if all(p is not None for p in (terrain, robot, gait, antenna, head, pitch)):
        try:
            scenario = Scenario(name=name, terrain=terrain, robot=robot, gait=gait, antenna=antenna,
                                head=head, pitch=pitch, controller=controller, cycles=cycles,
                                start_offset=offset, terrain_spec=spec if isinstance(spec, str) else None)
        except ScenarioError as exc:
            problems += exc.problems
    else:
        if controller not in CONTROLLERS:
            problems.append(f"controller: must be one of {', '.join(CONTROLLERS)}, got {controller!r}")
        if not isinstance(cycles, int) or isinstance(cycles, bool) or cycles < 1:
            problems.append(f"cycles: must be an integer >= 1, got {cycles!r}")
    if problems:
        raise ScenarioError(problems, source)
    return scenario


def load_scenario(path) -> Scenario:
    """Read and validate a JSON scenario file."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"line {exc.lineno}, column {exc.colno}: {exc.msg}"], str(path)) from None
    return scenario_from_dict(data, str(path))


# ---------------------------------------------------------------------------
# presets


def _make(terrain_spec: str, controller: str, A_v: float, cycles: int, label: str = "") -> Scenario:
    terrain = parse_terrain(terrain_spec)
    name = label or f"{terrain.name}/{controller}/Av={math.degrees(A_v):.0f}deg"
    return Scenario(name=name, terrain=terrain, gait=GaitParams(A_v=A_v), controller=controller,
                    cycles=cycles, terrain_spec=terrain_spec)


SWEEP_HEIGHTS = (0.05, 0.10, 0.15, 0.20, 0.26)


def preset(name: str) -> list[Scenario]:
    """Scenario lists reproducing the experiment protocols."""
    if name == "fig5":
        return [_make(f"box:{h:g}", OPEN_LOOP, av, 10) for h in (0.05, 0.10, 0.15) for av in (0.0, AV_MAX)]
    if name == "fig9_box":
        return [_make(f"box:{h:g}", "feedback", math.pi / 9, 14) for h in (0.15, 0.20)]
    if name == "fig9_cylinder":
        return [_make("cylinders:60:0.25", "feedback", math.pi / 9, 10)]
    if name == "two_obstacles":
        return [_make("boxes:0.15,0.13:0.5", "feedback", math.pi / 9, 30)]
    if name == "sweep":
        out = []
        for controller, av, cycles in ((OPEN_LOOP, 0.0, 10), (OPEN_LOOP, AV_MAX, 10),
                                       ("feedback", math.pi / 9, 14)):
            out += [_make(f"box:{h:g}", controller, av, cycles) for h in SWEEP_HEIGHTS]
        return out
    raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("fig5", "fig9_box", "fig9_cylinder", "two_obstacles", "sweep")


# ---------------------------------------------------------------------------
# traces

_INT_COLS = {"tick", "hit", "pitch_joint", "blocked"}
_STR_COLS = {"mode", "pivot"}


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _parse(name: str, text: str):
    if name in _STR_COLS:
        return text
    if name in _INT_COLS or name.startswith("contact_"):
        return int(text)
    return float(text)


def write_trace(record: TrialRecord, dest) -> None:
    """Write the per-tick trace as CSV; floats keep their full repr so reloads are exact."""
    header = trace_header(record.segment_count)
    own = not hasattr(dest, "write")
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(len(record)):
            w.writerow([_cell(record.columns[h][k]) for h in header])
    finally:
        if own:
            fh.close()


def read_trace(src) -> TrialRecord:
    own = not hasattr(src, "read")
    fh = open(src, newline="") if own else src
    try:
        rows = list(csv.reader(fh))
    finally:
        if own:
            fh.close()
    if not rows:
        raise ValueError("empty trace")
    header = rows[0]
    n_seg = sum(1 for h in header if h.startswith("duty_"))
    if header != trace_header(n_seg):
        raise ValueError("trace header does not match the expected layout")
    cols = {h: [] for h in header}
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"line {line_no}: expected {len(header)} fields, got {len(row)}")
        for h, text in zip(header, row):
            cols[h].append(_parse(h, text))
    return TrialRecord(cols, {}, n_seg)


def recompute_duties(record: TrialRecord, cycle: int = TICKS_PER_CYCLE) -> np.ndarray:
    """Duty factors per tick rebuilt from the logged contact columns."""
    n = record.segment_count
    contacts = np.array([[record.columns[f"contact_{s}{side}"][k] for s in range(1, n + 1) for side in "LR"]
                         for k in range(len(record))], dtype=bool)
    out = np.empty((len(record), n))
    for k in range(len(record)):
        window = contacts[max(0, k - cycle + 1):k + 1]
        out[k] = duty_factors(window.T.tolist(), 2, cycle).values
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(float(obj)) else float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_summary(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# figure data


def emit_figure_data(record: TrialRecord, figure: str, duty_threshold: float = 0.2) -> str:
    """CSV text shaped for one figure.

    ``fig8`` gives the estimator outputs (absent values as 0), the commanded
    and realized head angle, the controller mode and the duty factor of every
    body segment between head and tail with a floating flag. The other
    figures give the head-joint trajectory.
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    c = record.columns
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if figure == "fig8":
        mids = range(2, record.segment_count)
        w.writerow(["t", "z_max", "z_min", "head_angle", "theta_1", "mode"]
                   + [f"D{s}" for s in mids] + [f"F{s}" for s in mids])
        for k in range(len(record)):
            zmax, zmin = c["z_max"][k], c["z_min"][k]
            duties = [c[f"duty_{s}"][k] for s in mids]
            w.writerow([_cell(c["t"][k]), _cell(0.0 if math.isnan(zmax) else zmax),
                        _cell(0.0 if math.isnan(zmin) else zmin), _cell(c["head_cmd"][k]),
                        _cell(c["theta_1"][k]), c["mode"][k]]
                       + [_cell(d) for d in duties] + [int(d < duty_threshold) for d in duties])
    else:
        w.writerow(["t", "x", "z"])
        for k in range(len(record)):
            w.writerow([_cell(c["t"][k]), _cell(c["x_head"][k]), _cell(c["z_head"][k])])
    return buf.getvalue()


def floating_sequence(record: TrialRecord, mode: str = "drag", stop_tick: Optional[int] = None) -> list[int]:
    """Distinct successive floating-segment indices chosen while the head is in ``mode``."""
    c = record.columns
    seq = []
    end = len(record) if stop_tick is None else min(len(record), stop_tick + 1)
    for k in range(end):
        j = c["pitch_joint"][k]
        if c["mode"][k] == mode and j:
            if not seq or seq[-1] != j + 1:
                seq.append(j + 1)
    return seq


# ---------------------------------------------------------------------------
# batches


def slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", text).strip("_")


def trial_offsets(base: float, trials: int, rng: np.random.Generator) -> list[float]:
    """First trial at the nominal offset, later ones jittered by up to PERTURBATION."""
    if trials <= 0:
        return []
    jitter = rng.uniform(-PERTURBATION, PERTURBATION, size=trials - 1)
    return [base] + [max(0.0, base + float(j)) for j in jitter]


def _run_one(scenario: Scenario, offset: float):
    try:
        return run_trial(scenario, start_offset=offset), None
    except Exception as exc:  # recorded, the batch goes on
        return None, f"{type(exc).__name__}: {exc}"


@dataclass
class BatchSummary:
    trials: list = field(default_factory=list)
    table: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"trials": self.trials, "table": self.table}


def run_batch(scenarios: Sequence[Scenario], trials_per_scenario: int, seed: int,
              out: Optional[Path] = None, workers: int = 1) -> BatchSummary:
    """Run every scenario ``trials_per_scenario`` times and tabulate success.

    Trials after the first get a seeded start-offset perturbation. Traces and
    tables are written by this process only, after the trials return.
    """
    if not scenarios:
        raise ValueError("need at least one scenario")
    if trials_per_scenario <= 0:
        return BatchSummary()
    rng = np.random.default_rng(seed)
    jobs = [(i, sc, k, off) for i, sc in enumerate(scenarios)
            for k, off in enumerate(trial_offsets(sc.start_offset, trials_per_scenario, rng))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, [j[1] for j in jobs], [j[3] for j in jobs]))
    else:
        results = [_run_one(sc, off) for _, sc, _, off in jobs]

    summary = BatchSummary()
    if out is not None:
        out = Path(out)
        (out / "traces").mkdir(parents=True, exist_ok=True)
    for (i, sc, k, off), (rec, err) in zip(jobs, results):
        row = {"index": i, "scenario": sc.name, "trial": k, "start_offset": off, "error": err}
        if rec is not None:
            s = rec.summary
            row.update(success=s["success"], stuck=s["stuck"], cycles_used=s["cycles_used"],
                       total_dx=s["total_dx"], max_height=s["max_height"], wall_time=s["wall_time"])
            if out is not None:
                write_trace(rec, out / "traces" / f"{i:02d}_{slug(sc.name)}_trial{k}.csv")
        else:
            row.update(success=False, stuck=False, cycles_used=None, total_dx=math.nan,
                       max_height=math.nan, wall_time=math.nan)
        summary.trials.append(row)

    for i, sc in enumerate(scenarios):
        rows = [r for r in summary.trials if r["index"] == i]
        dx = [r["total_dx"] for r in rows if r["error"] is None]
        summary.table.append({
            "scenario": sc.name,
            "trials": len(rows),
            "successes": sum(bool(r["success"]) for r in rows),
            "success_rate": sum(bool(r["success"]) for r in rows) / len(rows),
            "mean_dx": float(np.mean(dx)) if dx else math.nan,
        })
    if out is not None:
        with open(out / "aggregate.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(summary.table[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(summary.table)
        write_summary(summary.to_dict(), out / "summary.json")
    return summary


def format_table(table: Sequence[dict]) -> str:
    lines = [f"{'scenario':44s} {'trials':>6s} {'success':>8s} {'mean dx':>8s}"]
    for r in table:
        lines.append(f"{r['scenario']:44s} {r['trials']:6d} {r['success_rate']:8.2f} {r['mean_dx']:8.3f}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# command line


def _scenario_from_args(args) -> Scenario:
    if args.scenario:
        sc = load_scenario(args.scenario)
    else:
        sc = scenario_from_dict({"terrain": args.terrain, "controller": args.controller,
                                 "gait": {"A_v": math.radians(args.av_deg)}}, "command line")
    if args.cycles is not None:
        sc = replace(sc, cycles=args.cycles)
    return sc


def _cmd_run(args) -> int:
    sc = _scenario_from_args(args)
    offset = sc.start_offset
    if args.seed is not None:
        offset = trial_offsets(sc.start_offset, 2, np.random.default_rng(args.seed))[1]
    rec = run_trial(sc, start_offset=offset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(rec, out / f"{slug(sc.name)}.csv")
    write_summary(rec.summary, out / f"{slug(sc.name)}.json")
    s = rec.summary
    print(f"{sc.name}: success={s['success']} stuck={s['stuck']} cycles_used={s['cycles_used']} "
          f"dx={s['total_dx']:.3f} m max_z={s['max_height']:.3f} m")
    return 0


def _cmd_batch(args) -> int:
    scenarios = []
    for item in args.items:
        scenarios += preset(item) if item in PRESETS else [load_scenario(item)]
    if args.cycles is not None:
        scenarios = [replace(sc, cycles=args.cycles) for sc in scenarios]
    summary = run_batch(scenarios, args.trials, args.seed, Path(args.out), args.workers)
    if summary.table:
        print(format_table(summary.table))
    else:
        print("no trials requested")
    return 0


def _cmd_bounds(args) -> int:
    robot = RobotConfig(mu=args.mu)
    h0 = args.h0 if args.h0 is not None else 0.07
    inp = capacity_from_robot(robot, h0)
    report = {
        "h0": inp.h0, "Lc": inp.Lc, "Lh": inp.Lh, "mu": inp.mu, "L": inp.L,
        "bound_geometry": bound_geometry(inp),
        "bound_friction": bound_friction(inp),
        "max_climb_height": max_climb_height(inp),
        "h0_from_wave": derived_h0(robot, args.av_deg * math.pi / 180),
    }
    for k, v in report.items():
        print(f"{k:18s} {v:.4f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_summary(report, out / "bounds.json")
    return 0


def _cmd_export(args) -> int:
    if args.source.endswith(".csv"):
        rec = read_trace(args.source)
        stem = Path(args.source).stem
    else:
        args.scenario = args.source
        sc = _scenario_from_args(args)
        rec = run_trial(sc)
        stem = slug(sc.name)
    text = emit_figure_data(rec, args.figure)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}_{args.figure}.csv"
    path.write_text(text)
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tactile-climb", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, trials=False):
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=None if not trials else 0)
        sp.add_argument("--cycles", type=int, default=None, help="override the cycle budget")
        if trials:
            sp.add_argument("--trials", type=int, default=1)
            sp.add_argument("--workers", type=int, default=1)

    r = sub.add_parser("run", help="run one scenario")
    r.add_argument("scenario", nargs="?", help="scenario JSON file")
    r.add_argument("--terrain", default="box:0.15", help="terrain spec when no file is given")
    r.add_argument("--controller", choices=CONTROLLERS, default="feedback")
    r.add_argument("--av-deg", type=float, default=20.0, help="vertical wave amplitude, degrees")
    common(r)
    r.set_defaults(func=_cmd_run)

    b = sub.add_parser("batch", help="run presets or scenario files several times")
    b.add_argument("items", nargs="+", help=f"preset ({', '.join(PRESETS)}) or scenario file")
    common(b, trials=True)
    b.set_defaults(func=_cmd_batch)

    c = sub.add_parser("bounds", help="climbing-capacity report")
    c.add_argument("--h0", type=float, default=None)
    c.add_argument("--mu", type=float, default=0.5)
    c.add_argument("--av-deg", type=float, default=20.0)
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_bounds)

    e = sub.add_parser("export", help="figure data from a trace CSV or a scenario file")
    e.add_argument("source")
    e.add_argument("--figure", choices=FIGURES, required=True)
    e.add_argument("--terrain", default="box:0.15")
    e.add_argument("--controller", choices=CONTROLLERS, default="feedback")
    e.add_argument("--av-deg", type=float, default=20.0)
    common(e)
    e.set_defaults(func=_cmd_export)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc.source}", file=sys.stderr)
        for msg in exc.problems:
            print(f"  - {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
