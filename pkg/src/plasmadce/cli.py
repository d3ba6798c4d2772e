"""Command-line front end: ``plasmadce {simulate,sweep,plan,detect}``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
Data files are deterministic; run metadata goes to the ``run.json`` sidecar.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import enum
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__, _accel
from .cavity_modes import (
    Constant,
    CouplingSchedule,
    SlabCavityConfig,
    default_schedule,
    pulsed_surface_density,
    to_instantaneous,
)
from .config import PRESETS, ConfigError, ScenarioConfig, load
from .detection import CONDITION_COLUMNS, AtomFieldParams, excitation_during_dce, feasibility, kappa_from_dipole
from .planner import ConfigurationError, PlanInput, plan
from .squeezing import (
    CavityLoss,
    DriveSpec,
    IntegrationError,
    dce_threshold,
    effective_squeezing_rate,
    integrate,
    rwa_photon_number,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

SERIES_COLUMNS = ["t", "n_pulse", "n_canonical", "n_instantaneous", "n_rwa", "n_e"]
SUMMARY_COLUMNS = [
    "case", "detuning", "drive_frequency", "chi_real", "chi_imag", "branch",
    "n_canonical", "n_instantaneous", "n_rwa", "max_invariant_error",
    "threshold_ok", "detection_ok", "n_e_transit",
]


class NumericalFailure(RuntimeError):
    pass


# -- formatting ----------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, complex):
        return {"real": obj.real, "imag": obj.imag}
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


# -- scenario -> model objects --------------------------------------------------

@dataclass(frozen=True)
class PeriodicTable:
    """Periodic linear interpolation of a sampled waveform over one period."""

    t: np.ndarray
    values: np.ndarray
    period: float

    def __call__(self, t):
        tt = np.mod(np.asarray(t, dtype=float), self.period)
        if np.iscomplexobj(self.values):
            return (np.interp(tt, self.t, self.values.real, period=self.period)
                    + 1j * np.interp(tt, self.t, self.values.imag, period=self.period))
        return np.interp(tt, self.t, self.values, period=self.period)


def _load_table(path: str, period: float):
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read waveform table: {exc}", path) from None
    if data.shape[1] != 4 or data.shape[0] < 2:
        raise ConfigError("waveform table needs columns t,delta_omega,g_re,g_im and >= 2 rows", path)
    t = data[:, 0]
    if np.any(np.diff(t) <= 0):
        raise ConfigError("waveform table times must be strictly increasing", path)
    return PeriodicTable(t, data[:, 1], period), PeriodicTable(t, data[:, 2] + 1j * data[:, 3], period)


@dataclass(frozen=True)
class Case:
    index: int
    detuning: float
    drive: DriveSpec
    schedule: CouplingSchedule


def drive_cases(cfg: ScenarioConfig) -> List[Case]:
    d = cfg.values["drive"]
    cases = []
    for i, detuning in enumerate(d["detuning"]):
        spec = DriveSpec(d["omega0"], d["mean_delta_omega"], 0.5 * d["two_g"], detuning, d["n_pulses"])
        if d["waveform"] == "table":
            dw, g = _load_table(d["table"], spec.period)
            schedule = CouplingSchedule(d["omega0"], dw, g, drive_frequency=spec.Omega)
            spec = DriveSpec.from_schedule(schedule, spec.Omega, d["n_pulses"])
        else:
            schedule = default_schedule(d["omega0"], d["mean_delta_omega"], d["two_g"], spec.Omega)
        cases.append(Case(i, detuning, spec, schedule))
    return cases


def atom_params(cfg: ScenarioConfig) -> AtomFieldParams:
    a = cfg.values["atoms"]
    w0 = a["omega0_si"]
    kappa = a["kappa"]
    if a["dipole"] is not None:
        kappa = kappa_from_dipole(a["dipole"], a["volume"], w0, a["mode_ratio"])
    rate = kappa if a["transit_rate"] is None else a["transit_rate"]
    return AtomFieldParams(kappa, a["n_ryd"], w0 + a["delta_e"], w0, 1.0 / rate,
                           CavityLoss(cfg.values["loss"]["q"], w0))


def slab_config(cfg: ScenarioConfig) -> SlabCavityConfig:
    s = cfg.values["slab"]
    k = s["mode_number"] * math.pi / s["cavity_length"]
    omega0 = math.sqrt((k**2 + s["k_perp"] ** 2) / s["epsilon0"])
    Omega = 2.0 * omega0 if s["drive_frequency"] is None else s["drive_frequency"]
    return SlabCavityConfig.standing_wave(
        s["mode_number"], s["cavity_length"],
        slab_position=s["slab_position"], slab_thickness=s["slab_thickness"],
        epsilon0=s["epsilon0"], epsilon1=Constant(s["epsilon1"]),
        surface_density=pulsed_surface_density(s["peak_surface_density"], Omega),
        e2_over_m=s["e2_over_m"], k_perp=s["k_perp"],
    )


def plan_input(cfg: ScenarioConfig) -> PlanInput:
    p = cfg.values["plan"]
    return PlanInput(
        target_n_gamma=p["target_n_gamma"],
        n_pulses=cfg.values["drive"]["n_pulses"],
        laser_energy=p["laser_energy"],
        r_omega=p["r_omega"],
        slab_cavity=slab_config(cfg) if p["use_slab"] else None,
        atoms=atom_params(cfg),
        drive_frequency=cfg.values["slab"]["drive_frequency"],
        slack=cfg.values["atoms"]["slack"],
    )


# -- computations ----------------------------------------------------------------

@dataclass
class CaseResult:
    series: list
    summary: list
    conditions: list


def run_case(cfg: ScenarioConfig, case: Case, atoms: AtomFieldParams) -> CaseResult:
    d = cfg.values["drive"]
    spp = d["steps_per_period"]
    stride = spp // d["rows_per_period"]
    step = case.drive.period / spp
    t_end = case.drive.t1
    results = {}
    for name in d["formulations"]:
        schedule = case.schedule if name == "canonical" else to_instantaneous(case.schedule)
        try:
            traj = integrate(schedule, t_end, step, sample_every=stride)
        except IntegrationError as exc:
            raise NumericalFailure(f"case {case.index} ({name}): {exc}") from None
        results[name] = traj
    first = next(iter(results.values()))
    t = first.t
    n_rwa = np.asarray(rwa_photon_number(case.drive, t), dtype=float)
    n_can = results["canonical"].photon_number() if "canonical" in results else None
    n_ins = results["instantaneous"].photon_number() if "instantaneous" in results else None
    reference = n_can if n_can is not None else n_ins
    if not np.all(np.isfinite(reference)):
        raise NumericalFailure(f"case {case.index}: non-finite photon number")
    n_e = excitation_during_dce(atoms, reference)

    series = []
    for i in range(t.size):
        series.append([
            t[i], first.n_pulse[i],
            None if n_can is None else n_can[i],
            None if n_ins is None else n_ins[i],
            n_rwa[i], n_e[i],
        ])
    chi = effective_squeezing_rate(case.drive)
    loss = CavityLoss(cfg.values["loss"]["q"], case.drive.omega0)
    report = feasibility(atoms, float(reference[-1]), slack=cfg.values["atoms"]["slack"])
    inv = max(float(np.max(tr.invariant_error())) for tr in results.values())
    summary = [
        case.index, case.detuning, case.drive.Omega, chi.real, chi.imag, case.drive.branch,
        None if n_can is None else n_can[-1],
        None if n_ins is None else n_ins[-1],
        n_rwa[-1], inv, dce_threshold(case.drive, loss), report.all_passed, report.n_e_at_transit,
    ]
    conditions = [[case.index] + c.row() for c in report.conditions]
    return CaseResult(series, summary, conditions)


def run_scenario(cfg: ScenarioConfig) -> List[CaseResult]:
    atoms = atom_params(cfg)
    with np.errstate(over="raise", invalid="raise"):
        try:
            return [run_case(cfg, case, atoms) for case in drive_cases(cfg)]
        except FloatingPointError as exc:
            raise NumericalFailure(str(exc)) from None


# -- output --------------------------------------------------------------------

@dataclass
class RunRecord:
    scenario_hash: str
    timestamp: str
    series: Dict[int, list]
    summary: list
    conditions: list
    files: List[str] = field(default_factory=list)


class Writer:
    """Collects file contents and writes them once the computation is done."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.files: Dict[str, str] = {}

    def add(self, name: str, text: str):
        self.files[name] = text

    def commit(self, cfg: ScenarioConfig, command: str) -> str:
        stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
        meta = {
            "command": command,
            "scenario_hash": cfg.digest(),
            "timestamp": stamp,
            "version": __version__,
            "backend": "numba" if _accel.USE_NUMBA else "numpy",
            "files": sorted(self.files),
        }
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            for name, text in sorted(self.files.items()):
                with open(self.out_dir / name, "w", newline="\n", encoding="utf-8") as fh:
                    fh.write(text)
            with open(self.out_dir / "run.json", "w", newline="\n", encoding="utf-8") as fh:
                fh.write(json_text(meta))
        except OSError as exc:
            raise ConfigError(f"cannot write output: {exc.strerror}", str(self.out_dir)) from None
        return stamp


def plot_script(cfg: ScenarioConfig, cases: Sequence[Case]) -> str:
    out = cfg.values["output"]
    formulations = cfg.values["drive"]["formulations"]
    lines = [
        f"# {out['title']}",
        "set datafile separator ','",
        "set key top left",
        "set xlabel 'N_{pulse}'",
        "set ylabel 'n_{/Symbol g}'",
        f"set title '{out['title']}'",
    ]
    if out["plot"] == "log":
        lines.append("set logscale y")
        lines.append("set format y '10^{%L}'")
    curves = []
    for case in cases:
        name = f"series_{case.index}.csv"
        label = f"Delta = {case.detuning!r}"
        if "canonical" in formulations:
            curves.append(f"'{name}' using 2:3 with lines lw 2 title 'canonical, {label}'")
        if "instantaneous" in formulations:
            curves.append(f"'{name}' using 2:4 with lines dt 2 title 'instantaneous, {label}'")
        curves.append(f"'{name}' using 2:5 with lines dt 3 title 'RWA, {label}'")
    lines.append("plot " + ", \\\n     ".join(curves))
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg: ScenarioConfig, out_dir: Optional[str] = None) -> RunRecord:
    cases = drive_cases(cfg)
    results = run_scenario(cfg)
    writer = Writer(Path(out_dir or cfg.values["output"]["dir"]))
    for case, res in zip(cases, results):
        writer.add(f"series_{case.index}.csv", csv_text(SERIES_COLUMNS, res.series))
    writer.add("summary.csv", csv_text(SUMMARY_COLUMNS, [r.summary for r in results]))
    writer.add("conditions.csv", csv_text(["case"] + CONDITION_COLUMNS, [c for r in results for c in r.conditions]))
    writer.add("plot.gp", plot_script(cfg, cases))
    writer.add("scenario.ini", cfg.echo())
    stamp = writer.commit(cfg, "simulate")
    return RunRecord(
        scenario_hash=cfg.digest(),
        timestamp=stamp,
        series={c.index: r.series for c, r in zip(cases, results)},
        summary=[r.summary for r in results],
        conditions=[c for r in results for c in r.conditions],
        files=sorted(writer.files),
    )


def _sweep_point(args):
    cfg, point = args
    for parameter, value in point:
        cfg = cfg.with_value(parameter, value)
    return [[v for _, v in point] + r.summary for r in run_scenario(cfg)]


def sweep_rows(cfg: ScenarioConfig, workers: int = 1) -> list:
    if not cfg.sweeps:
        raise ConfigError("sweep needs at least one [sweep:<section>.<key>] axis")
    axes = [(a.parameter, sorted(a.values)) for a in cfg.sweeps]
    grid = [tuple(zip([p for p, _ in axes], combo)) for combo in itertools.product(*[v for _, v in axes])]
    tasks = [(cfg, point) for point in grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_point, tasks))
    else:
        chunks = [_sweep_point(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def cmd_sweep(cfg: ScenarioConfig, out_dir: Optional[str] = None, workers: int = 1) -> list:
    rows = sweep_rows(cfg, workers)
    header = [a.parameter for a in cfg.sweeps] + SUMMARY_COLUMNS
    writer = Writer(Path(out_dir or cfg.values["output"]["dir"]))
    writer.add("sweep.csv", csv_text(header, rows))
    writer.add("scenario.ini", cfg.echo())
    writer.commit(cfg, "sweep")
    return rows


def cmd_plan(cfg: ScenarioConfig, out_dir: Optional[str] = None):
    report = plan(plan_input(cfg), simulate=cfg.values["plan"]["simulate"])
    writer = Writer(Path(out_dir or cfg.values["output"]["dir"]))
    writer.add("plan.json", json_text(report.to_dict()))
    writer.add("conditions.csv", csv_text(CONDITION_COLUMNS, [c.row() for c in report.detection.conditions]))
    writer.add("scenario.ini", cfg.echo())
    writer.commit(cfg, "plan")
    return report


def cmd_detect(cfg: ScenarioConfig, n_gamma: Optional[float] = None, out_dir: Optional[str] = None):
    n = cfg.values["detect"]["n_gamma"] if n_gamma is None else n_gamma
    report = feasibility(atom_params(cfg), n, slack=cfg.values["atoms"]["slack"])
    writer = Writer(Path(out_dir or cfg.values["output"]["dir"]))
    writer.add("detection.json", json_text(report.to_dict()))
    writer.add("conditions.csv", csv_text(CONDITION_COLUMNS, [c.row() for c in report.conditions]))
    writer.add("scenario.ini", cfg.echo())
    writer.commit(cfg, "detect")
    return report


# -- argument parsing --------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario file")
    common.add_argument("--preset", choices=PRESETS, help="built-in scenario, overridden by --config")
    common.add_argument("--out", metavar="DIR", help="output directory (default: [output] dir)")
    common.add_argument("--workers", type=int, default=1, metavar="N", help="parallel sweep points")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override section.key (repeatable)")

    parser = _Parser(prog="plasmadce", description="Photon creation by a plasma mirror and its detection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="integrate the drive and write photon-number series")
    sub.add_parser("sweep", parents=[common], help="final photon numbers over a parameter grid")
    sub.add_parser("plan", parents=[common], help="laser budget to detection verdict")
    detect = sub.add_parser("detect", parents=[common], help="detection feasibility for a photon number")
    detect.add_argument("--n-gamma", type=float, help="photon number (default: [detect] n_gamma)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be at least 1")
    try:
        cfg = load(args.config, args.preset, args.overrides)
        if args.command == "simulate":
            record = cmd_simulate(cfg, args.out)
            for row in record.summary:
                print(f"case {row[0]}: detuning {_cell(row[1])}, final n_gamma {_cell(row[6] if row[6] is not None else row[7])}")
        elif args.command == "sweep":
            rows = cmd_sweep(cfg, args.out, args.workers)
            print(f"{len(rows)} rows written")
        elif args.command == "plan":
            report = cmd_plan(cfg, args.out)
            print(f"required chi/omega0 {report.required_chi_over_omega0:.6g}, achieved {report.achieved_chi:.6g}, "
                  f"predicted n_gamma {report.predicted_n_gamma:.6g}, detection "
                  + ("pass" if report.detection.all_passed else "fail"))
        else:
            report = cmd_detect(cfg, args.n_gamma, args.out)
            print("detection " + ("pass" if report.all_passed else "fail")
                  + f", N_e(t_tr) {report.n_e_at_transit:.6g}")
    except (NumericalFailure, IntegrationError) as exc:
        print(f"plasmadce: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ConfigurationError, ValueError) as exc:
        print(f"plasmadce: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
