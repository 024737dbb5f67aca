"""Command-line interface: ``mmae-maneuver <subcommand> [options]``.

Every subcommand accepts ``--config FILE.json`` plus flags mirroring the
``ExperimentConfig`` fields; flags override values from the file.
Exit status: 0 on success, 2 config error, 3 numerical error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .errors import EXIT_CODES, ConfigError, ManeuverError
from .experiments import (ExperimentConfig, Stage, emit_report, emit_suite, identify, load_config,
                          load_report_json, run_case, run_suite, run_sweep, run_vehicle_eval,
                          sweep_table, write_table)
from .filter_core import StateVector
from .measurements import NoiseSpec, generate_from_vehicle, generate_many_from_model, read_series, write_series
from .motion_models import LaneChangeParams, ManeuverModel
from .vehicle_sim import lane_change_scenario

log = logging.getLogger("mmae_maneuver")


def _number_list(text: str):
    """``0.01`` -> 0.01, ``0.001,0.05,0.001,0.05`` -> list."""
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or comma-separated numbers, got {text!r}")
    return vals[0] if len(vals) == 1 else vals


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment config (overrides --config)")
    g.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    g.add_argument("--stage", choices=[s.value for s in Stage])
    g.add_argument("--maneuver", choices=["straight", "left", "right"])
    g.add_argument("--Q", type=_number_list, metavar="Q", help="scalar or 4 comma-separated diagonal values")
    g.add_argument("--R", type=_number_list, metavar="R", help="scalar or 2 comma-separated diagonal values")
    g.add_argument("--P0", type=_number_list, metavar="P0")
    g.add_argument("--x0", type=_number_list, metavar="X,VX,Y,VY")
    g.add_argument("--w-L", dest="w_L", type=float, help="lane width (m)")
    g.add_argument("--L", type=float, help="filter maneuver length (m)")
    g.add_argument("--Ts", type=float, help="sample period (s)")
    g.add_argument("--threshold", type=float, help="detection weight threshold")
    g.add_argument("--dwell", type=float, help="detection dwell (s)")
    g.add_argument("--n-seeds", dest="n_seeds", type=int)
    g.add_argument("--seed", type=int, help="first seed; seeds are seed..seed+n_seeds-1")
    g.add_argument("--run-duration", dest="run_duration", type=float)
    g.add_argument("--jacobian-mode", dest="jacobian_mode", choices=["published", "exact"])
    g.add_argument("--q-convention", dest="q_convention", choices=["rate", "per_step"])
    g.add_argument("--truth-process-noise", dest="truth_process_noise",
                   action=argparse.BooleanOptionalAction, default=None)


CONFIG_KEYS = ("stage", "maneuver", "Q", "R", "P0", "x0", "w_L", "L", "Ts", "n_seeds", "seed",
               "run_duration", "jacobian_mode", "q_convention", "truth_process_noise")


def _config_from_args(args, **forced) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        data = load_config(args.config).model_dump(exclude_unset=False)
    over = {k: getattr(args, k) for k in CONFIG_KEYS if getattr(args, k, None) is not None}
    det = dict(data.get("detection", {}))
    for k in ("threshold", "dwell"):
        if getattr(args, k, None) is not None:
            det[k] = getattr(args, k)
    if det:
        over["detection"] = det
    over.update(forced)
    return load_config(data, **over)


def _out_dir(args) -> Path:
    return Path(args.out_dir)


def _print_rows(rows, out=None) -> None:
    out = out or sys.stdout
    for r in rows:
        med = r["median_detection_time"]
        iqr = r["iqr"]
        print(f"{r['name']}: median={'-' if med is None else f'{med:.3f}'} s "
              f"iqr={'-' if iqr is None else f'{iqr:.3f}'} "
              f"correct={r['n_correct']}/{r['n_seeds']} "
              f"not_detected={r['not_detected_fraction']:.2f}", file=out)


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    R = cfg.r_matrix()
    if cfg.stage is Stage.MODEL_TRUTH:
        model = ManeuverModel(cfg.maneuver, LaneChangeParams(cfg.w_L, cfg.filter_L, cfg.Ts), cfg.jacobian_mode)
        spec = NoiseSpec(R, cfg.q_matrix(cfg.maneuver) if cfg.truth_process_noise else None)
        series = generate_many_from_model(model, StateVector(*cfg.x0), cfg.n_steps, spec, cfg.seeds)
    else:
        v = cfg.vehicle
        sc = lane_change_scenario(cfg.maneuver, cfg.w_L, cfg.x0[1], v.period, cfg.duration, cfg.Ts,
                                  v.params(), v.substeps, v.start_time)
        series = [generate_from_vehicle(sc, NoiseSpec(R), s) for s in cfg.seeds]
    for s in series:
        path = write_series(s, _out_dir(args) / f"{cfg.stage.value}_{cfg.maneuver.value}_seed{s.seed}.csv")
        print(path)
    return 0


def cmd_identify(args) -> int:
    cfg = _config_from_args(args)
    series = [read_series(p) for p in args.series]
    report = identify(series, cfg)
    report = type(report)(report.config, report.seeds, args.name or "identify")
    emit_report(report, _out_dir(args), args.format)
    for s in report.seeds:
        d = s.detection
        what = "none" if d.detected is None else f"{d.detected.value} at {d.detection_time:.3f} s"
        print(f"seed {s.seed}: detected {what}")
    return 0


def cmd_tune_sweep(args) -> int:
    cfg = _config_from_args(args)
    if args.values:
        values = [_number_list(v) for v in args.values]
    else:
        values = [0.001, 0.01, 0.1, 1.0] if args.axis == "Q" else [0.0025, 0.01, 0.04]
    reports = run_sweep(cfg, args.axis, values)
    for r in reports:
        emit_report(r, _out_dir(args), args.format)
    rows = sweep_table(reports)
    write_table(rows, _out_dir(args) / f"sweep_{args.axis}_{cfg.maneuver.value}.csv")
    _print_rows(rows)
    return 0


def cmd_vehicle_eval(args) -> int:
    cfg = _config_from_args(args, stage=Stage.VEHICLE_TRUTH.value)
    report = run_vehicle_eval(cfg)
    emit_report(report, _out_dir(args), args.format)
    rows = sweep_table([report])
    _print_rows(rows)
    print(f"early confusion (median over seeds): {report.median_confusion_interval:.3f} s")
    return 0


def cmd_run(args) -> int:
    report = run_case(_config_from_args(args))
    emit_report(report, _out_dir(args), args.format)
    _print_rows(sweep_table([report]))
    return 0


def cmd_suite(args) -> int:
    seed = args.seed or 0
    result = run_suite(args.which, ExperimentConfig(seed=seed),
                       ExperimentConfig(stage=Stage.VEHICLE_TRUTH, seed=seed))
    emit_suite(result, _out_dir(args), args.format)
    _print_rows(sweep_table(result.reports))
    for flag in result.flags:
        print(f"FLAG: {flag}")
    return 0


def cmd_report(args) -> int:
    """Tabulate previously written JSON reports."""
    paths = []
    for p in args.reports:
        p = Path(p)
        paths += sorted(p.glob("*.json")) if p.is_dir() else [p]
    rows = []
    for p in paths:
        d = load_report_json(p)
        if "aggregate" not in d:
            continue
        c = d["config"]
        rows.append({"name": d["name"], "stage": c["stage"], "maneuver": c["maneuver"],
                     "Q": json.dumps(c["Q"]), "R": json.dumps(c["R"]), **d["aggregate"]})
    if not rows:
        raise ConfigError("reports: no experiment report JSON files found")
    _print_rows(rows)
    if args.out_dir:
        print(write_table(rows, _out_dir(args) / "report_summary.csv"))
    return 0


def cmd_config_schema(args) -> int:
    print(json.dumps(ExperimentConfig.model_json_schema(), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mmae-maneuver",
                                 description="Identify straight / lane-change maneuvers with a filter bank.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_, config=True, fmt=True, out_default="out"):
        p = sub.add_parser(name, help=help_)
        if config:
            _add_config_flags(p)
        else:
            p.add_argument("--seed", type=int, default=0, help="first seed of every case")
        p.add_argument("--out-dir", default=out_default, help="output directory")
        if fmt:
            p.add_argument("--format", nargs="+", choices=["csv", "json"], default=["csv", "json"])
        p.set_defaults(func=func)
        return p

    add("simulate", cmd_simulate, "write measurement series (one CSV per seed)", fmt=False)
    p = add("identify", cmd_identify, "run the filter bank over measurement CSV files")
    p.add_argument("series", nargs="+", type=Path)
    p.add_argument("--name", help="report name (default 'identify')")
    p = add("tune-sweep", cmd_tune_sweep, "sweep Q or R at the tuning stage")
    p.add_argument("--axis", choices=["Q", "R"], default="Q")
    p.add_argument("--values", nargs="+", help="ascending values; each a scalar or comma list")
    add("vehicle-eval", cmd_vehicle_eval, "evaluate against the single-track vehicle model")
    add("run", cmd_run, "run one experiment case")
    p = add("suite", cmd_suite, "run the default tuning and vehicle grids", config=False)
    p.add_argument("--which", choices=["all", "tuning", "vehicle"], default="all")
    p = add("report", cmd_report, "tabulate JSON reports", config=False, fmt=False, out_default=None)
    p.add_argument("reports", nargs="+", help="report JSON files or directories")
    p = sub.add_parser("config-schema", help="print the JSON schema of the experiment config")
    p.set_defaults(func=cmd_config_schema)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ManeuverError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_CODES[exc.category]


if __name__ == "__main__":
    sys.exit(main())
