"""Experiment harness: configs, multi-seed cases, sweeps, suites and report files.

Every seed of a case is stepped through one batched filter bank, so a
case costs roughly one bank run regardless of the seed count.

Noise convention: configured ``Q`` values are rates (per second). With the
default ``q_convention="rate"`` the per-step covariance fed to the filters
and to the synthetic truth is ``Q * Ts``; ``"per_step"`` uses ``Q`` as is.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__
from .errors import ConfigError, ReportIOError
from .filter_core import NoiseConfig, StateVector
from .measurements import RNG_ID, NoiseSpec, generate_from_vehicle, generate_many_from_model
from .mmae_bank import DetectionPolicy, DetectionResult, detect, init_bank, run_bank
from .motion_models import JacobianMode, LaneChangeParams, ManeuverKind, ManeuverModel, standard_models
from .vehicle_sim import VehicleParams, lane_change_scenario

log = logging.getLogger(__name__)

KINDS = (ManeuverKind.STRAIGHT, ManeuverKind.LEFT, ManeuverKind.RIGHT)
TRACE_HEADER = ("t", "w_straight", "w_left", "w_right", "est_x", "est_vx", "est_y", "est_vy",
                "truth_x", "truth_y")

CovValue = Union[float, list[float], list[list[float]]]


def as_cov(value, dim: int, name: str) -> np.ndarray:
    """Expand scalar / diagonal / full shorthand into a ``dim x dim`` matrix."""
    a = np.asarray(value, dtype=float)
    if a.ndim == 0:
        M = float(a) * np.eye(dim)
    elif a.shape == (dim,):
        M = np.diag(a)
    elif a.shape == (dim, dim):
        M = a.copy()
    else:
        raise ConfigError(f"{name}: expected a scalar, {dim}-vector or {dim}x{dim} matrix, got shape {a.shape}")
    if not np.all(np.isfinite(M)):
        raise ConfigError(f"{name}: values must be finite")
    if np.any(np.diag(M) < 0):
        raise ConfigError(f"{name}: variances must be >= 0")
    return M


class Stage(str, Enum):
    MODEL_TRUTH = "model_truth"
    VEHICLE_TRUTH = "vehicle_truth"


class DetectionConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    threshold: float = 0.9
    dwell: float = 0.1

    def policy(self) -> DetectionPolicy:
        return DetectionPolicy(self.threshold, self.dwell)


class VehicleConfig(BaseModel):
    """Ground-truth vehicle scenario; initial speed is taken from ``x0``."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    period: float = Field(6.0, gt=0)
    start_time: float = Field(0.0, ge=0)
    substeps: int = Field(1, ge=1)
    m: float = Field(1500.0, gt=0)
    Izz: float = Field(2500.0, gt=0)
    lf: float = Field(1.2, gt=0)
    lr: float = Field(1.6, gt=0)
    Caf: float = Field(80000.0, gt=0)
    Car: float = Field(80000.0, gt=0)

    def params(self) -> VehicleParams:
        return VehicleParams(self.m, self.Izz, self.lf, self.lr, self.Caf, self.Car)


class ExperimentConfig(BaseModel):
    """One experiment case. ``Q`` may be a single value or a per-model mapping."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    stage: Stage = Stage.MODEL_TRUTH
    maneuver: ManeuverKind = ManeuverKind.LEFT
    Q: Union[CovValue, dict[ManeuverKind, CovValue]] = 0.001
    R: CovValue = 0.0025
    P0: CovValue = 1e-6
    x0: tuple[float, float, float, float] = (0.0, 10.0, 0.0, 0.0)
    w_L: float = Field(3.5, gt=0)
    L: Optional[float] = Field(None, gt=0)
    Ts: float = Field(0.01, gt=0)
    detection: DetectionConfig = DetectionConfig()
    n_seeds: int = Field(20, ge=1)
    seed: int = Field(0, ge=0)
    run_duration: Optional[float] = Field(None, gt=0)
    jacobian_mode: JacobianMode = JacobianMode.PUBLISHED
    q_convention: Literal["rate", "per_step"] = "rate"
    truth_process_noise: bool = True
    vehicle: VehicleConfig = VehicleConfig()

    @field_validator("Q")
    @classmethod
    def _check_q(cls, v):
        if isinstance(v, dict):
            missing = [k.value for k in KINDS if k not in v]
            if missing:
                raise ValueError(f"per-model Q missing entries for {missing}")
            for k, q in v.items():
                as_cov(q, 4, f"Q[{k.value}]")
        else:
            as_cov(v, 4, "Q")
        return v

    @field_validator("R")
    @classmethod
    def _check_r(cls, v):
        as_cov(v, 2, "R")
        return v

    @field_validator("P0")
    @classmethod
    def _check_p0(cls, v):
        as_cov(v, 4, "P0")
        return v

    @model_validator(mode="after")
    def _check_duration(self):
        if self.x0[1] <= 0:
            raise ValueError("x0: longitudinal speed must be > 0")
        if self.maneuver is not ManeuverKind.STRAIGHT and self.duration < self.maneuver_duration - 1e-9:
            raise ValueError(f"run_duration: {self.duration} s is shorter than the maneuver "
                             f"({self.maneuver_duration:.3g} s)")
        return self

    @property
    def filter_L(self) -> float:
        if self.L is not None:
            return self.L
        return 60.0 if self.stage is Stage.VEHICLE_TRUTH else 150.0

    @property
    def maneuver_duration(self) -> float:
        if self.stage is Stage.VEHICLE_TRUTH:
            return self.vehicle.start_time + self.vehicle.period
        return self.filter_L / self.x0[1]

    @property
    def duration(self) -> float:
        if self.run_duration is not None:
            return self.run_duration
        if self.stage is Stage.VEHICLE_TRUTH:
            return self.maneuver_duration + 2.0
        return self.maneuver_duration

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.Ts))

    @property
    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.n_seeds)]

    def step_scale(self) -> float:
        return self.Ts if self.q_convention == "rate" else 1.0

    def q_matrix(self, kind: ManeuverKind) -> np.ndarray:
        """Per-step process covariance for ``kind``."""
        q = self.Q[kind] if isinstance(self.Q, dict) else self.Q
        return as_cov(q, 4, "Q") * self.step_scale()

    def r_matrix(self) -> np.ndarray:
        return as_cov(self.R, 2, "R")

    def p0_matrix(self) -> np.ndarray:
        return as_cov(self.P0, 4, "P0")

    def echo(self) -> dict:
        """Full, JSON-ready configuration including derived defaults."""
        d = self.model_dump(mode="json")
        d["L"] = self.filter_L
        d["run_duration"] = self.duration
        return d

    def config_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.echo(), sort_keys=True).encode()).hexdigest()

    def label(self) -> str:
        return f"{self.stage.value}_{self.maneuver.value}_Q{_fmt_value(self.Q)}_R{_fmt_value(self.R)}"


def _fmt_value(v) -> str:
    if isinstance(v, dict):
        return "permodel"
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        return f"{float(a):g}"
    return "-".join(f"{x:g}" for x in np.diag(a) if a.ndim == 2) if a.ndim == 2 else "-".join(f"{x:g}" for x in a)


def load_config(data: Union[dict, str, Path, ExperimentConfig], **overrides) -> ExperimentConfig:
    """Build a validated config from a dict, JSON file path or existing config.

    Validation failures are re-raised as ``ConfigError`` naming the field.
    """
    if isinstance(data, ExperimentConfig):
        data = data.model_dump()
    elif isinstance(data, (str, Path)):
        try:
            data = json.loads(Path(data).read_text())
        except OSError as exc:
            raise ReportIOError(f"cannot read config {data}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {data}: invalid JSON ({exc})") from exc
    data = {**(data or {}), **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        parts = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"])
            msg = err["msg"].removeprefix("Value error, ")
            parts.append(msg if not loc or msg.startswith(loc + ":") else f"{loc}: {msg}")
        raise ConfigError("; ".join(parts)) from None


@dataclass(frozen=True)
class SeedResult:
    seed: int
    detection: DetectionResult
    correct: bool
    weight_variance: float
    confusion_interval: float
    lr_switches: int
    t: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    estimates: np.ndarray = field(repr=False)
    truth_xy: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        d = self.detection
        return {"seed": self.seed,
                "detected": None if d.detected is None else d.detected.value,
                "detection_time": d.detection_time,
                "correct": self.correct,
                "switch_count": d.switch_count,
                "weight_variance": self.weight_variance,
                "confusion_interval": self.confusion_interval,
                "lr_switches": self.lr_switches}


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    seeds: list[SeedResult]
    name: str = ""

    @property
    def detection_times(self) -> list[float]:
        return [s.detection.detection_time for s in self.seeds if s.correct]

    @property
    def median_detection_time(self) -> Optional[float]:
        t = self.detection_times
        return float(np.median(t)) if t else None

    @property
    def iqr(self) -> Optional[float]:
        t = self.detection_times
        if not t:
            return None
        q25, q75 = np.percentile(t, [25, 75])
        return float(q75 - q25)

    @property
    def not_detected_fraction(self) -> float:
        return sum(s.detection.detected is None for s in self.seeds) / len(self.seeds)

    @property
    def wrong_detection_fraction(self) -> float:
        return sum(s.detection.detected is not None and not s.correct for s in self.seeds) / len(self.seeds)

    @property
    def weight_trace_variance(self) -> float:
        return float(np.mean([s.weight_variance for s in self.seeds]))

    @property
    def median_confusion_interval(self) -> float:
        return float(np.median([s.confusion_interval for s in self.seeds]))

    @property
    def lr_alternation_fraction(self) -> float:
        """Fraction of seeds whose argmax hopped between left and right at least twice."""
        return sum(s.lr_switches >= 2 for s in self.seeds) / len(self.seeds)

    def aggregate(self) -> dict:
        t = self.detection_times
        q25, q75 = (float(v) for v in np.percentile(t, [25, 75])) if t else (None, None)
        return {"n_seeds": len(self.seeds),
                "n_correct": len(t),
                "median_detection_time": self.median_detection_time,
                "q25": q25, "q75": q75, "iqr": self.iqr,
                "not_detected_fraction": self.not_detected_fraction,
                "wrong_detection_fraction": self.wrong_detection_fraction,
                "mean_switch_count": float(np.mean([s.detection.switch_count for s in self.seeds])),
                "weight_trace_variance": self.weight_trace_variance,
                "median_confusion_interval": self.median_confusion_interval,
                "lr_alternation_fraction": self.lr_alternation_fraction}

    def to_dict(self) -> dict:
        return {"name": self.name,
                "version": __version__,
                "rng": RNG_ID,
                "config": self.config.echo(),
                "config_hash": self.config.config_hash(),
                "aggregate": self.aggregate(),
                "per_seed": [s.summary() for s in self.seeds]}


def _confusion_interval(weights: np.ndarray, detection: DetectionResult, Ts: float,
                        truth: ManeuverKind, horizon: float) -> float:
    """Time during a true lane change with straight as the strict argmax, before correct detection."""
    if truth is ManeuverKind.STRAIGHT:
        return 0.0
    end = detection.detection_time if detection.detected is truth else horizon
    n = min(int(round(end / Ts)), len(weights) - 1)
    w = weights[1:n + 1]
    strict = (w[:, 0] > w[:, 1]) & (w[:, 0] > w[:, 2])
    return round(float(np.count_nonzero(strict)) * Ts, 9)


def _lr_switches(weights: np.ndarray) -> int:
    am = np.argmax(weights[1:], axis=1)
    lr = am[am > 0]
    return int(np.count_nonzero(lr[1:] != lr[:-1]))


def _generate(cfg: ExperimentConfig):
    params = LaneChangeParams(cfg.w_L, cfg.filter_L, cfg.Ts)
    x0 = StateVector(*cfg.x0)
    R = cfg.r_matrix()
    if cfg.stage is Stage.MODEL_TRUTH:
        truth_model = ManeuverModel(cfg.maneuver, params, cfg.jacobian_mode)
        pq = cfg.q_matrix(cfg.maneuver) if cfg.truth_process_noise else None
        spec = NoiseSpec(R, pq)
        return generate_many_from_model(truth_model, x0, cfg.n_steps, spec, cfg.seeds)
    v = cfg.vehicle
    scenario = lane_change_scenario(cfg.maneuver, cfg.w_L, cfg.x0[1], v.period, cfg.duration,
                                    cfg.Ts, v.params(), v.substeps, v.start_time)
    if cfg.x0[0] != 0.0 or cfg.x0[2] != 0.0:
        raise ConfigError("x0: vehicle-truth runs start at the origin of the road frame")
    spec = NoiseSpec(R, None)
    return [generate_from_vehicle(scenario, spec, s) for s in cfg.seeds]


def _filter_key(cfg: ExperimentConfig) -> str:
    """Everything that shapes the filter bank run; cases sharing it can be stacked."""
    d = cfg.echo()
    for k in ("maneuver", "truth_process_noise", "vehicle", "seed"):
        d.pop(k)
    return json.dumps(d, sort_keys=True)


def _run_filters(cfg: ExperimentConfig, series: Sequence, executor=None):
    """One batched bank run over ``series`` (batch axis = series index)."""
    params = LaneChangeParams(cfg.w_L, cfg.filter_L, cfg.Ts)
    models = standard_models(params, cfg.jacobian_mode)
    R = cfg.r_matrix()
    noise = [NoiseConfig(cfg.q_matrix(m.kind), R) for m in models]
    Z = np.stack([s.z for s in series], axis=1)          # (N, S, 2)
    bank = init_bank(models, StateVector(*cfg.x0), cfg.p0_matrix(), noise, batch_shape=(len(series),))
    return run_bank(bank, Z, executor), [m.kind for m in models]


def run_cases(cfgs: Sequence[ExperimentConfig], executor=None) -> list[ExperimentReport]:
    """``run_case`` for several configs, stacking cases whose filter setup matches.

    Seeds of all stacked cases share one batched bank run; each filter
    batch element evolves independently, so per-case results are the same
    as running the cases one by one.
    """
    cfgs = [c if isinstance(c, ExperimentConfig) else load_config(c) for c in cfgs]
    groups: dict[str, list[int]] = {}
    for i, c in enumerate(cfgs):
        groups.setdefault(_filter_key(c), []).append(i)
    out: list[Optional[ExperimentReport]] = [None] * len(cfgs)
    for idx in groups.values():
        series = [_generate(cfgs[i]) for i in idx]
        run, kinds = _run_filters(cfgs[idx[0]], [s for ser in series for s in ser], executor)
        col = 0
        for i, ser in zip(idx, series):
            n = len(ser)
            out[i] = _assemble(cfgs[i], ser, run.weights[:, col:col + n], run.estimates[:, col:col + n], kinds)
            col += n
    return out


def _assemble(cfg: ExperimentConfig, series, weights, estimates, kinds) -> ExperimentReport:
    policy = cfg.detection.policy()
    x0 = StateVector(*cfg.x0)
    t = np.arange(weights.shape[0]) * cfg.Ts
    results = []
    for i, ser in enumerate(series):
        seed = ser.seed
        W = np.ascontiguousarray(weights[:, i, :])
        det = detect(W, policy, cfg.Ts, kinds)
        truth_xy = np.vstack([[x0.x, x0.y], ser.truth[:, [0, 2]]])
        results.append(SeedResult(
            seed=seed, detection=det, correct=det.detected is cfg.maneuver,
            weight_variance=float(np.sum(np.var(W, axis=0, ddof=1))),
            confusion_interval=_confusion_interval(W, det, cfg.Ts, cfg.maneuver, cfg.maneuver_duration),
            lr_switches=_lr_switches(W),
            t=t, weights=W, estimates=np.ascontiguousarray(estimates[:, i, :]), truth_xy=truth_xy))
    report = ExperimentReport(cfg, results, cfg.label())
    log.info("%s: median %s s, not detected %.2f", report.name, report.median_detection_time,
             report.not_detected_fraction)
    return report


def run_case(cfg: ExperimentConfig, executor=None) -> ExperimentReport:
    """Generate one series per seed, run the three-model bank over all of them, detect."""
    return run_cases([cfg], executor)[0]


def identify(series: Sequence, cfg: ExperimentConfig, executor=None) -> ExperimentReport:
    """Run the bank over externally supplied measurement series.

    ``cfg.maneuver`` is taken as the expected label when scoring detections.
    All series must share ``cfg.Ts`` and one length.
    """
    series = list(series)
    if not series:
        raise ConfigError("series: need at least one measurement series")
    n = len(series[0])
    for ser in series:
        if len(ser) != n:
            raise ConfigError("series: all series must have the same number of samples")
        if len(ser) > 1 and abs(ser.Ts - cfg.Ts) > 1e-9 * max(1.0, cfg.Ts):
            raise ConfigError(f"Ts: series sampled every {ser.Ts:g} s but config has Ts={cfg.Ts:g}")
    run, kinds = _run_filters(cfg, series, executor)
    return _assemble(cfg, series, run.weights, run.estimates, kinds)


def _axis_key(v) -> float:
    a = np.asarray(v, dtype=float)
    return float(a) if a.ndim == 0 else float(np.trace(a) if a.ndim == 2 else np.sum(a))


def run_sweep(base: ExperimentConfig, axis: str, values: Sequence, executor=None) -> list[ExperimentReport]:
    """One ``run_case`` per value of ``Q`` or ``R``; values must be ascending."""
    if axis not in ("Q", "R"):
        raise ConfigError(f"axis: must be 'Q' or 'R', got {axis!r}")
    values = list(values)
    if not values:
        raise ConfigError("values: sweep needs at least one value")
    keys = [_axis_key(v) for v in values]
    if any(b < a for a, b in zip(keys, keys[1:])):
        raise ConfigError("values: sweep values must be sorted ascending")
    return [run_case(load_config(base, **{axis: v}), executor) for v in values]


def run_vehicle_eval(cfg: ExperimentConfig, executor=None) -> ExperimentReport:
    """``run_case`` with vehicle-model truth; the report carries the early-confusion interval."""
    if cfg.stage is not Stage.VEHICLE_TRUTH:
        raise ConfigError("stage: run_vehicle_eval requires stage='vehicle_truth'")
    return run_case(cfg, executor)


def sweep_table(reports: Iterable[ExperimentReport]) -> list[dict]:
    rows = []
    for r in reports:
        c = r.config
        rows.append({"name": r.name, "stage": c.stage.value, "maneuver": c.maneuver.value,
                     "Q": _fmt_value(c.Q), "R": _fmt_value(c.R), **r.aggregate()})
    return rows


# ---------------------------------------------------------------- default suites

TUNING_Q_GRID = (0.001, 0.01, 0.1, 1.0)
TUNING_R_GRID = (0.0025, 0.01, 0.04)
VEHICLE_Q_GRID = (0.005, 0.01, 0.025, 0.05)
VEHICLE_R_GRID = (0.0025, 0.01)
VELOCITY_WEIGHTED_Q = ((0.001, 0.05, 0.001, 0.05), (0.005, 0.05, 0.005, 0.05))


def tuning_suite_configs(base: Optional[ExperimentConfig] = None) -> list[ExperimentConfig]:
    base = base or ExperimentConfig()
    cfgs = []
    for kind in KINDS:
        for q in TUNING_Q_GRID:
            cfgs.append(load_config(base, stage=Stage.MODEL_TRUTH, maneuver=kind, Q=q, R=TUNING_R_GRID[0]))
        for r in TUNING_R_GRID[1:]:
            cfgs.append(load_config(base, stage=Stage.MODEL_TRUTH, maneuver=kind, Q=TUNING_Q_GRID[0], R=r))
    return cfgs


def vehicle_suite_configs(base: Optional[ExperimentConfig] = None) -> list[ExperimentConfig]:
    base = base or ExperimentConfig(stage=Stage.VEHICLE_TRUTH)
    cfgs = []
    for kind in KINDS:
        for q in VEHICLE_Q_GRID:
            for r in VEHICLE_R_GRID:
                cfgs.append(load_config(base, stage=Stage.VEHICLE_TRUTH, maneuver=kind, Q=q, R=r))
        for q in VELOCITY_WEIGHTED_Q:
            cfgs.append(load_config(base, stage=Stage.VEHICLE_TRUTH, maneuver=kind, Q=list(q),
                                    R=VEHICLE_R_GRID[0]))
    return cfgs


def velocity_weighting_check(reports: Sequence[ExperimentReport],
                             q=VELOCITY_WEIGHTED_Q[0]) -> dict:
    """Compare the velocity-weighted case with the best isotropic case, per lane-change direction.

    Returns per-direction times and an overall ``improved`` flag. A missing
    detection counts as infinitely late.
    """
    out = {"velocity_weighted_Q": list(q), "directions": {}}
    improved = True
    for kind in (ManeuverKind.LEFT, ManeuverKind.RIGHT):
        same = [r for r in reports if r.config.stage is Stage.VEHICLE_TRUTH and r.config.maneuver is kind]
        iso = [r for r in same if np.asarray(r.config.Q, dtype=float).ndim == 0]
        vw = [r for r in same if np.asarray(r.config.Q, dtype=float).ndim == 1
              and np.allclose(r.config.Q, q)]
        if not iso or not vw:
            raise ConfigError(f"velocity weighting check needs isotropic and weighted {kind.value} cases")
        iso_times = [r.median_detection_time for r in iso if r.median_detection_time is not None]
        best = min(iso_times) if iso_times else None
        t_vw = vw[0].median_detection_time
        ok = t_vw is not None and (best is None or t_vw <= best)
        improved &= ok
        out["directions"][kind.value] = {"best_isotropic": best, "velocity_weighted": t_vw,
                                         "no_later": ok}
    out["improved"] = improved
    return out


@dataclass
class SuiteResult:
    reports: list[ExperimentReport]
    checks: dict
    flags: list[str]

    def summary(self) -> dict:
        return {"version": __version__, "rng": RNG_ID, "flags": self.flags, "checks": self.checks,
                "cases": [{"name": r.name, "config_hash": r.config.config_hash(), **r.aggregate()}
                          for r in self.reports]}


def run_suite(which: str = "all", base_tuning: Optional[ExperimentConfig] = None,
              base_vehicle: Optional[ExperimentConfig] = None, executor=None) -> SuiteResult:
    """Run the default tuning and/or vehicle grids."""
    cfgs = []
    if which in ("all", "tuning"):
        cfgs += tuning_suite_configs(base_tuning)
    if which in ("all", "vehicle"):
        cfgs += vehicle_suite_configs(base_vehicle)
    if not cfgs:
        raise ConfigError(f"suite: unknown selection {which!r}")
    reports = run_cases(cfgs, executor)
    checks, flags = {}, []
    if which in ("all", "vehicle"):
        vw = velocity_weighting_check(reports)
        checks["velocity_weighting"] = vw
        if not vw["improved"]:
            flags.append("velocity_weighted_Q_not_better_than_best_isotropic")
    return SuiteResult(reports, checks, flags)


# ---------------------------------------------------------------- report files

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def emit_report(report: ExperimentReport, out_dir, formats: Sequence[str] = ("csv", "json")) -> list[Path]:
    """Write detection table and per-seed traces (csv) and/or the full report (json).

    Files are named after ``report.name``; output is byte-identical for
    identical config and seeds.
    """
    out_dir = Path(out_dir)
    formats = set(formats)
    unknown = formats - {"csv", "json"}
    if unknown:
        raise ConfigError(f"format: unsupported {sorted(unknown)}")
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            p = out_dir / f"{report.name}_detections.csv"
            cols = ("seed", "detected", "detection_time", "correct", "switch_count",
                    "weight_variance", "confusion_interval", "lr_switches")
            _write_csv(p, cols, ([s.summary()[c] for c in cols] for s in report.seeds))
            written.append(p)
            for s in report.seeds:
                p = out_dir / f"{report.name}_trace_seed{s.seed}.csv"
                rows = (np.concatenate([[t], w, e, xy]).tolist()
                        for t, w, e, xy in zip(s.t, s.weights, s.estimates, s.truth_xy))
                _write_csv(p, TRACE_HEADER, rows)
                written.append(p)
        if "json" in formats:
            p = out_dir / f"{report.name}.json"
            _write_json(p, report.to_dict())
            written.append(p)
    except OSError as exc:
        raise ReportIOError(f"cannot write report under {out_dir}: {exc}") from exc
    return written


SUMMARY_COLUMNS = ("name", "stage", "maneuver", "Q", "R", "n_seeds", "n_correct",
                   "median_detection_time", "iqr", "not_detected_fraction",
                   "wrong_detection_fraction", "mean_switch_count", "weight_trace_variance",
                   "median_confusion_interval", "lr_alternation_fraction")


def write_table(rows: Sequence[dict], path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        _write_csv(path, SUMMARY_COLUMNS, ([row.get(c) for c in SUMMARY_COLUMNS] for row in rows))
    except OSError as exc:
        raise ReportIOError(f"cannot write table {path}: {exc}") from exc
    return path


def emit_suite(result: SuiteResult, out_dir, formats: Sequence[str] = ("csv", "json")) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    for r in result.reports:
        written += emit_report(r, out_dir, formats)
    written.append(write_table(sweep_table(result.reports), out_dir / "summary.csv"))
    try:
        _write_json(out_dir / "suite.json", result.summary())
    except OSError as exc:
        raise ReportIOError(f"cannot write suite summary under {out_dir}: {exc}") from exc
    written.append(out_dir / "suite.json")
    return written


def load_report_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ReportIOError(f"cannot read report {path}: {exc}") from exc
