"""Synthetic position measurements from a motion model or the vehicle model.

Randomness comes from numpy's Philox counter-based generator seeded with
``SeedSequence(seed)``. For a series of ``n`` samples the draws are, in
order: an ``(n, 4)`` block of standard normals for truth process noise
(only when ``process_Q`` is set), then an ``(n, 2)`` block for
measurement noise. Each block is mapped through a square root of its
covariance (Cholesky, or eigen-decomposition when singular).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, ReportIOError
from .filter_core import StateVector, check_psd
from .motion_models import ManeuverModel, measurement_matrix, straight_transition
from .vehicle_sim import VehicleScenario, simulate

RNG_ID = "numpy.random.Philox(SeedSequence(seed)); blocks: process(n,4) then measurement(n,2)"
CSV_HEADER = ("t", "zx", "zy", "truth_x", "truth_vx", "truth_y", "truth_vy")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def cov_sqrt(C: np.ndarray) -> np.ndarray:
    """``S`` with ``S @ S.T == C`` for symmetric PSD ``C``."""
    C = np.asarray(C, dtype=float)
    if not np.any(C):
        return np.zeros_like(C)
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(C)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


class NoiseKind(str, Enum):
    WHITE_GAUSSIAN = "white_gaussian"


@dataclass(frozen=True)
class NoiseSpec:
    """Measurement covariance ``R`` and optional per-step truth process covariance."""

    R: np.ndarray
    process_Q: Optional[np.ndarray] = None
    kind: NoiseKind = NoiseKind.WHITE_GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "R", np.array(self.R, dtype=float))
        check_psd("R", self.R, 2)
        if self.process_Q is not None:
            object.__setattr__(self, "process_Q", np.array(self.process_Q, dtype=float))
            check_psd("process_Q", self.process_Q, 4)
        object.__setattr__(self, "kind", NoiseKind(self.kind))

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "R": self.R.tolist(),
                "process_Q": None if self.process_Q is None else self.process_Q.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(np.array(d["R"]), None if d.get("process_Q") is None else np.array(d["process_Q"]),
                   d.get("kind", NoiseKind.WHITE_GAUSSIAN.value))


@dataclass(frozen=True)
class MeasurementSeries:
    """Samples at ``t = k*Ts``, ``k = 1..n``; ``truth`` is the road-frame (x, vx, y, vy) state."""

    t: np.ndarray
    z: np.ndarray
    truth: np.ndarray
    seed: int
    noise_spec: NoiseSpec
    source: dict = field(default_factory=dict)
    vehicle_states: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def Ts(self) -> float:
        if len(self.t) > 1:
            return float(self.t[1] - self.t[0])
        return float(self.t[0])

    def __len__(self) -> int:
        return len(self.t)


def _draw(rng, n, C, dim):
    return rng.standard_normal((n, dim)) @ cov_sqrt(C).T


def generate_from_model(model: ManeuverModel, x0: StateVector, n_steps: int,
                        spec: NoiseSpec, seed: int,
                        x_origin: Optional[float] = None) -> MeasurementSeries:
    """Propagate ``model`` from ``x0`` for ``n_steps`` and observe positions.

    ``x_origin`` defaults to ``x0.x`` (the maneuver starts at the first sample).
    """
    return generate_many_from_model(model, x0, n_steps, spec, [seed], x_origin)[0]


def generate_many_from_model(model: ManeuverModel, x0: StateVector, n_steps: int,
                             spec: NoiseSpec, seeds, x_origin: Optional[float] = None
                             ) -> list[MeasurementSeries]:
    """``generate_from_model`` for several seeds, propagating all truths together.

    Each seed keeps its own generator, so a series does not depend on which
    other seeds are generated alongside it.
    """
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    seeds = [int(sd) for sd in seeds]
    Ts = model.params.Ts
    x_origin = x0.x if x_origin is None else x_origin
    ws, vs = [], []
    for sd in seeds:
        rng = make_rng(sd)
        ws.append(_draw(rng, n_steps, spec.process_Q, 4) if spec.process_Q is not None else None)
        vs.append(_draw(rng, n_steps, spec.R, 2))
    w = np.stack(ws, axis=1) if spec.process_Q is not None else None    # (n, S, 4)

    truth = np.empty((n_steps, len(seeds), 4))
    s = np.tile(x0.to_array(), (len(seeds), 1))
    for k in range(n_steps):
        s = model.propagate(s, x_origin)
        if w is not None:
            s = s + w[k]
        truth[k] = s
    t = np.arange(1, n_steps + 1) * Ts
    source = {"type": "model", "kind": model.kind.value, "w_L": model.params.w_L,
              "L": model.params.L, "Ts": Ts, "x0": x0.to_array().tolist(),
              "x_origin": x_origin, "n_steps": n_steps}
    out = []
    for i, sd in enumerate(seeds):
        tr = truth[:, i].copy()
        z = tr @ measurement_matrix().T + vs[i]
        out.append(MeasurementSeries(t.copy(), z, tr, sd, spec, dict(source)))
    return out


@lru_cache(maxsize=32)
def _simulate_cached(scenario: VehicleScenario):
    return simulate(scenario)


def generate_from_vehicle(scenario: VehicleScenario, spec: NoiseSpec, seed: int) -> MeasurementSeries:
    """Sample the single-track model every ``scenario.Ts`` and add measurement noise.

    The road frame coincides with the global frame. If ``spec.process_Q``
    is set, a constant-velocity random perturbation driven by that
    covariance is added to the kinematic truth before observation.
    """
    traj = _simulate_cached(scenario)
    states = traj.states[1:]
    n = len(states)
    X, Y, psi, vx, vy = states[:, 0], states[:, 1], states[:, 2], states[:, 3], states[:, 4]
    truth = np.column_stack([X, vx * np.cos(psi) - vy * np.sin(psi),
                             Y, vx * np.sin(psi) + vy * np.cos(psi)])
    rng = make_rng(seed)
    if spec.process_Q is not None:
        w = _draw(rng, n, spec.process_Q, 4)
        A = straight_transition(scenario.Ts)
        pert = np.zeros(4)
        for k in range(n):
            pert = A @ pert + w[k]
            truth[k] += pert
    v = _draw(rng, n, spec.R, 2)
    z = truth @ measurement_matrix().T + v
    prof = scenario.profile
    source = {"type": "vehicle", "kind": prof.kind.value, "direction": prof.direction.value,
              "amplitude": prof.amplitude, "period": prof.period, "start_time": prof.start_time,
              "Ts": scenario.Ts, "duration": scenario.duration, "substeps": scenario.substeps,
              "vx0": scenario.initial.vx, "params": scenario.params.__dict__.copy()}
    return MeasurementSeries(traj.t[1:].copy(), z, truth, int(seed), spec, source, states.copy())


def _meta_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")


def write_series(series: MeasurementSeries, path) -> Path:
    """Write ``series`` as CSV plus a ``<stem>.meta.json`` sidecar. Returns the CSV path."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(CSV_HEADER)
            for t, z, s in zip(series.t, series.z, series.truth):
                wr.writerow([f"{v:.9g}" for v in (t, z[0], z[1], *s)])
        meta = {"seed": series.seed, "rng": RNG_ID, "noise": series.noise_spec.to_dict(),
                "source": series.source, "n_samples": len(series)}
        _meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise ReportIOError(f"cannot write series to {path}: {exc}") from exc
    return path


def read_series(path) -> MeasurementSeries:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        meta_file = _meta_path(path)
        meta = json.loads(meta_file.read_text()) if meta_file.exists() else {}
    except OSError as exc:
        raise ReportIOError(f"cannot read series {path}: {exc}") from exc
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ConfigError(f"{path}: expected header {','.join(CSV_HEADER)}")
    data = np.array(rows[1:], dtype=float).reshape(-1, len(CSV_HEADER))
    if len(data) == 0:
        raise ConfigError(f"{path}: no samples")
    t = data[:, 0]
    if len(t) > 1:
        dt = np.diff(t)
        if np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-6 * max(1.0, abs(dt[0])):
            raise ConfigError(f"{path}: timestamps must be strictly increasing and uniformly spaced")
    spec = NoiseSpec.from_dict(meta["noise"]) if "noise" in meta else NoiseSpec(np.zeros((2, 2)))
    return MeasurementSeries(t, data[:, 1:3], data[:, 3:7], int(meta.get("seed", 0)), spec,
                             meta.get("source", {}))
