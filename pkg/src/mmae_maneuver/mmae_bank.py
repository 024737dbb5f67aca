"""Classic multiple-model adaptive estimation (no interaction/mixing step).

Each model runs its own filter; only the weights couple them, and the
combined estimate is an output, never fed back.
"""
from __future__ import annotations

import math
from concurrent.futures import Executor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DegenerateBankError, NumericalError
from .filter_core import (LIKELIHOOD_FLOOR, GaussianBelief, NoiseConfig, StateVector,
                          check_psd, ekf_predict, gaussian_likelihood, kf_predict, kf_update)
from .motion_models import ManeuverKind, ManeuverModel, measurement_matrix

WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class FilterBank:
    models: tuple[ManeuverModel, ...]
    beliefs: tuple[GaussianBelief, ...]
    noise: tuple[NoiseConfig, ...]
    weights: np.ndarray
    x_origin: StateVector
    step_count: int = 0

    @property
    def size(self) -> int:
        return len(self.models)

    @property
    def filters(self):
        return list(zip(self.models, self.beliefs, self.noise))


def init_bank(models: Sequence[ManeuverModel], x0: StateVector, P0,
              noise, batch_shape: tuple[int, ...] = ()) -> FilterBank:
    """Start every filter at ``(x0, P0)`` with uniform weights.

    ``noise`` is a single ``NoiseConfig`` shared by all models or one per
    model. ``batch_shape`` replicates the bank for independent runs stepped
    together (one per seed in the experiment harness).
    """
    models = tuple(models)
    if not models:
        raise ConfigError("models: filter bank needs at least one model")
    if isinstance(noise, NoiseConfig):
        noise = (noise,) * len(models)
    noise = tuple(noise)
    if len(noise) != len(models):
        raise ConfigError(f"noise: expected {len(models)} configs, got {len(noise)}")
    P0 = np.array(P0, dtype=float)
    check_psd("P0", P0, 4)
    mean = np.broadcast_to(x0.to_array(), tuple(batch_shape) + (4,)).copy()
    cov = np.broadcast_to(P0, tuple(batch_shape) + (4, 4)).copy()
    beliefs = tuple(GaussianBelief(mean.copy(), cov.copy()) for _ in models)
    M = len(models)
    weights = np.full(tuple(batch_shape) + (M,), 1.0 / M)
    return FilterBank(models, beliefs, noise, weights, x0, 0)


def _label(model: ManeuverModel, j: int) -> str:
    return f"{j}:{model.kind.value}"


def filter_step(model: ManeuverModel, belief: GaussianBelief, noise: NoiseConfig,
                z: np.ndarray, x_origin: float = 0.0, label: Optional[str] = None):
    """Predict with the model, update with ``z``.

    Returns ``(posterior, innovation, likelihood)``.
    """
    H = measurement_matrix()
    if model.is_linear:
        prior = kf_predict(belief, model.transition(), noise.Q, label)
    else:
        prior = ekf_predict(belief,
                            lambda m: model.propagate(m, x_origin),
                            lambda m: model.jacobian(m, x_origin),
                            noise.Q, label)
    post, inn = kf_update(prior, z, H, noise.R, label)
    return post, inn, gaussian_likelihood(inn, label)


def update_weights(weights: np.ndarray, likelihoods: np.ndarray) -> np.ndarray:
    """Multiply by likelihoods, floor, renormalise over the last axis."""
    if not np.all(np.isfinite(likelihoods)):
        raise NumericalError("non-finite model likelihood")
    if np.any(np.all(likelihoods <= 0.0, axis=-1)):
        raise DegenerateBankError("all model likelihoods underflowed to zero; "
                                  "check noise configuration or model set")
    w = weights * np.maximum(likelihoods, LIKELIHOOD_FLOOR)
    w = np.maximum(w, WEIGHT_FLOOR)
    return w / np.sum(w, axis=-1, keepdims=True)


def bank_step(bank: FilterBank, z, executor: Optional[Executor] = None):
    """Advance every filter by one measurement and update model weights.

    Per-model work may be dispatched to ``executor``; the weight reduction
    is always done afterwards in model order, so the result does not
    depend on scheduling.

    Returns ``(new_bank, likelihoods)`` with likelihoods shaped like the weights.
    """
    z = np.asarray(z, dtype=float)
    x0 = bank.x_origin.x

    def one(j):
        return filter_step(bank.models[j], bank.beliefs[j], bank.noise[j], z, x0,
                           _label(bank.models[j], j))

    idx = range(bank.size)
    results = list(executor.map(one, idx)) if executor is not None else [one(j) for j in idx]
    lik = np.stack([r[2] for r in results], axis=-1)
    weights = update_weights(bank.weights, lik)
    new = replace(bank, beliefs=tuple(r[0] for r in results), weights=weights,
                  step_count=bank.step_count + 1)
    return new, lik


def combine(bank: FilterBank) -> GaussianBelief:
    """Weighted mixture mean and moment-matched covariance."""
    means = np.stack([b.mean for b in bank.beliefs], axis=-2)      # (..., M, 4)
    covs = np.stack([b.cov for b in bank.beliefs], axis=-3)        # (..., M, 4, 4)
    w = bank.weights
    mean = np.sum(w[..., None] * means, axis=-2)
    d = means - mean[..., None, :]
    spread = d[..., :, None] * d[..., None, :]
    cov = np.sum(w[..., None, None] * (spread + covs), axis=-3)
    return GaussianBelief(mean, cov)


@dataclass(frozen=True)
class BankRun:
    """Traces from stepping a bank through a measurement sequence.

    Row 0 of each trace is the initial state (t = 0); row k follows the
    k-th measurement.
    """

    bank: FilterBank
    weights: np.ndarray       # (N+1, ..., M)
    estimates: np.ndarray     # (N+1, ..., 4) combined means
    likelihoods: np.ndarray   # (N, ..., M)


def run_bank(bank: FilterBank, measurements, executor: Optional[Executor] = None) -> BankRun:
    """Step ``bank`` through ``measurements`` of shape ``(N, ..., 2)``."""
    Z = np.asarray(measurements, dtype=float)
    W = [bank.weights]
    X = [combine(bank).mean]
    Ls = []
    for z in Z:
        bank, lik = bank_step(bank, z, executor)
        W.append(bank.weights)
        X.append(combine(bank).mean)
        Ls.append(lik)
    lik_arr = np.stack(Ls) if Ls else np.empty((0,) + bank.weights.shape)
    return BankRun(bank, np.stack(W), np.stack(X), lik_arr)


@dataclass(frozen=True)
class DetectionPolicy:
    """A model is declared once its weight stays >= ``threshold`` for ``dwell`` seconds."""

    threshold: float = 0.9
    dwell: float = 0.1

    def __post_init__(self):
        if not (0.5 < self.threshold <= 1.0):
            raise ConfigError(f"threshold must lie in (0.5, 1], got {self.threshold!r}")
        if not (math.isfinite(self.dwell) and self.dwell >= 0.0):
            raise ConfigError(f"dwell must be >= 0, got {self.dwell!r}")


@dataclass(frozen=True)
class DetectionResult:
    detected: Optional[ManeuverKind]
    detected_index: Optional[int]
    detection_time: Optional[float]
    weight_trace: np.ndarray = field(repr=False)
    switch_count: int


def _argmax_switches(trace: np.ndarray) -> int:
    am = np.argmax(trace, axis=-1)
    return int(np.count_nonzero(am[1:] != am[:-1]))


def detect(trace, policy: DetectionPolicy, Ts: float,
           kinds: Optional[Sequence[ManeuverKind]] = None) -> DetectionResult:
    """Apply the threshold/dwell rule to a weight trace sampled every ``Ts``.

    Row ``k`` of ``trace`` is time ``k*Ts``. Detection fires at the first row
    closing a window of ``round(dwell/Ts) + 1`` consecutive rows in which a
    single model's weight is at or above the threshold.
    """
    trace = np.asarray(trace, dtype=float)
    if trace.ndim != 2 or trace.shape[0] == 0:
        raise ConfigError("weight trace must be a non-empty (N, M) array")
    M = trace.shape[1]
    if policy.threshold <= 1.0 / M:
        raise ConfigError(f"threshold {policy.threshold} must exceed 1/M = {1.0 / M:.3g}")
    if kinds is None:
        kinds = [None] * M
    need = int(round(policy.dwell / Ts)) + 1
    if trace.shape[0] >= need:
        # rows k where the last `need` rows (k-need+1 .. k) are all above threshold
        c = np.concatenate([np.zeros((1, M), dtype=int),
                            np.cumsum(trace >= policy.threshold, axis=0)])
        full = (c[need:] - c[:-need]) == need
        hit_rows, hit_models = np.nonzero(full)
        if hit_rows.size:
            k = int(hit_rows[0]) + need - 1
            j = int(hit_models[0])
            return DetectionResult(kinds[j], j, round(k * Ts, 9), trace, _argmax_switches(trace[:k + 1]))
    return DetectionResult(None, None, None, trace, _argmax_switches(trace))
