"""Kalman / extended Kalman steps over 4-state Gaussian beliefs.

All functions are pure. Arrays may carry leading batch dimensions
(``mean`` of shape ``(..., 4)``, ``cov`` of shape ``(..., 4, 4)``), which is
how the experiment harness steps many seeds at once; the unbatched case is
the ordinary single-filter use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, NumericalError, SingularInnovationError

STATE_DIM = 4
MEAS_DIM = 2
LIKELIHOOD_FLOOR = 1e-300

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class StateVector:
    """Kinematic state in the road frame: x, vx (along road), y, vy (lateral)."""

    x: float
    vx: float
    y: float
    vy: float

    def __post_init__(self):
        for name in ("x", "vx", "y", "vy"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"StateVector.{name} must be finite")

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.vx, self.y, self.vy], dtype=float)

    @classmethod
    def from_array(cls, a) -> "StateVector":
        a = np.asarray(a, dtype=float).reshape(STATE_DIM)
        return cls(*(float(v) for v in a))


@dataclass(frozen=True)
class GaussianBelief:
    mean: np.ndarray
    cov: np.ndarray

    @classmethod
    def from_state(cls, x0: StateVector, P0) -> "GaussianBelief":
        return cls(x0.to_array(), np.array(P0, dtype=float))


@dataclass(frozen=True)
class Innovation:
    """Measurement residual ``e`` and its covariance ``E``."""

    e: np.ndarray
    E: np.ndarray


def check_psd(name: str, M: np.ndarray, dim: int, tol: float = 1e-9) -> None:
    if M.shape != (dim, dim):
        raise ConfigError(f"{name} must be {dim}x{dim}, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ConfigError(f"{name} must be finite")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > tol * scale:
        raise ConfigError(f"{name} must be symmetric")
    if np.min(np.linalg.eigvalsh(M)) < -tol * max(1.0, float(np.trace(M))):
        raise ConfigError(f"{name} must be positive semidefinite")


@dataclass(frozen=True)
class NoiseConfig:
    """Process covariance ``Q`` (4x4, per filter step) and measurement covariance ``R`` (2x2)."""

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Q", np.array(self.Q, dtype=float))
        object.__setattr__(self, "R", np.array(self.R, dtype=float))
        check_psd("Q", self.Q, STATE_DIM)
        check_psd("R", self.R, MEAS_DIM)


def symmetrize(cov: np.ndarray) -> np.ndarray:
    return 0.5 * (cov + np.swapaxes(cov, -1, -2))


def _check_finite(label: Optional[str], what: str, *arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.isfinite(a).all():
            who = f"filter {label!r}" if label else "filter"
            raise NumericalError(f"{who}: non-finite {what}")


def _matvec(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.matmul(M, v[..., None])[..., 0]


def _propagate_cov(cov: np.ndarray, F: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return symmetrize(F @ cov @ np.swapaxes(F, -1, -2) + Q)


def kf_predict(belief: GaussianBelief, A: np.ndarray, Q: np.ndarray,
               label: Optional[str] = None) -> GaussianBelief:
    """Linear time update: ``mean' = A mean``, ``cov' = A cov A^T + Q``."""
    mean = _matvec(A, belief.mean)
    cov = _propagate_cov(belief.cov, A, Q)
    _check_finite(label, "predicted belief", mean, cov)
    return GaussianBelief(mean, cov)


def ekf_predict(belief: GaussianBelief,
                f: Callable[[np.ndarray], np.ndarray],
                jac: Callable[[np.ndarray], np.ndarray],
                Q: np.ndarray,
                label: Optional[str] = None) -> GaussianBelief:
    """EKF time update.

    Args:
        belief: prior belief.
        f: nonlinear propagation, ``(..., 4) -> (..., 4)``.
        jac: Jacobian of ``f`` evaluated at the prior mean, ``(..., 4) -> (..., 4, 4)``.
        Q: process covariance added after linearised propagation.
        label: filter name used in error messages.
    """
    Phi = jac(belief.mean)
    mean = f(belief.mean)
    cov = _propagate_cov(belief.cov, Phi, Q)
    _check_finite(label, "predicted belief", mean, cov)
    return GaussianBelief(mean, cov)


def _chol2(E: np.ndarray, label: Optional[str]):
    """Closed-form Cholesky factor ``(l11, l21, l22)`` of a (batched) 2x2 SPD matrix."""
    a, b, c = E[..., 0, 0], E[..., 1, 0], E[..., 1, 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        l11 = np.sqrt(a)
        l21 = b / l11
        l22 = np.sqrt(c - l21 * l21)
    if not (np.all(a > 0.0) and np.all(l22 > 0.0)):
        who = f"filter {label!r}" if label else "filter"
        raise SingularInnovationError(f"{who}: innovation covariance is not positive definite")
    return l11, l21, l22


def kf_update(belief: GaussianBelief, z: np.ndarray, H: np.ndarray, R: np.ndarray,
              label: Optional[str] = None) -> tuple[GaussianBelief, Innovation]:
    """Measurement update with Joseph-form covariance.

    Returns the posterior belief and the innovation ``(e, E)`` computed from
    the prior, which is what the model-probability update consumes.
    """
    P = belief.cov
    HP = H @ P
    E = symmetrize(HP @ H.T + R)
    e = np.asarray(z, dtype=float) - _matvec(H, belief.mean)
    _check_finite(label, "innovation", e, E)
    l11, l21, l22 = _chol2(E, label)
    det = (l11 * l22) ** 2
    Einv = np.empty_like(E)
    Einv[..., 0, 0] = E[..., 1, 1] / det
    Einv[..., 1, 1] = E[..., 0, 0] / det
    Einv[..., 0, 1] = Einv[..., 1, 0] = -E[..., 0, 1] / det
    K = np.swapaxes(HP, -1, -2) @ Einv
    mean = belief.mean + _matvec(K, e)
    IKH = np.eye(STATE_DIM) - K @ H
    Kt = np.swapaxes(K, -1, -2)
    cov = symmetrize(IKH @ P @ np.swapaxes(IKH, -1, -2) + K @ R @ Kt)
    _check_finite(label, "posterior belief", mean, cov)
    return GaussianBelief(mean, cov), Innovation(e, E)


def log_gaussian_likelihood(inn: Innovation, label: Optional[str] = None) -> np.ndarray:
    l11, l21, l22 = _chol2(inn.E, label)
    y1 = inn.e[..., 0] / l11
    y2 = (inn.e[..., 1] - l21 * y1) / l22
    maha = y1 * y1 + y2 * y2
    logdet = 2.0 * (np.log(l11) + np.log(l22))
    return -0.5 * (maha + logdet + MEAS_DIM * _LOG_2PI)


def gaussian_likelihood(inn: Innovation, label: Optional[str] = None) -> np.ndarray:
    """Normal density of the residual ``e`` under covariance ``E``.

    Evaluated through the Cholesky factor of ``E``; raises
    ``SingularInnovationError`` if ``E`` is not positive definite.
    """
    return np.exp(log_gaussian_likelihood(inn, label))
