"""Straight (constant velocity) and sinusoidal lane-change motion models.

Sign convention: a right lane change decreases y. Starting from y = 0 the
right model integrates to y = -w_L, the left model to y = +w_L.

Trig arguments use ``x - x_origin`` so a maneuver can start anywhere along
the road; ``x_origin`` is the longitudinal position at which the maneuver
is assumed to begin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, DomainError
from .filter_core import StateVector

DEFAULT_LANE_WIDTH = 3.5
DEFAULT_TS = 0.01

_H = np.array([[1.0, 0.0, 0.0, 0.0],
               [0.0, 0.0, 1.0, 0.0]])
_H.setflags(write=False)


class ManeuverKind(str, Enum):
    STRAIGHT = "straight"
    LEFT = "left"
    RIGHT = "right"


class JacobianMode(str, Enum):
    PUBLISHED = "published"   # published closed form, trig evaluated at x_k
    EXACT = "exact"   # true derivative of lane_change_propagate


@dataclass(frozen=True)
class LaneChangeParams:
    w_L: float = DEFAULT_LANE_WIDTH
    L: float = 150.0
    Ts: float = DEFAULT_TS

    def __post_init__(self):
        for name in ("w_L", "L", "Ts"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"LaneChangeParams.{name} must be > 0, got {v!r}")


def _phase(direction: ManeuverKind) -> float:
    direction = ManeuverKind(direction)
    if direction is ManeuverKind.RIGHT:
        return 0.0
    if direction is ManeuverKind.LEFT:
        return -math.pi
    raise ConfigError(f"lane-change direction must be left or right, got {direction.value!r}")


def straight_transition(Ts: float) -> np.ndarray:
    """Constant-velocity transition matrix for one step of length ``Ts``."""
    if not Ts > 0:
        raise ConfigError(f"Ts must be > 0, got {Ts!r}")
    return np.array([[1.0, Ts, 0.0, 0.0],
                     [0.0, 1.0, 0.0, 0.0],
                     [0.0, 0.0, 1.0, Ts],
                     [0.0, 0.0, 0.0, 1.0]])


def measurement_matrix() -> np.ndarray:
    """Position-only observation matrix (read-only)."""
    return _H


def lane_change_propagate(s, p: LaneChangeParams, direction: ManeuverKind,
                          x_origin: float = 0.0):
    """One discrete step of the sinusoidal lane-change recursion.

    ``s`` is an array of shape ``(..., 4)`` or a ``StateVector``; the return
    type matches the input.
    """
    if isinstance(s, StateVector):
        return StateVector.from_array(lane_change_propagate(s.to_array(), p, direction, x_origin))
    s = np.asarray(s, dtype=float)
    phase = _phase(direction)
    x, vx, y, vy = s[..., 0], s[..., 1], s[..., 2], s[..., 3]
    k = math.pi / p.L
    x_next = x + vx * p.Ts
    vy_next = -(p.w_L * math.pi * vx / (2.0 * p.L)) * np.sin(k * (x_next - x_origin) + phase)
    return np.stack([x_next, vx, y + vy * p.Ts, vy_next], axis=-1)


def lane_change_jacobian(s, p: LaneChangeParams, direction: ManeuverKind,
                         mode: JacobianMode = JacobianMode.PUBLISHED,
                         x_origin: float = 0.0) -> np.ndarray:
    """Jacobian of the lane-change step, shape ``(..., 4, 4)``.

    ``PUBLISHED`` gives the published form: last row ``(a, b, 0, 0)`` with the
    cosine evaluated at the current ``x`` and no sine term in ``b``.
    ``EXACT`` differentiates ``lane_change_propagate`` through
    ``x_next = x + vx*Ts``.
    """
    if isinstance(s, StateVector):
        s = s.to_array()
    s = np.asarray(s, dtype=float)
    phase = _phase(direction)
    mode = JacobianMode(mode)
    x, vx = s[..., 0], s[..., 1]
    k = math.pi / p.L
    amp = p.w_L * math.pi / (2.0 * p.L)

    F = np.zeros(s.shape[:-1] + (4, 4))
    F[..., 0, 0] = 1.0
    F[..., 0, 1] = p.Ts
    F[..., 1, 1] = 1.0
    F[..., 2, 2] = 1.0
    F[..., 2, 3] = p.Ts
    if mode is JacobianMode.PUBLISHED:
        c = np.cos(k * (x - x_origin) + phase)
        F[..., 3, 0] = -(p.w_L / 2.0) * k * k * vx * c
        F[..., 3, 1] = -amp * c
    else:
        arg = k * (x + vx * p.Ts - x_origin) + phase
        c, sn = np.cos(arg), np.sin(arg)
        F[..., 3, 0] = -amp * vx * k * c
        F[..., 3, 1] = -amp * (sn + vx * k * p.Ts * c)
    return F


def reference_lane_change_path(dx: float, p: LaneChangeParams, direction: ManeuverKind) -> float:
    """Closed-form lateral offset ``(w_L/2) cos(pi dx / L + phase)``, for ``0 <= dx <= L``."""
    if not 0.0 <= dx <= p.L:
        raise DomainError(f"maneuver progress {dx!r} outside [0, {p.L}]")
    return 0.5 * p.w_L * math.cos(math.pi * dx / p.L + _phase(direction))


@dataclass(frozen=True)
class ManeuverModel:
    """One hypothesis in the filter bank."""

    kind: ManeuverKind
    params: LaneChangeParams = field(default_factory=LaneChangeParams)
    jacobian_mode: JacobianMode = JacobianMode.PUBLISHED

    def __post_init__(self):
        object.__setattr__(self, "kind", ManeuverKind(self.kind))
        object.__setattr__(self, "jacobian_mode", JacobianMode(self.jacobian_mode))

    @property
    def is_linear(self) -> bool:
        return self.kind is ManeuverKind.STRAIGHT

    def transition(self) -> np.ndarray:
        if not self.is_linear:
            raise ConfigError(f"{self.kind.value} model has no constant transition matrix")
        return straight_transition(self.params.Ts)

    def propagate(self, s, x_origin: float = 0.0):
        if self.is_linear:
            A = self.transition()
            if isinstance(s, StateVector):
                return StateVector.from_array(A @ s.to_array())
            return np.matmul(A, np.asarray(s, dtype=float)[..., None])[..., 0]
        return lane_change_propagate(s, self.params, self.kind, x_origin)

    def jacobian(self, s, x_origin: float = 0.0) -> np.ndarray:
        if self.is_linear:
            s = s.to_array() if isinstance(s, StateVector) else np.asarray(s, dtype=float)
            return np.broadcast_to(self.transition(), s.shape[:-1] + (4, 4))
        return lane_change_jacobian(s, self.params, self.kind, self.jacobian_mode, x_origin)


def standard_models(params: LaneChangeParams,
                    jacobian_mode: JacobianMode = JacobianMode.PUBLISHED) -> list[ManeuverModel]:
    """The straight / left / right bank in its canonical order."""
    return [ManeuverModel(k, params, jacobian_mode)
            for k in (ManeuverKind.STRAIGHT, ManeuverKind.LEFT, ManeuverKind.RIGHT)]
