"""Three-DOF single-track vehicle model used as ground truth.

Body-frame velocities (vx, vy), yaw angle psi and yaw rate r; global
position (X, Y). Lateral tire forces come from a linear cornering-stiffness
model, longitudinal forces are zero (constant-speed maneuvers).

Steering is a zero-order-hold signal: it is sampled once per output period
``Ts`` and held while RK4 integrates ``substeps`` equal sub-intervals. With
the input held exactly constant on each sub-interval the integrator keeps
its fourth-order accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import CalibrationError, ConfigError, DomainError
from .motion_models import ManeuverKind

MIN_VX = 0.1


@dataclass(frozen=True)
class VehicleParams:
    """Mid-size sedan defaults; override per scenario."""

    m: float = 1500.0
    Izz: float = 2500.0
    lf: float = 1.2
    lr: float = 1.6
    Caf: float = 80000.0
    Car: float = 80000.0

    def __post_init__(self):
        for name in ("m", "Izz", "lf", "lr", "Caf", "Car"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"VehicleParams.{name} must be > 0, got {v!r}")


@dataclass(frozen=True)
class VehicleState:
    X: float = 0.0
    Y: float = 0.0
    psi: float = 0.0
    vx: float = 10.0
    vy: float = 0.0
    r: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.psi, self.vx, self.vy, self.r])

    @classmethod
    def from_array(cls, a) -> "VehicleState":
        return cls(*(float(v) for v in np.asarray(a, dtype=float).reshape(6)))


class SteeringKind(str, Enum):
    ZERO = "zero"
    SINUSOID_LC = "sinusoid_lc"


@dataclass(frozen=True)
class SteeringProfile:
    kind: SteeringKind = SteeringKind.ZERO
    amplitude: float = 0.0
    period: float = 6.0
    direction: ManeuverKind = ManeuverKind.RIGHT
    start_time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SteeringKind(self.kind))
        object.__setattr__(self, "direction", ManeuverKind(self.direction))
        if self.amplitude < 0:
            raise ConfigError("SteeringProfile.amplitude must be >= 0")
        if not self.period > 0:
            raise ConfigError("SteeringProfile.period must be > 0")
        if self.kind is SteeringKind.SINUSOID_LC and self.direction is ManeuverKind.STRAIGHT:
            raise ConfigError("SteeringProfile.direction must be left or right for a lane change")


def _as_tuple(s):
    if isinstance(s, VehicleState):
        return (s.X, s.Y, s.psi, s.vx, s.vy, s.r)
    return tuple(float(v) for v in s)


def _deriv(s, delta, p: VehicleParams):
    X, Y, psi, vx, vy, r = s
    if not vx > MIN_VX:
        raise DomainError(f"longitudinal speed {vx!r} m/s below {MIN_VX} m/s; slip angles undefined")
    alpha_f = delta - (vy + p.lf * r) / vx
    alpha_r = -(vy - p.lr * r) / vx
    Fyf = p.Caf * alpha_f
    Fyr = p.Car * alpha_r
    cd, sd = math.cos(delta), math.sin(delta)
    cp, sp = math.cos(psi), math.sin(psi)
    return (vx * cp - vy * sp,
            vx * sp + vy * cp,
            r,
            vy * r - Fyf * sd / p.m,
            -vx * r + (Fyf * cd + Fyr) / p.m,
            (p.lf * Fyf * cd - p.lr * Fyr) / p.Izz)


def dynamics_derivative(s, delta: float, p: VehicleParams) -> np.ndarray:
    """Time derivative ``(dX, dY, dpsi, dvx, dvy, dr)`` at steering angle ``delta``."""
    return np.array(_deriv(_as_tuple(s), float(delta), p))


def _rk4(s, delta, p, dt):
    k1 = _deriv(s, delta, p)
    k2 = _deriv(tuple(a + 0.5 * dt * b for a, b in zip(s, k1)), delta, p)
    k3 = _deriv(tuple(a + 0.5 * dt * b for a, b in zip(s, k2)), delta, p)
    k4 = _deriv(tuple(a + dt * b for a, b in zip(s, k3)), delta, p)
    return tuple(a + dt * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
                 for a, b1, b2, b3, b4 in zip(s, k1, k2, k3, k4))


def step_rk4(s, delta: float, p: VehicleParams, dt: float):
    """One classical RK4 step with ``delta`` held constant. Returns a ``VehicleState``."""
    if not dt > 0:
        raise ConfigError(f"dt must be > 0, got {dt!r}")
    return VehicleState(*_rk4(_as_tuple(s), float(delta), p, dt))


def steering_profile_eval(profile: SteeringProfile, t: float) -> float:
    """Steering angle at time ``t``: one full sine period, signed by direction.

    A right lane change starts with negative steering (toward decreasing Y).
    """
    if profile.kind is SteeringKind.ZERO:
        return 0.0
    tau = t - profile.start_time
    if tau < 0.0 or tau >= profile.period:
        return 0.0
    sign = -1.0 if profile.direction is ManeuverKind.RIGHT else 1.0
    return sign * profile.amplitude * math.sin(2.0 * math.pi * tau / profile.period)


@dataclass(frozen=True)
class VehicleScenario:
    """A ground-truth run: initial state, steering input, sampling."""

    params: VehicleParams = field(default_factory=VehicleParams)
    initial: VehicleState = field(default_factory=VehicleState)
    profile: SteeringProfile = field(default_factory=SteeringProfile)
    Ts: float = 0.01
    duration: float = 8.0
    substeps: int = 1

    def __post_init__(self):
        if not self.Ts > 0:
            raise ConfigError("VehicleScenario.Ts must be > 0")
        if not self.duration > 0:
            raise ConfigError("VehicleScenario.duration must be > 0")
        if self.substeps < 1:
            raise ConfigError("VehicleScenario.substeps must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.Ts))


@dataclass(frozen=True)
class VehicleTrajectory:
    t: np.ndarray        # (N+1,)
    states: np.ndarray   # (N+1, 6): X, Y, psi, vx, vy, r
    steering: np.ndarray  # (N,) held value on each sample interval


def simulate(scenario: VehicleScenario) -> VehicleTrajectory:
    n = scenario.n_steps
    dt = scenario.Ts / scenario.substeps
    p = scenario.params
    s = _as_tuple(scenario.initial)
    out = np.empty((n + 1, 6))
    out[0] = s
    deltas = np.empty(n)
    for k in range(n):
        delta = steering_profile_eval(scenario.profile, k * scenario.Ts)
        deltas[k] = delta
        for _ in range(scenario.substeps):
            s = _rk4(s, delta, p, dt)
        out[k + 1] = s
    t = np.arange(n + 1) * scenario.Ts
    return VehicleTrajectory(t, out, deltas)


def _lateral_offset(p, vx, period, amplitude, Ts, settle, substeps) -> float:
    sc = VehicleScenario(p, VehicleState(vx=vx),
                         SteeringProfile(SteeringKind.SINUSOID_LC, amplitude, period, ManeuverKind.LEFT),
                         Ts=Ts, duration=period + settle, substeps=substeps)
    tr = simulate(sc)
    return abs(tr.states[-1, 1] - tr.states[0, 1])


@lru_cache(maxsize=64)
def calibrate_amplitude(p: VehicleParams, vx: float, period: float, target_offset: float,
                        Ts: float = 0.01, settle: float = 2.0, substeps: int = 1,
                        tol: float = 1e-4) -> float:
    """Steering amplitude (rad) whose lane change ends ``target_offset`` metres to the side.

    The offset is measured ``settle`` seconds after the steering period ends.
    Bisection on amplitude; the bracket grows by doubling from 1 mrad up to
    0.5 rad.
    """
    if target_offset < 0:
        raise ConfigError("target_offset must be >= 0")
    if target_offset == 0:
        return 0.0

    def offset(a):
        return _lateral_offset(p, vx, period, a, Ts, settle, substeps)

    lo, hi = 0.0, 1e-3
    while offset(hi) < target_offset:
        lo = hi
        if hi >= 0.5:
            raise CalibrationError(f"no steering amplitude up to 0.5 rad reaches {target_offset} m")
        hi = min(2.0 * hi, 0.5)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        d = offset(mid)
        if abs(d - target_offset) <= tol:
            return mid
        if d < target_offset:
            lo = mid
        else:
            hi = mid
    raise CalibrationError("bisection did not converge")


def lane_change_scenario(direction: ManeuverKind, w_L: float = 3.5, vx: float = 10.0,
                         period: float = 6.0, duration: float = 8.0, Ts: float = 0.01,
                         params: VehicleParams = VehicleParams(), substeps: int = 1,
                         start_time: float = 0.0) -> VehicleScenario:
    """Scenario for ``direction``; lane changes are calibrated to end ``w_L`` to the side."""
    direction = ManeuverKind(direction)
    initial = VehicleState(vx=vx)
    if direction is ManeuverKind.STRAIGHT:
        profile = SteeringProfile(SteeringKind.ZERO, 0.0, period, ManeuverKind.RIGHT, start_time)
    else:
        settle = max(duration - start_time - period, 0.0)
        amp = calibrate_amplitude(params, vx, period, w_L, Ts, settle, substeps)
        profile = SteeringProfile(SteeringKind.SINUSOID_LC, amp, period, direction, start_time)
    return VehicleScenario(params, initial, profile, Ts, duration, substeps)
