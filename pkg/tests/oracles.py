"""Independent reference computations used as test oracles.

Nothing here imports the package under test. Matrix arithmetic is done in
mpmath at 50 significant digits with textbook formulas (plain ``(I-KH)P``
update, explicit inverse, direct density), so agreement with the package is
evidence that both compute the same quantity rather than share a bug.
"""
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 50


def to_mp(a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return mp.matrix([mp.mpf(float(v)) for v in a])
    return mp.matrix([[mp.mpf(float(v)) for v in row] for row in a])


def to_np(m):
    rows, cols = m.rows, m.cols
    if cols == 1:
        return np.array([float(m[i]) for i in range(rows)])
    return np.array([[float(m[i, j]) for j in range(cols)] for i in range(rows)])


def kf_predict(mean, cov, A, Q):
    A, P, Qm, x = to_mp(A), to_mp(cov), to_mp(Q), to_mp(mean)
    return to_np(A * x), to_np(A * P * A.T + Qm)


def kf_update(mean, cov, z, H, R):
    """Textbook update. Returns (mean', cov', e, E)."""
    x, P, Hm, Rm, zm = to_mp(mean), to_mp(cov), to_mp(H), to_mp(R), to_mp(z)
    e = zm - Hm * x
    E = Hm * P * Hm.T + Rm
    K = P * Hm.T * E ** -1
    n = P.rows
    x2 = x + K * e
    P2 = (mp.eye(n) - K * Hm) * P
    return to_np(x2), to_np(P2), to_np(e), to_np(E)


def gaussian_density(e, E):
    """det(2 pi E)^(-1/2) exp(-e' E^-1 e / 2), straight from the definition."""
    em, Em = to_mp(e), to_mp(E)
    q = (em.T * Em ** -1 * em)[0]
    return float(mp.exp(-q / 2) / mp.sqrt(mp.det(2 * mp.pi * Em)))


def lane_change_step(s, w_L, L, Ts, direction):
    """Scalar re-statement of the sinusoidal lane-change recursion (origin at x=0)."""
    x, vx, y, vy = (float(v) for v in s)
    phase = 0.0 if direction == "right" else -math.pi
    x1 = x + vx * Ts
    vy1 = -(w_L * math.pi * vx / (2.0 * L)) * math.sin(math.pi * x1 / L + phase)
    return np.array([x1, vx, y + vy * Ts, vy1])


def published_jacobian_row(s, w_L, L, direction):
    """Last Jacobian row (a, b) of the published closed form, trig at the current x."""
    x, vx = float(s[0]), float(s[1])
    phase = 0.0 if direction == "right" else -math.pi
    c = math.cos(math.pi * x / L + phase)
    a = -(w_L / 2.0) * (math.pi / L) ** 2 * vx * c
    b = -(w_L * math.pi / (2.0 * L)) * c
    return a, b


def central_difference_jacobian(f, s, h=1e-6):
    s = np.asarray(s, dtype=float)
    n = s.size
    J = np.empty((n, n))
    for j in range(n):
        step = h * max(1.0, abs(s[j]))
        sp, sm = s.copy(), s.copy()
        sp[j] += step
        sm[j] -= step
        J[:, j] = (f(sp) - f(sm)) / (2.0 * step)
    return J


def steady_state_yaw_rate(vx, delta, m, lf, lr, Caf, Car):
    """Linear bicycle model steady-state yaw rate for a constant steer angle."""
    l = lf + lr
    return vx * delta / (l + m * vx ** 2 * (lr * Car - lf * Caf) / (l * Caf * Car))


def normalize_weights(w, lik):
    w = [a * b for a, b in zip(w, lik)]
    s = sum(w)
    return [a / s for a in w]


def mixture_moments(weights, means, covs):
    w = np.asarray(weights, dtype=float)
    means = np.asarray(means, dtype=float)
    mean = sum(wi * mi for wi, mi in zip(w, means))
    cov = sum(wi * (np.outer(mi - mean, mi - mean) + Pi) for wi, mi, Pi in zip(w, means, covs))
    return mean, cov


def rel_err(a, b):
    """Norm-wise relative difference (max abs error over max abs reference)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.max(np.abs(b))
    return float(np.max(np.abs(a - b)) / scale) if scale > 0 else float(np.max(np.abs(a - b)))
