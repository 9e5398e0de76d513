"""Shortcut-to-adiabaticity reference trajectories q_c(t) and trap paths q_0(t).

Trajectories are stored in the scaled time s = t/T with coefficients carrying
length units, so one representation covers every (T, d) and derivatives pick
up the appropriate powers of 1/T.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, InvalidParameterError

__all__ = [
    "Ansatz",
    "Trajectory",
    "make_poly5",
    "make_poly6",
    "make_cosine3",
    "make_trajectory",
    "evaluate",
    "trap_position",
    "boundary_residuals",
]

# slack for grid points that land a few ulps past T
_EDGE_SLACK = 1e-12


class Ansatz(str, enum.Enum):
    POLY5 = "poly5"
    COSINE3 = "cosine3"
    POLY6 = "poly6"


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _boundary_matrix() -> np.ndarray:
    # rows: p(0), p'(0), p''(0), p(1), p'(1), p''(1) for monomials s^0..s^6
    k = np.arange(7)
    rows = np.zeros((6, 7))
    rows[0, 0] = 1.0
    rows[1, 1] = 1.0
    rows[2, 2] = 2.0
    rows[3] = 1.0
    rows[4] = k
    rows[5] = k * (k - 1)
    return rows


@dataclass(frozen=True)
class Trajectory:
    """Immutable reference trajectory.

    ``shape`` holds the polynomial coefficients a_k of q(t) = sum a_k (t/T)^k
    for the polynomial ansatze, or (d b0, d b1, d b2) for the cosine ansatz.
    """

    ansatz: Ansatz
    duration: float
    distance: float
    shape: tuple

    @property
    def coefficients(self) -> tuple:
        """beta_k / n_k in q = sum beta_k t^k, or (b0, b1, b2) for cosines."""
        if self.ansatz is Ansatz.COSINE3:
            if self.distance == 0:
                return (0.0, 0.0, 0.0)
            return tuple(a / self.distance for a in self.shape)
        return tuple(a / self.duration**k for k, a in enumerate(self.shape))

    @property
    def n6(self) -> float:
        if self.ansatz is Ansatz.COSINE3:
            return 0.0
        return self.shape[6] / self.duration**6

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        T = self.duration
        slack = _EDGE_SLACK * T
        if np.any(t < -slack) or np.any(t > T + slack) or np.any(np.isnan(t)):
            raise DomainError(f"t must lie in [0, T] with T={T!r}")
        return np.clip(t, 0.0, T)

    def _shape_derivative(self, s, order):
        """d^order q / ds^order at scaled time s (length units)."""
        if self.ansatz is Ansatz.COSINE3:
            a0, a1, a2 = self.shape
            ps, p3s = math.pi * s, 3 * math.pi * s
            if order == 0:
                return a0 + a1 * np.cos(ps) + a2 * np.cos(p3s)
            if order == 1:
                return -math.pi * (a1 * np.sin(ps) + 3 * a2 * np.sin(p3s))
            if order == 2:
                return -math.pi**2 * (a1 * np.cos(ps) + 9 * a2 * np.cos(p3s))
            raise InvalidParameterError(f"order must be 0, 1 or 2, got {order!r}")
        if order not in (0, 1, 2):
            raise InvalidParameterError(f"order must be 0, 1 or 2, got {order!r}")
        coef = np.polynomial.polynomial.polyder(np.asarray(self.shape, dtype=float), order)
        return np.polynomial.polynomial.polyval(s, coef)

    def eval(self, t, order: int = 0):
        """q_c (order 0), its velocity (1) or acceleration (2) at time t."""
        t = self._check(t)
        out = self._shape_derivative(t / self.duration, order) / self.duration**order
        return float(out) if np.ndim(out) == 0 else out

    def trap_position(self, t, omega0: float):
        """q_0(t) = q_c(t) + qddot_c(t) / omega0^2."""
        return self.eval(t, 0) + self.eval(t, 2) / omega0**2

    def accel_autocorr(self, s):
        """Integral over u in [0, T-s] of qddot(u) qddot(u+s)."""
        s = self._check(s)
        T, d = self.duration, self.distance
        sig = s / T
        if self.ansatz is Ansatz.POLY5 and self._is_canonical_poly5():
            # closed form for the quintic, in r = 1 - s/T so it vanishes exactly at s = T
            r = 1.0 - sig
            poly = -600.0 + r * (1800.0 + r * (-1800.0 + r * (720.0 - 720.0 / 7.0 * r)))
            out = (d * d / T**3) * r**3 * poly
        else:
            out = self._accel_autocorr_numeric(sig)
        return float(out) if np.ndim(out) == 0 else out

    def _accel_autocorr_numeric(self, sig):
        # smooth integrand of bounded frequency: fixed Gauss-Legendre is exact
        # for polynomials and converged to roundoff for the cosine ansatz
        x, w = _gauss_legendre(32)
        sig = np.asarray(sig, dtype=float)
        span = 1.0 - sig
        v = span[..., None] * x
        acc = self._shape_derivative(v, 2) * self._shape_derivative(v + sig[..., None], 2)
        out = span * (acc @ w)
        return out / self.duration**3

    def _is_canonical_poly5(self):
        return abs(self.shape[6]) == 0.0

    def scaled(self, time_scale: float, length_scale: float) -> "Trajectory":
        """Same trajectory with times divided by time_scale, lengths by length_scale."""
        return Trajectory(
            ansatz=self.ansatz,
            duration=self.duration / time_scale,
            distance=self.distance / length_scale,
            shape=tuple(a / length_scale for a in self.shape),
        )


def _check_duration(T):
    if not (T > 0 and math.isfinite(T)):
        raise InvalidParameterError(f"duration T must be positive, got {T!r}")


def _solve_polynomial(distance: float, a6: float) -> tuple:
    A = _boundary_matrix()
    rhs = np.array([0.0, 0.0, 0.0, distance, 0.0, 0.0]) - a6 * A[:, 6]
    a = np.linalg.solve(A[:, :6], rhs)
    return tuple(float(x) for x in a) + (float(a6),)


def make_poly6(T: float, d: float, n6: float) -> Trajectory:
    """Sixth-order polynomial with free leading coefficient n6 (length/time^6)."""
    _check_duration(T)
    if not d >= 0:
        raise InvalidParameterError(f"distance must be >= 0, got {d!r}")
    ansatz = Ansatz.POLY5 if n6 == 0 else Ansatz.POLY6
    return Trajectory(ansatz, float(T), float(d), _solve_polynomial(d, n6 * T**6))


def make_poly5(T: float, d: float) -> Trajectory:
    """Quintic d (10 s^3 - 15 s^4 + 6 s^5)."""
    return make_poly6(T, d, 0.0)


def make_cosine3(T: float, d: float) -> Trajectory:
    """d [b0 + b1 cos(pi t/T) + b2 cos(3 pi t/T)]."""
    _check_duration(T)
    if not d >= 0:
        raise InvalidParameterError(f"distance must be >= 0, got {d!r}")
    # q(0) = 0, q(T) = 1, qddot(0) = 0 (qddot(T) = 0 and velocities follow)
    A = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [0.0, 1.0, 9.0]])
    b = np.linalg.solve(A, np.array([0.0, 1.0, 0.0]))
    return Trajectory(Ansatz.COSINE3, float(T), float(d), tuple(float(d * x) for x in b))


def make_trajectory(ansatz, T: float, d: float, n6: float = 0.0) -> Trajectory:
    ansatz = Ansatz(ansatz)
    if ansatz is Ansatz.COSINE3:
        return make_cosine3(T, d)
    if ansatz is Ansatz.POLY5:
        return make_poly5(T, d)
    return make_poly6(T, d, n6)


def evaluate(traj: Trajectory, t, order: int = 0):
    return traj.eval(t, order)


def trap_position(traj: Trajectory, t, omega0: float):
    return traj.trap_position(t, omega0)


def boundary_residuals(traj: Trajectory) -> np.ndarray:
    """q(0), q'(0), q''(0), q(T)-d, q'(T), q''(T)."""
    T = traj.duration
    return np.array([
        traj.eval(0.0, 0), traj.eval(0.0, 1), traj.eval(0.0, 2),
        traj.eval(T, 0) - traj.distance, traj.eval(T, 1), traj.eval(T, 2),
    ])
