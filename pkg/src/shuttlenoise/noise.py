"""Colored spring-constant noise: correlations, spectra and path sampling.

Two stationary models are supported. Ornstein-Uhlenbeck noise with
correlation exp(-t/tau) / (2 tau), and flicker noise obtained as the uniform
average of OU processes with correlation times in [tau1, tau2].

Models are unit-agnostic: correlation times may be given in seconds or in
oscillator units, and correlations come back in the inverse of that unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError, InvalidParameterError, ResolutionError

__all__ = [
    "OU",
    "Flicker",
    "NoiseModel",
    "NoisePath",
    "EULER_GAMMA",
    "expint_ei",
    "expint_e1",
    "alpha",
    "spectrum",
    "realization_seed",
    "max_step",
    "sample_path",
]

EULER_GAMMA = 0.57721566490153286060651209008240243
_EPS = np.finfo(float).eps
# below this relative width a flicker interval is averaged by Gauss-Legendre
# in tau instead of differencing exponential integrals
_NARROW = 1e-3


@dataclass(frozen=True)
class OU:
    tau: float

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise InvalidParameterError(f"OU correlation time must be positive, got {self.tau!r}")

    @property
    def alpha0(self) -> float:
        return 0.5 / self.tau

    @property
    def tau_min(self) -> float:
        return self.tau

    def scaled(self, time_scale: float) -> "OU":
        return OU(self.tau / time_scale)


@dataclass(frozen=True)
class Flicker:
    tau1: float
    tau2: float

    def __post_init__(self):
        if not (0 < self.tau1 < self.tau2 and math.isfinite(self.tau2)):
            raise InvalidParameterError(
                f"flicker cutoffs need 0 < tau1 < tau2, got {self.tau1!r}, {self.tau2!r}"
            )

    @property
    def alpha0(self) -> float:
        width = self.tau2 - self.tau1
        return math.log1p(width / self.tau1) / (2.0 * width)

    @property
    def tau_min(self) -> float:
        return self.tau1

    def scaled(self, time_scale: float) -> "Flicker":
        return Flicker(self.tau1 / time_scale, self.tau2 / time_scale)


NoiseModel = Union[OU, Flicker]


def _tau_nodes(t1, t2, n=6):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t2 - t1) * x + 0.5 * (t1 + t2), 0.5 * w


def _tau_average(func, t1, t2):
    taus, w = _tau_nodes(t1, t2)
    return sum(wi * func(ti) for ti, wi in zip(taus, w))


# ---------------------------------------------------------------------------
# exponential integral


def _e1_series(x):
    # E1(x) = -gamma - ln x - sum_k (-x)^k / (k k!), for 0 < x <= 1
    term = -x
    total = term.copy()
    for k in range(2, 40):
        term = term * (-x) / k
        total += term / k
    return -EULER_GAMMA - np.log(x) - total


def _e1_contfrac(x):
    # modified Lentz evaluation of the continued fraction, x > 1
    tiny = 1e-300
    b = x + 1.0
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 200):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if np.all(np.abs(delta - 1.0) < _EPS):
            break
    return h * np.exp(-x)


def expint_e1(x):
    """Exponential integral E1(x) = -Ei(-x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("E1 is only implemented for positive arguments")
    out = np.empty_like(x)
    small = x <= 1.0
    if np.any(small):
        out[small] = _e1_series(x[small])
    if np.any(~small):
        out[~small] = _e1_contfrac(x[~small])
    return float(out) if out.ndim == 0 else out


def expint_ei(x):
    """Exponential integral Ei(x) for negative x.

    Power series for |x| <= 1, continued fraction beyond.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x < 0)):
        raise DomainError("Ei is only implemented for negative arguments")
    out = -np.asarray(expint_e1(-x))
    return float(out) if out.ndim == 0 else out


def _e1_difference(x2, x1, log_ratio):
    """E1(x2) - E1(x1) for 0 < x2 < x1, without cancellation for small x.

    ``log_ratio`` is ln(x1 / x2), passed in exactly since the ratio of two
    tiny arguments may not be representable.
    """
    out = np.empty_like(x1)
    small = x1 <= 1.0
    if np.any(small):
        a, b = x1[small], x2[small]
        # ln(x1/x2) + sum_k [(-x1)^k - (-x2)^k] / (k k!)
        ta, tb = -a, -b
        total = ta - tb
        for k in range(2, 40):
            ta = ta * (-a) / k
            tb = tb * (-b) / k
            total += (ta - tb) / k
        out[small] = log_ratio + total
    big = ~small
    if np.any(big):
        out[big] = expint_e1(x2[big]) - expint_e1(x1[big])
    return out


# ---------------------------------------------------------------------------
# correlation and spectrum


def alpha(model: NoiseModel, t):
    """Correlation function alpha(t) = E[xi(s) xi(s + t)] for t >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t >= 0)):
        raise DomainError("alpha is defined for t >= 0; pass |t - s|")
    if isinstance(model, OU):
        out = np.exp(-t / model.tau) * (0.5 / model.tau)
    elif isinstance(model, Flicker):
        t1, t2 = model.tau1, model.tau2
        if t2 - t1 < _NARROW * t1:
            out = _tau_average(lambda tau: np.exp(-t / tau) * (0.5 / tau), t1, t2)
        else:
            out = np.full_like(t, model.alpha0)
            pos = t > 0
            if np.any(pos):
                tp = t[pos]
                out[pos] = _e1_difference(tp / t2, tp / t1, math.log(t2 / t1)) / (2.0 * (t2 - t1))
    else:
        raise InvalidParameterError(f"unknown noise model {model!r}")
    return float(out) if np.ndim(out) == 0 else out


def _atan_over(z):
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = z > 1e-8
    out[nz] = np.arctan(z[nz]) / z[nz]
    out[~nz] = 1.0 - z[~nz] ** 2 / 3.0
    return out


def spectrum(model: NoiseModel, omega):
    """Spectral density S(Omega) = (1/pi) int_0^inf alpha(t) cos(Omega t) dt."""
    omega = np.asarray(omega, dtype=float)
    if np.any(~(omega >= 0)):
        raise DomainError("spectrum is defined for omega >= 0")
    if isinstance(model, OU):
        out = 1.0 / (2.0 * math.pi * (1.0 + (model.tau * omega) ** 2))
    elif isinstance(model, Flicker):
        t1, t2 = model.tau1, model.tau2
        # arccot(t1 W) - arccot(t2 W) = arctan((t2 - t1) W / (1 + t1 t2 W^2))
        denom = 1.0 + t1 * t2 * omega**2
        z = (t2 - t1) * omega / denom
        out = _atan_over(z) / (2.0 * math.pi * denom)
    else:
        raise InvalidParameterError(f"unknown noise model {model!r}")
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class NoisePath:
    """One realization xi_0..xi_K on the grid t_k = k dt spanning [0, T]."""

    dt: float
    samples: np.ndarray
    seed: int
    tau_drawn: float

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.samples))

    @property
    def duration(self) -> float:
        return self.dt * (len(self.samples) - 1)


def realization_seed(master_seed: int, index: int) -> int:
    """64-bit seed of realization ``index`` derived from the master seed."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def max_step(model: NoiseModel, omega0: float | None = None, tau_eff: float | None = None) -> float:
    """Largest admissible grid step min(tau_eff / 20, T0 / 100)."""
    tau = model.tau_min if tau_eff is None else tau_eff
    h = tau / 20.0
    if omega0 is not None:
        h = min(h, 2.0 * math.pi / omega0 / 100.0)
    return h


def sample_path(model: NoiseModel, T: float, dt: float, seed: int,
                omega0: float | None = None) -> NoisePath:
    """Draw one stationary path on a uniform grid covering [0, T].

    The step is shrunk to T / ceil(T / dt) so the grid ends exactly at T.
    OU paths use the exact discrete transition, so grid correlations equal
    alpha(|t_j - t_k|). Flicker paths first draw tau uniformly in
    [tau1, tau2] and then run the OU recipe.
    """
    if not (T > 0 and dt > 0):
        raise InvalidParameterError(f"T and dt must be positive, got T={T!r}, dt={dt!r}")
    n_steps = max(1, math.ceil(T / dt - 1e-9))
    if n_steps > 1e8:
        raise ResolutionError(f"T/dt = {n_steps} exceeds the 1e8 grid limit")
    h = T / n_steps
    rng = np.random.default_rng(int(seed))
    if isinstance(model, Flicker):
        tau = float(rng.uniform(model.tau1, model.tau2))
    elif isinstance(model, OU):
        tau = model.tau
    else:
        raise InvalidParameterError(f"unknown noise model {model!r}")
    if h > tau / 20.0 * (1 + 1e-12):
        raise ResolutionError(
            f"dt={h!r} exceeds tau/20={tau / 20.0!r} (correlation-time constraint)"
        )
    if omega0 is not None and h > 2 * math.pi / omega0 / 100.0 * (1 + 1e-12):
        raise ResolutionError(
            f"dt={h!r} exceeds T0/100={2 * math.pi / omega0 / 100.0!r} (trap-period constraint)"
        )
    z = rng.standard_normal(n_steps + 1)
    decay = math.exp(-h / tau)
    drive = math.sqrt(-math.expm1(-2.0 * h / tau) / (2.0 * tau))
    z[0] *= math.sqrt(0.5 / tau)
    z[1:] *= drive
    xi = lfilter([1.0], [1.0, -decay], z)
    return NoisePath(dt=h, samples=xi, seed=int(seed), tau_drawn=tau)
