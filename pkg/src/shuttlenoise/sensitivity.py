"""Static (G1) and dynamical (G2) noise sensitivities.

The generic routes integrate any correlation function from
:mod:`shuttlenoise.noise` numerically. Closed forms for OU noise with the
quintic trajectory, and the asymptotic regimes, are separate functions; the
:func:`sensitivities` dispatcher only uses them when asked to.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .core import HBAR, PhysicalSystem
from .errors import DomainError, InvalidParameterError
from .noise import OU, Flicker, NoiseModel, alpha, spectrum
from .trajectory import Ansatz, Trajectory, make_poly5

__all__ = [
    "Method",
    "Sensitivities",
    "ExcitationPrediction",
    "f_autocorr",
    "g1_quadrature",
    "g2_quadrature",
    "g1_ou_exact",
    "g2_ou_exact_poly",
    "g2_ou_large_tau_poly",
    "g_ou_short_tau",
    "g_ou_mid_tau",
    "g1_ou_large_tau",
    "g_flicker_flat",
    "g2_flicker_poly_closed",
    "heating_rate_stationary",
    "predict_excitation",
    "sensitivities",
]

DEFAULT_RTOL = 1e-8


class Method(str, enum.Enum):
    QUADRATURE = "Quadrature"
    OU_EXACT = "OUExact"
    OU_SHORT_TAU = "OUShortTau"
    OU_MID_TAU = "OUMidTau"
    OU_LARGE_TAU = "OULargeTau"
    FLICKER_FLAT = "FlickerFlat"
    FLICKER_POLY_CLOSED = "FlickerPolyClosed"


@dataclass(frozen=True)
class Sensitivities:
    g1: float
    g2: float
    method: Method

    @property
    def total(self) -> float:
        return self.g1 + self.g2


@dataclass(frozen=True)
class ExcitationPrediction:
    lam: float
    e0: float
    delta_e: float


def f_autocorr(traj: Trajectory, s, omega0: float):
    """cos(omega0 s) times the acceleration autocorrelation at lag s."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > traj.duration * (1 + 1e-12)):
        raise DomainError("lag s must lie in [0, T]")
    out = np.cos(omega0 * s) * traj.accel_autocorr(np.clip(s, 0.0, traj.duration))
    return float(out) if np.ndim(out) == 0 else out


def g1_quadrature(model: NoiseModel, T: float, n: int, omega0: float,
                  hbar: float = HBAR, rtol: float = DEFAULT_RTOL) -> float:
    """hbar w0^3 (n + 1/2) int_0^T alpha(s) (T - s) cos(2 w0 s) ds."""
    if not T > 0:
        raise InvalidParameterError(f"T must be positive, got {T!r}")

    def integrand(s):
        return alpha(model, s) * (T - s) * np.cos(2.0 * omega0 * s)

    bp = quadrature.cosine_breakpoints(0.0, T, 2.0 * omega0)
    val, _ = quadrature.integrate(integrand, bp, rtol=rtol)
    return hbar * omega0**3 * (n + 0.5) * val


def g2_quadrature(model: NoiseModel, traj: Trajectory, sys: PhysicalSystem,
                  rtol: float = DEFAULT_RTOL) -> float:
    """m int_0^T alpha(s) f(s) ds for the given trajectory."""
    if traj.distance == 0.0:
        return 0.0
    T, w = traj.duration, sys.omega0

    def integrand(s):
        return alpha(model, s) * np.cos(w * s) * traj.accel_autocorr(s)

    bp = quadrature.cosine_breakpoints(0.0, T, w)
    val, _ = quadrature.integrate(integrand, bp, rtol=rtol)
    return sys.mass * val


def g1_ou_exact(tau: float, T: float, n: int, omega0: float, hbar: float = HBAR) -> float:
    """Closed-form G1 for OU noise."""
    if not (tau > 0 and T > 0):
        raise InvalidParameterError("tau and T must be positive")
    x2 = 4.0 * tau * tau * omega0 * omega0
    a = 1.0 + x2
    e = math.exp(-T / tau)
    c2, s2 = math.cos(2 * omega0 * T), math.sin(2 * omega0 * T)
    m = tau / (2.0 * a * a) * ((x2 - 1.0) - e * ((x2 - 1.0) * c2 + 4 * tau * omega0 * s2))
    return hbar * omega0**3 * (n + 0.5) * (T / (2.0 * a) + m)


# integer coefficients of the G2 polynomials, listed by power of X^2, for each
# power of tau/T
_M1 = {
    7: (30240, -846720, 2116800, -846720, 30240),
    5: (-2520, 32760, 35280, -35280, -32760, 2520),
    3: (210, -420, -3570, -5880, -3570, -420, 210),
    2: (-42, -84, 210, 840, 1050, 588, 126),
    0: (1, 7, 21, 35, 35, 21, 7, 1),
}
_M2 = {
    7: (-144, 4032, -10080, 4032, -144),
    6: (-144, 2880, -2016, -4032, 1008),
    5: (-60, 780, 840, -840, -780, 60),
    4: (-12, 84, 264, 168, -60, -60),
    3: (-1, 2, 17, 28, 17, 2, -1),
}
_M3 = {
    7: (288, -2016, 2016, -288),
    6: (252, -1008, -504, 720, -36),
    5: (90, -120, -420, -120, 90),
    4: (15, 15, -42, -66, -21, 3),
    3: (1, 3, 2, -2, -3, -1),
}


def _bipoly(table, r, y, one_minus):
    """sum_p r^p P_p(y), y = X^2 / (1 + X^2), with each P_p scaled by (1+X^2)^-8.

    Coefficients of X^(2j) are rewritten through y^j (1 - y)^(8 - j) so large
    X never forms X^16 explicitly.
    """
    total = 0.0
    for p in sorted(table, reverse=True):
        acc = 0.0
        for j, c in enumerate(table[p]):
            acc += c * y**j * one_minus ** (8 - j)
        total += acc * r**p
    return total


def g2_ou_exact_poly(tau: float, T: float, sys: PhysicalSystem) -> float:
    """Closed-form G2 for OU noise and the quintic trajectory."""
    if not (tau > 0 and T > 0):
        raise InvalidParameterError("tau and T must be positive")
    w, d = sys.omega0, sys.distance
    X = w * tau
    y = X * X / (1.0 + X * X)
    ym = 1.0 / (1.0 + X * X)
    r = tau / T
    m1 = _bipoly(_M1, r, y, ym)
    e = math.exp(-T / tau)
    osc = 0.0
    if e > 0.0:
        m2 = 210.0 * _bipoly(_M2, r, y, ym)
        m3 = 840.0 * X * _bipoly(_M3, r, y, ym)
        osc = e * (m2 * math.cos(w * T) + m3 * math.sin(w * T))
    return 60.0 * sys.mass * d * d / (7.0 * T**3) * (m1 + osc)


def g2_ou_large_tau_poly(tau: float, T: float, sys: PhysicalSystem) -> float:
    """tau -> infinity limit of the quintic G2 for OU noise (decays as 1/tau)."""
    return _flat_poly_factor(T, sys) / (2.0 * tau)


def _flat_poly_factor(T, sys):
    # m int_0^T f(s) ds for the quintic, per unit alpha(0)
    w, d = sys.omega0, sys.distance
    u = w * T
    br = 6 * u * math.cos(u / 2) + (u * u - 12) * math.sin(u / 2)
    return 7200.0 * sys.mass * d * d / (w**8 * T**10) * br * br


def g_ou_short_tau(tau: float, T: float, n: int, traj: Trajectory,
                   sys: PhysicalSystem) -> Sensitivities:
    """White-noise limit: G1 = (hbar w0^3/2)(n+1/2)(T - tau), G2 = (m/2) int qddot^2."""
    if tau > T / 10:
        warnings.warn(f"short-tau forms used with tau/T = {tau / T:.3g} > 0.1", stacklevel=2)
    g1 = 0.5 * sys.hbar * sys.omega0**3 * (n + 0.5) * (T - tau)
    g2 = 0.5 * sys.mass * traj.accel_autocorr(0.0)
    return Sensitivities(g1, g2, Method.OU_SHORT_TAU)


def g_ou_mid_tau(tau: float, T: float, n: int, sys: PhysicalSystem) -> Sensitivities:
    """Regime T >> tau >~ T0/(4 pi); quintic trajectory."""
    w = sys.omega0
    g1 = sys.hbar * w * (T + tau) / (8.0 * tau * tau) * (n + 0.5)
    g2 = 60.0 * sys.mass * sys.distance**2 / (7.0 * T**3 * w * w * tau * tau)
    return Sensitivities(g1, g2, Method.OU_MID_TAU)


def g1_ou_large_tau(tau: float, T: float, n: int, omega0: float, hbar: float = HBAR) -> float:
    """Regime tau >> T."""
    w = omega0
    c, s = math.cos(w * T), math.sin(w * T)
    t0 = 2 * math.pi / w
    bracket = T * c * c + tau * s * s - t0 / (2 * math.pi) * s * c
    return hbar * w**3 * (n + 0.5) * bracket / (4.0 * tau * tau * w * w)


def g_flicker_flat(tau1: float, tau2: float, T: float, n: int, traj: Trajectory,
                   sys: PhysicalSystem, rtol: float = DEFAULT_RTOL) -> Sensitivities:
    """Flat-correlation approximation alpha(t) ~ alpha_f(0) for tau1, tau2 >> T."""
    a0 = Flicker(tau1, tau2).alpha0
    w = sys.omega0
    g1 = a0 * 0.5 * sys.hbar * w * (n + 0.5) * math.sin(w * T) ** 2
    if traj.distance == 0.0:
        return Sensitivities(g1, 0.0, Method.FLICKER_FLAT)
    bp = quadrature.cosine_breakpoints(0.0, traj.duration, w)
    val, _ = quadrature.integrate(
        lambda s: np.cos(w * s) * traj.accel_autocorr(s), bp, rtol=rtol
    )
    return Sensitivities(g1, a0 * sys.mass * val, Method.FLICKER_FLAT)


def g2_flicker_poly_closed(tau1: float, tau2: float, T: float, sys: PhysicalSystem) -> float:
    """Closed-form flat-correlation G2 for the quintic trajectory."""
    return Flicker(tau1, tau2).alpha0 * _flat_poly_factor(T, sys)


def heating_rate_stationary(model: NoiseModel, n: int, sys: PhysicalSystem) -> float:
    """dG1/dT for T much longer than the correlation time: pi w0^2 S(2 w0) E_n."""
    e_n = sys.hbar * sys.omega0 * (n + 0.5)
    return math.pi * sys.omega0**2 * spectrum(model, 2.0 * sys.omega0) * e_n


def predict_excitation(g: Sensitivities, lam: float, n: int,
                       sys: PhysicalSystem) -> ExcitationPrediction:
    """Mean excitation lam^2 (G1 + G2) for noise strength lam in oscillator units."""
    if lam < 0:
        raise InvalidParameterError("noise strength must be non-negative")
    e0 = sys.hbar * sys.omega0 * (n + 0.5)
    return ExcitationPrediction(lam, e0, lam * lam * (g.g1 + g.g2) / sys.omega0)


def sensitivities(model: NoiseModel, traj: Trajectory, sys: PhysicalSystem,
                  method: str | Method = "auto") -> Sensitivities:
    """G1 and G2 for a model/trajectory pair.

    ``method='auto'`` uses the OU closed forms for the quintic and quadrature
    otherwise; the returned ``method`` records which path produced the numbers.
    """
    T, n = traj.duration, sys.mode
    hbar, w = sys.hbar, sys.omega0
    has_closed = isinstance(model, OU) and traj.ansatz is Ansatz.POLY5
    if method == "auto":
        method = Method.OU_EXACT if has_closed else Method.QUADRATURE
    method = Method(method)
    if method is Method.QUADRATURE:
        return Sensitivities(g1_quadrature(model, T, n, w, hbar),
                             g2_quadrature(model, traj, sys), method)
    if method is Method.OU_EXACT:
        if not has_closed:
            raise InvalidParameterError("OU closed forms need OU noise and the poly5 trajectory")
        sys_d = sys.with_(distance=traj.distance)
        return Sensitivities(g1_ou_exact(model.tau, T, n, w, hbar),
                             g2_ou_exact_poly(model.tau, T, sys_d), method)
    raise InvalidParameterError(f"method {method.value} is not available through the dispatcher")
