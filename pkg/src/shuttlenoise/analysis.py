"""Crossover curve G1 = G2, optimal shuttling time and n6 optimization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import PhysicalSystem
from .errors import InvalidParameterError, NoCrossingError, NumericError
from .noise import OU
from .sensitivity import (
    g1_ou_exact,
    g1_quadrature,
    g2_ou_exact_poly,
    g2_quadrature,
)
from .trajectory import make_poly5, make_poly6

__all__ = [
    "CrossoverPoint",
    "OptimalTime",
    "golden_section",
    "crossover_T",
    "crossover_roots",
    "approx_crossover_T",
    "optimal_T",
    "approx_optimal_T",
    "optimize_n6",
    "crossover_scan",
]

# physical search window, in trap periods
T_MIN_PERIODS = 1.0
T_MAX_PERIODS = 500.0
_SCAN_POINTS = 600
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CrossoverPoint:
    tau: float
    t_cross: float
    t_opt: float
    multiplicity: int = 1
    flag: str = ""


@dataclass(frozen=True)
class OptimalTime:
    T: float
    G: float
    flag: str = ""


def golden_section(f, a: float, b: float, xtol: float, maxiter: int = 500):
    """Minimize a unimodal ``f`` on [a, b]; returns (x, f(x))."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _check_tau(tau, sys):
    t0 = sys.period
    if not (1e-3 * t0 * (1 - 1e-9) <= tau <= 10 * t0 * (1 + 1e-9)):
        raise InvalidParameterError(
            f"tau must lie in [1e-3 T0, 10 T0]; got tau = {tau / t0:.4g} T0"
        )


def _g_exact(T, tau, n, sys):
    g1 = g1_ou_exact(tau, T, n, sys.omega0, sys.hbar)
    g2 = g2_ou_exact_poly(tau, T, sys)
    return g1, g2


def crossover_roots(tau: float, n: int, sys: PhysicalSystem) -> list:
    """All roots of G1 - G2 (quintic, OU closed forms) in [T0, 500 T0]."""
    t0 = sys.period
    grid = np.geomspace(T_MIN_PERIODS * t0, T_MAX_PERIODS * t0, _SCAN_POINTS)

    def diff(T):
        g1, g2 = _g_exact(T, tau, n, sys)
        return (g1 - g2) / (g1 + g2)

    vals = np.array([diff(T) for T in grid])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]:
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
            continue
        roots.append(brentq(diff, grid[i], grid[i + 1], xtol=1e-12 * t0, rtol=1e-14))
    return roots


def crossover_T(tau: float, n: int, sys: PhysicalSystem, traj_family: str = "poly5") -> float:
    """Smallest shuttling time at which G1 = G2 for OU noise of correlation time tau."""
    if traj_family != "poly5":
        raise InvalidParameterError("crossover analysis is defined for the poly5 family")
    _check_tau(tau, sys)
    roots = crossover_roots(tau, n, sys)
    if not roots:
        raise NoCrossingError(f"G1 - G2 has no sign change in [T0, 500 T0] for tau={tau!r}")
    return roots[0]


def approx_crossover_T(tau: float, n: int, sys: PhysicalSystem) -> float:
    """Root of T + tau = a / T^3 with a = 480 m d^2 / (7 hbar w^3 (n + 1/2))."""
    a = 480.0 * sys.mass * sys.distance**2 / (7.0 * sys.hbar * sys.omega0**3 * (n + 0.5))
    hi = max(a ** 0.25, tau) * 2.0
    return brentq(lambda T: (T + tau) * T**3 - a, 0.0, hi, xtol=1e-15 * hi)


def approx_optimal_T(n: int, sys: PhysicalSystem) -> float:
    """Large-tau plateau (1440 m d^2 / (7 hbar w^3 (n + 1/2)))^(1/4)."""
    return (1440.0 * sys.mass * sys.distance**2
            / (7.0 * sys.hbar * sys.omega0**3 * (n + 0.5))) ** 0.25


def optimal_T(tau: float, n: int, sys: PhysicalSystem, with_flag: bool = False):
    """Shuttling time minimizing G1 + G2 (quintic, OU closed forms)."""
    _check_tau(tau, sys)
    t0 = sys.period
    grid = np.geomspace(T_MIN_PERIODS * t0, T_MAX_PERIODS * t0, _SCAN_POINTS)

    def total(T):
        return sum(_g_exact(T, tau, n, sys))

    vals = np.array([total(T) for T in grid])
    i = int(np.argmin(vals))
    flag = ""
    if i == 0 or i == len(grid) - 1:
        flag = "minimum at search-window edge"
        res = OptimalTime(float(grid[i]), float(vals[i]), flag)
        return res if with_flag else res.T
    interior = vals[1:-1]
    local_min = np.sum((interior < vals[:-2]) & (interior < vals[2:]))
    if local_min > 1:
        flag = f"{local_min} local minima in coarse scan"
    x, fx = golden_section(total, grid[i - 1], grid[i + 1], xtol=1e-6 * t0)
    res = OptimalTime(float(x), float(fx), flag)
    return res if with_flag else res.T


def crossover_scan(taus, n: int, sys: PhysicalSystem, spot_checks: int = 5,
                   seed: int = 0) -> list:
    """(tau, t_cross, t_opt) for each tau, with quadrature spot checks.

    At ``spot_checks`` randomly chosen (T, tau) points the closed forms are
    compared against the generic quadrature; a mismatch above 1e-6 raises.
    """
    rows = []
    for tau in taus:
        roots = crossover_roots(tau, n, sys)
        opt = optimal_T(tau, n, sys, with_flag=True)
        if not roots:
            rows.append(CrossoverPoint(tau, math.nan, opt.T, 0, "no crossing"))
            continue
        flag = opt.flag
        if opt.T >= roots[0] and not flag:
            flag = "t_opt >= t_cross"
        rows.append(CrossoverPoint(tau, roots[0], opt.T, len(roots), flag))
    spot_check(rows, n, sys, spot_checks, seed)
    return rows


def spot_check(rows, n: int, sys: PhysicalSystem, count: int = 5, seed: int = 0) -> None:
    """Compare closed forms with quadrature at ``count`` random rows; raise on mismatch."""
    rng = np.random.default_rng(seed)
    t0 = sys.period
    for _ in range(min(count, len(rows))):
        row = rows[int(rng.integers(len(rows)))]
        T = row.t_cross if math.isfinite(row.t_cross) else row.t_opt
        g1, g2 = _g_exact(T, row.tau, n, sys)
        model = OU(row.tau)
        q1 = g1_quadrature(model, T, n, sys.omega0, sys.hbar)
        q2 = g2_quadrature(model, make_poly5(T, sys.distance), sys)
        if abs(q1 - g1) > 1e-6 * g1 or abs(q2 - g2) > 1e-6 * g2:
            raise NumericError(
                f"closed form disagrees with quadrature at T={T / t0:.4g} T0, tau={row.tau / t0:.4g} T0"
            )


def optimize_n6(T: float, tau: float, sys: PhysicalSystem, bracket: float = 100.0,
                xtol: float = 1e-8, rtol: float = 1e-10):
    """Free sixth-order coefficient minimizing G2 for OU noise.

    Searches n6 in [-B, B] with B = bracket * d / T^6 and expands the bracket
    (up to three times) when the minimizer sits on its edge. ``xtol`` is
    relative to B. Returns ``(n6_opt, g2_min)``.
    """
    d = sys.distance
    if d <= 0:
        raise InvalidParameterError("n6 optimization needs a non-zero distance")
    model = OU(tau)
    scale = d / T**6

    def g2(c):
        return g2_quadrature(model, make_poly6(T, d, c * scale), sys, rtol=rtol)

    half = bracket
    for _ in range(4):
        c, val = golden_section(g2, -half, half, xtol=xtol * half)
        if abs(c) < half * (1 - 1e-6):
            return c * scale, val
        half *= 10.0
    raise NumericError("n6 minimizer stayed on the bracket edge after 3 expansions",
                       estimate=c * scale)
