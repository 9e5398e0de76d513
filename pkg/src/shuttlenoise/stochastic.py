"""Monte-Carlo oracle: integrate the noisy auxiliary equations per realization.

The Newton equation is integrated for the deviation y = q_c - q_c^(0) from
the reference trajectory,

    y'' + w^2(t) y = lam xi(t) qddot_c^(0)(t),

which is algebraically identical to the driven equation for q_c but leaves
y = 0 exactly when lam = 0. All integration happens in oscillator units with
a fixed RK4 step locked to the noise grid; xi is linearly interpolated
between grid nodes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import AuxiliaryState, PhysicalSystem, excitation_energy
from .errors import InvalidParameterError, NumericError, SingularStateError
from .noise import NoiseModel, NoisePath, max_step, realization_seed, sample_path
from .sensitivity import g1_quadrature, g2_quadrature
from .trajectory import Trajectory

__all__ = [
    "FirstOrderTerms",
    "MonteCarloReport",
    "integrate_auxiliary",
    "first_order_terms",
    "second_order_energy",
    "run_monte_carlo",
    "default_step",
]

_BATCH = 256


@dataclass(frozen=True)
class FirstOrderTerms:
    rho1_T: float
    rho1_dot_T: float
    qc1_T: float
    qc1_dot_T: float


@dataclass
class MonteCarloReport:
    n_realizations: int
    lam: float
    mean_excitation: float
    std_error: float
    predicted: float
    ratio: float
    master_seed: int
    g1: float = 0.0
    g2: float = 0.0
    n_failed: int = 0
    energy_quantum: float = 1.0
    excitations: np.ndarray | None = field(default=None, repr=False)

    def within_band(self, n_sigma: float = 3.0, rel_bias: float = 0.05) -> bool:
        """|mean - predicted| <= n_sigma * stderr + rel_bias * predicted.

        An absolute allowance of 1e-9 hbar w0 covers the integrator noise
        floor, which matters only when the prediction itself is zero.
        """
        tol = (n_sigma * self.std_error + rel_bias * abs(self.predicted)
               + NOISE_FLOOR * self.energy_quantum)
        return abs(self.mean_excitation - self.predicted) <= tol

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("excitations")
        out["lambda"] = out.pop("lam")
        return out


NOISE_FLOOR = 1e-9


def default_step(model: NoiseModel, omega0: float) -> float:
    """min(tau_min / 20, T0 / 100) in the units of ``model``."""
    return max_step(model, omega0)


def _osc_inputs(traj: Trajectory, sys: PhysicalSystem):
    w = sys.omega0
    traj_o = traj.scaled(1.0 / w, sys.length_scale)
    return traj_o


def _half_step_accel(traj_o: Trajectory, n_steps: int, h: float) -> np.ndarray:
    t = np.minimum(0.5 * h * np.arange(2 * n_steps + 1), traj_o.duration)
    return traj_o.eval(t, 2)


def _rk4(xi, lam, h, accel, n_steps, check_every=64):
    """Integrate a batch. ``xi`` is (B, K+1) node values or a callable xi(t).

    Returns final (rho, rho_dot, y, y_dot) arrays, the failure mask and the
    earliest time at which a failure was noticed (or None).
    """
    callable_xi = callable(xi)
    B = 1 if callable_xi else xi.shape[0]
    rho = np.ones(B)
    v = np.zeros(B)
    y = np.zeros(B)
    w = np.zeros(B)
    bad = np.zeros(B, dtype=bool)
    fail_t = None
    h2, h6 = 0.5 * h, h / 6.0

    def deriv(r, vr, q, vq, lx, a):
        g = 1.0 + lx
        return vr, r ** -3 - g * r, vq, lx * a - g * q

    for k in range(n_steps):
        if callable_xi:
            t = k * h
            x0, xm, x1 = xi(t), xi(t + h2), xi(t + h)
        else:
            x0 = xi[:, k]
            x1 = xi[:, k + 1]
            xm = 0.5 * (x0 + x1)
        l0, lm, l1 = lam * x0, lam * xm, lam * x1
        a0, am, a1 = accel[2 * k], accel[2 * k + 1], accel[2 * k + 2]
        k1 = deriv(rho, v, y, w, l0, a0)
        k2 = deriv(rho + h2 * k1[0], v + h2 * k1[1], y + h2 * k1[2], w + h2 * k1[3], lm, am)
        k3 = deriv(rho + h2 * k2[0], v + h2 * k2[1], y + h2 * k2[2], w + h2 * k2[3], lm, am)
        k4 = deriv(rho + h * k3[0], v + h * k3[1], y + h * k3[2], w + h * k3[3], l1, a1)
        rho = rho + h6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v = v + h6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        y = y + h6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        w = w + h6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        if k % check_every == check_every - 1 or k == n_steps - 1:
            now_bad = ~(rho > 0) | ~np.isfinite(v) | ~np.isfinite(y) | ~np.isfinite(w)
            if np.any(now_bad & ~bad) and fail_t is None:
                fail_t = (k + 1) * h
            bad |= now_bad
            if np.any(now_bad):
                # park failed members so they cannot overflow the others' arithmetic
                rho = np.where(now_bad, 1.0, rho)
                v = np.where(now_bad, 0.0, v)
                y = np.where(now_bad, 0.0, y)
                w = np.where(now_bad, 0.0, w)
    return rho, v, y, w, bad, fail_t


def _to_state(traj: Trajectory, sys: PhysicalSystem, rho, v, y, w) -> AuxiliaryState:
    wf, a0 = sys.omega0, sys.length_scale
    T = traj.duration
    return AuxiliaryState(
        rho=float(rho),
        rho_dot=float(v) * wf,
        qc=traj.eval(T, 0) + float(y) * a0,
        qc_dot=traj.eval(T, 1) + float(w) * a0 * wf,
    )


def integrate_auxiliary(traj: Trajectory, path, lam: float,
                        sys: PhysicalSystem) -> AuxiliaryState:
    """Integrate the Ermakov and Newton equations up to t = T for one realization.

    ``path`` is a :class:`NoisePath` expressed in the units of ``sys`` (times
    in the same unit as ``traj.duration``), or a callable xi(t) together with
    a ``(callable, dt)`` tuple for analytic test inputs. ``lam`` is the noise
    strength in oscillator units.
    """
    w0 = sys.omega0
    traj_o = _osc_inputs(traj, sys)
    if isinstance(path, NoisePath):
        n_steps = len(path.samples) - 1
        if abs(path.duration - traj.duration) > 1e-9 * traj.duration:
            raise InvalidParameterError("noise grid must span [0, T] of the trajectory")
        h = path.dt * w0
        xi = (np.asarray(path.samples) / math.sqrt(w0))[None, :]
    else:
        func, dt = path
        n_steps = max(1, math.ceil(traj.duration / dt - 1e-9))
        h = traj.duration / n_steps * w0
        xi = lambda t: func(t / w0) / math.sqrt(w0)  # noqa: E731
    accel = _half_step_accel(traj_o, n_steps, h)
    rho, v, y, w, bad, fail_t = _rk4(xi, lam, h, accel, n_steps)
    if bad[0]:
        t = None if fail_t is None else fail_t / w0
        if not np.isfinite(v[0]) or not np.isfinite(y[0]):
            raise NumericError(f"non-finite auxiliary state near t={t!r}")
        raise SingularStateError(f"rho reached <= 0 near t={t!r}", t=t)
    return _to_state(traj, sys, rho[0], v[0], y[0], w[0])


def _simpson_on_grid(values_nodes, values_mid, h):
    # per-interval Simpson with the interpolant's midpoint values
    return h / 6.0 * np.sum(values_nodes[:-1] + 4.0 * values_mid + values_nodes[1:])


def first_order_terms(traj: Trajectory, path: NoisePath, sys: PhysicalSystem) -> FirstOrderTerms:
    """First-order coefficients rho^(1), q_c^(1) and their rates at t = T.

    Evaluated with per-interval Simpson rules on the piecewise-linear noise,
    which matches what the RK4 integrator sees.
    """
    w0 = sys.omega0
    traj_o = _osc_inputs(traj, sys)
    xi = np.asarray(path.samples) / math.sqrt(w0)
    n = len(xi) - 1
    h = path.dt * w0
    T = n * h
    t_nodes = h * np.arange(n + 1)
    t_mid = t_nodes[:-1] + 0.5 * h
    xi_mid = 0.5 * (xi[:-1] + xi[1:])
    a_nodes = traj_o.eval(np.minimum(t_nodes, traj_o.duration), 2)
    a_mid = traj_o.eval(t_mid, 2)

    def conv(kernel):
        return _simpson_on_grid(xi * kernel(t_nodes, a_nodes), xi_mid * kernel(t_mid, a_mid), h)

    rho1 = -0.5 * conv(lambda s, a: np.sin(2.0 * (T - s)))
    rho1_dot = -conv(lambda s, a: np.cos(2.0 * (T - s)))
    q1 = conv(lambda s, a: np.sin(T - s) * a)
    q1_dot = conv(lambda s, a: np.cos(T - s) * a)
    a0 = sys.length_scale
    return FirstOrderTerms(
        rho1_T=float(rho1),
        rho1_dot_T=float(rho1_dot) * w0,
        qc1_T=float(q1) * a0,
        qc1_dot_T=float(q1_dot) * a0 * w0,
    )


def second_order_energy(terms: FirstOrderTerms, sys: PhysicalSystem) -> float:
    """Coefficient of lam^2 in the final energy for one realization."""
    m, w, hbar = sys.mass, sys.omega0, sys.hbar
    two_n1 = 2 * sys.mode + 1
    return (
        0.5 * m * w * w * terms.qc1_T**2
        + hbar * w * two_n1 * terms.rho1_T**2
        + 0.5 * m * terms.qc1_dot_T**2
        + hbar / (4.0 * w) * two_n1 * terms.rho1_dot_T**2
    ) / w


def _run_batch(args):
    traj, model, lam, sys, dt, master_seed, indices = args
    w0 = sys.omega0
    traj_o = _osc_inputs(traj, sys)
    paths = [sample_path(model, traj.duration, dt, realization_seed(master_seed, k), omega0=w0)
             for k in indices]
    n_steps = len(paths[0].samples) - 1
    h = paths[0].dt * w0
    xi = np.stack([p.samples for p in paths]) / math.sqrt(w0)
    accel = _half_step_accel(traj_o, n_steps, h)
    rho, v, y, w, bad, _ = _rk4(xi, lam, h, accel, n_steps)
    exc = np.empty(len(indices))
    for i in range(len(indices)):
        if bad[i]:
            exc[i] = np.nan
            continue
        state = _to_state(traj, sys, rho[i], v[i], y[i], w[i])
        exc[i] = excitation_energy(state, sys)
    return exc


def run_monte_carlo(traj: Trajectory, model: NoiseModel, lam: float, N: int,
                    master_seed: int, sys: PhysicalSystem, dt: float | None = None,
                    workers: int | None = 1, batch_size: int = _BATCH,
                    predict: bool = True, keep_samples: bool = False) -> MonteCarloReport:
    """Ensemble-average the exact final excitation and compare with lam^2 (G1 + G2).

    ``model`` and ``dt`` are in the time unit of ``sys``; realization k uses
    the seed derived from ``(master_seed, k)``, so the report does not depend
    on batching or on the number of workers.
    """
    if not (0 <= lam <= 0.05):
        raise InvalidParameterError(f"lambda must lie in [0, 0.05], got {lam!r}")
    if N < 2:
        raise InvalidParameterError("need at least two realizations")
    if dt is None:
        dt = default_step(model, sys.omega0)
    sys_d = sys.with_(distance=traj.distance)
    jobs = [(traj, model, lam, sys_d, dt, master_seed, list(range(i, min(i + batch_size, N))))
            for i in range(0, N, batch_size)]
    workers = workers or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_batch, jobs))
    else:
        parts = [_run_batch(j) for j in jobs]
    exc = np.concatenate(parts)
    ok = np.isfinite(exc)
    n_failed = int(N - ok.sum())
    if n_failed > 0.01 * N:
        raise NumericError(f"{n_failed} of {N} realizations failed (more than 1%)")
    good = exc[ok]
    n_ok = good.size
    mean = math.fsum(good) / n_ok
    var = math.fsum((good - mean) ** 2) / (n_ok - 1)
    stderr = math.sqrt(var / n_ok)
    g1 = g2 = predicted = 0.0
    if predict:
        g1 = g1_quadrature(model, traj.duration, sys.mode, sys.omega0, sys.hbar)
        g2 = g2_quadrature(model, traj, sys_d)
        predicted = lam * lam * (g1 + g2) / sys.omega0
    ratio = mean / predicted if predicted > 0 else (1.0 if mean == 0 else math.inf)
    return MonteCarloReport(
        n_realizations=n_ok,
        lam=lam,
        mean_excitation=mean,
        std_error=stderr,
        predicted=predicted,
        ratio=ratio,
        master_seed=int(master_seed),
        g1=g1,
        g2=g2,
        n_failed=n_failed,
        energy_quantum=sys.hbar * sys.omega0,
        excitations=exc if keep_samples else None,
    )
