import math

import numpy as np
import pytest
from helpers import approx

from shuttlenoise import excitation_energy, final_energy
from shuttlenoise.errors import InvalidParameterError
from shuttlenoise.noise import OU, NoisePath, realization_seed, sample_path
from shuttlenoise.stochastic import (
    first_order_terms,
    integrate_auxiliary,
    run_monte_carlo,
    second_order_energy,
)
from shuttlenoise.trajectory import make_trajectory


@pytest.fixture(scope="module")
def poly5(ca40, t0):
    return make_trajectory("poly5", 5 * t0, ca40.distance)


def _path(t0, T, tau=0.1, seed=3, step=200):
    return sample_path(OU(tau * t0), T, t0 / step, seed)


@pytest.mark.parametrize("ansatz", ["poly5", "cosine3", "poly6"])
@pytest.mark.parametrize("periods", [1, 5, 50])
def test_noiseless_transport_is_exact(ca40, t0, ansatz, periods):
    T = periods * t0
    tr = make_trajectory(ansatz, T, ca40.distance, 20 * ca40.distance / T**6)
    st = integrate_auxiliary(tr, _path(t0, T, tau=1.0, step=100), 0.0, ca40)
    assert abs(st.rho - 1) < 1e-9
    assert abs(st.rho_dot) < 1e-9 * ca40.omega0
    assert abs(st.qc - ca40.distance) < 1e-9 * ca40.distance
    assert abs(st.qc_dot) < 1e-9 * ca40.distance / T
    assert excitation_energy(st, ca40) < 1e-9 * ca40.energy_quantum
    assert final_energy(st, ca40) == approx(0.5 * ca40.energy_quantum, rel=1e-9)


def test_convergence_order(ca40, t0, poly5):
    w = ca40.omega0
    xi = lambda t: math.sqrt(w) * np.sin(w * t)  # noqa: E731
    e = [excitation_energy(integrate_auxiliary(poly5, (xi, t0 / (100 * 2**k)), 0.01, ca40), ca40)
         for k in range(5)]
    diffs = np.abs(np.diff(e))
    order = np.polyfit(np.arange(diffs.size), np.log2(diffs), 1)[0]
    assert -order >= 3.8


def test_grid_mismatch_rejected(ca40, t0, poly5):
    with pytest.raises(InvalidParameterError):
        integrate_auxiliary(poly5, _path(t0, 3 * t0), 0.01, ca40)


def test_first_order_zero_noise(ca40, t0, poly5):
    p = _path(t0, 5 * t0)
    zero = NoisePath(p.dt, np.zeros_like(p.samples), 0, p.tau_drawn)
    ft = first_order_terms(poly5, zero, ca40)
    assert (ft.rho1_T, ft.rho1_dot_T, ft.qc1_T, ft.qc1_dot_T) == (0.0, 0.0, 0.0, 0.0)


def test_first_order_constant_noise(ca40, t0):
    # xi = sqrt(w0) is unit noise in oscillator units
    T = 5.3 * t0
    tr = make_trajectory("poly5", T, ca40.distance)
    p = _path(t0, T)
    const = NoisePath(p.dt, np.full_like(p.samples, math.sqrt(ca40.omega0)), 0, p.tau_drawn)
    ft = first_order_terms(tr, const, ca40)
    assert ft.rho1_T == approx(-0.25 * (1 - math.cos(2 * ca40.omega0 * T)), rel=1e-7)


def test_first_order_matches_small_lambda(ca40, t0, poly5):
    p = _path(t0, 5 * t0)
    ft = first_order_terms(poly5, p, ca40)
    r = [(integrate_auxiliary(poly5, p, lam, ca40).rho - 1) / lam for lam in (1e-2, 5e-3, 2.5e-3)]
    r1 = [2 * r[1] - r[0], 2 * r[2] - r[1]]
    extrap = (4 * r1[1] - r1[0]) / 3
    assert extrap == approx(ft.rho1_T, rel=5e-3)


def test_second_order_energy(ca40, t0, poly5):
    p = _path(t0, 5 * t0, seed=11)
    lam = 1e-4
    exact = excitation_energy(integrate_auxiliary(poly5, p, lam, ca40), ca40)
    assert exact / lam**2 == approx(second_order_energy(first_order_terms(poly5, p, ca40), ca40) * ca40.omega0,
                                    rel=1e-3)


# --- ensembles -----------------------------------------------------------------


@pytest.fixture(scope="module")
def small_run(ca40, t0, poly5):
    return run_monte_carlo(poly5, OU(2 * t0), 0.01, 300, 42, ca40, keep_samples=True)


def test_report_fields(small_run):
    r = small_run
    ex = r.excitations
    assert r.n_realizations == 300
    assert r.mean_excitation == approx(math.fsum(ex) / ex.size, rel=1e-15)
    assert r.std_error == approx(np.std(ex, ddof=1) / math.sqrt(ex.size), rel=1e-10)
    assert r.ratio == approx(r.mean_excitation / r.predicted, rel=1e-15)
    d = r.to_dict()
    assert d["lambda"] == 0.01 and "excitations" not in d


def test_energy_positivity(ca40, small_run):
    assert np.all(small_run.excitations >= -1e-9 * ca40.energy_quantum)


def test_determinism_and_worker_independence(ca40, t0, poly5, small_run):
    again = run_monte_carlo(poly5, OU(2 * t0), 0.01, 300, 42, ca40, workers=2, batch_size=64)
    assert again.to_dict() == small_run.to_dict()


def test_seed_derivation(ca40, t0, poly5, small_run):
    # realization 5 alone reproduces sample 5 of the ensemble
    p = sample_path(OU(2 * t0), 5 * t0, t0 / 100, realization_seed(42, 5), omega0=ca40.omega0)
    e = excitation_energy(integrate_auxiliary(poly5, p, 0.01, ca40), ca40)
    assert e == approx(small_run.excitations[5], rel=1e-12)


def test_quadratic_scaling(ca40, t0, poly5, small_run):
    half = run_monte_carlo(poly5, OU(2 * t0), 0.005, 300, 42, ca40, keep_samples=True, predict=False)
    diff = small_run.excitations / 4 - half.excitations
    assert abs(diff.mean()) <= 3 * diff.std(ddof=1) / math.sqrt(diff.size)
    assert abs(small_run.mean_excitation / 4 - half.mean_excitation) <= 3 * half.std_error


def test_stationary_trap_matches_g1(ca40, t0):
    tr = make_trajectory("poly5", 5 * t0, 0.0)
    r = run_monte_carlo(tr, OU(0.1 * t0), 0.01, 2000, 7, ca40.with_(distance=0.0))
    assert r.g2 == 0.0
    assert r.within_band()


def test_perturbative_agreement(ca40, t0, poly5):
    r = run_monte_carlo(poly5, OU(0.1 * t0), 0.01, 1000, 1, ca40)
    assert r.within_band(), r


@pytest.mark.parametrize("kw", [dict(lam=-0.01), dict(lam=0.1), dict(N=1)])
def test_invalid_arguments(ca40, t0, poly5, kw):
    args = dict(lam=0.01, N=100)
    args.update(kw)
    with pytest.raises(InvalidParameterError):
        run_monte_carlo(poly5, OU(t0), args["lam"], args["N"], 0, ca40)
