import math

import mpmath
import numpy as np
import pytest
from helpers import approx
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from shuttlenoise.errors import DomainError, InvalidParameterError, ResolutionError
from shuttlenoise.noise import (
    OU,
    Flicker,
    alpha,
    expint_e1,
    expint_ei,
    max_step,
    realization_seed,
    sample_path,
    spectrum,
)

EULER = 0.5772156649015329


def test_ou_alpha_zero():
    assert alpha(OU(0.3), 0.0) == approx(1 / 0.6, rel=1e-15)


def test_flicker_alpha_zero(t0):
    m = Flicker(80 * t0, 100 * t0)
    assert alpha(m, 0.0) == approx(math.log(1.25) / (40 * t0), rel=1e-14)
    assert m.alpha0 == approx(math.log(1.25) / (40 * t0), rel=1e-14)


def test_flicker_narrow_interval_is_ou():
    t = np.array([0.0, 0.1, 1.0, 5.0])
    np.testing.assert_allclose(alpha(Flicker(1.0, 1.0 + 1e-7), t), alpha(OU(1.0 + 5e-8), t), rtol=1e-9)


def test_degenerate_flicker():
    t = np.linspace(0, 20, 41)
    np.testing.assert_allclose(alpha(Flicker(1.0, 1.0 + 1e-9), t), alpha(OU(1.0), t), rtol=1e-6)


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        alpha(OU(1.0), -0.1)
    with pytest.raises(DomainError):
        spectrum(OU(1.0), -1.0)


@pytest.mark.parametrize("kw", [dict(tau=0.0), dict(tau=-1.0)])
def test_invalid_ou(kw):
    with pytest.raises(InvalidParameterError):
        OU(**kw)


@pytest.mark.parametrize("t1,t2", [(2.0, 1.0), (1.0, 1.0), (0.0, 1.0)])
def test_invalid_flicker(t1, t2):
    with pytest.raises(InvalidParameterError):
        Flicker(t1, t2)


def test_ou_spectrum_points():
    tau = 0.7
    assert spectrum(OU(tau), 0.0) == approx(1 / (2 * math.pi), rel=1e-15)
    assert spectrum(OU(tau), 1 / tau) == approx(1 / (4 * math.pi), rel=1e-15)


def test_flicker_spectrum_one_over_omega():
    m = Flicker(1.0, 1e8)
    for w in (1e-4, 1e-3, 1e-2):
        assert spectrum(m, w) == approx(1 / (4 * (m.tau2 - m.tau1) * w), rel=0.03)


def test_flicker_spectrum_zero_limit():
    m = Flicker(1.0, 3.0)
    assert spectrum(m, 0.0) == approx(1 / (2 * math.pi), rel=1e-14)
    assert spectrum(m, 1e-9) == approx(1 / (2 * math.pi), rel=1e-9)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("factor", [0.0, 1.0, 2.0])
def test_ou_spectrum_against_cosine_transform(ca40, factor):
    m = OU(0.1 * ca40.period)
    w = factor * ca40.omega0
    # integrate in x = t / tau so quad sees an O(1) scale
    f = lambda x: m.tau * float(alpha(m, m.tau * x))  # noqa: E731
    if w == 0:
        val = quad(f, 0, np.inf, epsabs=0, epsrel=1e-12)[0]
    else:
        val = quad(f, 0, np.inf, weight="cos", wvar=w * m.tau, epsabs=1e-14)[0]
    assert spectrum(m, w) == approx(val / math.pi, rel=1e-6)


def test_flicker_spectrum_against_cosine_transform(ca40):
    t0 = ca40.period
    m = Flicker(0.01 * t0, t0)
    w = 2 * ca40.omega0
    f = lambda x: t0 * float(alpha(m, t0 * x))  # noqa: E731
    # split off the log-singular start, then the oscillatory tail
    head = quad(lambda x: f(x) * math.cos(w * t0 * x), 0, 1, points=[1e-6, 1e-4, 1e-2],
                epsabs=0, epsrel=1e-12, limit=500)[0]
    tail = quad(f, 1, np.inf, weight="cos", wvar=w * t0, limlst=200, epsabs=1e-15)[0]
    val = head + tail
    assert spectrum(m, w) == approx(val / math.pi, rel=1e-6)


def test_ei_at_minus_one():
    assert expint_ei(-1.0) == approx(-0.2193839343955203, rel=1e-13)
    ref = quad(lambda t: math.exp(t) / t, -np.inf, -1.0, epsabs=0, epsrel=1e-13)[0]
    assert expint_ei(-1.0) == approx(ref, rel=1e-12)


def test_ei_small_argument():
    for x in (1e-3, 1e-5, 1e-8):
        assert expint_ei(-x) == approx(EULER + math.log(x) - x, abs=x * x)


def test_ei_large_argument():
    approx = -math.exp(-50) / 50
    assert abs(expint_ei(-50.0) / approx - 1) < 0.03


def test_ei_domain():
    with pytest.raises(DomainError):
        expint_ei(0.0)
    with pytest.raises(DomainError):
        expint_ei(1.0)


@settings(max_examples=300)
@given(st.floats(-700, -1e-12))
def test_ei_against_mpmath(x):
    ref = float(mpmath.ei(mpmath.mpf(x)))
    assert expint_ei(x) == approx(ref, rel=1e-12)


def test_ei_vectorized():
    x = -np.geomspace(1e-12, 700, 500)
    ref = np.array([float(mpmath.ei(mpmath.mpf(v))) for v in x])
    np.testing.assert_allclose(expint_ei(x), ref, rtol=1e-12)
    np.testing.assert_allclose(expint_e1(-x), -ref, rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(t1=st.floats(0.01, 10), ratio=st.floats(1.0001, 1e4), x=st.floats(0, 30))
def test_flicker_alpha_is_tau_average(t1, ratio, x):
    t2 = t1 * ratio
    t = x * t1
    ref = quad(lambda tau: math.exp(-t / tau) / (2 * tau), t1, t2, epsabs=0, epsrel=1e-13, limit=200)[0]
    ref /= t2 - t1
    assert alpha(Flicker(t1, t2), t) == approx(ref, rel=1e-8, abs=1e-300)


@given(w=st.floats(0, 1e4), tau=st.floats(1e-3, 1e3))
def test_spectrum_positive_and_bounded(w, tau):
    s = spectrum(OU(tau), w)
    assert 0 < s <= 1 / (2 * math.pi)
    sf = spectrum(Flicker(tau, 3 * tau), w)
    assert 0 < sf <= 1 / (2 * math.pi) * (1 + 1e-12)


# --- sampler -----------------------------------------------------------------


def test_sampler_determinism():
    m = OU(1.0)
    a = sample_path(m, 10.0, 0.05, 1234)
    b = sample_path(m, 10.0, 0.05, 1234)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, sample_path(m, 10.0, 0.05, 1235).samples)


def test_grid_spans_interval():
    p = sample_path(OU(1.0), 10.0, 0.03, 5)
    assert p.times[-1] == approx(10.0, rel=1e-14)
    assert p.dt <= 0.03
    assert np.all(np.isfinite(p.samples))


def test_resolution_errors():
    with pytest.raises(ResolutionError, match="tau/20"):
        sample_path(OU(1.0), 10.0, 0.1, 0)
    with pytest.raises(ResolutionError, match="T0/100"):
        sample_path(OU(1.0), 10.0, 0.05, 0, omega0=10.0)
    with pytest.raises(ResolutionError, match="1e8"):
        sample_path(OU(1.0), 1e7, 0.05, 0)


def test_max_step():
    assert max_step(OU(1.0)) == 0.05
    assert max_step(OU(1.0), omega0=2 * math.pi) == approx(0.01)
    assert max_step(Flicker(2.0, 4.0)) == 0.1


def test_flicker_draws_tau_in_interval():
    taus = [sample_path(Flicker(1.0, 3.0), 2.0, 0.04, s).tau_drawn for s in range(400)]
    assert min(taus) >= 1.0 and max(taus) <= 3.0
    # uniform: mean 2, std 1/sqrt(3)
    assert abs(np.mean(taus) - 2.0) < 3 * (1 / math.sqrt(3)) / math.sqrt(400)


def test_realization_seeds_distinct():
    seeds = {realization_seed(7, k) for k in range(1000)}
    assert len(seeds) == 1000
    assert realization_seed(7, 3) == realization_seed(7, 3)
    assert all(0 <= s < 2**64 for s in seeds)


def _ensemble(model, n, T, dt):
    return np.stack([sample_path(model, T, dt, realization_seed(99, k)).samples for k in range(n)])


@pytest.fixture(scope="module")
def ou_ensemble():
    tau = 1.0
    return tau, _ensemble(OU(tau), 100_000, 2.0, 0.05)


def test_ensemble_variance(ou_ensemble):
    tau, xs = ou_ensemble
    for j in (0, 10, 40):
        x = xs[:, j]
        var = np.mean(x**2)
        se = np.std(x**2, ddof=1) / math.sqrt(x.size)
        assert abs(var - 1 / (2 * tau)) < 3 * se


def test_ensemble_mean_zero(ou_ensemble):
    _, xs = ou_ensemble
    for j in (0, 20, 40):
        x = xs[:, j]
        assert abs(x.mean()) < 3 * x.std(ddof=1) / math.sqrt(x.size)


def test_ensemble_correlation(ou_ensemble):
    tau, xs = ou_ensemble
    for lag in (10, 20, 40):  # tau/2, tau, 2 tau at dt = 0.05
        prod = xs[:, 0] * xs[:, lag]
        se = prod.std(ddof=1) / math.sqrt(prod.size)
        assert abs(prod.mean() - math.exp(-lag * 0.05 / tau) / (2 * tau)) < 3 * se
