import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boxjenkins import SarimaOrder, TimeSeries, coefficient_tests, fit, forecast, loglik, simulate
from boxjenkins.errors import BoundsError, DomainError, FitError, LengthError, StateError
from boxjenkins.sarima import FitOptions, concentrated_loglik, from_params, one_step_levels
from boxjenkins.sarima.estimation import numerical_hessian, z_test
from boxjenkins.sarima.model import (
    ar_to_pacf,
    check_admissible,
    constrain,
    css_residuals,
    pacf_to_ar,
    unconstrain,
)
from boxjenkins.stattests import shapiro_wilk

import oracles

SAR_MODEL = SarimaOrder(0, 1, 1, 1, 0, 0, 12)
TRUE = np.array([-0.5578, 0.4083])


# -- order -----------------------------------------------------------------------

def test_order_validation_and_names():
    o = SarimaOrder(2, 1, 1, 1, 0, 1, 12)
    assert o.n_coef == 5 and o.n_lost == 1
    assert o.param_names == ["ar1", "ar2", "ma1", "sar1", "sma1"]
    assert str(SAR_MODEL) == "SARIMA(0,1,1)x(1,0,0)[12]"
    with pytest.raises(BoundsError):
        SarimaOrder(0, 0, 0, 1, 0, 0, 1)
    with pytest.raises(BoundsError):
        SarimaOrder(-1, 0, 0)


def test_admissibility():
    check_admissible(SarimaOrder(1, 0, 1), [0.9, -0.9])
    with pytest.raises(DomainError):
        check_admissible(SarimaOrder(1, 0, 0), [1.0])
    with pytest.raises(DomainError):
        check_admissible(SarimaOrder(0, 0, 1), [-1.2])
    with pytest.raises(DomainError):
        loglik(np.zeros(5), SarimaOrder(1, 0, 0), [1.5], 1.0)


# -- likelihood ------------------------------------------------------------------

def test_white_noise_loglik():
    assert loglik(np.zeros(3), SarimaOrder(), [], 1.0) == pytest.approx(-1.5 * math.log(2 * math.pi), abs=1e-12)


@pytest.mark.parametrize("p", [0, 1, 2])
@pytest.mark.parametrize("q", [0, 1, 2])
def test_loglik_matches_mvn(p, q):
    rng = np.random.default_rng(100 + 3 * p + q)
    for n in (1, 2, 7, 20):
        ar = pacf_to_ar(rng.uniform(-0.85, 0.85, p))
        ma = -pacf_to_ar(rng.uniform(-0.85, 0.85, q))
        y = rng.standard_normal(n)
        s2 = rng.uniform(0.5, 3.0)
        ours = loglik(y, SarimaOrder(p, 0, q), np.r_[ar, ma], s2)
        assert abs(ours - oracles.mvn_loglik(y, ar, ma, sigma2=s2)) < 1e-8


def test_seasonal_loglik_matches_mvn():
    rng = np.random.default_rng(9)
    y = rng.standard_normal(20)
    order = SarimaOrder(1, 0, 1, 1, 0, 1, 4)
    params = [0.3, -0.4, 0.5, 0.2]
    ref = oracles.mvn_loglik(y, [0.3], [-0.4], [0.5], [0.2], s=4, sigma2=1.7)
    assert abs(loglik(y, order, params, 1.7) - ref) < 1e-8


def test_ma1_matches_innovations_algorithm():
    y = np.diff(simulate(SarimaOrder(0, 1, 1), [-0.5578], n=61, seed=4).values)
    phi, theta = oracles.expand([], [-0.5578], [], [], 1)
    gamma = oracles.arma_autocovariance(phi, theta, y.size, 2.0)
    assert abs(loglik(y, SarimaOrder(0, 0, 1), [-0.5578], 2.0) - oracles.innovations_loglik(y, gamma)) < 1e-8


def test_concentrated_loglik_is_profile_maximum():
    y = np.random.default_rng(1).standard_normal(50)
    order = SarimaOrder(1, 0, 1)
    ll, s2 = concentrated_loglik(y, order, [0.4, 0.2])
    for f in (0.9, 1.1):
        assert loglik(y, order, [0.4, 0.2], s2 * f) < ll
    assert loglik(y, order, [0.4, 0.2], s2) == pytest.approx(ll, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-0.9, 0.9), min_size=1, max_size=4))
def test_pacf_parametrisation_roundtrip(u):
    u = np.array(u)
    phi = pacf_to_ar(u)
    check_admissible(SarimaOrder(u.size, 0, 0), phi)
    assert np.allclose(ar_to_pacf(phi), u, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2.5, 2.5), min_size=4, max_size=4))
def test_constrain_always_admissible(x):
    order = SarimaOrder(1, 0, 1, 1, 0, 1, 12)
    params = constrain(order, np.array(x))
    check_admissible(order, params)
    assert np.allclose(constrain(order, unconstrain(order, params)), params, atol=1e-8)


def test_css_residuals_invert_simulation():
    rng = np.random.default_rng(2)
    e = rng.standard_normal(300)
    x = oracles.arma_sample(np.random.default_rng(2), 300, ar=(0.5,), ma=(0.3,), burn=0)
    r = css_residuals(x, SarimaOrder(1, 0, 1), [0.5, 0.3])
    # zero pre-sample values make the recursion exact; the first p residuals are dropped
    assert np.allclose(r, e[1:], atol=1e-8)


# -- simulation ------------------------------------------------------------------

def test_simulate_deterministic():
    a = simulate(SAR_MODEL, TRUE, n=50, seed=8)
    b = simulate(SAR_MODEL, TRUE, n=50, seed=8)
    assert np.array_equal(a.values, b.values) and a.period == 12


def test_simulate_white_noise_is_gaussian():
    passes = sum(shapiro_wilk(simulate(SarimaOrder(), [], n=100, seed=s).values).p_value > 0.05 for s in range(100))
    assert passes >= 90


def test_simulate_ar1_acf():
    from boxjenkins import acf

    x = simulate(SarimaOrder(1, 0, 0), [0.8], n=5000, seed=1)
    assert acf(x, 1)[1] == pytest.approx(0.8, abs=0.03)


def test_simulate_rejects_nonstationary():
    with pytest.raises(DomainError):
        simulate(SarimaOrder(1, 0, 0), [1.01])


# -- estimation ------------------------------------------------------------------

@pytest.fixture(scope="module")
def seasonal_fit():
    ts = simulate(SAR_MODEL, TRUE, n=1000, seed=0)
    return fit(ts, SAR_MODEL)


def test_recovery_and_fit_invariants(seasonal_fit):
    f = seasonal_fit
    assert f.converged
    assert np.all(np.abs(f.params - TRUE) < 0.06)
    assert f.aic == pytest.approx(-2 * f.loglik + 2 * (f.n_coef + 1), abs=1e-9)
    assert np.allclose(f.stderr, np.sqrt(np.diag(f.cov)), atol=1e-9)
    tests = coefficient_tests(f)
    for i, name in enumerate(f.param_names):
        assert tests[name][0] == pytest.approx(f.params[i] / f.stderr[i], rel=1e-12)
    assert f.residuals.size == f.fitted.size == 999
    check_admissible(f.order, f.params)


def test_fit_is_a_local_maximum(seasonal_fit):
    f = seasonal_fit
    for i in range(f.n_coef):
        for step in (-1e-3, 1e-3):
            p = f.params.copy()
            p[i] += step
            assert concentrated_loglik(f.data, f.order, p)[0] <= f.loglik + 1e-9


def test_stderr_close_to_asymptotic(seasonal_fit):
    # large-sample variances: (1 - theta^2)/n and (1 - Phi^2)/n
    theory = np.sqrt((1 - TRUE**2) / 999)
    assert np.all(np.abs(seasonal_fit.stderr / theory - 1) < 0.25)


def test_ma1_stderr_monte_carlo():
    order = SarimaOrder(0, 0, 1)
    est, se = [], []
    for seed in range(50):
        f = fit(simulate(order, [-0.5], n=2000, seed=seed), order)
        est.append(f.params[0])
        se.append(f.stderr[0])
    est = np.array(est)
    assert abs(est.mean() + 0.5) < 0.05
    assert np.all(np.abs(est + 0.5) < 0.1)
    assert abs(np.mean(se) / est.std(ddof=1) - 1) < 0.3


def test_z_test_values():
    z, p = z_test(-0.557835, 0.074869)
    assert abs(z - (-7.4508)) < 5e-4 and p < 0.01
    z, p = z_test(0.408311, 0.091364)
    assert abs(z - 4.4691) < 5e-4 and p < 0.01
    assert z_test(0.0, 0.3) == (0.0, 1.0)


def test_fit_errors():
    with pytest.raises(LengthError):
        fit(np.arange(13.0), SarimaOrder(0, 1, 1, 0, 1, 0, 12))
    x = simulate(SarimaOrder(2, 0, 1), [0.5, 0.2, 0.3], n=200, seed=1)
    with pytest.raises(FitError) as info:
        fit(x, SarimaOrder(2, 0, 1), FitOptions(maxiter=1))
    assert info.value.best is not None and not info.value.best.converged


def test_fit_without_coefficients():
    x = simulate(SarimaOrder(0, 1, 0), [], n=100, seed=2, sigma2=4.0)
    f = fit(x, SarimaOrder(0, 1, 0))
    assert f.n_coef == 0 and f.converged
    assert f.sigma2 == pytest.approx(np.mean(np.diff(x.values) ** 2))


def test_nonpd_hessian_flags_stderr():
    x = simulate(SarimaOrder(0, 0, 1), [0.4], n=200, seed=3)
    assert fit(x, SarimaOrder(0, 0, 1)).stderr_available
    # AR and MA roots cancel, so the likelihood has a flat ridge through this point
    flat = from_params(x, SarimaOrder(1, 0, 1), [0.3, -0.3])
    assert not flat.stderr_available
    assert np.all(np.isnan(flat.stderr)) and flat.warnings
    with pytest.raises(StateError):
        coefficient_tests(flat)
    assert flat.to_dict()["coefficients"]["ar1"]["stderr"] is None


def test_numerical_hessian_quadratic():
    A = np.array([[3.0, 1.0], [1.0, 2.0]])
    H = numerical_hessian(lambda x: 0.5 * x @ A @ x, np.array([0.2, -0.4]))
    assert np.allclose(H, A, atol=1e-6)


def test_fit_runtime_budget():
    ts = simulate(SAR_MODEL, TRUE, n=1000, seed=1)
    t0 = time.perf_counter()
    fit(ts, SAR_MODEL)
    assert time.perf_counter() - t0 < 30


# -- forecasting -----------------------------------------------------------------

def test_white_noise_forecast():
    ts = TimeSeries(np.random.default_rng(0).standard_normal(30), (2000, 1), 12)
    f = from_params(ts, SarimaOrder(), [], sigma2=4.0)
    fc = forecast(f, 5)
    assert np.all(fc.mean == 0.0)
    assert np.allclose(fc.se, 2.0, atol=1e-12)


def test_random_walk_forecast_closed_form():
    x = np.cumsum(np.random.default_rng(1).standard_normal(40))
    x += 10.0 - x[-1]
    f = from_params(TimeSeries(x, (2000, 1), 12), SarimaOrder(0, 1, 0), [], sigma2=1.0)
    fc = forecast(f, 12)
    assert np.max(np.abs(fc.mean - 10.0)) < 1e-9
    assert np.max(np.abs(fc.se - np.sqrt(np.arange(1, 13)))) < 1e-9
    assert fc.dates()[0] == "2003-05"


def test_forecast_matches_dense_conditional_mvn():
    # the h-step predictive distribution of an integrated model equals the
    # Gaussian conditional of future levels given the observed differences
    order = SarimaOrder(1, 1, 1)
    params = [0.5, -0.3]
    x = simulate(order, params, n=15, seed=5).values
    f = from_params(TimeSeries(x, (2000, 1), 1), order, params, sigma2=2.0)
    fc = forecast(f, 3)
    phi, theta = oracles.expand([0.5], [-0.3], [], [], 1)
    gamma = oracles.arma_autocovariance(phi, theta, 17, 2.0)
    from scipy.linalg import toeplitz

    S = toeplitz(gamma)
    m = 14
    S11, S12, S22 = S[:m, :m], S[:m, m:], S[m:, m:]
    w = np.diff(x)
    mu = S12.T @ np.linalg.solve(S11, w)
    C = S22 - S12.T @ np.linalg.solve(S11, S12)
    L = np.tril(np.ones((3, 3)))
    assert np.allclose(fc.mean, x[-1] + L @ mu, atol=1e-9)
    assert np.allclose(fc.se, np.sqrt(np.diag(L @ C @ L.T)), atol=1e-9)


def test_forecast_contract(seasonal_fit):
    fc = forecast(seasonal_fit, 24, 0.9)
    assert np.all(fc.lower <= fc.mean) and np.all(fc.mean <= fc.upper)
    assert np.all(fc.se > 0)
    with pytest.raises(BoundsError):
        forecast(seasonal_fit, 0)
    with pytest.raises(BoundsError):
        forecast(seasonal_fit, 3, 1.0)


def test_one_step_equals_first_forecast(seasonal_fit):
    f = seasonal_fit
    future = np.append(f.series.values, 0.0)
    assert one_step_levels(f, future)[-1] == forecast(f, 1).mean[0]
    assert np.allclose(one_step_levels(f, f.series.values), f.fitted, atol=1e-9)
