"""Maximum-likelihood fitting of seasonal ARIMA models."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from ..core import TimeSeries
from ..errors import BoxJenkinsError, FitError, LengthError, StateError
from ..transform import TransformRecord, difference
from .model import (
    SarimaOrder,
    check_admissible,
    concentrated_loglik,
    constrain,
    css_residuals,
    loglik,
    run_filter,
    state_space,
    unconstrain,
)

log = logging.getLogger(__name__)

_PENALTY = 1e10


@dataclass(frozen=True)
class FitOptions:
    """Optimizer settings.

    ``ftol`` is the relative change in log-likelihood and ``xtol`` the
    parameter step below which iteration stops.
    """

    maxiter: int = 500
    ftol: float = 1e-8
    xtol: float = 1e-6
    gtol: float = 1e-5
    hess_step: float = 1e-4
    start_params: tuple | None = None


@dataclass(frozen=True)
class SarimaFit:
    """Fitted model on a modeled-scale (possibly Box-Cox transformed) series.

    ``series`` holds the undifferenced input, ``data`` the differenced
    values the likelihood is evaluated on, and ``record`` the differencing
    pivots. ``residuals`` are standardized one-step innovations rescaled by
    the estimated innovation standard deviation; ``fitted`` are the
    matching one-step predictions of ``series`` (both start ``n_lost``
    observations into it).
    """

    order: SarimaOrder
    params: np.ndarray
    sigma2: float
    loglik: float
    aic: float
    cov: np.ndarray
    stderr: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    converged: bool
    iterations: int
    series: TimeSeries
    data: np.ndarray
    record: TransformRecord
    message: str = ""
    warnings: tuple = field(default=())

    @property
    def ar(self) -> np.ndarray:
        return self.order.split(self.params)[0]

    @property
    def ma(self) -> np.ndarray:
        return self.order.split(self.params)[1]

    @property
    def sar(self) -> np.ndarray:
        return self.order.split(self.params)[2]

    @property
    def sma(self) -> np.ndarray:
        return self.order.split(self.params)[3]

    @property
    def param_names(self) -> list[str]:
        return self.order.param_names

    @property
    def n_coef(self) -> int:
        return self.order.n_coef

    @property
    def nobs(self) -> int:
        return self.data.size

    @property
    def stderr_available(self) -> bool:
        return self.n_coef == 0 or bool(np.all(np.isfinite(self.stderr)))

    @property
    def bic(self) -> float:
        return -2.0 * self.loglik + math.log(self.nobs) * (self.n_coef + 1)

    def coefficients(self) -> dict[str, float]:
        return dict(zip(self.param_names, map(float, self.params)))

    def to_dict(self) -> dict:
        table = {}
        tests = coefficient_tests(self) if self.stderr_available else None
        for i, name in enumerate(self.param_names):
            row = {"estimate": float(self.params[i]), "stderr": None, "z": None, "p": None}
            if tests is not None:
                z, p = tests[name]
                row.update(stderr=float(self.stderr[i]), z=z, p=p)
            table[name] = row
        return {
            "order": self.order.to_dict(),
            "model": str(self.order),
            "coefficients": table,
            "sigma2": self.sigma2,
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "nobs": self.nobs,
            "converged": self.converged,
            "iterations": self.iterations,
            "stderr_available": self.stderr_available,
        }


def aic(loglik: float, n_coef: int) -> float:
    """AIC counting the innovation variance as a parameter."""
    return -2.0 * loglik + 2.0 * (n_coef + 1)


def coefficient_tests(fit: SarimaFit) -> dict[str, tuple[float, float]]:
    """Two-sided z-tests of each coefficient against zero: name -> (z, p)."""
    if not fit.stderr_available:
        raise StateError("standard errors unavailable (Hessian not positive definite)")
    return {
        name: z_test(float(est), float(se))
        for name, est, se in zip(fit.param_names, fit.params, fit.stderr)
    }


def z_test(estimate: float, stderr: float) -> tuple[float, float]:
    z = estimate / stderr
    return z, float(2.0 * stats.norm.sf(abs(z)))


def _neg_loglik(y, order, params) -> float:
    try:
        ll, _ = concentrated_loglik(y, order, params)
    except (BoxJenkinsError, np.linalg.LinAlgError, ValueError):
        return _PENALTY
    return -ll if math.isfinite(ll) else _PENALTY


def _css_start(y, order) -> np.ndarray:
    n = y.size

    def objective(x):
        e = css_residuals(y, order, constrain(order, x))
        ssr = float(e @ e)
        return math.log(ssr / max(e.size, 1)) if ssr > 0 else -_PENALTY

    res = optimize.minimize(objective, np.zeros(order.n_coef), method="BFGS",
                            options={"maxiter": 200, "gtol": 1e-6})
    if not np.all(np.isfinite(res.x)):
        return np.zeros(order.n_coef)
    log.debug("CSS start for %s on n=%d: %s", order, n, constrain(order, res.x))
    return np.clip(res.x, -3.0, 3.0)


def numerical_hessian(f, x: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian with steps ``rel_step * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    k = x.size
    h = rel_step * np.maximum(1.0, np.abs(x))
    f0 = f(x)
    H = np.empty((k, k))
    E = np.diag(h)
    for i in range(k):
        H[i, i] = (f(x + E[i]) - 2.0 * f0 + f(x - E[i])) / h[i] ** 2
        for j in range(i):
            val = (
                f(x + E[i] + E[j]) - f(x + E[i] - E[j]) - f(x - E[i] + E[j]) + f(x - E[i] - E[j])
            ) / (4.0 * h[i] * h[j])
            H[i, j] = H[j, i] = val
    return H


def _covariance(y, order, params, rel_step) -> tuple[np.ndarray, np.ndarray, str]:
    k = order.n_coef
    nan = np.full(k, np.nan)

    def f(beta):
        ll, _ = concentrated_loglik(y, order, beta)
        return -ll

    try:
        H = numerical_hessian(f, params, rel_step)
    except BoxJenkinsError as exc:
        return np.full((k, k), np.nan), nan, f"Hessian step left the admissible region: {exc}"
    if not np.all(np.isfinite(H)):
        return np.full((k, k), np.nan), nan, "Hessian not finite"
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return np.full((k, k), np.nan), nan, "Hessian not positive definite"
    cov = np.linalg.inv(H)
    cov = 0.5 * (cov + cov.T)
    return cov, np.sqrt(np.diag(cov)), ""


def _as_series(ts, order) -> TimeSeries:
    if isinstance(ts, TimeSeries):
        return ts
    return TimeSeries(np.asarray(ts, dtype=float), (2000, 1), max(order.s, 1))


class _Tracker:
    """Keeps the best point seen and applies the relative-change stopping rule."""

    def __init__(self, fun, ftol, xtol):
        self.fun, self.ftol, self.xtol = fun, ftol, xtol
        self.best_x, self.best_f = None, np.inf
        self.prev_x, self.prev_f = None, None
        self.iterations = 0
        self.stalled = False

    def __call__(self, x):
        self.iterations += 1
        fx = self.fun(x)
        if fx < self.best_f:
            self.best_x, self.best_f = np.array(x, copy=True), fx
        if self.prev_f is not None:
            rel = abs(self.prev_f - fx) / max(abs(fx), 1.0)
            step = float(np.max(np.abs(x - self.prev_x)))
            # judged on the latest step only
            self.stalled = rel < self.ftol or step < self.xtol
        self.prev_x, self.prev_f = np.array(x, copy=True), fx


def _optimize(y, order, x0, opts: FitOptions):
    n = y.size

    def objective(x):
        return _neg_loglik(y, order, constrain(order, x)) / n

    tracker = _Tracker(objective, opts.ftol, opts.xtol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = optimize.minimize(
            objective, x0, method="BFGS", callback=tracker,
            options={"maxiter": opts.maxiter, "gtol": opts.gtol},
        )
    converged = bool(res.success) or tracker.stalled
    x, iters, msg = res.x, int(res.nit), str(res.message)
    if not converged:
        # line-search trouble: fall back to the simplex method from the best point
        start = res.x if res.fun <= tracker.best_f else tracker.best_x
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            nm = optimize.minimize(
                objective, start, method="Nelder-Mead",
                options={"maxiter": opts.maxiter * max(order.n_coef, 1),
                         "xatol": opts.xtol, "fatol": opts.ftol * max(abs(res.fun), 1.0)},
            )
        iters += int(nm.nit)
        if nm.fun <= res.fun:
            x, msg = nm.x, f"Nelder-Mead: {nm.message}"
        converged = bool(nm.success)
    return x, converged, iters, msg


def fit(ts, order: SarimaOrder, opts: FitOptions | None = None) -> SarimaFit:
    """Exact maximum-likelihood fit of a SARIMA model.

    The series is differenced according to ``order`` (outside the
    likelihood), then the zero-mean ARMA likelihood of the differences is
    maximised with the innovation variance concentrated out. Coefficients
    are optimized through a stationarity/invertibility-preserving
    reparametrisation, started from conditional least squares.

    Raises
    ------
    LengthError
        Too few observations after differencing.
    FitError
        The optimizer did not converge; ``exc.best`` holds the best fit found.
    """
    opts = opts or FitOptions()
    series = _as_series(ts, order)
    if len(series) <= order.n_lost:
        raise LengthError(f"{len(series)} observations cannot support {order.n_lost} differences")
    diffed, record = difference(series.values, order.d, order.D, order.s)
    y = np.ascontiguousarray(diffed)
    k = order.n_coef
    if y.size <= k + 1:
        raise LengthError(f"{y.size} differenced observations for {k} coefficients plus variance")

    if k == 0:
        params = np.zeros(0)
        converged, iterations, message = True, 0, "no free coefficients"
    else:
        if opts.start_params is not None:
            x0 = unconstrain(order, np.asarray(opts.start_params, dtype=float))
        else:
            x0 = _css_start(y, order)
        x, converged, iterations, message = _optimize(y, order, x0, opts)
        params = constrain(order, x)

    ll, sigma2 = concentrated_loglik(y, order, params)
    notes = []
    if k:
        cov, stderr, why = _covariance(y, order, params, opts.hess_step)
        if why:
            notes.append(why)
            log.warning("%s: %s", order, why)
    else:
        cov, stderr = np.zeros((0, 0)), np.zeros(0)

    out = run_filter(y, order, params, state_space(order, params, check=False))
    innov = y - out.pred
    residuals = innov / np.sqrt(out.F)
    fitted = series.values[order.n_lost :] - innov

    result = SarimaFit(
        order=order,
        params=params,
        sigma2=sigma2,
        loglik=ll,
        aic=aic(ll, k),
        cov=cov,
        stderr=stderr,
        residuals=residuals,
        fitted=fitted,
        converged=converged,
        iterations=iterations,
        series=series,
        data=y,
        record=record,
        message=message,
        warnings=tuple(notes),
    )
    if not converged:
        raise FitError(f"{order} did not converge: {message}", best=result)
    return result


def from_params(ts, order: SarimaOrder, params, sigma2: float | None = None,
                hess_step: float = 1e-4) -> SarimaFit:
    """Build a fit from known coefficients without optimizing.

    Used to reload a stored model. The log-likelihood, standard errors and
    residuals are evaluated at ``params``; ``sigma2`` defaults to its
    concentrated estimate.
    """
    series = _as_series(ts, order)
    params = np.asarray(params, dtype=float)
    if params.size != order.n_coef:
        raise LengthError(f"{order} needs {order.n_coef} coefficients, got {params.size}")
    check_admissible(order, params)
    if len(series) <= order.n_lost:
        raise LengthError(f"{len(series)} observations cannot support {order.n_lost} differences")
    diffed, record = difference(series.values, order.d, order.D, order.s)
    y = np.ascontiguousarray(diffed)
    ll, s2 = concentrated_loglik(y, order, params)
    if sigma2 is not None:
        ll = loglik(y, order, params, sigma2)
        s2 = float(sigma2)
    notes = []
    if order.n_coef:
        cov, stderr, why = _covariance(y, order, params, hess_step)
        if why:
            notes.append(why)
    else:
        cov, stderr = np.zeros((0, 0)), np.zeros(0)
    out = run_filter(y, order, params, state_space(order, params, check=False))
    innov = y - out.pred
    return SarimaFit(
        order=order, params=params, sigma2=s2, loglik=ll, aic=aic(ll, order.n_coef),
        cov=cov, stderr=stderr, residuals=innov / np.sqrt(out.F),
        fitted=series.values[order.n_lost :] - innov, converged=True, iterations=0,
        series=series, data=y, record=record, message="coefficients supplied",
        warnings=tuple(notes),
    )


def refit_frozen(fit_: SarimaFit, ts) -> SarimaFit:
    """Same coefficients and variance, filtered through a different series."""
    series = _as_series(ts, fit_.order)
    order = fit_.order
    diffed, record = difference(series.values, order.d, order.D, order.s)
    y = np.ascontiguousarray(diffed)
    out = run_filter(y, order, fit_.params)
    innov = y - out.pred
    return SarimaFit(
        order=order, params=fit_.params, sigma2=fit_.sigma2, loglik=fit_.loglik, aic=fit_.aic,
        cov=fit_.cov, stderr=fit_.stderr, residuals=innov / np.sqrt(out.F),
        fitted=series.values[order.n_lost :] - innov, converged=fit_.converged,
        iterations=fit_.iterations, series=series, data=y, record=record,
        message="coefficients frozen", warnings=fit_.warnings,
    )
