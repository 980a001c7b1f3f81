"""Point and interval forecasts for fitted SARIMA models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..core import format_month, month_offset
from ..errors import BoundsError, DomainError, StateError
from ..transform import difference, differencing_polynomial
from .estimation import SarimaFit
from .model import run_filter, state_space


@dataclass(frozen=True)
class ForecastResult:
    """h-step forecasts on the modeled (transformed, undifferenced) scale."""

    mean: np.ndarray
    se: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    conf: float
    start: tuple[int, int] | None = None

    @property
    def horizon(self) -> int:
        return self.mean.size

    def dates(self) -> list[str]:
        if self.start is None:
            return [str(i + 1) for i in range(self.horizon)]
        return [format_month(month_offset(self.start, i)) for i in range(self.horizon)]


def level_prediction(w_pred: float, delta: np.ndarray, lags: np.ndarray) -> float:
    """Undo differencing for one step: predicted difference plus lagged levels.

    ``lags`` runs backwards in time (most recent level first). Shared by
    forecasting and holdout filtering so both produce identical floats.
    """
    return float(w_pred + delta @ lags)


def _delta(order) -> np.ndarray:
    return -differencing_polynomial(order.d, order.D, order.s)[1:]


def forecast(fit: SarimaFit, h: int, conf: float = 0.95) -> ForecastResult:
    """Forecast ``h`` steps past the end of the fitted series.

    The ARMA state from the Kalman filter is augmented with the last
    ``d + D*s`` levels so that the mean and prediction variance of the
    integrated series are propagated exactly, including the uncertainty of
    the final filtered state.
    """
    if h < 1:
        raise BoundsError(f"horizon must be >= 1, got {h}")
    if not 0.0 < conf < 1.0:
        raise BoundsError(f"confidence level must lie in (0, 1), got {conf}")
    if not fit.converged:
        raise StateError("cannot forecast from a fit that did not converge")
    order = fit.order
    ss = state_space(order, fit.params, check=False)
    out = run_filter(fit.data, order, fit.params, ss)

    r, k = ss.dim, order.n_lost
    delta = _delta(order)
    levels = fit.series.values
    lags = levels[::-1][:k].copy()

    T = ss.T
    A = np.zeros((r + k, r + k))
    A[:r, :r] = T
    if k:
        A[r, 0] = 1.0
        A[r, r:] = delta
        A[r + 1 :, r : r + k - 1] = np.eye(k - 1)
    Qm = np.zeros((r + k, r + k))
    Qm[:r, :r] = np.outer(ss.R, ss.R)
    z = np.zeros(r + k)
    z[0] = 1.0
    z[r:] = delta

    m = np.concatenate([out.a, lags])
    S = np.zeros((r + k, r + k))
    S[:r, :r] = out.P

    mean = np.empty(h)
    var = np.empty(h)
    for j in range(h):
        mean[j] = level_prediction(m[0], delta, m[r:])
        var[j] = z @ S @ z
        m = A @ m
        if k:
            m[r] = mean[j]
        S = A @ S @ A.T + Qm

    se = np.sqrt(np.maximum(var, 0.0) * fit.sigma2)
    zq = stats.norm.ppf(0.5 + conf / 2.0)
    start = month_offset(fit.series.end, 1)
    return ForecastResult(mean, se, mean - zq * se, mean + zq * se, float(conf), start)


def one_step_levels(fit: SarimaFit, levels) -> np.ndarray:
    """One-step predictions of ``levels`` under the fit's frozen coefficients.

    ``levels`` is a modeled-scale (undifferenced) series; the result aligns
    with ``levels[d + D*s:]``.
    """
    order = fit.order
    levels = np.asarray(levels, dtype=float)
    k = order.n_lost
    if levels.size <= k:
        raise DomainError("series too short for the model's differencing")
    diffed, _ = difference(levels, order.d, order.D, order.s)
    out = run_filter(np.ascontiguousarray(diffed), order, fit.params)
    delta = _delta(order)
    preds = np.empty(diffed.size)
    for t in range(diffed.size):
        i = t + k
        preds[t] = level_prediction(out.pred[t], delta, levels[i - k : i][::-1])
    return preds
