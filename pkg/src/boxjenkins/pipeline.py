"""The Box-Jenkins loop: selection, residual diagnostics, holdout, forecasts.

All series handed to :func:`select` are on the modeled scale (after any
Box-Cox transform, before differencing). Holdout evaluation and final
forecasts take a :class:`~boxjenkins.transform.TransformRecord` to map back to
the original scale.
"""

from __future__ import annotations

import functools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import TimeSeries, format_month, month_offset
from .correlogram import Correlogram, correlogram
from .errors import BoxJenkinsError, DomainError, FitError, SelectionError, TransformError
from .sarima import (
    FitOptions,
    SarimaFit,
    SarimaOrder,
    coefficient_tests,
    fit,
    forecast,
    one_step_levels,
)
from .stattests import TestReport, ljung_box, shapiro_wilk
from .transform import TransformRecord, boxcox_values, inverse_boxcox_values

log = logging.getLogger(__name__)

AIC_TIE = 1e-9


@dataclass
class SelectionRow:
    order: SarimaOrder
    index: int
    aic: float | None
    converged: bool
    all_significant: bool
    coefficients: dict = field(default_factory=dict)
    error: str | None = None
    fit: SarimaFit | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "model": str(self.order),
            "order": self.order.to_dict(),
            "candidate_index": self.index,
            "aic": self.aic,
            "converged": self.converged,
            "all_coefficients_significant": self.all_significant,
            "coefficients": self.coefficients,
            "error": self.error,
        }


@dataclass
class SelectionReport:
    """Candidates ranked by AIC; ``chosen`` indexes into ``rows``.

    ``flagged`` is set when no converged candidate had all coefficients
    significant and the minimum-AIC model was taken instead.
    """

    rows: list[SelectionRow]
    chosen: int
    alpha: float
    flagged: bool = False

    @property
    def chosen_row(self) -> SelectionRow:
        return self.rows[self.chosen]

    @property
    def chosen_fit(self) -> SarimaFit:
        return self.rows[self.chosen].fit

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "chosen": self.chosen,
            "chosen_model": str(self.chosen_row.order),
            "flagged_no_significant_model": self.flagged,
            "rows": [r.to_dict() for r in self.rows],
        }


def _coef_table(f: SarimaFit, alpha: float) -> tuple[dict, bool]:
    table = {}
    if f.stderr_available:
        tests = coefficient_tests(f)
        for i, name in enumerate(f.param_names):
            z, p = tests[name]
            table[name] = {"estimate": float(f.params[i]), "stderr": float(f.stderr[i]), "z": z, "p": p}
        significant = all(row["p"] < alpha for row in table.values())
    else:
        for i, name in enumerate(f.param_names):
            table[name] = {"estimate": float(f.params[i]), "stderr": None, "z": None, "p": None}
        significant = False
    return table, significant


def _fit_one(args):
    series, order, opts = args
    try:
        return "ok", fit(series, order, opts), None
    except FitError as exc:
        return "failed", exc.best, str(exc)
    except BoxJenkinsError as exc:
        return "error", None, f"{exc.kind}: {exc}"


def _compare(a: SelectionRow, b: SelectionRow) -> int:
    if a.converged != b.converged:
        return -1 if a.converged else 1
    if a.converged:
        if abs(a.aic - b.aic) > AIC_TIE:
            return -1 if a.aic < b.aic else 1
        if a.order.n_coef != b.order.n_coef:
            return -1 if a.order.n_coef < b.order.n_coef else 1
    return -1 if a.index < b.index else (1 if a.index > b.index else 0)


def select(
    train: TimeSeries,
    candidates: Sequence[SarimaOrder],
    alpha: float = 0.05,
    opts: FitOptions | None = None,
    jobs: int = 1,
    fitter: Callable | None = None,
) -> SelectionReport:
    """Fit every candidate and pick the best by AIC and coefficient significance.

    The chosen model is the lowest-AIC converged candidate whose every
    coefficient has p < ``alpha``. If none qualifies, the lowest-AIC converged
    candidate is chosen and the report is flagged. AIC ties (within 1e-9)
    go to the model with fewer coefficients, then to the earlier candidate.

    ``fitter`` replaces :func:`boxjenkins.sarima.fit` (same signature) and
    is mostly useful for testing the decision rule.
    """
    candidates = list(candidates)
    if not candidates:
        raise SelectionError("no candidate models to select from")
    jobs_args = [(train, order, opts) for order in candidates]
    if fitter is not None:
        outcomes = []
        for series, order, o in jobs_args:
            try:
                outcomes.append(("ok", fitter(series, order, o), None))
            except FitError as exc:
                outcomes.append(("failed", exc.best, str(exc)))
            except BoxJenkinsError as exc:
                outcomes.append(("error", None, f"{exc.kind}: {exc}"))
    elif jobs > 1 and len(candidates) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_fit_one, jobs_args))
    else:
        outcomes = [_fit_one(a) for a in jobs_args]

    rows = []
    for i, (order, (status, f, err)) in enumerate(zip(candidates, outcomes)):
        if f is None:
            rows.append(SelectionRow(order, i, None, False, False, {}, err))
            continue
        table, significant = _coef_table(f, alpha)
        rows.append(SelectionRow(order, i, float(f.aic), status == "ok", significant, table, err, f))
        if err:
            log.warning("%s", err)

    rows.sort(key=functools.cmp_to_key(_compare))
    converged = [i for i, r in enumerate(rows) if r.converged]
    if not converged:
        raise SelectionError("every candidate model failed to fit")
    good = [i for i in converged if rows[i].all_significant]
    if good:
        return SelectionReport(rows, good[0], alpha, False)
    log.warning("no candidate has all coefficients significant at %g; taking minimum AIC", alpha)
    return SelectionReport(rows, converged[0], alpha, True)


@dataclass
class DiagnosticsReport:
    correlogram: Correlogram
    ljung_box: TestReport
    normality: TestReport
    residual_vs_fitted: list[tuple[float, float]]
    residual_vs_time: list[tuple[str, float]]
    alpha: float = 0.05

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "ljung_box": self.ljung_box.to_dict(),
            "ljung_box_conclusion": self.ljung_box.conclusion(self.alpha),
            "normality": self.normality.to_dict(),
            "normality_conclusion": self.normality.conclusion(self.alpha),
            "residual_correlogram": self.correlogram.to_dict(),
            "n_residuals": len(self.residual_vs_time),
        }


def diagnose(f: SarimaFit, lags: int = 20, alpha: float = 0.05) -> DiagnosticsReport:
    """Residual correlogram, Ljung-Box (fitdf = coefficient count) and Shapiro-Wilk."""
    e = f.residuals
    period = f.order.s if f.order.s > 1 else f.series.period
    max_lag = min(max(lags, 2 * period), e.size - 1)
    cg = correlogram(e, max_lag)
    lb = ljung_box(e, lags, fitdf=f.n_coef)
    sw = shapiro_wilk(e)
    k = f.order.n_lost
    dates = [format_month(f.series.date(k + i)) for i in range(e.size)]
    return DiagnosticsReport(
        cg,
        lb,
        sw,
        [(float(a), float(b)) for a, b in zip(f.fitted, e)],
        [(d, float(v)) for d, v in zip(dates, e)],
        alpha,
    )


@dataclass
class HoldoutReport:
    dates: list[str]
    actual: np.ndarray
    forecast: np.ndarray
    errors: np.ndarray
    correlogram: Correlogram | None
    normality: TestReport | None
    alpha: float = 0.05

    @property
    def steps(self) -> int:
        return self.errors.size

    def to_dict(self) -> dict:
        e = self.errors
        return {
            "steps": [
                {"date": d, "actual": a, "one_step_forecast": p, "error": err}
                for d, a, p, err in zip(self.dates, self.actual, self.forecast, e)
            ],
            "mean_error": float(e.mean()),
            "rmse": float(np.sqrt(np.mean(e * e))),
            "mae": float(np.mean(np.abs(e))),
            "mape": float(np.mean(np.abs(e / self.actual))) * 100 if np.all(self.actual != 0) else None,
            "error_correlogram": None if self.correlogram is None else self.correlogram.to_dict(),
            "normality": None if self.normality is None else self.normality.to_dict(),
            "normality_conclusion": None if self.normality is None else self.normality.conclusion(self.alpha),
        }


def _check_record(f: SarimaFit, record: TransformRecord) -> None:
    o = f.order
    if (record.d, record.D) != (o.d, o.D) or (o.n_lost and record.period != o.s):
        raise TransformError(
            f"record differencing (d={record.d}, D={record.D}, s={record.period}) "
            f"does not match {o}"
        )
    tail = f.series.values[f.series.values.size - record.n_lost :]
    if record.n_lost and not np.array_equal(record.pivots, tail):
        raise TransformError("record pivots do not match the end of the fitted series")


def _to_model_scale(values: np.ndarray, lmbda: float | None) -> np.ndarray:
    if lmbda is None:
        return np.asarray(values, dtype=float)
    try:
        return boxcox_values(values, lmbda)
    except DomainError as exc:
        raise TransformError(f"holdout not on the scale of the record: {exc}") from None


def _to_original(values: np.ndarray, lmbda: float | None) -> np.ndarray:
    if lmbda is None:
        return np.asarray(values, dtype=float)
    return inverse_boxcox_values(values, lmbda)


def evaluate_holdout(
    f: SarimaFit,
    record: TransformRecord,
    train: TimeSeries,
    holdout: TimeSeries,
    alpha: float = 0.05,
) -> HoldoutReport:
    """One-step-ahead forecasts through the holdout with coefficients frozen.

    The filter is advanced one observation at a time through the transformed
    holdout; each prediction is mapped back to the original scale and
    compared with the actual value (error = actual - forecast).
    """
    if holdout is None or len(holdout) == 0:
        raise TransformError("holdout is empty")
    if holdout.period != train.period:
        raise TransformError(f"holdout period {holdout.period} != train period {train.period}")
    if holdout.start != month_offset(train.end, 1):
        raise TransformError("holdout does not follow the training series")
    if len(train) != len(f.series):
        raise TransformError("fit was not estimated on this training series")
    _check_record(f, record)

    z_hold = _to_model_scale(holdout.values, record.lmbda)
    levels = np.concatenate([f.series.values, z_hold])
    m = z_hold.size
    preds_model = one_step_levels(f, levels)[-m:]
    try:
        preds = _to_original(preds_model, record.lmbda)
    except DomainError as exc:
        raise TransformError(f"one-step forecast left the Box-Cox range: {exc}") from None
    actual = np.asarray(holdout.values, dtype=float)
    errors = actual - preds

    cg = None
    if m >= 3 and np.ptp(errors) > 0:
        cg = correlogram(errors, min(2 * holdout.period, m - 1))
    sw = shapiro_wilk(errors) if m >= 3 and np.ptp(errors) > 0 else None
    return HoldoutReport(holdout.dates(), actual, preds, errors, cg, sw, alpha)


@dataclass
class OriginalScaleForecast:
    dates: list[str]
    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    conf: float
    clamped: list[bool]

    @property
    def warning(self) -> bool:
        return any(self.clamped)

    def rows(self):
        return list(zip(self.dates, self.point, self.lower, self.upper))

    def to_dict(self) -> dict:
        return {
            "conf": self.conf,
            "clamped_any": self.warning,
            "steps": [
                {"date": d, "point": p, "lower": lo, "upper": up, "clamped": c}
                for (d, p, lo, up), c in zip(self.rows(), self.clamped)
            ],
        }


def _inverse_endpoint(values: np.ndarray, lmbda: float) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=float)
    if lmbda == 0:
        return np.exp(values), np.zeros(values.size, dtype=bool)
    bad = lmbda * values + 1.0 <= 0.0
    # below the range for lmbda > 0 (maps to 0), above it for lmbda < 0
    out = np.full(values.size, 0.0 if lmbda > 0 else np.inf)
    if np.any(~bad):
        out[~bad] = inverse_boxcox_values(values[~bad], lmbda)
    return out, bad


def forecast_original_scale(
    f: SarimaFit, record: TransformRecord, h: int, conf: float = 0.95
) -> OriginalScaleForecast:
    """Forecast on the modeled scale and map point and interval ends back.

    Differencing is undone inside the forecast recursion (the record's pivots
    are the last levels of the fitted series). Box-Cox is inverted on the
    point forecast and on each interval endpoint separately, which is valid
    because the transform is monotone and yields asymmetric intervals. An
    endpoint outside the inverse transform's domain is clamped (to 0 for
    positive lambda, to infinity for negative lambda) and flagged.
    """
    _check_record(f, record)
    fc = forecast(f, h, conf)
    lam = record.lmbda
    if lam is None:
        flags = [False] * h
        return OriginalScaleForecast(fc.dates(), fc.mean, fc.lower, fc.upper, conf, flags)
    point, bad_p = _inverse_endpoint(fc.mean, lam)
    lower, bad_l = _inverse_endpoint(fc.lower, lam)
    upper, bad_u = _inverse_endpoint(fc.upper, lam)
    flags = list(map(bool, bad_p | bad_l | bad_u))
    if any(flags):
        log.warning("forecast interval endpoints clamped at %d step(s)", sum(flags))
    return OriginalScaleForecast(fc.dates(), point, lower, upper, conf, flags)
