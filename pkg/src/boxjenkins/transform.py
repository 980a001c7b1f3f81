"""Box-Cox variance stabilisation and ordinary/seasonal differencing.

Both steps are invertible: :class:`TransformRecord` keeps the Box-Cox
parameter and the leading and trailing levels consumed by differencing, so
forecasts made on the differenced scale can be mapped back without access to
the raw data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import optimize

from .core import TimeSeries
from .errors import DomainError, LengthError, StateError, ZeroVarianceError


@dataclass(frozen=True)
class TransformRecord:
    """Everything needed to undo Box-Cox plus differencing.

    Attributes
    ----------
    lmbda : float or None
        Box-Cox parameter; ``None`` means no power transform was applied.
    d, D : int
        Ordinary and seasonal differencing orders.
    period : int
        Seasonal period used by the seasonal difference.
    head : ndarray
        First ``d + D*period`` transformed (undifferenced) values.
    pivots : ndarray
        Last ``d + D*period`` transformed (undifferenced) values.
    """

    lmbda: float | None
    d: int
    D: int
    period: int
    head: np.ndarray
    pivots: np.ndarray

    @property
    def n_lost(self) -> int:
        return self.d + self.D * self.period

    def to_dict(self) -> dict:
        return {
            "lambda": self.lmbda,
            "d": self.d,
            "D": self.D,
            "period": self.period,
            "head": [float(v) for v in self.head],
            "pivots": [float(v) for v in self.pivots],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TransformRecord":
        return cls(
            data["lambda"],
            int(data["d"]),
            int(data["D"]),
            int(data["period"]),
            np.asarray(data["head"], dtype=float),
            np.asarray(data["pivots"], dtype=float),
        )

    def with_lambda(self, lmbda: float | None) -> "TransformRecord":
        return TransformRecord(lmbda, self.d, self.D, self.period, self.head, self.pivots)


def _unwrap(x):
    if isinstance(x, TimeSeries):
        return x.values, x
    return np.asarray(x, dtype=float), None


def _rewrap(values, like):
    return values if like is None else like.with_values(values)


def boxcox_values(x: np.ndarray, lmbda: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        bad = int(np.flatnonzero(x <= 0)[0])
        raise DomainError(f"Box-Cox needs positive data; value {x[bad]!r} at index {bad}")
    logx = np.log(x)
    if lmbda == 0:
        return logx
    # expm1 keeps precision as lambda -> 0
    return np.expm1(lmbda * logx) / lmbda


def inverse_boxcox_values(y: np.ndarray, lmbda: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if lmbda == 0:
        return np.exp(y)
    base = lmbda * y
    if np.any(base <= -1):
        bad = int(np.flatnonzero(base <= -1)[0])
        raise DomainError(
            f"inverse Box-Cox undefined: lambda*x + 1 <= 0 at index {bad} (x={y[bad]!r})"
        )
    return np.exp(np.log1p(base) / lmbda)


def boxcox(ts, lmbda: float):
    """Power-transform strictly positive data.

    Maps ``x`` to ``(x**lmbda - 1) / lmbda``, or ``log(x)`` when ``lmbda == 0``.
    Accepts a :class:`TimeSeries` (returns one) or an array.
    """
    vals, like = _unwrap(ts)
    return _rewrap(boxcox_values(vals, float(lmbda)), like)


def inverse_boxcox(ts, lmbda: float):
    vals, like = _unwrap(ts)
    return _rewrap(inverse_boxcox_values(vals, float(lmbda)), like)


def _mean_design(n: int, trend: bool) -> np.ndarray:
    cols = [np.ones(n)]
    if trend and n > 2:
        cols.append(np.linspace(-1.0, 1.0, n))
    return np.column_stack(cols)


def profile_loglik(x: np.ndarray, lmbda: float, trend: bool = True) -> float:
    """Box-Cox profile log-likelihood, up to an additive constant.

    Gaussian log-likelihood of the transformed data with the mean (a linear
    function of time when ``trend`` is set, else a constant) and the variance
    profiled out, plus the Jacobian ``(lmbda - 1) * sum(log x)``.
    """
    x = np.asarray(x, dtype=float)
    z = boxcox_values(x, lmbda)
    X = _mean_design(x.size, trend)
    resid = z - X @ np.linalg.lstsq(X, z, rcond=None)[0]
    var = np.mean(resid**2)
    if var <= 0:
        raise ZeroVarianceError("transformed series has zero variance")
    return -0.5 * x.size * np.log(var) + (lmbda - 1.0) * np.sum(np.log(x))


def estimate_lambda(ts, lower: float = -2.0, upper: float = 2.0, trend: bool = True) -> float:
    """Profile-likelihood estimate of the Box-Cox parameter on ``[lower, upper]``.

    With ``trend`` (the default) the transformed series is modelled as a
    linear time trend plus Gaussian noise, so a trending series is not
    mistaken for a skewed one.
    """
    x, _ = _unwrap(ts)
    if not lower < upper:
        raise DomainError(f"need lower < upper, got [{lower}, {upper}]")
    if np.any(x <= 0):
        bad = int(np.flatnonzero(x <= 0)[0])
        raise DomainError(f"Box-Cox needs positive data; value {x[bad]!r} at index {bad}")
    if np.ptp(x) == 0:
        raise ZeroVarianceError("cannot estimate lambda for a constant series")
    res = optimize.minimize_scalar(
        lambda lam: -profile_loglik(x, lam, trend),
        bounds=(lower, upper),
        method="bounded",
        options={"xatol": 1e-5},
    )
    lam = float(res.x)
    # the bounded search never evaluates the endpoints themselves
    for edge in (lower, upper):
        if profile_loglik(x, edge, trend) > profile_loglik(x, lam, trend):
            lam = float(edge)
    return lam


def differencing_polynomial(d: int, D: int, period: int) -> np.ndarray:
    """Coefficients of ``(1 - B)**d (1 - B**period)**D`` in increasing powers of B."""
    poly = np.array([1.0])
    for _ in range(d):
        poly = P.polymul(poly, [1.0, -1.0])
    seasonal = np.zeros(period + 1)
    seasonal[0], seasonal[period] = 1.0, -1.0
    for _ in range(D):
        poly = P.polymul(poly, seasonal)
    return poly


def difference_values(x: np.ndarray, d: int, D: int, period: int) -> np.ndarray:
    out = np.asarray(x, dtype=float)
    for _ in range(D):
        out = out[period:] - out[:-period]
    for _ in range(d):
        out = np.diff(out)
    return out


def difference(ts, d: int, D: int = 0, period: int | None = None):
    """Apply ``(1 - B)**d (1 - B**s)**D``.

    Returns
    -------
    diffed : TimeSeries or ndarray
        Differenced values; a series starts ``d + D*s`` steps later.
    record : TransformRecord
        Pivots for :func:`undifference`; ``lmbda`` is ``None``.
    """
    x, like = _unwrap(ts)
    if period is None:
        period = like.period if like is not None else 1
    if d < 0 or D < 0:
        raise DomainError("differencing orders must be non-negative")
    k = d + D * period
    if x.size <= k:
        raise LengthError(f"series of length {x.size} too short for {k} lost observations")
    out = difference_values(x, d, D, period)
    record = TransformRecord(None, int(d), int(D), int(period), x[:k].copy(), x[x.size - k:].copy())
    if like is None:
        return out, record
    return like.with_values(out, offset=k), record


def _integrate(diffed: np.ndarray, history: np.ndarray, poly: np.ndarray) -> np.ndarray:
    k = poly.size - 1
    buf = np.concatenate([history, np.empty(diffed.size)])
    lag_coefs = -poly[1:]
    for t, w in enumerate(diffed):
        i = t + k
        # y_i = w_i + sum_j c_j * y_{i-j}
        buf[i] = w + lag_coefs @ buf[i - k : i][::-1]
    return buf[k:]


def undifference(diffed, record: TransformRecord) -> np.ndarray:
    """Integrate differences forward from the record's trailing pivots."""
    w = np.asarray(diffed, dtype=float).ravel()
    k = record.n_lost
    if record.pivots is None or record.pivots.size != k:
        raise StateError(f"record needs {k} pivots, has {0 if record.pivots is None else record.pivots.size}")
    poly = differencing_polynomial(record.d, record.D, record.period)
    return _integrate(w, record.pivots, poly)


def apply(ts, lmbda: float | None, d: int, D: int = 0, period: int | None = None):
    """Box-Cox (skipped when ``lmbda`` is None) followed by differencing."""
    x = ts if lmbda is None else boxcox(ts, lmbda)
    diffed, record = difference(x, d, D, period)
    return diffed, record.with_lambda(lmbda)


def invert(diffed, record: TransformRecord) -> np.ndarray:
    """Exact inverse of :func:`apply`: rebuild the full original-scale series."""
    vals, _ = _unwrap(diffed)
    k = record.n_lost
    if record.head is None or record.head.size != k:
        raise StateError(f"record needs {k} head values")
    poly = differencing_polynomial(record.d, record.D, record.period)
    levels = np.concatenate([record.head, _integrate(vals, record.head, poly)])
    if record.lmbda is None:
        return levels
    return inverse_boxcox_values(levels, record.lmbda)
