"""Augmented Dickey-Fuller, Ljung-Box and Shapiro-Wilk tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import TimeSeries
from .correlogram import acf
from .errors import DegeneracyError, DfError, LengthError, RankError, SizeError

ADF, LJUNG_BOX, SHAPIRO_WILK = "ADF", "LjungBox", "ShapiroWilk"

# Dickey-Fuller tau critical values, regression with constant and linear
# trend. Rows are sample sizes, columns the 1%, 2.5%, 5% and 10% levels.
_DF_SIZES = np.array([25.0, 50.0, 100.0, 250.0, 500.0, 100000.0])
_DF_LEVELS = np.array([0.01, 0.025, 0.05, 0.10])
_DF_CRIT = -np.array(
    [
        [4.38, 3.95, 3.60, 3.24],
        [4.15, 3.80, 3.50, 3.18],
        [4.04, 3.73, 3.45, 3.15],
        [3.99, 3.69, 3.43, 3.13],
        [3.98, 3.68, 3.42, 3.13],
        [3.96, 3.66, 3.41, 3.12],
    ]
)


@dataclass(frozen=True)
class TestReport:
    """Outcome of a hypothesis test.

    ``p_bound`` is ``"<"`` or ``">"`` when the p-value is only known to lie
    beyond a tabulated level; ``p_value`` then holds that level.
    """

    __test__ = False  # keep pytest from collecting this class

    method: str
    statistic: float
    p_value: float
    null_hypothesis: str
    df: int | None = None
    lags_used: int | None = None
    p_bound: str | None = None

    @property
    def p_is_bound(self) -> bool:
        return self.p_bound is not None

    @property
    def p_text(self) -> str:
        if self.p_bound:
            return f"{self.p_bound} {self.p_value:g}"
        return f"{self.p_value:.4g}"

    def rejects(self, alpha: float = 0.05) -> bool:
        if self.p_bound == "<":
            return alpha >= self.p_value
        if self.p_bound == ">":
            # true p-value unknown beyond the table; stay conservative
            return False
        return self.p_value < alpha

    def conclusion(self, alpha: float = 0.05) -> str:
        if self.rejects(alpha):
            return f"reject at {alpha:g}: evidence against '{self.null_hypothesis}'"
        return f"fail to reject at {alpha:g}: data consistent with '{self.null_hypothesis}'"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "p_is_bound": self.p_is_bound,
            "p_bound": self.p_bound,
            "df": self.df,
            "lags_used": self.lags_used,
            "null_hypothesis": self.null_hypothesis,
        }


def _values(x) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return x.values
    return np.asarray(x, dtype=float).ravel()


def _df_pvalue(stat: float, nobs: int) -> tuple[float, str | None]:
    crit = np.array([np.interp(nobs, _DF_SIZES, _DF_CRIT[:, j]) for j in range(_DF_LEVELS.size)])
    if stat <= crit[0]:
        return float(_DF_LEVELS[0]), "<"
    if stat >= crit[-1]:
        return float(_DF_LEVELS[-1]), ">"
    return float(np.interp(stat, crit, _DF_LEVELS)), None


def adf_test(ts, lags: int | None = None) -> TestReport:
    """Augmented Dickey-Fuller test with constant and linear trend.

    Regresses the first difference on an intercept, a time trend, the lagged
    level and ``lags`` lagged differences. The statistic is the t-ratio of
    the lagged level; the p-value is interpolated in the Dickey-Fuller tau
    table and reported as a bound outside the 1%-10% range.

    Parameters
    ----------
    ts : TimeSeries or array_like
    lags : int, optional
        Augmentation order. Defaults to ``trunc((n - 1) ** (1/3))``.
    """
    x = _values(ts)
    n = x.size
    if lags is None:
        lags = int(math.trunc((n - 1) ** (1.0 / 3.0)))
    if lags < 0:
        raise LengthError(f"lags must be non-negative, got {lags}")
    if n < lags + 10:
        raise LengthError(f"ADF with {lags} lags needs at least {lags + 10} observations, got {n}")

    dx = np.diff(x)
    rows = np.arange(lags, n - 1)
    cols = [np.ones(rows.size), rows + 1.0, x[rows]]
    cols += [dx[rows - i] for i in range(1, lags + 1)]
    X = np.column_stack(cols)
    y = dx[rows]
    nobs, k = X.shape
    if nobs <= k:
        raise LengthError("too few observations for the ADF regression")

    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-10 * max(diag.max(), 1.0):
        raise RankError("ADF regressor matrix is rank deficient (constant or deterministic series?)")
    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ beta
    s2 = resid @ resid / (nobs - k)
    if s2 <= 0:
        raise RankError("ADF regression fits exactly; statistic undefined")
    Rinv = np.linalg.inv(R)
    se = math.sqrt(s2 * (Rinv[2] @ Rinv[2]))
    stat = float(beta[2] / se)

    p, bound = _df_pvalue(stat, n - 1)
    return TestReport(ADF, stat, p, "series has a unit root", lags_used=int(lags), p_bound=bound)


def ljung_box(residuals, lags: int = 20, fitdf: int = 0) -> TestReport:
    """Ljung-Box portmanteau test on the first ``lags`` autocorrelations.

    ``Q = n (n + 2) sum_k r_k**2 / (n - k)`` referred to chi-square with
    ``lags - fitdf`` degrees of freedom.
    """
    e = _values(residuals)
    if lags <= fitdf:
        raise DfError(f"lags ({lags}) must exceed fitdf ({fitdf})")
    if fitdf < 0:
        raise DfError("fitdf must be non-negative")
    n = e.size
    r = acf(e, lags)
    k = np.arange(1, lags + 1)
    q = float(n * (n + 2) * np.sum(r[1:] ** 2 / (n - k)))
    df = lags - fitdf
    return TestReport(
        LJUNG_BOX, q, float(stats.chi2.sf(q, df)), "no autocorrelation up to the tested lag", df=df
    )


def _poly(coefs, x):
    # coefficients in increasing powers
    return sum(c * x**i for i, c in enumerate(coefs))


_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def shapiro_wilk_coefficients(n: int) -> np.ndarray:
    """Royston's approximate Shapiro-Wilk weights for the upper half, length n // 2."""
    nn2 = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    m = stats.norm.ppf((np.arange(1, nn2 + 1) - 0.375) / (n + 0.25))
    summ2 = 2.0 * np.sum(m**2)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1**2 - 2 * a2**2))
        head = [a1, a2]
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1**2))
        head = [a1]
    a = -m / fac
    a[: len(head)] = head
    return a


def shapiro_wilk(sample) -> TestReport:
    """Shapiro-Wilk W test with Royston's (1995) p-value approximation.

    Valid for 3 <= n <= 5000.
    """
    x = np.sort(_values(sample))
    n = x.size
    if n < 3 or n > 5000:
        raise SizeError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    if x[-1] - x[0] < 1e-19 * max(1.0, abs(x[0])):
        raise DegeneracyError("all values are equal")

    a = shapiro_wilk_coefficients(n)
    nn2 = n // 2
    xc = x - x.mean()
    num = float(a @ (x[::-1][:nn2] - x[:nn2]))
    w = min(num * num / float(xc @ xc), 1.0)
    null = "sample drawn from a normal distribution"

    return TestReport(SHAPIRO_WILK, w, shapiro_wilk_pvalue(w, n), null)


def shapiro_wilk_pvalue(w: float, n: int) -> float:
    """Upper-tail p-value of a Shapiro-Wilk statistic ``w`` at sample size ``n``."""
    if n < 3 or n > 5000:
        raise SizeError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    if n == 3:
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return float(min(max(p, 0.0), 1.0))
    y = math.log1p(-w) if w < 1.0 else -np.inf
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return 0.0
        y = -math.log(gamma - y)
        m = _poly(_C3, n)
        s = math.exp(_poly(_C4, n))
    else:
        ln = math.log(n)
        m = _poly(_C5, ln)
        s = math.exp(_poly(_C6, ln))
    return float(stats.norm.sf(y, loc=m, scale=s))
