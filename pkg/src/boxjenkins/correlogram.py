"""Sample ACF/PACF and the candidate-order grid used for identification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import TimeSeries
from .errors import BoundsError, ConfigError, NumericalError, ZeroVarianceError
from .sarima import SarimaOrder

#: nonseasonal (p, q) and seasonal (P, Q) alternatives read off the
#: identification plots of a monthly, once-differenced series
DEFAULT_NONSEASONAL = ((0, 1), (1, 1), (1, 2), (2, 1), (2, 2))
DEFAULT_SEASONAL = ((1, 0), (0, 1))


@dataclass(frozen=True)
class Correlogram:
    lags: np.ndarray
    acf: np.ndarray
    pacf: np.ndarray
    n: int

    @property
    def band(self) -> float:
        return 1.96 / np.sqrt(self.n)

    def exceedances(self, which: str = "acf") -> list[int]:
        """Lags >= 1 whose coefficient falls outside the +-band."""
        vals = self.acf if which == "acf" else self.pacf
        return [int(k) for k in self.lags[1:] if abs(vals[k]) > self.band]

    def rows(self, which: str = "acf") -> list[tuple[int, float, float, float]]:
        vals = self.acf if which == "acf" else self.pacf
        start = 0 if which == "acf" else 1
        b = self.band
        return [(int(k), float(vals[k]), -b, b) for k in self.lags[start:]]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "band": self.band,
            "acf": [float(v) for v in self.acf],
            "pacf": [float(v) for v in self.pacf[1:]],
            "acf_exceedances": self.exceedances("acf"),
            "pacf_exceedances": self.exceedances("pacf"),
        }


def _check(x, max_lag: int) -> np.ndarray:
    x = x.values if isinstance(x, TimeSeries) else np.asarray(x, dtype=float)
    if max_lag < 1:
        raise BoundsError(f"max_lag must be >= 1, got {max_lag}")
    if max_lag >= x.size:
        raise BoundsError(f"max_lag {max_lag} must be below the sample size {x.size}")
    if np.ptp(x) == 0:
        raise ZeroVarianceError("series is constant; autocorrelation undefined")
    return x


def autocovariance(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased sample autocovariances ``c_0 .. c_max_lag`` (divisor n)."""
    xc = x - x.mean()
    n = xc.size
    return np.array([xc[: n - k] @ xc[k:] for k in range(max_lag + 1)]) / n


def acf(ts, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags ``0..max_lag``; ``acf[0] == 1``."""
    x = _check(ts, max_lag)
    c = autocovariance(x, max_lag)
    r = c / c[0]
    r[0] = 1.0
    return r


def durbin_levinson(r: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from autocorrelations ``r[0..m]``.

    Returns an array of length ``m + 1`` whose entry 0 is 1.
    """
    m = r.size - 1
    out = np.empty(m + 1)
    out[0] = 1.0
    phi = np.zeros(m)
    v = r[0]
    for k in range(1, m + 1):
        num = r[k] - phi[: k - 1] @ r[k - 1 : 0 : -1]
        a = num / v
        if k > 1:
            phi[: k - 1] = phi[: k - 1] - a * phi[k - 2 :: -1]
        phi[k - 1] = a
        v *= 1.0 - a * a
        if v <= 0:
            raise NumericalError(f"Durbin-Levinson breakdown at lag {k}")
        out[k] = a
    return out


def pacf(ts, max_lag: int) -> np.ndarray:
    """Sample partial autocorrelations; entry 0 is 1 and ``pacf[1] == acf[1]``."""
    return durbin_levinson(acf(ts, max_lag))


def correlogram(ts, max_lag: int) -> Correlogram:
    r = acf(ts, max_lag)
    n = len(ts) if isinstance(ts, TimeSeries) else np.asarray(ts).size
    return Correlogram(np.arange(max_lag + 1), r, durbin_levinson(r), n)


def candidate_grid(
    nonseasonal: Iterable[Sequence[int]] = DEFAULT_NONSEASONAL,
    seasonal: Iterable[Sequence[int]] = DEFAULT_SEASONAL,
    d: int = 1,
    D: int = 0,
    period: int = 12,
) -> list[SarimaOrder]:
    """Cross every nonseasonal ``(p, q)`` with every seasonal ``(P, Q)``.

    Duplicates are dropped; the order follows the inputs, nonseasonal outer.
    """
    nonseasonal = [tuple(int(v) for v in pq) for pq in nonseasonal]
    seasonal = [tuple(int(v) for v in PQ) for PQ in seasonal]
    if not nonseasonal or not seasonal:
        raise ConfigError("candidate grid needs at least one nonseasonal and one seasonal entry")
    if any(len(t) != 2 for t in nonseasonal + seasonal):
        raise ConfigError("grid entries must be pairs")
    if min(v for t in nonseasonal + seasonal for v in t) < 0 or d < 0 or D < 0:
        raise ConfigError("orders must be non-negative")
    out: list[SarimaOrder] = []
    seen = set()
    for p, q in nonseasonal:
        for P_, Q_ in seasonal:
            order = SarimaOrder(p, d, q, P_, D, Q_, period)
            if order not in seen:
                seen.add(order)
                out.append(order)
    return out
