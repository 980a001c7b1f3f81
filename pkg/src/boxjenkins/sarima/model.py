"""Multiplicative seasonal ARMA: orders, polynomials, likelihood, simulation.

Sign conventions
----------------
AR:  (1 - phi_1 B - ... - phi_p B^p)(1 - Phi_1 B^s - ... - Phi_P B^{sP})
MA:  (1 + theta_1 B + ... + theta_q B^q)(1 + Theta_1 B^s + ... + Theta_Q B^{sQ})

so an MA(1) written ``x_t = e_t + theta e_{t-1}`` has coefficient ``theta``.
Coefficient vectors are laid out as ``[ar, ma, sar, sma]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import linalg, signal

from ..core import TimeSeries
from ..errors import BoundsError, DomainError, NumericalError
from ..transform import _integrate, differencing_polynomial
from ._filter import kalman_filter

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, order=True)
class SarimaOrder:
    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 1

    def __post_init__(self):
        for name in ("p", "d", "q", "P", "D", "Q"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise BoundsError(f"order {name} must be a non-negative integer, got {v}")
            object.__setattr__(self, name, int(v))
        if int(self.s) != self.s or self.s < 1:
            raise BoundsError(f"seasonal period must be a positive integer, got {self.s}")
        object.__setattr__(self, "s", int(self.s))
        if self.P + self.D + self.Q > 0 and self.s < 2:
            raise BoundsError("seasonal terms need a period s > 1")

    @property
    def n_coef(self) -> int:
        return self.p + self.q + self.P + self.Q

    @property
    def n_lost(self) -> int:
        """Observations consumed by differencing."""
        return self.d + self.D * self.s

    @property
    def param_names(self) -> list[str]:
        return (
            [f"ar{i}" for i in range(1, self.p + 1)]
            + [f"ma{i}" for i in range(1, self.q + 1)]
            + [f"sar{i}" for i in range(1, self.P + 1)]
            + [f"sma{i}" for i in range(1, self.Q + 1)]
        )

    def split(self, params) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        params = np.asarray(params, dtype=float).ravel()
        if params.size != self.n_coef:
            raise BoundsError(f"{self} takes {self.n_coef} coefficients, got {params.size}")
        i = np.cumsum([0, self.p, self.q, self.P, self.Q])
        return tuple(params[i[k] : i[k + 1]] for k in range(4))

    def __str__(self) -> str:
        base = f"ARIMA({self.p},{self.d},{self.q})"
        if self.P or self.D or self.Q:
            return f"S{base}x({self.P},{self.D},{self.Q})[{self.s}]"
        return base

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("p", "d", "q", "P", "D", "Q", "s")}


def _seasonal(coefs: np.ndarray, s: int) -> np.ndarray:
    out = np.zeros(coefs.size * s + 1)
    out[s::s] = coefs
    return out


def ar_polynomial(order: SarimaOrder, params) -> np.ndarray:
    """Expanded AR polynomial in increasing powers of B (leading 1)."""
    ar, _, sar, _ = order.split(params)
    return npoly.polymul(np.r_[1.0, -ar], np.r_[1.0, -_seasonal(sar, order.s)[1:]])


def ma_polynomial(order: SarimaOrder, params) -> np.ndarray:
    _, ma, _, sma = order.split(params)
    return npoly.polymul(np.r_[1.0, ma], np.r_[1.0, _seasonal(sma, order.s)[1:]])


def _min_root_modulus(poly: np.ndarray) -> float:
    poly = np.asarray(poly, dtype=float)
    # negligible leading powers only add roots near infinity
    keep = np.flatnonzero(np.abs(poly) > 1e-14 * np.abs(poly).max())
    poly = poly[: keep[-1] + 1]
    if poly.size <= 1:
        return np.inf
    return float(np.min(np.abs(npoly.polyroots(poly))))


def check_admissible(order: SarimaOrder, params, tol: float = 1e-8) -> None:
    """Raise DomainError unless every AR factor is stationary and every MA factor invertible."""
    ar, ma, sar, sma = order.split(params)
    factors = (
        ("AR", np.r_[1.0, -ar]),
        ("seasonal AR", np.r_[1.0, -sar]),
        ("MA", np.r_[1.0, ma]),
        ("seasonal MA", np.r_[1.0, sma]),
    )
    for label, poly in factors:
        if _min_root_modulus(poly) <= 1.0 + tol:
            kind = "stationary" if "AR" in label and "MA" not in label else "invertible"
            raise DomainError(f"{label} polynomial is not {kind}")


# --- unconstrained parametrisation -------------------------------------------------


def pacf_to_ar(u: np.ndarray) -> np.ndarray:
    """Map partial autocorrelations in (-1, 1) to stationary AR coefficients."""
    phi = np.zeros(0)
    for a in u:
        phi = np.r_[phi - a * phi[::-1], a]
    return phi


def ar_to_pacf(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float).copy()
    u = np.zeros(phi.size)
    for k in range(phi.size, 0, -1):
        a = phi[k - 1]
        u[k - 1] = a
        if abs(a) >= 1.0:
            raise DomainError("coefficients outside the stationary region")
        phi = (phi[: k - 1] + a * phi[: k - 1][::-1]) / (1.0 - a * a)
    return u


def constrain(order: SarimaOrder, x: np.ndarray) -> np.ndarray:
    """Unconstrained reals -> admissible coefficients (Monahan/Jones map)."""
    parts = order.split(x)
    ar, ma, sar, sma = (np.tanh(v) for v in parts)
    return np.concatenate([pacf_to_ar(ar), -pacf_to_ar(ma), pacf_to_ar(sar), -pacf_to_ar(sma)])


def unconstrain(order: SarimaOrder, params: np.ndarray, clip: float = 3.0) -> np.ndarray:
    ar, ma, sar, sma = order.split(params)
    u = [ar_to_pacf(ar), ar_to_pacf(-ma), ar_to_pacf(sar), ar_to_pacf(-sma)]
    return np.clip(np.arctanh(np.clip(np.concatenate(u), -0.999999, 0.999999)), -clip, clip)


# --- state space ------------------------------------------------------------------


@dataclass(frozen=True)
class StateSpace:
    """Harvey form of the expanded ARMA: companion transition, loading ``R``."""

    phi: np.ndarray
    R: np.ndarray
    P0: np.ndarray

    @property
    def dim(self) -> int:
        return self.R.size

    @property
    def T(self) -> np.ndarray:
        r = self.dim
        T = np.zeros((r, r))
        T[:, 0] = self.phi
        T[np.arange(r - 1), np.arange(1, r)] = 1.0
        return T


def state_space(order: SarimaOrder, params, check: bool = True) -> StateSpace:
    if check:
        check_admissible(order, params)
    ar = -ar_polynomial(order, params)[1:]
    ma = ma_polynomial(order, params)[1:]
    r = max(ar.size, ma.size + 1, 1)
    phi = np.zeros(r)
    phi[: ar.size] = ar
    R = np.zeros(r)
    R[0] = 1.0
    R[1 : ma.size + 1] = ma
    T = StateSpace(phi, R, None).T
    P0 = linalg.solve_discrete_lyapunov(T, np.outer(R, R))
    P0 = 0.5 * (P0 + P0.T)
    return StateSpace(phi, R, P0)


@dataclass(frozen=True)
class FilterOutput:
    pred: np.ndarray
    F: np.ndarray
    a: np.ndarray
    P: np.ndarray

    def residuals(self, y: np.ndarray) -> np.ndarray:
        return y - self.pred


def run_filter(y: np.ndarray, order: SarimaOrder, params, ss: StateSpace | None = None) -> FilterOutput:
    y = np.ascontiguousarray(y, dtype=float)
    ss = state_space(order, params) if ss is None else ss
    pred, F, a, P, ok = kalman_filter(y, ss.phi, ss.R, np.zeros(ss.dim), ss.P0)
    if not ok:
        raise NumericalError("Kalman prediction variance lost positivity")
    return FilterOutput(pred, F, a, P)


def _values(ts) -> np.ndarray:
    if isinstance(ts, TimeSeries):
        return ts.values
    return np.asarray(ts, dtype=float).ravel()


def loglik(ts, order: SarimaOrder, params, sigma2: float) -> float:
    """Exact Gaussian log-likelihood of an (already differenced) series.

    Parameters
    ----------
    ts : TimeSeries or array_like
        The stationary series the ARMA part describes, i.e. after applying
        the ``d``/``D`` differences recorded in ``order``.
    order : SarimaOrder
    params : array_like
        Coefficients ``[ar, ma, sar, sma]``.
    sigma2 : float
        Innovation variance.
    """
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    y = _values(ts)
    out = run_filter(y, order, params)
    v = y - out.pred
    return float(-0.5 * np.sum(LOG_2PI + np.log(sigma2 * out.F) + v * v / (sigma2 * out.F)))


def concentrated_loglik(ts, order: SarimaOrder, params) -> tuple[float, float]:
    """Log-likelihood with the innovation variance profiled out.

    Returns ``(loglik, sigma2_hat)``.
    """
    y = _values(ts)
    out = run_filter(y, order, params)
    v = y - out.pred
    n = y.size
    sigma2 = float(np.sum(v * v / out.F) / n)
    if not sigma2 > 0:
        raise NumericalError("zero innovation variance")
    ll = -0.5 * (n * (LOG_2PI + math.log(sigma2) + 1.0) + float(np.sum(np.log(out.F))))
    return ll, sigma2


def css_residuals(y: np.ndarray, order: SarimaOrder, params) -> np.ndarray:
    """Conditional residuals with pre-sample values set to zero."""
    ar = ar_polynomial(order, params)
    ma = ma_polynomial(order, params)
    e = signal.lfilter(ar, ma, y)
    return e[ar.size - 1 :]


def simulate(
    order: SarimaOrder,
    params,
    sigma2: float = 1.0,
    n: int = 100,
    seed: int | None = 0,
    burn_in: int | None = None,
    start: tuple[int, int] = (2000, 1),
) -> TimeSeries:
    """Draw a seeded SARIMA path.

    Gaussian innovations drive the expanded ARMA recursion for
    ``burn_in + n`` steps, the result is integrated ``d`` and ``D`` times
    from zero, and the last ``n`` values are returned.
    """
    if n < 1:
        raise BoundsError("n must be positive")
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    check_admissible(order, params)
    if burn_in is None:
        burn_in = 10 * (order.s + order.p + order.q)
    total = burn_in + n
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(total) * math.sqrt(sigma2)
    w = signal.lfilter(ma_polynomial(order, params), ar_polynomial(order, params), e)
    k = order.n_lost
    if k:
        w = _integrate(w, np.zeros(k), differencing_polynomial(order.d, order.D, order.s))
    return TimeSeries(w[-n:], start, order.s)
