"""Kalman recursions for a zero-mean ARMA in Harvey's state-space form.

State dimension ``r = max(p, q + 1)``. Transition is the companion matrix
with the AR coefficients in its first column; the disturbance loads through
``R = (1, theta_1, ..., theta_{r-1})``; the observation picks the first state.
All variances are in units of the innovation variance.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _predict(a_u, P_u, phi, R):
    r = R.size
    a = np.empty(r)
    M = np.empty((r, r))
    for i in range(r):
        nxt = a_u[i + 1] if i + 1 < r else 0.0
        a[i] = phi[i] * a_u[0] + nxt
        for j in range(r):
            nxtP = P_u[i + 1, j] if i + 1 < r else 0.0
            M[i, j] = phi[i] * P_u[0, j] + nxtP
    P = np.empty((r, r))
    for i in range(r):
        for j in range(r):
            nxt = M[i, j + 1] if j + 1 < r else 0.0
            P[i, j] = M[i, 0] * phi[j] + nxt + R[i] * R[j]
    return a, P


@njit(cache=True)
def kalman_filter(y, phi, R, a0, P0):
    """Run the filter over ``y``.

    ``phi`` must be padded with zeros to the state dimension.

    Returns
    -------
    pred : one-step predictions of each observation
    F : their prediction variances (unit innovation variance)
    a, P : predicted state mean and covariance for the step after the last
    ok : False when a prediction variance became non-positive
    """
    n = y.size
    r = R.size
    a = a0.copy()
    P = P0.copy()
    pred = np.empty(n)
    F = np.empty(n)
    for t in range(n):
        f = P[0, 0]
        if not f > 0.0:
            return pred, F, a, P, False
        pred[t] = a[0]
        F[t] = f
        v = y[t] - a[0]
        col = P[:, 0].copy()
        a_u = a + col * (v / f)
        P_u = np.empty((r, r))
        for i in range(r):
            for j in range(r):
                P_u[i, j] = P[i, j] - col[i] * col[j] / f
        a, P = _predict(a_u, P_u, phi, R)
    return pred, F, a, P, True
