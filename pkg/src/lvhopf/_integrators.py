"""Compiled fixed-step RK4 loops.

Status codes returned by every loop: 0 ok, 1 non-finite or |x| > limit,
2 a population became non-positive.  ``n_done`` is the number of completed
steps; rows past it are garbage.
"""
import numpy as np
from numba import njit

MODE_INSTANT = 0
MODE_QUADRATURE = 1
MODE_LAG = 2


@njit(cache=True)
def _f1(x1, x2, x3, a):
    return x1 * (1.0 - x1 - x2 - a * x3)


@njit(cache=True)
def _f2(x1, x2, x3):
    return x2 * (1.0 - 1.5 * x1 - x2 - x3)


@njit(cache=True)
def _f3(x3, c1, c2, a, H):
    return x3 * (-1.0 + 0.5 * a * c1 + 0.5 * c2) - H


@njit(cache=True)
def _check(s, n, limit):
    for i in range(n):
        v = s[i]
        if not np.isfinite(v) or abs(v) > limit:
            return 1
    for i in range(3):
        if s[i] <= 0.0:
            return 2
    return 0


@njit(cache=True)
def _chain_deriv(s, a, H, k, rate, out):
    x1 = s[0]
    x2 = s[1]
    x3 = s[2]
    out[0] = _f1(x1, x2, x3, a)
    out[1] = _f2(x1, x2, x3)
    out[2] = _f3(x3, s[2 + k], s[2 + 2 * k], a, H)
    out[3] = rate * (x1 - s[3])
    for j in range(1, k):
        out[3 + j] = rate * (s[2 + j] - s[3 + j])
    out[3 + k] = rate * (x2 - s[3 + k])
    for j in range(1, k):
        out[3 + k + j] = rate * (s[2 + k + j] - s[3 + k + j])


@njit(cache=True)
def rk4_chain(s0, a, H, k, rate, dt, nsteps, limit):
    """Linear-chain system: x plus two cascades of k first-order filters."""
    m = s0.shape[0]
    out = np.empty((nsteps + 1, 3))
    s = s0.copy()
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    out[0, :] = s[:3]
    for n in range(nsteps):
        _chain_deriv(s, a, H, k, rate, k1)
        for i in range(m):
            tmp[i] = s[i] + 0.5 * dt * k1[i]
        _chain_deriv(tmp, a, H, k, rate, k2)
        for i in range(m):
            tmp[i] = s[i] + 0.5 * dt * k2[i]
        _chain_deriv(tmp, a, H, k, rate, k3)
        for i in range(m):
            tmp[i] = s[i] + dt * k3[i]
        _chain_deriv(tmp, a, H, k, rate, k4)
        for i in range(m):
            s[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        out[n + 1, :] = s[:3]
        status = _check(s, m, limit)
        if status:
            return out, n + 1, status
    return out, nsteps, 0


@njit(cache=True)
def _lag_value(X, pos):
    i0 = int(np.floor(pos))
    frac = pos - i0
    return X[i0] * (1.0 - frac) + X[i0 + 1] * frac


@njit(cache=True)
def rk4_history(X1, X2, X3, m0, a, H, mode, w, lag, dt, nsteps, limit):
    """RK4 for the delayed system on a stored history.

    ``X1..X3`` hold the solution on the grid; index ``m0`` is ``t = 0`` and
    entries before it are the prescribed history.  The delayed prey averages
    are evaluated per mode:

    * MODE_INSTANT    current stage value (no delay)
    * MODE_QUADRATURE ``w[0] x(stage) + sum_j w[j] x(t - j dt)``; half-step
      stages average neighbouring grid values
    * MODE_LAG        linear interpolation of the grid at ``t - lag``
    """
    M = w.shape[0] - 1
    # A = sum_{j>=1} w_j x(t_n - j dt), D = same at t_n + dt
    A1 = 0.0
    A2 = 0.0
    if mode == MODE_QUADRATURE:
        for j in range(1, M + 1):
            A1 += w[j] * X1[m0 - j]
            A2 += w[j] * X2[m0 - j]
    w0 = w[0]
    L = lag / dt
    for n in range(nsteps):
        i = m0 + n
        x1 = X1[i]
        x2 = X2[i]
        x3 = X3[i]
        D1 = 0.0
        D2 = 0.0
        if mode == MODE_QUADRATURE:
            for j in range(1, M + 1):
                D1 += w[j] * X1[i + 1 - j]
                D2 += w[j] * X2[i + 1 - j]
            B1 = 0.5 * (A1 + D1)
            B2 = 0.5 * (A2 + D2)
        elif mode == MODE_LAG:
            A1 = _lag_value(X1, i - L)
            A2 = _lag_value(X2, i - L)
            B1 = _lag_value(X1, i + 0.5 - L)
            B2 = _lag_value(X2, i + 0.5 - L)
            D1 = _lag_value(X1, i + 1.0 - L)
            D2 = _lag_value(X2, i + 1.0 - L)
        else:
            B1 = 0.0
            B2 = 0.0

        # stage 1
        if mode == MODE_INSTANT:
            c1, c2 = x1, x2
        elif mode == MODE_QUADRATURE:
            c1, c2 = w0 * x1 + A1, w0 * x2 + A2
        else:
            c1, c2 = A1, A2
        p1 = _f1(x1, x2, x3, a)
        q1 = _f2(x1, x2, x3)
        r1 = _f3(x3, c1, c2, a, H)
        # stage 2
        y1 = x1 + 0.5 * dt * p1
        y2 = x2 + 0.5 * dt * q1
        y3 = x3 + 0.5 * dt * r1
        if mode == MODE_INSTANT:
            c1, c2 = y1, y2
        elif mode == MODE_QUADRATURE:
            c1, c2 = w0 * y1 + B1, w0 * y2 + B2
        else:
            c1, c2 = B1, B2
        p2 = _f1(y1, y2, y3, a)
        q2 = _f2(y1, y2, y3)
        r2 = _f3(y3, c1, c2, a, H)
        # stage 3
        y1 = x1 + 0.5 * dt * p2
        y2 = x2 + 0.5 * dt * q2
        y3 = x3 + 0.5 * dt * r2
        if mode == MODE_INSTANT:
            c1, c2 = y1, y2
        elif mode == MODE_QUADRATURE:
            c1, c2 = w0 * y1 + B1, w0 * y2 + B2
        else:
            c1, c2 = B1, B2
        p3 = _f1(y1, y2, y3, a)
        q3 = _f2(y1, y2, y3)
        r3 = _f3(y3, c1, c2, a, H)
        # stage 4
        y1 = x1 + dt * p3
        y2 = x2 + dt * q3
        y3 = x3 + dt * r3
        if mode == MODE_INSTANT:
            c1, c2 = y1, y2
        elif mode == MODE_QUADRATURE:
            c1, c2 = w0 * y1 + D1, w0 * y2 + D2
        else:
            c1, c2 = D1, D2
        p4 = _f1(y1, y2, y3, a)
        q4 = _f2(y1, y2, y3)
        r4 = _f3(y3, c1, c2, a, H)

        X1[i + 1] = x1 + dt / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4)
        X2[i + 1] = x2 + dt / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
        X3[i + 1] = x3 + dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4)
        A1 = D1
        A2 = D2

        for v in (X1[i + 1], X2[i + 1], X3[i + 1]):
            if not np.isfinite(v) or abs(v) > limit:
                return n + 1, 1
        if X1[i + 1] <= 0.0 or X2[i + 1] <= 0.0 or X3[i + 1] <= 0.0:
            return n + 1, 2
    return nsteps, 0
