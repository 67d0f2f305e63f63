"""Compiled Dormand-Prince 5(4) kernel for the radial flux system.

The state is ``y = (u, m)`` with ``m = r^{N-1} |u'|^{p-2} u'``.  The kernel
keeps the quartic continuous extension of the pair for every accepted step so
that callers can evaluate the solution anywhere on the grid and integrate
against it without re-solving.

Event codes returned by :func:`shoot`:

==== =========================================================
 0   horizon ``r_max`` reached without classification
 1   ``u`` crossed zero with ``m < 0``
 2   ``m`` crossed zero (solution turns up)
 3   far-field level ``u + r u'/kappa`` crossed zero (zero-mass)
 4   slow decay detected (zero-mass)
-1   step size underflow
-2   step budget exhausted
==== =========================================================
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Dormand-Prince tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
A71, A73, A74, A75, A76 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
D1 = -12715105075.0 / 11282082432.0
D3 = 87487479700.0 / 32700410799.0
D4 = -10690763975.0 / 1880347072.0
D5 = 701980252875.0 / 199316789632.0
D6 = -1453857185.0 / 822651844.0
D7 = 69997945.0 / 29380423.0

EV_HORIZON = 0
EV_OVERSHOOT = 1
EV_TURN = 2
EV_FARFIELD_NEG = 3
EV_SLOW_DECAY = 4
EV_UNDERFLOW = -1
EV_MAXSTEPS = -2


@njit(cache=True)
def _spow(x, e):
    # odd extension |x|^e sign(x); zero at the origin
    if x > 0.0:
        return x**e
    if x < 0.0:
        return -((-x) ** e)
    return 0.0


@njit(cache=True)
def _g(u, pm1, cp, cq, qm1, cl, lm1):
    return -cp * _spow(u, pm1) + cq * _spow(u, qm1) - cl * _spow(u, lm1)


@njit(cache=True)
def _rhs(r, u, m, N, p, cp, cq, qm1, cl, lm1, out):
    pm1 = p - 1.0
    if m != 0.0:
        du = _spow(m * r ** (1.0 - N), 1.0 / pm1)
    else:
        du = 0.0
    out[0] = du
    out[1] = -(r ** (N - 1.0)) * _g(u, pm1, cp, cq, qm1, cl, lm1)


@njit(cache=True)
def dense_eval(rc, theta, comp):
    """Continuous extension of one step at ``theta`` in ``[0, 1]``."""
    th1 = 1.0 - theta
    return rc[0, comp] + theta * (rc[1, comp] + th1 * (rc[2, comp] + theta * (rc[3, comp] + th1 * rc[4, comp])))


@njit(cache=True)
def _farfield(r, u, m, N, p, kappa):
    du = 0.0
    if m != 0.0:
        du = _spow(m * r ** (1.0 - N), 1.0 / (p - 1.0))
    return u + r * du / kappa


@njit(cache=True)
def _event_value(kind, rc, theta, r, N, p, kappa):
    if kind == 0:
        return dense_eval(rc, theta, 0)
    if kind == 1:
        return dense_eval(rc, theta, 1)
    u = dense_eval(rc, theta, 0)
    m = dense_eval(rc, theta, 1)
    return _farfield(r, u, m, N, p, kappa)


@njit(cache=True)
def _locate(kind, rc, r0, h, f0, f1, N, p, kappa):
    # Illinois-modified regula falsi on theta, stopping at 1e-12 relative in r
    ta, tb = 0.0, 1.0
    fa, fb = f0, f1
    side = 0
    tol = 1e-12 * max(abs(r0 + h), 1e-300) / h
    t = tb
    for _ in range(200):
        t = (ta * fb - tb * fa) / (fb - fa)
        ft = _event_value(kind, rc, t, r0 + t * h, N, p, kappa)
        if ft == 0.0:
            return t
        if (ft > 0.0) == (fa > 0.0):
            ta, fa = t, ft
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            tb, fb = t, ft
            if side == 1:
                fa *= 0.5
            side = 1
        if tb - ta < tol:
            break
    return t


@njit(cache=True)
def shoot(
    N,
    p,
    cp,
    cq,
    q,
    cl,
    l,
    r0,
    u0,
    m0,
    r_max,
    rtol,
    atol_u,
    atol_m_rel,
    max_steps,
    zero_mass,
):
    """Integrate from ``(r0, u0, m0)`` until an event or ``r_max``.

    Returns
    -------
    grid : (n,) radii, ``grid[0] = r0``
    y : (n, 2) states ``(u, m)`` at the grid
    rcont : (n-1, 5, 2) dense-output coefficients per step
    hfull : (n-1,) full step length each set of coefficients refers to
    code : int event code
    """
    qm1 = q - 1.0
    lm1 = l - 1.0
    kappa = (N - p) / (p - 1.0)
    cap = 1024
    grid = np.empty(cap)
    ys = np.empty((cap, 2))
    rcs = np.empty((cap, 5, 2))
    hs = np.empty(cap)
    grid[0] = r0
    ys[0, 0] = u0
    ys[0, 1] = m0
    n = 1

    k1 = np.empty(2)
    k2 = np.empty(2)
    k3 = np.empty(2)
    k4 = np.empty(2)
    k5 = np.empty(2)
    k6 = np.empty(2)
    k7 = np.empty(2)
    y1 = np.empty(2)
    rc = np.empty((5, 2))

    r = r0
    y0u, y0m = u0, m0
    _rhs(r, y0u, y0m, N, p, cp, cq, qm1, cl, lm1, k1)
    h = 0.5 * r0
    mmax = abs(m0)
    code = EV_HORIZON
    ratio_min = 1e300
    steps = 0

    while True:
        if steps >= max_steps:
            code = EV_MAXSTEPS
            break
        if r + h > r_max:
            h = r_max - r
        if h <= 1e-14 * r:
            if r >= r_max * (1.0 - 1e-14):
                code = EV_HORIZON
            else:
                code = EV_UNDERFLOW
            break
        steps += 1

        _rhs(r + C2 * h, y0u + h * A21 * k1[0], y0m + h * A21 * k1[1], N, p, cp, cq, qm1, cl, lm1, k2)
        _rhs(
            r + C3 * h,
            y0u + h * (A31 * k1[0] + A32 * k2[0]),
            y0m + h * (A31 * k1[1] + A32 * k2[1]),
            N, p, cp, cq, qm1, cl, lm1, k3,
        )
        _rhs(
            r + C4 * h,
            y0u + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
            y0m + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
            N, p, cp, cq, qm1, cl, lm1, k4,
        )
        _rhs(
            r + C5 * h,
            y0u + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
            y0m + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
            N, p, cp, cq, qm1, cl, lm1, k5,
        )
        _rhs(
            r + h,
            y0u + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
            y0m + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
            N, p, cp, cq, qm1, cl, lm1, k6,
        )
        for i in range(2):
            yy = y0u if i == 0 else y0m
            y1[i] = yy + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
        _rhs(r + h, y1[0], y1[1], N, p, cp, cq, qm1, cl, lm1, k7)

        err = 0.0
        for i in range(2):
            ei = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            if i == 0:
                sc = atol_u + rtol * max(abs(y0u), abs(y1[0]))
            else:
                sc = atol_m_rel * max(mmax, abs(y1[1])) + rtol * max(abs(y0m), abs(y1[1]))
            if sc <= 0.0:
                sc = 1e-300
            err += (ei / sc) ** 2
        err = np.sqrt(0.5 * err)
        if not np.isfinite(err):
            h *= 0.2
            continue

        if err > 1.0:
            h *= max(0.2, 0.9 * err ** (-0.2))
            continue

        # accepted: continuous extension coefficients
        for i in range(2):
            yy = y0u if i == 0 else y0m
            d = y1[i] - yy
            rc[0, i] = yy
            rc[1, i] = d
            bspl = h * k1[i] - d
            rc[2, i] = bspl
            rc[3, i] = d - h * k7[i] - bspl
            rc[4, i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])

        # events, earliest first within the step
        ev = 0
        theta_ev = 2.0
        if y1[0] < 0.0 and y0u >= 0.0:
            t = _locate(0, rc, r, h, y0u, y1[0], N, p, kappa)
            if t < theta_ev:
                theta_ev = t
                ev = EV_OVERSHOOT
        if y1[1] > 0.0 and y0m <= 0.0:
            t = _locate(1, rc, r, h, y0m, y1[1], N, p, kappa)
            if t < theta_ev:
                theta_ev = t
                ev = EV_TURN
        if zero_mass:
            f0 = _farfield(r, y0u, y0m, N, p, kappa)
            f1 = _farfield(r + h, y1[0], y1[1], N, p, kappa)
            if f1 < 0.0 and f0 >= 0.0:
                t = _locate(2, rc, r, h, f0, f1, N, p, kappa)
                if t < theta_ev:
                    theta_ev = t
                    ev = EV_FARFIELD_NEG
            if ev == 0 and y1[0] > 0.0:
                ratio = f1 / y1[0]
                if ratio < ratio_min:
                    ratio_min = ratio
                if ratio_min < 0.5 and ratio > 1e-6 and ratio >= 2.0 * ratio_min and ratio_min > 0.0:
                    ev = EV_SLOW_DECAY
                    theta_ev = 1.0

        if n >= cap:
            cap *= 2
            grid2 = np.empty(cap)
            ys2 = np.empty((cap, 2))
            rcs2 = np.empty((cap, 5, 2))
            hs2 = np.empty(cap)
            grid2[:n] = grid[:n]
            ys2[:n] = ys[:n]
            rcs2[: n - 1] = rcs[: n - 1]
            hs2[: n - 1] = hs[: n - 1]
            grid, ys, rcs, hs = grid2, ys2, rcs2, hs2

        rcs[n - 1] = rc
        hs[n - 1] = h
        if ev != 0:
            theta_ev = min(max(theta_ev, 0.0), 1.0)
            grid[n] = r + theta_ev * h
            ys[n, 0] = dense_eval(rc, theta_ev, 0)
            ys[n, 1] = dense_eval(rc, theta_ev, 1)
            if ev == EV_OVERSHOOT:
                ys[n, 0] = 0.0
            elif ev == EV_TURN:
                ys[n, 1] = 0.0
            n += 1
            code = ev
            break

        grid[n] = r + h
        ys[n, 0] = y1[0]
        ys[n, 1] = y1[1]
        n += 1
        r = r + h
        y0u, y0m = y1[0], y1[1]
        k1[0], k1[1] = k7[0], k7[1]
        if abs(y0m) > mmax:
            mmax = abs(y0m)
        if r >= r_max * (1.0 - 1e-14):
            code = EV_HORIZON
            break

        fac = min(10.0, max(0.2, 0.9 * err ** (-0.2) if err > 0.0 else 10.0))
        h *= fac

    return grid[:n].copy(), ys[:n].copy(), rcs[: n - 1].copy(), hs[: n - 1].copy(), code


@njit(cache=True)
def evaluate(grid, hfull, rcont, r_query, comp):
    """Dense-output values of component ``comp`` at sorted or unsorted radii."""
    n = grid.shape[0]
    out = np.empty(r_query.shape[0])
    for j in range(r_query.shape[0]):
        rq = r_query[j]
        if rq <= grid[0]:
            i = 0
        elif rq >= grid[n - 1]:
            i = n - 2
        else:
            i = np.searchsorted(grid, rq, side="right") - 1
            if i > n - 2:
                i = n - 2
        theta = (rq - grid[i]) / hfull[i]
        out[j] = dense_eval(rcont[i], theta, comp)
    return out
