"""Emden-Fowler extremals, the Sobolev constant and cut-off test functions.

The radial extremals are

    U_lam(r) = [lam^{p'/p} kappa^{1/p'} N^{1/p} / (lam^{p'} + r^{p'})]^{kappa/p'},

with ``p' = p/(p-1)`` and ``kappa = (N-p)/(p-1)``.  ``W_lam(x) = U_lam(S_*^{1/p} x)``
is the normalized minimizer with ``||W_lam||_{p*} = 1``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .core_model import (
    Branch,
    EquationKind,
    ParameterError,
    ProblemParams,
    RegimeError,
    RegimeTag,
    classify_regime,
    p_star,
)
from .norms import IntegrabilityError, grad_norm_Lp, norm_Ls, sphere_area
from .shooting import RadialProfile, ShotClass, TailModel

__all__ = [
    "ExtremalParams",
    "TestFunctionParams",
    "ConstraintError",
    "U_eval",
    "extremal_residual",
    "dU_eval",
    "extremal_profile",
    "sobolev_constant",
    "W_eval",
    "minimizer_profile",
    "ball_integral",
    "q_star",
    "beta_constants",
    "cutoff",
    "test_quotient",
    "psi_value",
    "optimal_test_scales",
]


class ConstraintError(ValueError):
    """The test function has a non-positive potential integral."""


@dataclass(frozen=True)
class ExtremalParams:
    N: int
    p: float
    lam: float = 1.0

    def __post_init__(self):
        if not (1.0 < self.p < self.N):
            raise ParameterError(f"need 1 < p < N, got p={self.p}, N={self.N}")
        if not self.lam > 0:
            raise ParameterError(f"lambda must be positive, got {self.lam}")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def kappa(self) -> float:
        return (self.N - self.p) / (self.p - 1.0)

    @property
    def amplitude(self) -> float:
        pc, k, N, p, lam = self.p_conj, self.kappa, self.N, self.p, self.lam
        return (lam ** (pc / p) * k ** (1.0 / pc) * N ** (1.0 / p)) ** (k / pc)


@dataclass(frozen=True)
class TestFunctionParams:
    """Bubble scale ``mu`` and cut-off radius ``R`` (``inf`` for no cut-off)."""

    __test__ = False  # keep pytest from collecting it

    mu: float
    R: float = math.inf

    def __post_init__(self):
        if not self.mu > 0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if not self.R >= 10.0 * self.mu:
            raise ParameterError(f"cut-off radius must satisfy R >= 10 mu, got R={self.R}, mu={self.mu}")


def U_eval(ep: ExtremalParams, r):
    """``U_lam(r)``; accepts scalars or arrays with ``r >= 0``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    pc, k = ep.p_conj, ep.kappa
    out = ep.amplitude * (ep.lam**pc + r**pc) ** (-k / pc)
    return float(out) if out.ndim == 0 else out


def dU_eval(ep: ExtremalParams, r):
    r = np.asarray(r, dtype=float)
    pc, k = ep.p_conj, ep.kappa
    out = -k * ep.amplitude * r ** (pc - 1.0) * (ep.lam**pc + r**pc) ** (-k / pc - 1.0)
    return float(out) if out.ndim == 0 else out


def extremal_residual(N: int, p: float, r, rel_step: float = 2.5e-3, lam: float = 1.0) -> np.ndarray:
    """Relative residual of ``-Delta_p U = U^{p*-1}`` for the closed-form
    extremal, by nested 4th-order central differences in extended precision.

    In the power-law tail ``U`` is close to the fundamental solution, so the
    radial p-Laplacian is a small difference of much larger terms; evaluating
    the formula and the stencils in ``np.longdouble`` keeps rounding well
    below the truncation error.  The step at radius ``r`` is
    ``rel_step * sqrt(r * max(r, lam))``, shortened by ``2 / kappa`` when
    the decay exponent ``kappa = (N-p)/(p-1)`` exceeds 2, since the tail
    varies on the scale ``r / kappa``.
    """
    ld = np.longdouble
    ExtremalParams(N, p, lam)  # validates
    Nl, pl, laml = ld(N), ld(p), ld(lam)
    pc = pl / (pl - 1)
    k = (Nl - pl) / (pl - 1)
    ps = pl * Nl / (Nl - pl)
    amp = (laml ** (pc / pl) * k ** (1 / pc) * Nl ** (1 / pl)) ** (k / pc)
    r = np.atleast_1d(np.asarray(r, dtype=ld))
    h = ld(rel_step) * min(ld(1), 2 / k) * np.sqrt(r * np.maximum(r, laml))

    def U(x):
        return amp * (laml**pc + x**pc) ** (-k / pc)

    def central(f, x):
        return (f(x - h) - 8 * f(x - h / 2) + 8 * f(x + h / 2) - f(x + h)) / (6 * h)

    def flux(x):
        du = central(U, x)
        return x ** (Nl - 1) * np.abs(du) ** (pl - 2) * du

    lap = central(flux, r) / r ** (Nl - 1)
    g = U(r) ** (ps - 1)
    return np.asarray(np.abs(lap + g) / np.maximum(np.abs(lap), g), dtype=float)


class ClosedFormRep:
    """Exact ``u`` and flux of ``d * U_lam(r / c)``."""

    def __init__(self, ep: ExtremalParams, c: float = 1.0, d: float = 1.0):
        self.ep = ep
        self.c = c
        self.d = d

    def u(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return self.d * U_eval(self.ep, r / self.c)

    def m(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        N, p = self.ep.N, self.ep.p
        du = (self.d / self.c) * dU_eval(self.ep, r / self.c)
        return -(r ** (N - 1)) * np.abs(du) ** (p - 1.0)

    def rescaled(self, c: float, d: float) -> "ClosedFormRep":
        return ClosedFormRep(self.ep, self.c * c, self.d * d)


def extremal_profile(
    N: int,
    p: float,
    lam: float = 1.0,
    *,
    r_min: float = 1e-6,
    r_max: float = 1e6,
    panels_per_decade: int = 40,
) -> RadialProfile:
    """:class:`RadialProfile` of ``U_lam`` on log-spaced panels, tagged as an
    Emden-Fowler groundstate with its exact power tail."""
    ep = ExtremalParams(N, p, lam)
    r_min *= lam
    r_max *= lam
    n = int(math.ceil(panels_per_decade * math.log10(r_max / r_min))) + 1
    grid = np.geomspace(r_min, r_max, n)
    rep = ClosedFormRep(ep)
    ps = p_star(N, p)
    # any l > q serves; the Emden-Fowler kind ignores it
    params = ProblemParams(N, p, ps, ps + 1.0)
    tail = TailModel("polynomial", ep.kappa, ep.amplitude, r_max, 1.0)
    return RadialProfile(
        params=params,
        kind=EquationKind.EMDEN_FOWLER,
        a=U_eval(ep, 0.0),
        grid=grid,
        values=rep.u(grid),
        flux=rep.m(grid),
        classification=ShotClass.GROUNDSTATE,
        tail=tail,
        rep=rep,
        info={"lambda": lam},
    )


@functools.lru_cache(maxsize=None)
def _sobolev_constant(N: int, p: float, lam: float) -> float:
    return grad_norm_Lp(extremal_profile(N, p, lam)) ** (p / N)


def sobolev_constant(N: int, p: float, lam: float = 1.0) -> float:
    """``S_* = (||grad U_lam||_p^p)^{p/N}`` by quadrature of the closed form."""
    if not (1.0 < p < N):
        raise ParameterError(f"need 1 < p < N, got p={p}, N={N}")
    return _sobolev_constant(int(N), float(p), float(lam))


def minimizer_profile(N: int, p: float, lam: float = 1.0) -> RadialProfile:
    """``W_lam(x) = U_lam(S_*^{1/p} x)`` as a profile."""
    S = sobolev_constant(N, p)
    return extremal_profile(N, p, lam).rescaled(S ** (-1.0 / p), 1.0)


def W_eval(lam: float, r, N: int, p: float):
    S = sobolev_constant(N, p)
    return U_eval(ExtremalParams(N, p, lam), np.asarray(r, dtype=float) * S ** (1.0 / p))


_XG, _WG = np.polynomial.legendre.leggauss(8)


def _radial_integral(fun, edges):
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    r = (mid[:, None] + half[:, None] * _XG[None, :]).ravel()
    vals = fun(r).reshape(-1, 8)
    return float(np.sum(half * (vals @ _WG)))


def ball_integral(N: int, p: float, radius: float, lam: float = 1.0) -> float:
    """``int_{B_radius} W_lam^{p*} dx``; ``radius = inf`` gives the full mass."""
    ps = p_star(N, p)
    if math.isinf(radius):
        return norm_Ls(minimizer_profile(N, p, lam), ps)
    S = sobolev_constant(N, p)
    edges = np.concatenate([[0.0], np.geomspace(1e-8 * radius, radius, 400)])
    f = lambda r: r ** (N - 1) * W_eval(lam, r, N, p) ** ps
    return sphere_area(N) * _radial_integral(f, edges)


@functools.lru_cache(maxsize=None)
def q_star(N: int, p: float) -> float:
    """Concentration threshold ``Q_* = int_{B_1} W_1^{p*} dx``."""
    return ball_integral(N, p, 1.0)


def beta_constants(N: int, p: float, l: float) -> tuple[float, float]:
    """``beta_p = (p*/p)||W_1||_p^p`` and ``beta_l = (p*/l)||W_1||_l^l``.

    Raises
    ------
    IntegrabilityError
        For ``p >= sqrt(N)``, where ``W_1`` is not in ``L^p``.
    """
    ps = p_star(N, p)
    w = minimizer_profile(N, p)
    return ps / p * norm_Ls(w, p), ps / l * norm_Ls(w, l)


def cutoff(r, R: float):
    """C^1 cubic step: 1 on ``[0, R]``, 0 beyond ``2R``; returns ``(eta, eta')``."""
    r = np.asarray(r, dtype=float)
    if math.isinf(R):
        return np.ones_like(r), np.zeros_like(r)
    t = np.clip((r - R) / R, 0.0, 1.0)
    eta = 1.0 - 3.0 * t**2 + 2.0 * t**3
    deta = (-6.0 * t + 6.0 * t**2) / R
    return eta, deta


def test_quotient(params: ProblemParams, tf: TestFunctionParams) -> float:
    """Rayleigh quotient ``||grad phi||_p^p / (p* int F_eps(phi))^{(N-p)/N}``
    of ``phi = eta_R W_mu`` for the full critical problem.

    Raises
    ------
    RegimeError
        Outside the critical regime.
    ConstraintError
        ``int F_eps(phi) <= 0``.
    IntegrabilityError
        No cut-off and ``W`` not in ``L^p`` (``p >= sqrt(N)``).
    """
    reg = classify_regime(params)
    if reg.tag is not RegimeTag.CRITICAL:
        raise RegimeError(f"test quotient needs q = p*, got {reg}")
    N, p, l, eps = params.N, params.p, params.l, params.eps
    ps = params.pstar
    S = sobolev_constant(N, p)
    ep = ExtremalParams(N, p, tf.mu)
    c = S ** (1.0 / p)
    kappa = ep.kappa
    mu, R = tf.mu, tf.R

    def phi(r):
        eta, deta = cutoff(r, R)
        w = U_eval(ep, c * r)
        dw = c * dU_eval(ep, c * r)
        return eta * w, deta * w + eta * dw

    r_lo = 1e-6 * mu
    if math.isinf(R):
        r_hi = 1e6 * mu
        edges = np.concatenate([[0.0], np.geomspace(r_lo, r_hi, 600)])
    else:
        edges = np.concatenate([[0.0], np.geomspace(r_lo, R, 400), np.linspace(R, 2.0 * R, 65)[1:]])

    def integrals(r):
        v, dv = phi(r)
        w = r ** (N - 1)
        return np.stack([w * np.abs(dv) ** p, w * v**p, w * v**ps, w * v**l])

    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    rr = (mid[:, None] + half[:, None] * _XG[None, :]).ravel()
    vals = integrals(rr).reshape(4, -1, 8)
    I = np.sum(half[None, :] * (vals @ _WG), axis=1)
    if math.isinf(R):
        # power tails of W_mu beyond r_hi: W ~ A (c r)^{-kappa}
        A = ep.amplitude * c ** (-kappa)
        tails = []
        for s, e in ((p, (kappa + 1.0) * p), (p, kappa * p), (ps, kappa * ps), (l, kappa * l)):
            if e <= N:
                raise IntegrabilityError("W_mu is not in L^p for p >= sqrt(N); use a finite cut-off")
            tails.append(r_hi ** (N - e) / (e - N))
        tails = np.array(tails)
        tails[0] *= (kappa * A) ** p
        tails[1] *= A**p
        tails[2] *= A**ps
        tails[3] *= A**l
        I = I + tails
    omega = sphere_area(N)
    grad, np_, nps, nl = omega * I
    F = -eps * np_ / p + nps / ps - nl / l
    if not F > 0:
        raise ConstraintError(f"int F_eps(phi) = {F:.6g} <= 0; test function outside the constraint set")
    return grad / (ps * F) ** ((N - p) / N)


def psi_value(params: ProblemParams, mu: float, R: float = math.inf) -> float:
    """Scale function whose minimum predicts the rate of ``S_eps - S_*``."""
    reg = classify_regime(params)
    if reg.tag is not RegimeTag.CRITICAL:
        raise RegimeError(f"scale function needs q = p*, got {reg}")
    N, p, l, eps = params.N, params.p, params.l, params.eps
    ps = params.pstar
    e_l = (N - p) * (l - ps) / p
    if reg.branch is Branch.BELOW_SQRT_N:
        bp, bl = beta_constants(N, p, l)
        return bp * eps * mu**p + bl * mu ** (-e_l)
    cut = (R / mu) ** (-(N - p) / (p - 1.0))
    if reg.branch is Branch.EQUAL_SQRT_N:
        return cut + eps * mu**p * math.log(R) + mu ** (-e_l)
    return cut + eps * mu ** ((N - p) / (p - 1.0)) * R ** ((p * p - N) / (p - 1.0)) + mu ** (-e_l)


def optimal_test_scales(params: ProblemParams) -> tuple[float, float, float]:
    """Branch-dependent bubble scale ``mu_eps``, cut-off radius ``R_eps``
    (``inf`` when no cut-off is needed) and ``psi`` at those scales."""
    reg = classify_regime(params)
    if reg.tag is not RegimeTag.CRITICAL:
        raise RegimeError(f"optimal scales need q = p*, got {reg}")
    N, p, l, eps = params.N, params.p, params.l, params.eps
    ps = params.pstar
    if not eps > 0:
        raise ParameterError("optimal scales need eps > 0")
    if reg.branch is Branch.BELOW_SQRT_N:
        mu = eps ** (-p / ((N - p) * (l - p)))
        R = math.inf
    elif reg.branch is Branch.EQUAL_SQRT_N:
        if not eps < 1:
            raise ParameterError("log branch needs eps < 1")
        mu = (eps * math.log(1.0 / eps)) ** (-p / ((N - p) * (l - p)))
        R = eps ** (-1.0 / p)
    else:
        mu = eps ** (-1.0 / ((l - ps) * (p - 1.0) + p))
        R = eps ** (-1.0 / p)
    return mu, R, psi_value(params, mu, R)
