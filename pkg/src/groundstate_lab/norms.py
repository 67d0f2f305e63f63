"""Norms of radial profiles and residuals of the integral identities.

All norms are over the whole space: ``||u||_s^s = omega_{N-1} int r^{N-1} u^s dr``
with ``omega_{N-1}`` the area of the unit sphere.  The radial integral is a
sum of 8-point Gauss-Legendre rules on the profile's own panels (the
integrator steps), a closed-form piece on ``[0, grid[0]]`` and a closed-form
tail beyond the last node from the profile's :class:`TailModel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, gammaincc

from .core_model import (
    EquationKind,
    ProblemParams,
    RegimeError,
    RegimeTag,
    classify_regime,
    k_factor,
    nonlinearity_coefficients,
)
from .shooting import RadialProfile

__all__ = [
    "IntegrabilityError",
    "NormReport",
    "IdentityReport",
    "sphere_area",
    "norm_Ls",
    "grad_norm_Lp",
    "norm_report",
    "F_integral",
    "fu_integral",
    "pohozaev_residual",
    "nehari_residual",
    "S_from_profile",
    "identity_report",
    "to_minimizer",
    "critical_relation_residuals",
    "supercritical_targets",
    "subcritical_limits",
    "relative_residual",
]


class IntegrabilityError(ValueError):
    """The requested integral diverges at infinity."""


_X8, _W8 = np.polynomial.legendre.leggauss(8)
_X5, _W5 = np.polynomial.legendre.leggauss(5)


def sphere_area(N: int) -> float:
    """Area of the unit sphere in ``R^N``, ``2 pi^{N/2} / Gamma(N/2)``."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def relative_residual(lhs: float, rhs: float) -> float:
    den = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) / den if den > 0 else 0.0


@dataclass
class NormReport:
    """``norms[s] = ||u||_s^s``; ``grad_p = ||grad u||_p^p``."""

    norms: dict
    grad_p: float
    tail_corrected: dict
    quadrature_error_estimate: float


@dataclass
class IdentityReport:
    pohozaev_residual: float
    nehari_residual: float
    S_value: float
    energy: float
    extra_residuals: dict = field(default_factory=dict)


def _panels(profile: RadialProfile):
    g = np.asarray(profile.grid, dtype=float)
    if profile.rep is None or g.size < 2:
        raise ValueError("profile has no resolved radial data")
    return g[:-1], g[1:]


def _gl(profile, integrand, lo, hi):
    """Panel sums with the 8- and 5-point rules."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    r8 = (mid[:, None] + half[:, None] * _X8[None, :]).ravel()
    r5 = (mid[:, None] + half[:, None] * _X5[None, :]).ravel()
    v8 = integrand(r8).reshape(-1, 8)
    v5 = integrand(r5).reshape(-1, 5)
    s8 = float(np.sum(half * (v8 @ _W8)))
    s5 = float(np.sum(half * (v5 @ _W5)))
    return s8, abs(s8 - s5)


def _poly_exponent(profile: RadialProfile) -> float:
    # integrability is decided with the exact fast-decay exponent when known
    kind = EquationKind(profile.kind)
    if not kind.positive_mass:
        return profile.params.kappa
    return profile.tail.rate


def _tail_Ls(profile: RadialProfile, s: float) -> float:
    t = profile.tail
    N = profile.params.N
    R = float(profile.grid[-1])
    if t.kind == "exponential":
        x = s * t.rate
        return t.amplitude**s * gammaincc(N, x * R) * gamma(N) / x**N
    if t.kind == "polynomial":
        gam = _poly_exponent(profile)
        if gam * s <= N:
            raise IntegrabilityError(f"u^s with s={s} is not integrable: decay exponent {gam:.6g}, s*gamma <= N={N}")
        g_fit = t.rate
        if g_fit * s <= N:
            g_fit = gam
        return t.amplitude**s * R ** (N - g_fit * s) / (g_fit * s - N)
    return 0.0


def _tail_grad(profile: RadialProfile) -> float:
    t = profile.tail
    N, p = profile.params.N, profile.params.p
    R = float(profile.grid[-1])
    if t.kind == "exponential":
        x = p * t.rate
        return (t.rate * t.amplitude) ** p * gammaincc(N, x * R) * gamma(N) / x**N
    if t.kind == "polynomial":
        gam = _poly_exponent(profile)
        if (gam + 1.0) * p <= N:
            raise IntegrabilityError("gradient is not p-integrable for this decay exponent")
        e = (t.rate + 1.0) * p
        if e <= N:
            e = (gam + 1.0) * p
        return (t.rate * t.amplitude) ** p * R ** (N - e) / (e - N)
    return 0.0


def _Ls_parts(profile: RadialProfile, s: float):
    if not s >= 1.0:
        raise ValueError(f"need s >= 1, got {s}")
    N = profile.params.N
    lo, hi = _panels(profile)

    def integrand(r):
        u = np.abs(profile.u_at(r))
        return r ** (N - 1) * u**s

    body, err = _gl(profile, integrand, lo, hi)
    r0 = float(profile.grid[0])
    origin = abs(profile.a) ** s * r0**N / N
    tail = _tail_Ls(profile, s)
    return body, origin, tail, err


def norm_Ls(profile: RadialProfile, s: float) -> float:
    """``||u||_s^s`` including the origin piece and the closed-form tail.

    Raises
    ------
    IntegrabilityError
        Polynomial tail with ``s * gamma <= N``.
    """
    body, origin, tail, _ = _Ls_parts(profile, s)
    return sphere_area(profile.params.N) * (body + origin + tail)


def _grad_parts(profile: RadialProfile):
    N, p = profile.params.N, profile.params.p
    lo, hi = _panels(profile)

    def integrand(r):
        m = np.abs(profile.m_at(r))
        # |u'|^p r^{N-1} = |m|^{p/(p-1)} r^{(N-1)(1 - p/(p-1))}
        return m ** (p / (p - 1.0)) * r ** ((N - 1.0) * (1.0 - p / (p - 1.0)))

    body, err = _gl(profile, integrand, lo, hi)
    r0 = float(profile.grid[0])
    # near the origin |u'| = (g(a) r / N)^{1/(p-1)}
    m0 = abs(float(profile.m_at(r0)[0]))
    ga_over_N = m0 / r0**N if r0 > 0 else 0.0
    pc = p / (p - 1.0)
    origin = ga_over_N**pc * r0 ** (N + pc) / (N + pc)
    tail = _tail_grad(profile)
    return body, origin, tail, err


def grad_norm_Lp(profile: RadialProfile) -> float:
    """``||grad u||_p^p`` from the flux, with origin and tail pieces."""
    body, origin, tail, _ = _grad_parts(profile)
    return sphere_area(profile.params.N) * (body + origin + tail)


def _exponent_set(profile: RadialProfile, extras=()):
    P = profile.params
    q_eff = nonlinearity_coefficients(P, profile.kind)[3] if _coeffs_ok(profile) else P.q
    out = [P.p, q_eff, P.l, P.pstar, *extras]
    seen = []
    for s in out:
        if not any(abs(s - t) <= 1e-14 * t for t in seen):
            seen.append(s)
    return seen


def _coeffs_ok(profile):
    try:
        nonlinearity_coefficients(profile.params, profile.kind)
        return True
    except ValueError:
        return False


def norm_report(profile: RadialProfile, extras=(), *, skip_divergent: bool = True) -> NormReport:
    """Norms for ``s`` in ``{p, q, l, p*}`` plus ``extras``.

    Divergent entries are stored as ``inf`` when ``skip_divergent`` is set.
    """
    omega = sphere_area(profile.params.N)
    norms, flags = {}, {}
    err_total = 0.0
    for s in _exponent_set(profile, extras):
        try:
            body, origin, tail, err = _Ls_parts(profile, s)
        except IntegrabilityError:
            if not skip_divergent:
                raise
            norms[s] = math.inf
            flags[s] = False
            continue
        tot = body + origin + tail
        norms[s] = omega * tot
        flags[s] = tail > 1e-12 * tot
        err_total = max(err_total, err / tot if tot > 0 else 0.0)
    body, origin, tail, err = _grad_parts(profile)
    grad = omega * (body + origin + tail)
    flags["grad"] = tail > 1e-12 * (body + origin + tail)
    err_total = max(err_total, err / (body + origin + tail) if grad > 0 else 0.0)
    return NormReport(norms, grad, flags, err_total)


def _lookup(norms: dict, s: float) -> float:
    for k, v in norms.items():
        if abs(k - s) <= 1e-14 * s:
            return v
    raise KeyError(s)


def _pieces(profile: RadialProfile, report: NormReport | None):
    P = profile.params
    cp, cq, cl, q = nonlinearity_coefficients(P, profile.kind)
    rep = report if report is not None else norm_report(profile, skip_divergent=True)
    need = {P.p: cp, q: cq, P.l: cl}
    vals = {}
    for s, c in need.items():
        if c == 0.0:
            vals[s] = 0.0
        else:
            v = _lookup(rep.norms, s)
            if not math.isfinite(v):
                raise IntegrabilityError(f"||u||_{s:g} diverges but enters the identity")
            vals[s] = v
    return cp, cq, cl, q, vals, rep


def F_integral(profile: RadialProfile, report: NormReport | None = None) -> float:
    """``int F(u) dx`` assembled from the norms."""
    P = profile.params
    cp, cq, cl, q, v, _ = _pieces(profile, report)
    return -cp * v[P.p] / P.p + cq * v[q] / q - cl * v[P.l] / P.l


def fu_integral(profile: RadialProfile, report: NormReport | None = None) -> float:
    """``int f(u) u dx`` assembled from the norms."""
    P = profile.params
    cp, cq, cl, q, v, _ = _pieces(profile, report)
    return -cp * v[P.p] + cq * v[q] - cl * v[P.l]


def pohozaev_residual(profile: RadialProfile, report: NormReport | None = None) -> float:
    """Relative residual of ``||grad u||_p^p = p* int F(u)``."""
    rep = report if report is not None else norm_report(profile)
    return relative_residual(rep.grad_p, profile.params.pstar * F_integral(profile, rep))


def nehari_residual(profile: RadialProfile, report: NormReport | None = None) -> float:
    """Relative residual of ``||grad u||_p^p = int f(u) u``."""
    rep = report if report is not None else norm_report(profile)
    return relative_residual(rep.grad_p, fu_integral(profile, rep))


def S_from_profile(profile: RadialProfile, report: NormReport | None = None) -> tuple[float, float]:
    """Minimization level ``S = (||grad u||_p^p)^{p/N}`` and the energy
    ``(1/p - 1/p*) S^{N/p}`` of a groundstate."""
    P = profile.params
    grad = report.grad_p if report is not None else grad_norm_Lp(profile)
    S = grad ** (P.p / P.N)
    energy = (1.0 / P.p - 1.0 / P.pstar) * S ** (P.N / P.p)
    return S, energy


def identity_report(profile: RadialProfile, report: NormReport | None = None) -> IdentityReport:
    rep = report if report is not None else norm_report(profile)
    S, energy = S_from_profile(profile, rep)
    return IdentityReport(pohozaev_residual(profile, rep), nehari_residual(profile, rep), S, energy)


def to_minimizer(profile: RadialProfile, S: float | None = None) -> RadialProfile:
    """Constrained minimizer ``w(x) = u(S^{1/p} x)``."""
    if S is None:
        S = S_from_profile(profile)[0]
    return profile.rescaled(S ** (-1.0 / profile.params.p), 1.0)


def critical_relation_residuals(w: RadialProfile, params: ProblemParams) -> dict:
    """Residuals of the two norm relations of the critical minimizer.

    ``||w||_l^l = k eps ||w||_p^p`` and ``||w||_{p*}^{p*} = 1 + (k+1) eps ||w||_p^p``
    with ``k = l(p*-p)/(p(l-p*))``.  Also returns ``eps ||w||_p^p``, the
    ratio ``||w||_l^l / (eps ||w||_p^p)`` and ``||w||_{p*}^{p*}``.
    """
    reg = classify_regime(params)
    if reg.tag is not RegimeTag.CRITICAL:
        raise RegimeError(f"critical relations need q = p*, got {reg}")
    k = k_factor(params)
    eps = params.eps
    np_ = norm_Ls(w, params.p)
    nl = norm_Ls(w, params.l)
    nps = norm_Ls(w, params.pstar)
    return {
        "k_relation": relative_residual(nl, k * eps * np_),
        "pstar_relation": relative_residual(nps, 1.0 + (k + 1.0) * eps * np_),
        "eps_norm_p": eps * np_,
        "k_ratio": nl / (eps * np_),
        "norm_pstar": nps,
        "k": k,
    }


def supercritical_targets(params: ProblemParams) -> tuple[float, float]:
    """Limits of ``||w_0||_q^q`` and ``||w_0||_l^l`` for ``q > p*``."""
    reg = classify_regime(params)
    if reg.tag is not RegimeTag.SUPERCRITICAL:
        raise RegimeError(f"supercritical targets need q > p*, got {reg}")
    ps, q, l = params.pstar, params.q, params.l
    return q * (l - ps) / (ps * (l - q)), l * (q - ps) / (ps * (l - q))


def subcritical_limits(params: ProblemParams) -> tuple[float, float]:
    """Limits of ``||w_eps||_p^p`` and ``||w_eps||_q^q`` for ``q < p*``."""
    reg = classify_regime(params)
    if reg.tag is not RegimeTag.SUBCRITICAL:
        raise RegimeError(f"subcritical limits need q < p*, got {reg}")
    ps, p, q = params.pstar, params.p, params.q
    return p * (ps - q) / (ps * (q - p)), q * (ps - p) / (ps * (q - p))
