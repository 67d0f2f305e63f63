"""Rescalings, concentration scale, eps-sweeps and power-law fits.

A sweep solves the full problem on a decreasing grid of ``eps`` and records
the central value, the minimization level ``S``, its excess ``sigma`` over
the limit level, the concentration scale ``lambda`` (critical case) and the
norms of the rescaled profiles.  Fits regress ``log value`` on ``log eps``
with an optional fixed ``log log(1/eps)`` correction.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .closed_form import q_star, sobolev_constant
from .core_model import (
    Branch,
    EquationKind,
    ParameterError,
    ProblemParams,
    RegimeError,
    RegimeTag,
    classify_regime,
    f_eval,
)
from .norms import (
    IdentityReport,
    NormReport,
    identity_report,
    norm_report,
    sphere_area,
    to_minimizer,
    norm_Ls,
    grad_norm_Lp,
)
from .shooting import IntegratorConfig, RadialProfile, find_groundstate

__all__ = [
    "SweepError",
    "NoSolutionError",
    "DegenerateFitError",
    "SweepRecord",
    "SweepTable",
    "FitResult",
    "BarrierReport",
    "canonical_rescale",
    "radial_residual",
    "concentration_lambda",
    "default_eps_grid",
    "solve_record",
    "run_sweep",
    "fit_power_law",
    "barrier_check",
    "blow_up_norm_check",
    "pointwise_bound_checks",
    "decay_exponent_check",
    "sandwich_constants",
    "TABLE_COLUMNS",
    "EXTRA_COLUMNS",
]


class SweepError(RuntimeError):
    """More than half of the sweep records failed."""


class NoSolutionError(ValueError):
    """The concentration equation has no solution."""


class DegenerateFitError(ValueError):
    """Too few usable records or too short an eps range for a fit."""


TABLE_COLUMNS = (
    "eps",
    "a",
    "S",
    "sigma",
    "lambda",
    "norm_p",
    "norm_q",
    "norm_l",
    "norm_pstar",
    "grad_p",
    "poho_res",
    "nehari_res",
    "status",
)
EXTRA_COLUMNS = (
    "rescaled_a",
    "eps_norm_p",
    "w_norm_p",
    "w_norm_q",
    "w_norm_l",
    "w_norm_pstar",
    "eps_w_norm_p",
    "k_ratio",
    "v0",
    "v_norm_p",
    "v_norm_l",
)


# ---------------------------------------------------------------- rescalings


def canonical_rescale(profile: RadialProfile, eps: float) -> RadialProfile:
    """``v(x) = eps^{-1/(q-p)} u(x / eps^{1/p})`` as a canonical-kind profile."""
    if not eps > 0:
        raise ParameterError("eps must be positive")
    P = profile.params
    c = eps ** (1.0 / P.p)
    d = eps ** (-1.0 / (P.q - P.p))
    return profile.rescaled(c, d, kind=EquationKind.CANONICAL, params=P.with_eps(eps))


def _central(f, x, h, order):
    if order == 2:
        return (f(x + 0.5 * h) - f(x - 0.5 * h)) / h
    return (f(x - h) - 8.0 * f(x - 0.5 * h) + 8.0 * f(x + 0.5 * h) - f(x + h)) / (6.0 * h)


def radial_residual(profile: RadialProfile, r, rel_step: float = 1e-3, order: int = 4) -> np.ndarray:
    """Relative residual of ``-Delta_p u = g(u)`` from nested central
    differences of ``u`` at the radii ``r``.

    The flux ``r^{N-1} |u'|^{p-2} u'`` is formed from differenced values and
    differenced again, so no derivative information of the representation is
    used.  ``order`` selects the 2nd- or 4th-order stencil; the higher order
    matters in power-law tails, where the operator is a small difference of
    large terms.

    The step is ``rel_step * sqrt(r * max(r, L))`` with ``L`` the radius at
    which ``u`` falls to half its central value.  Near the origin a step
    proportional to ``r`` alone would be swamped by rounding, while for
    ``p != 2`` the profile is only ``C^1`` there, so the geometric mean of the
    two scales is used.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    P = profile.params
    N, p = P.N, P.p
    r = np.atleast_1d(np.asarray(r, dtype=float))
    grid = np.asarray(profile.grid, dtype=float)
    below = np.nonzero(np.asarray(profile.values) <= 0.5 * profile.a)[0]
    L = float(grid[below[0]]) if below.size else float(grid[-1])
    h = rel_step * np.sqrt(r * np.maximum(r, L))
    u = profile.u_at

    def flux(x):
        du = _central(u, x, h, order)
        return x ** (N - 1) * np.abs(du) ** (p - 2.0) * du

    lap = _central(flux, r, h, order) / r ** (N - 1)
    g = np.array([f_eval(P, profile.kind, max(float(x), 0.0)) for x in u(r)])
    return np.abs(-lap - g) / np.maximum(np.abs(lap), np.abs(g))


def concentration_lambda(w: RadialProfile, q_star_value: float) -> tuple[float, RadialProfile]:
    """Solve ``int_{B_lambda} w^{p*} = Q_*`` and return ``lambda`` with the
    rescaled profile ``v(x) = lambda^{(N-p)/p} w(lambda x)``.

    Raises
    ------
    NoSolutionError
        Total ``p*``-mass of ``w`` at most ``Q_*``.
    """
    P = w.params
    N, p, ps = P.N, P.p, P.pstar
    omega = sphere_area(N)
    grid = np.asarray(w.grid, dtype=float)
    x, wts = np.polynomial.legendre.leggauss(8)
    lo, hi = grid[:-1], grid[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    rr = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = (rr ** (N - 1) * np.abs(w.u_at(rr)) ** ps).reshape(-1, 8)
    cum = np.concatenate([[0.0], np.cumsum(half * (vals @ wts))])
    cum += abs(w.a) ** ps * grid[0] ** N / N
    cum *= omega
    if not cum[-1] > q_star_value:
        total = norm_Ls(w, ps)
        if not total > q_star_value:
            raise NoSolutionError(f"total p*-mass {total:.6g} <= Q_* = {q_star_value:.6g}")
        raise NoSolutionError("Q_* is reached only in the tail beyond the resolved grid")
    k = int(np.searchsorted(cum, q_star_value))
    i = k - 1

    def Q(lam):
        a, b = grid[i], lam
        hh = 0.5 * (b - a)
        mm = 0.5 * (b + a)
        rq = mm + hh * x
        part = hh * float(np.sum(wts * rq ** (N - 1) * np.abs(w.u_at(rq)) ** ps))
        return cum[i] + omega * part - q_star_value

    lam = brentq(Q, grid[i], grid[i + 1], xtol=1e-15 * grid[i + 1], rtol=1e-15)
    v = w.rescaled(1.0 / lam, lam ** ((N - p) / p))
    v.info["lambda"] = lam
    return lam, v


# ---------------------------------------------------------------- sweeps


@dataclass
class SweepRecord:
    eps: float
    a: float = math.nan
    S: float = math.nan
    sigma: float = math.nan
    lambda_: float = math.nan
    norms: NormReport | None = None
    identities: IdentityReport | None = None
    status: str = "ok"
    extras: dict = field(default_factory=dict)
    profile: RadialProfile | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def row(self, pstar: float, q: float, p: float, l: float) -> dict:
        nr = self.norms.norms if self.norms is not None else {}

        def pick(s):
            for k, v in nr.items():
                if abs(k - s) <= 1e-14 * s:
                    return v
            return math.nan

        d = {
            "eps": self.eps,
            "a": self.a,
            "S": self.S,
            "sigma": self.sigma,
            "lambda": self.lambda_,
            "norm_p": pick(p),
            "norm_q": pick(q),
            "norm_l": pick(l),
            "norm_pstar": pick(pstar),
            "grad_p": self.norms.grad_p if self.norms is not None else math.nan,
            "poho_res": self.identities.pohozaev_residual if self.identities else math.nan,
            "nehari_res": self.identities.nehari_residual if self.identities else math.nan,
            "status": self.status,
        }
        for c in EXTRA_COLUMNS:
            d[c] = self.extras.get(c, math.nan)
        return d


@dataclass
class SweepTable:
    params: ProblemParams
    kind: EquationKind
    records: list
    reference_S: float = math.nan

    def rows(self) -> list[dict]:
        P = self.params
        return [r.row(P.pstar, P.q, P.p, P.l) for r in self.records]

    def column(self, name: str, only_ok: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """``(eps, values)`` of a column, ascending in ``eps``."""
        rows = [r for r in self.rows() if (r["status"] == "ok" or not only_ok)]
        if rows and name not in rows[0]:
            raise KeyError(f"unknown column {name!r}")
        eps = np.array([r["eps"] for r in rows], dtype=float)
        val = np.array([r[name] for r in rows], dtype=float)
        order = np.argsort(eps)
        return eps[order], val[order]

    @property
    def n_failed(self) -> int:
        return sum(not r.ok for r in self.records)


def default_eps_grid(params: ProblemParams, points_per_decade: int = 8, lo=None, hi=None) -> np.ndarray:
    """Decreasing log-spaced grid with regime-dependent defaults.

    Critical sweeps with ``p < sqrt(N)`` use ``[1e-9, 1e-5]``: the leading
    rates only dominate once the blow-up scale is large.  The ``p = sqrt(N)``
    branch uses ``[1e-10, 1e-5]``, other critical branches ``[1e-6, 1e-2]``.
    Supercritical sweeps use ``[1e-11, 1e-3]`` because ``eps*|u|_p^p`` decays
    like ``sqrt(eps)``; subcritical sweeps use ``[1e-5, 1e-1]``.
    """
    reg = classify_regime(params)
    if reg.tag is RegimeTag.CRITICAL:
        d_lo, d_hi = {
            Branch.BELOW_SQRT_N: (1e-9, 1e-5),
            Branch.EQUAL_SQRT_N: (1e-10, 1e-5),
        }.get(reg.branch, (1e-6, 1e-2))
    elif reg.tag is RegimeTag.SUPERCRITICAL:
        d_lo, d_hi = 1e-11, 1e-3
    else:
        d_lo, d_hi = 1e-5, 1e-1
    lo = d_lo if lo is None else lo
    hi = d_hi if hi is None else hi
    if not (0 < lo < hi):
        raise ParameterError(f"need 0 < lo < hi, got {lo}, {hi}")
    n = int(round(points_per_decade * math.log10(hi / lo))) + 1
    return np.geomspace(hi, lo, n)


def _reference_level(params: ProblemParams, config: IntegratorConfig | None) -> float:
    reg = classify_regime(params)
    if reg.tag is RegimeTag.CRITICAL:
        return sobolev_constant(params.N, params.p)
    if reg.tag is RegimeTag.SUPERCRITICAL:
        u0 = find_groundstate(params.with_eps(0.0), EquationKind.ZERO_MASS, config)
        return identity_report(u0).S_value
    return math.nan


def solve_record(
    params: ProblemParams,
    eps: float,
    config: IntegratorConfig | None = None,
    reference_S: float = math.nan,
    keep_profile: bool = False,
) -> SweepRecord:
    """Solve one sweep entry; failures are reported in ``status``."""
    rec = SweepRecord(eps=float(eps))
    try:
        P = params.with_eps(eps)
        reg = classify_regime(P)
        prof = find_groundstate(P, EquationKind.FULL, config)
        nr = norm_report(prof)
        ir = identity_report(prof, nr)
        rec.a = prof.a
        rec.norms = nr
        rec.identities = ir
        rec.S = ir.S_value
        rec.sigma = ir.S_value - reference_S if math.isfinite(reference_S) else math.nan
        N, p = P.N, P.p
        scale = ir.S_value ** (-N / p)
        ex = rec.extras
        npp = _norm(nr, P.p)
        ex["eps_norm_p"] = eps * npp
        for name, s in (("w_norm_p", P.p), ("w_norm_q", P.q), ("w_norm_l", P.l), ("w_norm_pstar", P.pstar)):
            ex[name] = scale * _norm(nr, s)
        ex["eps_w_norm_p"] = eps * ex["w_norm_p"]
        if reg.tag is RegimeTag.SUBCRITICAL:
            ex["rescaled_a"] = eps ** (-1.0 / (P.q - P.p)) * prof.a
        if reg.tag is RegimeTag.CRITICAL:
            ex["k_ratio"] = ex["w_norm_l"] / (eps * ex["w_norm_p"])
            w = to_minimizer(prof, ir.S_value)
            lam, _ = concentration_lambda(w, q_star(N, p))
            rec.lambda_ = lam
            ex["v0"] = lam ** ((N - p) / p) * prof.a
            for name, s in (("v_norm_p", p), ("v_norm_l", P.l)):
                ex[name] = lam ** (s * (N - p) / p - N) * ex[name.replace("v_", "w_")]
        if keep_profile:
            rec.profile = prof
    except Exception as exc:  # recorded per entry; the sweep continues
        rec.status = f"error: {type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
    return rec


def _norm(nr: NormReport, s: float) -> float:
    for k, v in nr.norms.items():
        if abs(k - s) <= 1e-14 * s:
            return v
    return math.nan


def _solve_star(args):
    return solve_record(*args)


def run_sweep(
    params: ProblemParams,
    eps_grid=None,
    config: IntegratorConfig | None = None,
    *,
    jobs: int = 1,
    keep_profiles: bool = False,
) -> SweepTable:
    """Solve the full problem for every ``eps`` in a decreasing grid.

    Records are returned in grid order whatever the number of worker
    processes.  The reference level (``S_*`` for the critical case, the
    zero-mass level ``S_0`` for the supercritical case) is computed once.

    Raises
    ------
    SweepError
        More than half of the records failed.
    """
    if eps_grid is None:
        eps_grid = default_eps_grid(params)
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.ndim != 1 or eps_grid.size == 0 or np.any(eps_grid <= 0):
        raise ParameterError("eps grid must be a non-empty list of positive values")
    if eps_grid.size > 1 and np.any(np.diff(eps_grid) >= 0):
        raise ParameterError("eps grid must be strictly decreasing")
    ref = _reference_level(params, config)
    tasks = [(params, float(e), config, ref, keep_profiles) for e in eps_grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, os.cpu_count() or 1, len(tasks))) as ex:
            records = list(ex.map(_solve_star, tasks))
    else:
        records = [_solve_star(t) for t in tasks]
    table = SweepTable(params, EquationKind.FULL, records, ref)
    if table.n_failed * 2 > len(records):
        first = next(r.status for r in records if not r.ok)
        raise SweepError(f"{table.n_failed} of {len(records)} records failed; first: {first}")
    return table


# ---------------------------------------------------------------- fits


@dataclass(frozen=True)
class FitResult:
    """``value ~ prefactor * eps^exponent * log(1/eps)^log_power``."""

    exponent: float
    log_power: float
    prefactor: float
    r_squared: float
    window: tuple
    n_points: int
    flagged: bool

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "log_power": self.log_power,
            "prefactor": self.prefactor,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
            "flagged": self.flagged,
        }


def fit_power_law(
    table,
    column: str,
    fixed_log_power: float | None = None,
    window: tuple | None = None,
    *,
    min_points: int = 6,
    r2_flag: float = 0.999,
) -> FitResult:
    """Least-squares power law of ``column`` against ``eps``.

    ``table`` is a :class:`SweepTable` or a pair ``(eps, values)``.  The
    default window is the smallest-``eps`` half of the usable records.

    Raises
    ------
    DegenerateFitError
        Fewer than ``min_points`` positive finite values in the window, or
        a window spanning less than one decade of ``eps``.
    """
    if isinstance(table, SweepTable):
        eps, val = table.column(column)
    else:
        eps, val = (np.asarray(x, dtype=float) for x in table)
        order = np.argsort(eps)
        eps, val = eps[order], val[order]
    good = np.isfinite(eps) & np.isfinite(val) & (eps > 0) & (val > 0)
    eps, val = eps[good], val[good]
    if window is None:
        n = eps.size
        keep = max(min_points, (n + 1) // 2)
        eps, val = eps[:keep], val[:keep]
    else:
        lo, hi = window
        sel = (eps >= lo * (1 - 1e-12)) & (eps <= hi * (1 + 1e-12))
        eps, val = eps[sel], val[sel]
    if eps.size < min_points:
        raise DegenerateFitError(f"{eps.size} usable records in the window; need {min_points}")
    if math.log10(eps[-1] / eps[0]) < 1.0 - 1e-9:
        raise DegenerateFitError("fit window spans less than one decade of eps")
    x = np.log(eps)
    y = np.log(val)
    k = 0.0 if fixed_log_power is None else float(fixed_log_power)
    if k != 0.0:
        if np.any(eps >= 1.0):
            raise DegenerateFitError("log correction needs eps < 1")
        y = y - k * np.log(np.log(1.0 / eps))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return FitResult(
        float(coef[0]),
        k,
        float(math.exp(coef[1])),
        r2,
        (float(eps[0]), float(eps[-1])),
        int(eps.size),
        r2 < r2_flag,
    )


# ---------------------------------------------------------------- checks


@dataclass
class BarrierReport:
    holds: bool
    skipped: bool
    reason: str = ""
    max_violation: float = math.nan
    max_equality_residual: float = math.nan
    equality_expected: bool = False


def barrier_check(N: int, p: float, gamma: float, mu_grid, r_grid) -> BarrierReport:
    """Compare both sides of the barrier inequality for ``h = r^{-gamma} e^{-mu r}``.

    With ``A = gamma/r + mu`` the radial p-Laplacian of ``h`` is expanded by
    hand, so both sides carry the common factor ``h^{p-1}`` which is
    divided out:

        LHS = (N-1) A^{p-1}/r - (p-1) gamma A^{p-2}/r^2 - (p-1) A^p + (p-1) mu^p
        RHS = mu gamma^{p-2} (N-1-2 gamma (p-1)) / r^{p-1}
              + gamma^{p-1} (N-p-gamma (p-1)) / r^p

    Violations are measured relative to the sum of the absolute values of
    all terms.  For ``p = 2`` the two sides agree identically.
    """
    if p < 2:
        return BarrierReport(False, True, f"requires p >= 2, got p={p}")
    if N - 1 - 2 * gamma * (p - 1) > 0:
        return BarrierReport(False, True, "requires N-1-2 gamma (p-1) <= 0")
    if gamma * (N - p - gamma * (p - 1)) > 1e-14 * max(1.0, gamma * N):
        return BarrierReport(False, True, "requires gamma (N-p-gamma (p-1)) <= 0")
    mu = np.asarray(mu_grid, dtype=float)[:, None]
    r = np.asarray(r_grid, dtype=float)[None, :]
    A = gamma / r + mu
    t1 = (N - 1) * A ** (p - 1) / r
    t2 = -(p - 1) * gamma * A ** (p - 2) / r**2
    t3 = -(p - 1) * A**p
    t4 = (p - 1) * mu**p
    s1 = mu * gamma ** (p - 2) * (N - 1 - 2 * gamma * (p - 1)) / r ** (p - 1)
    s2 = gamma ** (p - 1) * (N - p - gamma * (p - 1)) / r**p
    lhs = t1 + t2 + t3 + t4
    rhs = s1 + s2
    scale = np.abs(t1) + np.abs(t2) + np.abs(t3) + np.abs(t4) + np.abs(s1) + np.abs(s2)
    rel = (lhs - rhs) / scale
    viol = float(np.max(rel))
    eq = abs(p - 2.0) < 1e-15
    return BarrierReport(
        holds=bool(viol <= 1e-12),
        skipped=False,
        max_violation=viol,
        max_equality_residual=float(np.max(np.abs(rel))),
        equality_expected=eq,
    )


def blow_up_norm_check(table: SweepTable) -> dict:
    """Branch-dependent behaviour of ``||v_eps||_p^p`` along a critical sweep.

    Below ``sqrt(N)`` the norms stay bounded (reported as max/min ratio).
    At and above ``sqrt(N)`` the ratio to the predicted lower bound
    (``log(1/(eps^{1/p} lambda))`` or its power law) must stay above a
    positive constant.
    """
    P = table.params
    reg = classify_regime(P)
    if reg.tag is not RegimeTag.CRITICAL:
        raise RegimeError("blow-up check needs a critical sweep")
    eps, vp = table.column("v_norm_p")
    _, lam = table.column("lambda")
    _, vl = table.column("v_norm_l")
    N, p = P.N, P.p
    out = {"branch": reg.branch.value}
    if reg.branch is Branch.BELOW_SQRT_N:
        out["v_norm_p_max"] = float(np.max(vp))
        out["v_norm_p_ratio"] = float(np.max(vp) / np.min(vp))
        out["v_norm_l_ratio"] = float(np.max(vl) / np.min(vl))
        out["bounded"] = bool(np.all(np.isfinite(vp)) and out["v_norm_p_ratio"] < 10.0)
        return out
    x = 1.0 / (eps ** (1.0 / p) * lam)
    if reg.branch is Branch.EQUAL_SQRT_N:
        bound = np.log(x)
    else:
        bound = x ** ((p * p - N) / (p - 1.0))
    ratio = vp / bound
    out["ratio_min"] = float(np.min(ratio))
    out["ratio_max"] = float(np.max(ratio))
    out["bounded_below"] = bool(np.all(bound > 0) and out["ratio_min"] > 0)
    return out


def pointwise_bound_checks(profile: RadialProfile, s: float | None = None) -> dict:
    """Smallest constants in the radial decay bounds
    ``u(r) <= C r^{-(N-p)/p} ||grad u||_p`` and ``u(r) <= C r^{-N/s} ||u||_s``."""
    P = profile.params
    N, p = P.N, P.p
    s = P.l if s is None else s
    r = np.asarray(profile.grid, dtype=float)
    u = np.abs(np.asarray(profile.values, dtype=float))
    gn = grad_norm_Lp(profile) ** (1.0 / p)
    sn = norm_Ls(profile, s) ** (1.0 / s)
    c_ni = float(np.max(r ** ((N - p) / p) * u) / gn)
    c_s = float(np.max(r ** (N / s) * u) / sn)
    return {
        "C_ni": c_ni,
        "C_s": c_s,
        "s": s,
        "sup_norm": float(np.max(u)),
        "finite": bool(math.isfinite(c_ni) and math.isfinite(c_s)),
    }


def decay_exponent_check(profile: RadialProfile, rel_tol: float = 0.05) -> dict:
    """Fitted polynomial decay exponent against ``(N-p)/(p-1)`` and the
    two-sided constants of ``r^{kappa} u`` on the last two decades."""
    if profile.tail.kind != "polynomial":
        raise ValueError("decay check needs a polynomial tail")
    P = profile.params
    kappa = (P.N - P.p) / (P.p - 1.0)
    r = np.asarray(profile.grid, dtype=float)
    sel = r >= r[-1] / 100.0
    scaled = r[sel] ** kappa * np.asarray(profile.values)[sel]
    gam = profile.tail.rate
    return {
        "exponent": gam,
        "target": kappa,
        "rel_error": abs(gam - kappa) / kappa,
        "passes": abs(gam - kappa) <= rel_tol * kappa,
        "c_lower": float(np.min(scaled)),
        "c_upper": float(np.max(scaled)),
    }


def sandwich_constants(table: SweepTable) -> dict:
    """Smallest ``C1, C2`` with
    ``sigma^{-(p*-p)/(p(l-p*))} <= C1 lambda <= C2 C1 eps^{-1/p} sigma^{1/p}``."""
    P = table.params
    if classify_regime(P).tag is not RegimeTag.CRITICAL:
        raise RegimeError("sandwich needs a critical sweep")
    eps, sig = table.column("sigma")
    _, lam = table.column("lambda")
    ok = (sig > 0) & np.isfinite(lam) & (lam > 0)
    eps, sig, lam = eps[ok], sig[ok], lam[ok]
    p, ps, l = P.p, P.pstar, P.l
    e = (ps - p) / (p * (l - ps))
    C1 = float(np.max(sig ** (-e) / lam))
    C2 = float(np.max(lam * eps ** (1.0 / p) * sig ** (-1.0 / p)))
    return {"C1": C1, "C2": C2, "n": int(eps.size)}
