"""Radial shooting for groundstates of ``-Delta_p u = g(u)``.

The radial equation is integrated as the first-order flux system

    u' = sign(m) (|m| r^{1-N})^{1/(p-1)},    m' = -r^{N-1} g(u),

from a two-term series at a small radius.  Central values are classified as
undershoot or overshoot and bisected.  The exponentially unstable tail of a
positive-mass groundstate is resolved by restarting the shooting from
intermediate radii (a one-parameter continuation between the two bracket
states), so the returned profile reaches far below the central value even
though the central value itself is only resolved to ``bisection_tol``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import _dopri
from .core_model import (
    EquationKind,
    ParameterError,
    ProblemParams,
    f_eval,
    F_eval,
    nonlinearity_coefficients,
)

__all__ = [
    "ShotClass",
    "TailModel",
    "IntegratorConfig",
    "RadialProfile",
    "SeriesStartError",
    "StepFailureError",
    "NoBracketError",
    "InsufficientTailError",
    "BracketWarning",
    "integrate",
    "classify",
    "find_groundstate",
    "attach_tail",
    "default_r_max",
]


class SeriesStartError(ValueError):
    """The origin expansion is not valid for this central value."""


class StepFailureError(RuntimeError):
    """Adaptive step size underflowed or the step budget ran out."""


class NoBracketError(RuntimeError):
    """No undershoot/overshoot pair was found for the central value."""


class InsufficientTailError(RuntimeError):
    """The resolved profile does not reach far enough to fit a tail."""


class BracketWarning(UserWarning):
    """The shooting dichotomy changes direction more than once."""


class ShotClass(str, enum.Enum):
    GROUNDSTATE = "groundstate"
    OVERSHOOT = "overshoot"
    UNDERSHOOT = "undershoot"
    INCONCLUSIVE = "inconclusive"


_EVENT_CLASS = {
    _dopri.EV_HORIZON: ShotClass.INCONCLUSIVE,
    _dopri.EV_OVERSHOOT: ShotClass.OVERSHOOT,
    _dopri.EV_TURN: ShotClass.UNDERSHOOT,
    _dopri.EV_FARFIELD_NEG: ShotClass.OVERSHOOT,
    _dopri.EV_SLOW_DECAY: ShotClass.UNDERSHOOT,
}
# classified below the smallest zero of g, without integrating
_EV_START_UNDERSHOOT = 5


@dataclass(frozen=True)
class TailModel:
    """Far-field model ``C exp(-rate r)`` or ``C r^{-rate}`` beyond ``r_from``.

    ``kind`` is ``"exponential"``, ``"polynomial"`` or ``"none"``.
    """

    kind: str = "none"
    rate: float = float("nan")
    amplitude: float = float("nan")
    r_from: float = float("inf")
    r_squared: float = float("nan")

    def u(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "exponential":
            return self.amplitude * np.exp(-self.rate * r)
        if self.kind == "polynomial":
            return self.amplitude * r ** (-self.rate)
        return np.zeros_like(r)

    def du(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "exponential":
            return -self.rate * self.amplitude * np.exp(-self.rate * r)
        if self.kind == "polynomial":
            return -self.rate * self.amplitude * r ** (-self.rate - 1.0)
        return np.zeros_like(r)

    def rescaled(self, c: float, d: float) -> "TailModel":
        """Tail of ``d * u(r / c)``."""
        if self.kind == "exponential":
            return replace(self, rate=self.rate / c, amplitude=d * self.amplitude, r_from=c * self.r_from)
        if self.kind == "polynomial":
            return replace(self, amplitude=d * self.amplitude * c**self.rate, r_from=c * self.r_from)
        return replace(self, r_from=c * self.r_from)


@dataclass(frozen=True)
class IntegratorConfig:
    """Numerical settings for shooting.

    ``r_start`` and ``r_max`` may be left as ``None`` to use the scale-aware
    defaults described in :func:`integrate`.
    """

    r_start: float | None = None
    r_max: float | None = None
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    bisection_tol: float = 1e-11
    max_bisections: int = 200
    max_steps: int = 400_000
    scan_points: int = 24
    divergence_tol: float = 1e-3
    continuation_stages: int = 6
    tail_target: float = 1e-8
    richardson: bool = True

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "bisection_tol", "divergence_tol", "tail_target"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be positive, got {v}")
        for name in ("r_start", "r_max"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be positive, got {v}")
        if self.r_start is not None and self.r_max is not None and self.r_start >= self.r_max:
            raise ParameterError("r_start must be below r_max")
        if self.max_bisections < 1 or self.max_steps < 10 or self.scan_points < 3:
            raise ParameterError("max_bisections, max_steps and scan_points must be positive")


class DenseSolution:
    """Piecewise quartic continuous extension of an integrator run, seen
    through the dilation ``u_new(r) = d * u(r / c)``."""

    def __init__(self, grid, hfull, rcont, N, p, c=1.0, d=1.0):
        self.grid = grid
        self.hfull = hfull
        self.rcont = rcont
        self.N = N
        self.p = p
        self.c = c
        self.d = d

    def u(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return self.d * _dopri.evaluate(self.grid, self.hfull, self.rcont, r / self.c, 0)

    def m(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        fac = self.c ** (self.N - 1) * (self.d / self.c) ** (self.p - 1)
        return fac * _dopri.evaluate(self.grid, self.hfull, self.rcont, r / self.c, 1)

    def rescaled(self, c: float, d: float) -> "DenseSolution":
        return DenseSolution(self.grid, self.hfull, self.rcont, self.N, self.p, self.c * c, self.d * d)


def flux_to_du(m, r, N, p):
    """``u'`` from the flux ``m = r^{N-1}|u'|^{p-2}u'``."""
    m = np.asarray(m, dtype=float)
    r = np.asarray(r, dtype=float)
    return np.sign(m) * (np.abs(m) * r ** (1.0 - N)) ** (1.0 / (p - 1.0))


@dataclass
class RadialProfile:
    """A radial solution on ``[grid[0], grid[-1]]`` with an optional tail.

    ``rep`` evaluates ``u`` and the flux ``m`` anywhere on the grid; the
    arrays are the values at the integrator nodes.
    """

    params: ProblemParams
    kind: EquationKind
    a: float
    grid: np.ndarray
    values: np.ndarray
    flux: np.ndarray
    classification: ShotClass
    tail: TailModel = field(default_factory=TailModel)
    event_radius: float | None = None
    event_code: int = _dopri.EV_HORIZON
    rep: object = None
    candidates: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def du(self) -> np.ndarray:
        return flux_to_du(self.flux, self.grid, self.params.N, self.params.p)

    def u_at(self, r):
        return self.rep.u(r)

    def m_at(self, r):
        return self.rep.m(r)

    def du_at(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return flux_to_du(self.rep.m(r), r, self.params.N, self.params.p)

    def rescaled(self, c: float, d: float, kind: EquationKind | None = None, params: ProblemParams | None = None):
        """Profile of ``d * u(r / c)``; the flux transforms accordingly."""
        N, p = self.params.N, self.params.p
        fac = c ** (N - 1) * (d / c) ** (p - 1)
        return RadialProfile(
            params=params if params is not None else self.params,
            kind=EquationKind(kind) if kind is not None else self.kind,
            a=d * self.a,
            grid=c * self.grid,
            values=d * self.values,
            flux=fac * self.flux,
            classification=self.classification,
            tail=self.tail.rescaled(c, d),
            event_radius=None if self.event_radius is None else c * self.event_radius,
            event_code=self.event_code,
            rep=self.rep.rescaled(c, d),
            candidates=[d * x for x in self.candidates],
            info=dict(self.info, scale=(c, d)),
        )


def default_r_max(params: ProblemParams, kind: EquationKind) -> float:
    kind = EquationKind(kind)
    if kind.positive_mass:
        cp = nonlinearity_coefficients(params, kind)[0]
        return 200.0 / cp ** (1.0 / params.p)
    return 1e4


def _default_r_start(params: ProblemParams, kind: EquationKind, a: float) -> float:
    q = nonlinearity_coefficients(params, kind)[3]
    return 1e-6 * max(1.0, a ** ((params.p - q) / params.p))


def _coeffs(params: ProblemParams, kind: EquationKind):
    cp, cq, cl, q = nonlinearity_coefficients(params, kind)
    return float(cp), float(cq), float(q), float(cl), float(params.l)


def _g_zeros(params: ProblemParams, kind: EquationKind) -> tuple[float, float]:
    """Smallest and largest positive zero of ``g`` (``inf`` if none)."""
    cp, cq, cl, q = nonlinearity_coefficients(params, kind)
    p, l = params.p, params.l
    if cp == 0.0 and cl == 0.0:
        return math.inf, math.inf
    # h(s) = g(s)/s^{p-1} = -cp + cq s^{q-p} - cl s^{l-p} on a log scale
    def h(x):
        s = math.exp(x)
        return -cp + cq * s ** (q - p) - cl * s ** (l - p)

    if cl == 0.0:
        z = (cp / cq) ** (1.0 / (q - p))
        return z, z
    if cp == 0.0:
        z = (cq / cl) ** (1.0 / (l - q))
        return z, z
    # h rises then falls; its peak is at s_m
    s_m = (cq * (q - p) / (cl * (l - p))) ** (1.0 / (l - q))
    xm = math.log(s_m)
    if h(xm) <= 0.0:
        return math.inf, math.inf
    lo = xm - 1.0
    while h(lo) > 0.0:
        lo -= 2.0 * (xm - lo)
    hi = xm + 1.0
    while h(hi) > 0.0:
        hi += 2.0 * (hi - xm)
    z1 = math.exp(brentq(h, lo, xm, xtol=1e-15, rtol=1e-15))
    z2 = math.exp(brentq(h, xm, hi, xtol=1e-15, rtol=1e-15))
    return z1, z2


def _F_zero(params: ProblemParams, kind: EquationKind) -> float:
    """Smallest positive zero of ``F`` (central values below it undershoot)."""
    cp = nonlinearity_coefficients(params, kind)[0]
    if cp == 0.0:
        return 0.0
    z1, z2 = _g_zeros(params, kind)
    if not math.isfinite(z1):
        return math.inf
    hi = z2 if math.isfinite(z2) and z2 > z1 else 2.0 * z1
    # F decreases on (0, z1) and increases on (z1, z2)
    if kind == EquationKind.POSITIVE_MASS:
        hi = z1
        while F_eval(params, kind, hi) <= 0.0:
            hi *= 2.0
    if F_eval(params, kind, hi) <= 0.0:
        return math.inf
    return brentq(lambda s: F_eval(params, kind, s), z1, hi, xtol=1e-15, rtol=1e-15)


def _series_state(params, kind, a, r):
    N, p = params.N, params.p
    ga = f_eval(params, kind, a)
    pc = p / (p - 1.0)
    u = a - ((p - 1.0) / p) * (ga / N) ** (1.0 / (p - 1.0)) * r**pc
    m = -ga * r**N / N
    return u, m


def _run(params, kind, r0, u0, m0, r_max, config: IntegratorConfig, a_scale, zero_mass):
    cp, cq, q, cl, l = _coeffs(params, kind)
    return _dopri.shoot(
        float(params.N),
        float(params.p),
        cp,
        cq,
        q,
        cl,
        l,
        float(r0),
        float(u0),
        float(m0),
        float(r_max),
        float(config.rel_tol),
        float(config.abs_tol * a_scale),
        float(config.abs_tol),
        int(config.max_steps),
        bool(zero_mass),
    )


def _make_profile(params, kind, a, out, zero_mass_events=True):
    grid, y, rcont, hfull, code = out
    if code == _dopri.EV_UNDERFLOW:
        raise StepFailureError(f"step size underflow at r={grid[-1]:.6g} (a={a:.12g})")
    if code == _dopri.EV_MAXSTEPS:
        raise StepFailureError(f"step budget exhausted at r={grid[-1]:.6g} (a={a:.12g})")
    cls = _EVENT_CLASS[int(code)]
    ev_r = float(grid[-1]) if code > 0 else None
    return RadialProfile(
        params=params,
        kind=EquationKind(kind),
        a=float(a),
        grid=grid,
        values=y[:, 0].copy(),
        flux=y[:, 1].copy(),
        classification=cls,
        event_radius=ev_r,
        event_code=int(code),
        rep=DenseSolution(grid, hfull, rcont, params.N, params.p),
    )


def integrate(
    params: ProblemParams,
    kind: EquationKind,
    a: float,
    config: IntegratorConfig | None = None,
    *,
    far_field_events: bool = True,
) -> RadialProfile:
    """Integrate the radial problem from the centre with ``u(0) = a``.

    The run starts from the two-term series at ``r_start`` (default
    ``1e-6 max(1, a^{(p-q)/p})``) and stops at the first event or at
    ``r_max`` (default ``200 / c_p^{1/p}`` for positive-mass kinds and
    ``1e4`` otherwise).  For zero-mass kinds the far-field level
    ``I = u + r u' / kappa`` with ``kappa = (N-p)/(p-1)`` is monitored: it
    tends to the limit of ``u`` at infinity, so ``I < 0`` forces a zero
    crossing and a persistent rise of ``I/u`` marks slow decay.
    ``far_field_events=False`` disables these two checks.

    A central value below the smallest zero of ``g`` (where ``g(a) < 0``)
    is returned as an undershoot of length zero, since the solution turns
    up immediately.

    Raises
    ------
    SeriesStartError
        ``g(a) <= 0`` with ``a`` not below the smallest zero of ``g``.
    StepFailureError
        Step size underflow or exhausted step budget.
    """
    if config is None:
        config = IntegratorConfig()
    kind = EquationKind(kind)
    if not (a > 0 and math.isfinite(a)):
        raise ParameterError(f"central value must be positive, got {a}")
    ga = f_eval(params, kind, a)
    if ga <= 0.0:
        z1, _ = _g_zeros(params, kind)
        if ga < 0.0 and a < z1:
            return RadialProfile(
                params=params,
                kind=kind,
                a=float(a),
                grid=np.array([0.0]),
                values=np.array([float(a)]),
                flux=np.array([0.0]),
                classification=ShotClass.UNDERSHOOT,
                event_radius=0.0,
                event_code=_EV_START_UNDERSHOOT,
                rep=None,
                info={"reason": "g(a) < 0 below the first zero of g"},
            )
        raise SeriesStartError(f"g(a) = {ga:.6g} <= 0 at a = {a:.12g}; the series start needs g(a) > 0")

    r_max = config.r_max if config.r_max is not None else default_r_max(params, kind)
    r0 = config.r_start if config.r_start is not None else _default_r_start(params, kind, a)
    zero_mass = (not kind.positive_mass) and far_field_events

    if config.richardson and r0 < 1e-2 * r_max:
        for _ in range(6):
            r_chk = min(100.0 * r0, 0.5 * r_max)
            u_a, m_a = _series_state(params, kind, a, r0)
            u_b, m_b = _series_state(params, kind, a, 0.5 * r0)
            ya = _run(params, kind, r0, u_a, m_a, r_chk, config, a, False)
            yb = _run(params, kind, 0.5 * r0, u_b, m_b, r_chk, config, a, False)
            du = abs(ya[1][-1, 0] - yb[1][-1, 0]) / a
            dm = abs(ya[1][-1, 1] - yb[1][-1, 1]) / max(abs(ya[1][-1, 1]), 1e-300)
            if du <= 10 * config.rel_tol and dm <= 1e3 * config.rel_tol:
                break
            r0 *= 0.5

    u0, m0 = _series_state(params, kind, a, r0)
    out = _run(params, kind, r0, u0, m0, r_max, config, a, zero_mass)
    prof = _make_profile(params, kind, a, out)
    prof.info["r_start"] = r0
    prof.info["r_max"] = r_max
    return prof


def classify(profile: RadialProfile) -> ShotClass:
    """Shot class of a profile from its terminal state.

    Overshoot when the last value is at or below zero with a negative flux,
    undershoot when the flux has become non-negative while ``u > 0``,
    otherwise the stored classification (set from the far-field events of
    zero-mass runs) or inconclusive.
    """
    if profile.classification is ShotClass.GROUNDSTATE:
        return ShotClass.GROUNDSTATE
    u_end = float(profile.values[-1])
    m_end = float(profile.flux[-1])
    if u_end <= 0.0 and m_end < 0.0:
        return ShotClass.OVERSHOOT
    if len(profile.flux) > 1 and m_end >= 0.0 and u_end > 0.0:
        return ShotClass.UNDERSHOOT
    if profile.event_code == _EV_START_UNDERSHOOT:
        return ShotClass.UNDERSHOOT
    if profile.classification in (ShotClass.OVERSHOOT, ShotClass.UNDERSHOOT):
        return profile.classification
    return ShotClass.INCONCLUSIVE


# ---------------------------------------------------------------- bracketing


def _scan_range(params, kind) -> tuple[float, float, bool]:
    """Scan interval ``(lo, hi)`` and whether ``hi`` may be extended."""
    if kind.positive_mass:
        lo = _F_zero(params, kind)
        if not math.isfinite(lo):
            raise NoBracketError(
                "F has no positive zero: no nontrivial finite energy solutions for eps >= eps_* "
                "(or the parameters admit no groundstate)"
            )
        _, z2 = _g_zeros(params, kind)
        cl = nonlinearity_coefficients(params, kind)[2]
        if cl == 0.0:
            return lo, 4.0 * lo, True
        return lo, z2, False
    _, z2 = _g_zeros(params, kind)
    hi = z2 if math.isfinite(z2) else 1.0
    return 1e-2 * hi, hi, not math.isfinite(z2)


def _shot(params, kind, a, config, cache):
    key = float(a)
    if key not in cache:
        cache[key] = integrate(params, kind, a, config)
    return cache[key]


def _is_over(prof) -> bool:
    return prof.classification is ShotClass.OVERSHOOT


def _brackets(params, kind, config, cache):
    lo, hi, extend = _scan_range(params, kind)
    n = config.scan_points
    t = (np.arange(n) + 0.5) / n
    avals = list(lo * (hi / lo) ** t)
    if not extend:
        # near the end of the admissible range the groundstate value crowds
        # against the largest zero of g; sample geometrically towards it
        avals += [hi - (hi - lo) * 10.0 ** (-0.5 * k) for k in range(3, 19)]
        avals = sorted(set(avals))
    over = [_is_over(_shot(params, kind, a, config, cache)) for a in avals]
    grow = 0
    while extend and not any(over) and grow < 60:
        a = avals[-1] * 2.0
        avals.append(a)
        over.append(_is_over(_shot(params, kind, a, config, cache)))
        grow += 1
    pairs = []
    for i in range(len(avals) - 1):
        if over[i] != over[i + 1]:
            pairs.append((avals[i], avals[i + 1], over[i + 1]))
    return pairs


def _end_radius(obj) -> float:
    return float(obj.end) if isinstance(obj, _Spliced) else float(obj.grid[-1])


def _diverge_index(rmid, umid, prof_a, prof_b, tol):
    """First index of ``rmid`` where the two bracket shots differ by more than
    ``tol`` relative to ``umid`` (``len(rmid)`` if never)."""
    r_end = min(_end_radius(prof_a), _end_radius(prof_b))
    ok = rmid <= r_end
    ua = prof_a.rep.u(np.minimum(rmid, r_end))
    ub = prof_b.rep.u(np.minimum(rmid, r_end))
    bad = (np.abs(ua - ub) > tol * np.abs(umid)) | ~ok | (umid <= 0.0)
    idx = np.nonzero(bad)[0]
    return int(idx[0]) if idx.size else len(rmid)


def _continue_tail(params, kind, config, prof_mid, prof_lo, prof_hi, a_scale, zero_mass, r_max):
    """Extend ``prof_mid`` past the radius where its brackets separate.

    Each stage restarts from a node ``r_c`` of the current profile with the
    state ``(1-t) y_lo(r_c) + t y_hi(r_c)`` and bisects ``t`` between an
    undershoot and an overshoot.
    """
    grid = prof_mid.grid
    hfull = prof_mid.rep.hfull
    rcont = prof_mid.rep.rcont
    cut_tol = config.divergence_tol
    restart_tol = 1e-2 * cut_tol
    stages = 0
    lo, hi = prof_lo, prof_hi
    seg_start = 0
    while True:
        umid = _node_values(grid, rcont, hfull)[0]
        k_cut = _diverge_index(grid[seg_start:], umid[seg_start:], lo, hi, cut_tol) + seg_start
        done = (
            k_cut >= len(grid)
            or umid[k_cut - 1] <= config.tail_target * a_scale
            or stages >= config.continuation_stages
            or kind.positive_mass is False
        )
        if done:
            break
        k_c = _diverge_index(grid[seg_start:], umid[seg_start:], lo, hi, restart_tol) + seg_start - 1
        k_c = max(k_c, seg_start + 1)
        r_c = grid[k_c]
        y_lo = np.array([lo.rep.u(r_c)[0], lo.rep.m(r_c)[0]])
        y_hi = np.array([hi.rep.u(r_c)[0], hi.rep.m(r_c)[0]])

        def shoot_t(tt):
            y = (1.0 - tt) * y_lo + tt * y_hi
            out = _run(params, kind, r_c, y[0], y[1], r_max, config, a_scale, zero_mass)
            return _make_profile(params, kind, prof_mid.a, out)

        t_lo, t_hi = 0.0, 1.0
        p_lo, p_hi = shoot_t(0.0), shoot_t(1.0)
        if _is_over(p_lo) or not _is_over(p_hi):
            break
        p_mid = None
        for _ in range(80):
            tm = 0.5 * (t_lo + t_hi)
            if tm <= t_lo or tm >= t_hi:
                break
            pm = shoot_t(tm)
            if _is_over(pm):
                t_hi, p_hi = tm, pm
            else:
                t_lo, p_lo = tm, pm
            p_mid = pm
        if p_mid is None:
            break
        # splice: nodes up to r_c from the old profile, then the new segment
        g2 = p_mid.grid
        grid = np.concatenate([grid[: k_c + 1], g2[1:]])
        hfull = np.concatenate([hfull[:k_c], p_mid.rep.hfull])
        rcont = np.concatenate([rcont[:k_c], p_mid.rep.rcont])
        lo = _Spliced(grid, hfull, rcont, k_c, p_lo)
        hi = _Spliced(grid, hfull, rcont, k_c, p_hi)
        seg_start = k_c + 1
        stages += 1

    k_cut = max(k_cut, 2)
    grid_t = grid[:k_cut].copy()
    hfull_t = hfull[: k_cut - 1].copy()
    rcont_t = rcont[: k_cut - 1].copy()
    vals, flux = _node_values(grid_t, rcont_t, hfull_t)
    return grid_t, hfull_t, rcont_t, vals, flux, stages


def _node_values(grid, rcont, hfull=None):
    """Node states from the coefficient tables.  The last node may end a
    partial step, so it is evaluated from that step's extension."""
    vals = np.empty(len(grid))
    flux = np.empty(len(grid))
    vals[:-1] = rcont[:, 0, 0]
    flux[:-1] = rcont[:, 0, 1]
    th = 1.0 if hfull is None else (grid[-1] - grid[-2]) / hfull[-1]
    vals[-1] = _dopri.dense_eval(rcont[-1], th, 0)
    flux[-1] = _dopri.dense_eval(rcont[-1], th, 1)
    return vals, flux


class _Spliced:
    """Bracket trajectory for a continuation stage: shared nodes up to the
    restart and its own shot afterwards."""

    def __init__(self, grid, hfull, rcont, k_c, prof):
        self.grid = grid
        self.r_c = grid[k_c]
        self.head = DenseSolution(grid[: k_c + 1], hfull[:k_c], rcont[:k_c], prof.params.N, prof.params.p)
        self.tail = prof.rep
        self.rep = self
        self.end = prof.grid[-1]

    @property
    def grid_end(self):
        return self.end

    def u(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return np.where(r <= self.r_c, self.head.u(r), self.tail.u(r))

    def m(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return np.where(r <= self.r_c, self.head.m(r), self.tail.m(r))


def _bisect(params, kind, config, a_u, a_o, cache):
    p_u = _shot(params, kind, a_u, config, cache)
    p_o = _shot(params, kind, a_o, config, cache)
    it = 0
    while abs(a_o - a_u) > config.bisection_tol * 0.5 * (a_o + a_u) and it < config.max_bisections:
        am = 0.5 * (a_u + a_o)
        if am in (a_u, a_o):
            break
        pm = integrate(params, kind, am, config)
        if _is_over(pm):
            a_o, p_o = am, pm
        else:
            a_u, p_u = am, pm
        it += 1
    return a_u, a_o, p_u, p_o, it


def find_groundstate(
    params: ProblemParams,
    kind: EquationKind,
    config: IntegratorConfig | None = None,
) -> RadialProfile:
    """Locate the groundstate central value by bracketing and bisection.

    A log-spaced scan of central values finds sign changes of the shooting
    dichotomy; the first one (smallest central value) is bisected to a
    relative width below ``bisection_tol``.  Every further sign change is
    recorded in ``candidates`` and triggers a :class:`BracketWarning`.
    The returned profile carries the tail resolved by continuation
    restarts and a fitted :class:`TailModel`.

    Raises
    ------
    NoBracketError
        The scan contains no undershoot/overshoot pair.
    InsufficientTailError
        The resolved profile is too short for a tail fit.
    """
    if config is None:
        config = IntegratorConfig()
    kind = EquationKind(kind)
    if kind is EquationKind.EMDEN_FOWLER:
        raise ParameterError("the Emden-Fowler equation has a continuum of groundstates; use closed_form")
    cache: dict = {}
    pairs = _brackets(params, kind, config, cache)
    if not pairs:
        raise NoBracketError(
            "no undershoot/overshoot bracket: no nontrivial finite energy solutions for eps >= eps_* "
            "(or the parameters admit no groundstate)"
        )
    if len(pairs) > 1:
        warnings.warn(
            f"shooting dichotomy changes direction {len(pairs)} times; using the smallest bracket",
            BracketWarning,
            stacklevel=2,
        )
    a1, a2, over_high = pairs[0]
    a_u, a_o = (a1, a2) if over_high else (a2, a1)
    a_u, a_o, p_u, p_o, iters = _bisect(params, kind, config, a_u, a_o, cache)
    a = 0.5 * (a_u + a_o)

    r_max = config.r_max if config.r_max is not None else default_r_max(params, kind)
    # final shots run without far-field stopping so all three reach the same horizon
    zm = not kind.positive_mass
    if zm:
        p_mid = integrate(params, kind, a, config, far_field_events=False)
        p_u = integrate(params, kind, a_u, config, far_field_events=False)
        p_o = integrate(params, kind, a_o, config, far_field_events=False)
    else:
        p_mid = integrate(params, kind, a, config)
    grid, hfull, rcont, vals, flux, stages = _continue_tail(
        params, kind, config, p_mid, p_u, p_o, a, False, r_max
    )
    rep = DenseSolution(grid, hfull, rcont, params.N, params.p)
    prof = RadialProfile(
        params=params,
        kind=kind,
        a=float(a),
        grid=grid,
        values=vals,
        flux=flux,
        classification=ShotClass.GROUNDSTATE,
        rep=rep,
        candidates=[0.5 * (x + y) for x, y, _ in pairs],
        info={
            "bracket": (a_u, a_o),
            "bisections": iters,
            "continuation_stages": stages,
            "r_start": p_mid.info.get("r_start"),
            "r_max": r_max,
        },
    )
    if kind is EquationKind.FULL and not np.max(vals) < 1.0:
        raise RuntimeError("groundstate of the full problem must stay below 1")
    prof.tail = attach_tail(prof)
    return prof


# ---------------------------------------------------------------- tails


def _linfit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return coef[0], coef[1], r2


def attach_tail(profile: RadialProfile) -> TailModel:
    """Fit the far-field model to the end of a groundstate profile.

    Positive-mass kinds get ``C exp(-delta r)`` fitted to ``log u`` over the
    last decade of ``u``; the profile must end below ``1e-6 a``.
    Zero-mass kinds get ``C r^{-gamma}`` fitted to ``log u`` against
    ``log r`` over the last decade of ``r``; the profile must extend over at
    least two decades of radius beyond the point where ``u = a/2``.
    """
    kind = EquationKind(profile.kind)
    r = profile.grid
    u = profile.values
    r_end = float(r[-1])
    u_end = float(u[-1])
    a = profile.a
    if kind.positive_mass:
        if not (0.0 < u_end < 1e-6 * a):
            raise InsufficientTailError(f"profile ends at u/a = {u_end / a:.3g}; need < 1e-6")
        r_lo = float(np.interp(-np.log(10 * u_end), -np.log(np.maximum(u, 1e-300)), r))
        rr = np.linspace(r_lo, r_end, 200)
        uu = profile.u_at(rr)
        slope, icpt, r2 = _linfit(rr, np.log(uu))
        if not slope < 0:
            raise InsufficientTailError("tail is not decaying")
        return TailModel("exponential", -slope, math.exp(icpt), r_end, r2)
    r_half = float(np.interp(-0.5 * a, -u, r))
    if not (u_end > 0.0 and r_end >= 100.0 * r_half):
        raise InsufficientTailError(
            f"profile spans r in [{r_half:.3g}, {r_end:.3g}] past u = a/2; need two decades"
        )
    rr = np.geomspace(r_end / 10.0, r_end, 200)
    uu = profile.u_at(rr)
    slope, icpt, r2 = _linfit(np.log(rr), np.log(uu))
    return TailModel("polynomial", -slope, math.exp(icpt), r_end, r2)
