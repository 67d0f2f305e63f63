"""Problem parameters, regime classification and the nonlinearities.

Every equation handled by the package has the radial form

    -Delta_p u = g(u),    g(s) = -c_p s^{p-1} + c_q s^{q-1} - c_l s^{l-1},

with kind-dependent coefficients.  :func:`nonlinearity_coefficients` is the
single place where an :class:`EquationKind` is turned into that triple.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

__all__ = [
    "ParameterError",
    "RegimeError",
    "RateWarning",
    "EquationKind",
    "RegimeTag",
    "Branch",
    "Regime",
    "ProblemParams",
    "RatePrediction",
    "p_star",
    "classify_regime",
    "nonlinearity_coefficients",
    "f_eval",
    "F_eval",
    "k_factor",
    "predicted_rates",
]

CRITICAL_RTOL = 1e-12


class ParameterError(ValueError):
    """Exponents or small parameter outside the admissible domain."""


class RegimeError(ValueError):
    """Operation requested for a regime it is not defined in."""


class RateWarning(UserWarning):
    """Matching two-sided bounds are not available for these exponents."""


class EquationKind(str, enum.Enum):
    FULL = "full"                  # -D_p u + eps u^{p-1} - u^{q-1} + u^{l-1} = 0
    CANONICAL = "canonical"        # -D_p v + v^{p-1} = v^{q-1} - eps^{(l-q)/(q-p)} v^{l-1}
    POSITIVE_MASS = "positive_mass"  # -D_p v + v^{p-1} = v^{q-1}
    ZERO_MASS = "zero_mass"        # -D_p u - u^{q-1} + u^{l-1} = 0
    EMDEN_FOWLER = "emden_fowler"  # -D_p U = U^{p*-1}

    @property
    def needs_eps(self) -> bool:
        return self in (EquationKind.FULL, EquationKind.CANONICAL)

    @property
    def positive_mass(self) -> bool:
        return self in (EquationKind.FULL, EquationKind.CANONICAL, EquationKind.POSITIVE_MASS)


class RegimeTag(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


class Branch(str, enum.Enum):
    BELOW_SQRT_N = "below_sqrt_n"
    EQUAL_SQRT_N = "equal_sqrt_n"
    ABOVE_SQRT_N = "above_sqrt_n"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    branch: Branch | None = None
    # only meaningful for ABOVE_SQRT_N: p < (N+1)/2 is where two-sided rates are proven
    above_valid: bool | None = None

    def __str__(self) -> str:
        if self.branch is None:
            return self.tag.value
        return f"{self.tag.value}/{self.branch.value}"


def p_star(N: int, p: float) -> float:
    """Critical Sobolev exponent ``pN/(N-p)``."""
    if not (1.0 < p < N):
        raise ParameterError(f"need 1 < p < N, got p={p}, N={N}")
    return p * N / (N - p)


def _close(a: float, b: float, rtol: float = CRITICAL_RTOL) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b))


@dataclass(frozen=True)
class ProblemParams:
    """Exponents ``(N, p, q, l)`` and the small parameter ``eps``.

    ``eps = 0`` is accepted; equations that need a positive ``eps`` check it
    when they are evaluated.
    """

    N: int
    p: float
    q: float
    l: float
    eps: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ParameterError(f"N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not (1.0 < self.p < self.N):
            raise ParameterError(f"need 1 < p < N, got p={self.p}, N={self.N}")
        if not (self.p < self.q < self.l):
            raise ParameterError(f"need p < q < l, got p={self.p}, q={self.q}, l={self.l}")
        if not (self.eps >= 0.0) or math.isinf(self.eps):
            raise ParameterError(f"eps must be finite and >= 0, got {self.eps}")

    @property
    def pstar(self) -> float:
        return p_star(self.N, self.p)

    @property
    def kappa(self) -> float:
        return (self.N - self.p) / (self.p - 1.0)

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def regime(self) -> Regime:
        return classify_regime(self)

    def with_eps(self, eps: float) -> "ProblemParams":
        return ProblemParams(self.N, self.p, self.q, self.l, eps)

    @classmethod
    def critical(cls, N: int, p: float, l: float, eps: float = 0.0) -> "ProblemParams":
        """Parameters with ``q`` set exactly to ``p*``."""
        return cls(N, p, p_star(N, p), l, eps)


def classify_regime(params: ProblemParams) -> Regime:
    N, p, q = params.N, params.p, params.q
    ps = p_star(N, p)
    if _close(q, ps):
        root = math.sqrt(N)
        if _close(p, root):
            branch = Branch.EQUAL_SQRT_N
        elif p < root:
            branch = Branch.BELOW_SQRT_N
        else:
            branch = Branch.ABOVE_SQRT_N
        valid = (p < (N + 1) / 2.0) if branch is Branch.ABOVE_SQRT_N else None
        return Regime(RegimeTag.CRITICAL, branch, valid)
    if q < ps:
        return Regime(RegimeTag.SUBCRITICAL)
    return Regime(RegimeTag.SUPERCRITICAL)


def nonlinearity_coefficients(params: ProblemParams, kind: EquationKind) -> tuple[float, float, float, float]:
    """Return ``(c_p, c_q, c_l, q_eff)`` so that
    ``g(s) = -c_p s^{p-1} + c_q s^{q_eff-1} - c_l s^{l-1}``."""
    kind = EquationKind(kind)
    eps = params.eps
    if kind.needs_eps and not eps > 0:
        raise ParameterError(f"{kind.value} requires eps > 0")
    q = params.q
    if kind is EquationKind.FULL:
        return eps, 1.0, 1.0, q
    if kind is EquationKind.CANONICAL:
        return 1.0, 1.0, eps ** ((params.l - q) / (q - params.p)), q
    if kind is EquationKind.POSITIVE_MASS:
        return 1.0, 1.0, 0.0, q
    if kind is EquationKind.ZERO_MASS:
        return 0.0, 1.0, 1.0, q
    return 0.0, 1.0, 0.0, params.pstar


def f_eval(params: ProblemParams, kind: EquationKind, s: float) -> float:
    """Right-hand side ``g(s)`` of ``-Delta_p u = g(u)`` for ``s >= 0``."""
    if s < 0:
        raise ValueError(f"nonlinearity is only evaluated at s >= 0, got {s}")
    cp, cq, cl, q = nonlinearity_coefficients(params, kind)
    if s == 0.0:
        return 0.0
    p, l = params.p, params.l
    return -cp * s ** (p - 1) + cq * s ** (q - 1) - cl * s ** (l - 1)


def F_eval(params: ProblemParams, kind: EquationKind, s: float) -> float:
    """Antiderivative of :func:`f_eval` with ``F(0) = 0``."""
    if s < 0:
        raise ValueError(f"nonlinearity is only evaluated at s >= 0, got {s}")
    cp, cq, cl, q = nonlinearity_coefficients(params, kind)
    p, l = params.p, params.l
    return -cp * s**p / p + cq * s**q / q - cl * s**l / l


def k_factor(params: ProblemParams) -> float:
    """``l(p*-p) / (p(l-p*))``, the ratio tying the l- and p-norms of the
    critical minimizer."""
    reg = classify_regime(params)
    if reg.tag is not RegimeTag.CRITICAL:
        raise RegimeError(f"k_factor needs q = p*, got regime {reg}")
    ps, p, l = params.pstar, params.p, params.l
    return l * (ps - p) / (p * (l - ps))


@dataclass(frozen=True)
class RatePrediction:
    """Predicted power laws in ``eps`` for ``eps -> 0``.

    A quantity ``X`` is predicted as ``X ~ eps^e * log(1/eps)^k``.  NaN marks
    a rate that is not defined for the regime.
    """

    regime: Regime
    lambda_exponent: float
    lambda_log_power: float
    u0_exponent_consistent: float
    u0_exponent_printed: float
    sigma_exponent: float
    sigma_log_power: float
    u0_log_power_consistent: float = 0.0
    u0_log_power_printed: float = 0.0
    notes: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k not in ("regime", "notes")}
        d["regime"] = str(self.regime)
        d["notes"] = list(self.notes)
        return d


def predicted_rates(params: ProblemParams) -> RatePrediction:
    reg = classify_regime(params)
    N, p, q, l = params.N, params.p, params.q, params.l
    nan = float("nan")
    if reg.tag is RegimeTag.SUBCRITICAL:
        # u_eps(x) = eps^{1/(q-p)} v_eps(eps^{1/p} x): length scale eps^{-1/p}
        e = 1.0 / (q - p)
        return RatePrediction(reg, -1.0 / p, 0.0, e, e, nan, 0.0)
    if reg.tag is RegimeTag.SUPERCRITICAL:
        root = math.sqrt(N)
        # upper rate of S_eps - S_0 from testing with (cut-off) w_0
        if p < root and not _close(p, root):
            sig, sig_log = 1.0, 0.0
        elif _close(p, root):
            sig, sig_log = 1.0, 1.0
        else:
            sig, sig_log = (N - p) / (p * (p - 1.0)), 0.0
        return RatePrediction(reg, 0.0, 0.0, 0.0, 0.0, sig, sig_log)

    ps = params.pstar
    notes: list[str] = []
    if reg.branch is Branch.ABOVE_SQRT_N:
        denom = (l - ps) * (p - 1.0) + p
        lam = -1.0 / denom
        u0 = (N - p) / (p * denom)
        sig = (N - p) * (l - ps) / (p * denom)
        pred = RatePrediction(reg, lam, 0.0, u0, u0, sig, 0.0)
    else:
        lam = -(ps - p) / (p * (l - p))
        sig = (l - ps) / (l - p)
        log_pow = 1.0 if reg.branch is Branch.EQUAL_SQRT_N else 0.0
        # u(0) = lambda^{-(N-p)/p} v(0) and (p*-p)(N-p) = p^2
        u0_cons = 1.0 / (l - p)
        u0_print = l / (l - p)
        pred = RatePrediction(
            reg,
            lam,
            lam * log_pow,
            u0_cons,
            u0_print,
            sig,
            sig * log_pow,
            u0_log_power_consistent=u0_cons * log_pow,
            u0_log_power_printed=u0_print * log_pow,
        )
        notes.append("u0: consistent exponent 1/(l-p) differs from the alternative l/(l-p)")

    if reg.branch is not Branch.BELOW_SQRT_N:
        open_case = (
            (N >= 4 and p >= (N + 1) / 2.0)
            or (N == 3 and p >= math.sqrt(3.0) - 1e-12)
            or (N == 2 and p >= math.sqrt(2.0) - 1e-12)
        )
        if open_case:
            msg = f"no matching two-sided bounds for N={N}, p={p}; rates are one-sided (exploratory)"
            warnings.warn(msg, RateWarning, stacklevel=2)
            notes.append(msg)
    return RatePrediction(**{**pred.__dict__, "notes": tuple(notes)})
