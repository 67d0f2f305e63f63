"""Estimator-style wrappers around the functional API.

Both classes follow the scikit-learn conventions (constructor stores
hyper-parameters verbatim, ``fit`` returns ``self``, fitted state ends with an
underscore) so they compose with ``clone``/``get_params`` tooling.  The
functional API remains the primary interface.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .asymptotics import fit_power_law
from .core_model import EquationKind, ProblemParams
from .norms import identity_report, norm_report
from .shooting import IntegratorConfig, find_groundstate

__all__ = ["GroundstateSolver", "PowerLawFitter"]


class GroundstateSolver(BaseEstimator):
    """Locate the radial groundstate for fixed exponents.

    Parameters
    ----------
    N, p, q, l : exponents of the equation
    eps : float
        Small parameter (ignored by kinds that do not use it).
    kind : str
        One of the :class:`EquationKind` values.
    rel_tol, abs_tol, bisection_tol : float
        Integrator and bisection tolerances.

    Attributes
    ----------
    profile_ : RadialProfile
    a_ : float
        Central value of the groundstate.
    norms_ : NormReport
    identities_ : IdentityReport
    """

    def __init__(
        self,
        N=3,
        p=2.0,
        q=4.0,
        l=6.0,
        eps=0.0,
        kind="positive_mass",
        rel_tol=1e-12,
        abs_tol=1e-14,
        bisection_tol=1e-11,
    ):
        self.N = N
        self.p = p
        self.q = q
        self.l = l
        self.eps = eps
        self.kind = kind
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.bisection_tol = bisection_tol

    def fit(self, X=None, y=None):
        """Solve the shooting problem.  ``X`` and ``y`` are ignored."""
        params = ProblemParams(self.N, self.p, self.q, self.l, self.eps)
        cfg = IntegratorConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol, bisection_tol=self.bisection_tol)
        self.profile_ = find_groundstate(params, EquationKind(self.kind), cfg)
        self.a_ = self.profile_.a
        self.norms_ = norm_report(self.profile_)
        self.identities_ = identity_report(self.profile_, self.norms_)
        return self

    def predict(self, X):
        """Profile values ``u(r)`` at the radii in ``X``."""
        check_is_fitted(self, "profile_")
        r = np.asarray(X, dtype=float).ravel()
        return self.profile_.u_at(r)


class PowerLawFitter(RegressorMixin, BaseEstimator):
    """Fit ``y ~ C eps^e log(1/eps)^k`` with an optional fixed ``k``.

    Attributes
    ----------
    exponent_, prefactor_, r_squared_ : float
    result_ : FitResult
    """

    def __init__(self, fixed_log_power=None, window=None, min_points=6):
        self.fixed_log_power = fixed_log_power
        self.window = window
        self.min_points = min_points

    def fit(self, X, y):
        eps = np.asarray(X, dtype=float).ravel()
        vals = np.asarray(y, dtype=float).ravel()
        if eps.shape != vals.shape:
            raise ValueError("X and y must contain the same number of samples")
        self.result_ = fit_power_law(
            (eps, vals), "value", self.fixed_log_power, self.window, min_points=self.min_points
        )
        self.exponent_ = self.result_.exponent
        self.prefactor_ = self.result_.prefactor
        self.r_squared_ = self.result_.r_squared
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        eps = np.asarray(X, dtype=float).ravel()
        out = self.prefactor_ * eps**self.exponent_
        k = self.result_.log_power
        if k != 0.0:
            out = out * np.log(1.0 / eps) ** k
        return out

    def score(self, X, y, sample_weight=None):
        """Coefficient of determination in log space."""
        check_is_fitted(self, "result_")
        y = np.log(np.asarray(y, dtype=float).ravel())
        pred = np.log(self.predict(X))
        ss = float(np.sum((y - y.mean()) ** 2))
        return 1.0 - float(np.sum((y - pred) ** 2)) / ss if ss > 0 else math.nan
