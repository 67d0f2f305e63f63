import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groundstate_lab import (
    ConstraintError,
    ExtremalParams,
    IntegrabilityError,
    ParameterError,
    ProblemParams,
    RegimeError,
    TestFunctionParams,
    U_eval,
    W_eval,
    beta_constants,
    extremal_residual,
    minimizer_profile,
    norm_Ls,
    optimal_test_scales,
    psi_value,
    q_star,
    sobolev_constant,
    test_quotient as rayleigh_quotient,
)
from groundstate_lab.closed_form import ball_integral, cutoff
from oracles import q_star_value

CASES = [(3, 2.0), (5, 2.0), (4, 2.5), (5, 3.0), (6, 1.5)]


def talenti_constant(N, p):
    """Best constant S in ``S ||u||_{p*}^p <= ||grad u||_p^p`` from the
    Gamma-function formula."""
    C = (
        math.pi**-0.5
        * N ** (-1 / p)
        * ((p - 1) / (N - p)) ** (1 - 1 / p)
        * (math.gamma(1 + N / 2) * math.gamma(N) / (math.gamma(N / p) * math.gamma(1 + N - N / p))) ** (1 / N)
    )
    return C**-p


def test_central_value_three_dimensions():
    assert U_eval(ExtremalParams(3, 2.0), 0.0) == pytest.approx(3**0.25, rel=1e-15)


@pytest.mark.parametrize("N,p", CASES)
def test_sobolev_constant_matches_gamma_formula(N, p):
    assert sobolev_constant(N, p) == pytest.approx(talenti_constant(N, p), rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(lam=st.floats(min_value=0.05, max_value=20.0), case=st.sampled_from(CASES))
def test_sobolev_constant_is_dilation_invariant(lam, case):
    N, p = case
    assert sobolev_constant(N, p, lam) == pytest.approx(sobolev_constant(N, p), rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(lam=st.floats(min_value=0.1, max_value=10.0), r=st.floats(min_value=0.0, max_value=50.0))
def test_U_lambda_is_a_dilation(lam, r):
    N, p = 5, 2.0
    one = U_eval(ExtremalParams(N, p), r / lam)
    assert U_eval(ExtremalParams(N, p, lam), r) == pytest.approx(lam ** (-(N - p) / p) * one, rel=1e-12)


@pytest.mark.parametrize("N,p", [(5, 2.0), (3, 2.0), (4, 2.5)])
def test_q_star_matches_oracle(N, p):
    assert q_star(N, p) == pytest.approx(q_star_value(N, p), rel=1e-10)


def test_q_star_below_total_mass():
    assert 0 < q_star(5, 2.0) < ball_integral(5, 2.0, math.inf)
    assert ball_integral(5, 2.0, math.inf) == pytest.approx(1.0, rel=1e-9)


def test_W_has_unit_mass_for_every_lambda():
    for lam in (0.5, 2.0):
        assert ball_integral(4, 2.5, math.inf, lam) == pytest.approx(1.0, rel=1e-9)


def test_W_is_U_rescaled_by_S():
    S = sobolev_constant(5, 2.0)
    r = np.linspace(0.0, 3.0, 7)
    np.testing.assert_allclose(W_eval(1.0, r, 5, 2.0), U_eval(ExtremalParams(5, 2.0), r * S**0.5), rtol=1e-14)


@pytest.mark.parametrize("N,p", CASES)
def test_extremal_residual_small(N, p):
    r = np.geomspace(0.01, 50.0, 60)
    assert float(np.max(extremal_residual(N, p, r))) < 1e-6


def test_cutoff_shape():
    R = 3.0
    r = np.array([0.0, R, 1.5 * R, 2 * R, 3 * R])
    eta, deta = cutoff(r, R)
    np.testing.assert_allclose(eta, [1.0, 1.0, 0.5, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(deta[[0, 1, 3, 4]], 0.0, atol=1e-15)
    assert deta[2] < 0
    eta_inf, deta_inf = cutoff(r, math.inf)
    assert np.all(eta_inf == 1.0) and np.all(deta_inf == 0.0)


def test_cutoff_is_monotone():
    eta, _ = cutoff(np.linspace(0, 10, 500), 2.0)
    assert np.all(np.diff(eta) <= 0)


@pytest.mark.parametrize(
    "params,tf",
    [
        (ProblemParams.critical(5, 2.0, 5.0, 1e-4), TestFunctionParams(5.0)),
        (ProblemParams.critical(5, 2.0, 5.0, 1e-4), TestFunctionParams(5.0, 200.0)),
        (ProblemParams.critical(4, 2.0, 6.0, 1e-4), TestFunctionParams(3.0, 100.0)),
        (ProblemParams.critical(4, 2.5, 9.0, 1e-5), TestFunctionParams(4.0, 80.0)),
    ],
)
def test_quotient_not_below_S(params, tf):
    assert rayleigh_quotient(params, tf) >= sobolev_constant(params.N, params.p)


def test_quotient_approaches_S_at_the_optimal_scale():
    P = ProblemParams.critical(5, 2.0, 5.0, 1e-8)
    S = sobolev_constant(5, 2.0)
    mu, _, psi = optimal_test_scales(P)
    gap = (rayleigh_quotient(P, TestFunctionParams(mu)) - S) / S
    assert 0 < gap < 1e-3
    assert gap < 10 * psi


def test_cutoff_radius_must_exceed_ten_bubble_scales():
    with pytest.raises(ParameterError):
        TestFunctionParams(1.0, 9.0)
    with pytest.raises(ParameterError):
        TestFunctionParams(-1.0)


def test_quotient_errors():
    with pytest.raises(RegimeError):
        rayleigh_quotient(ProblemParams(3, 2.0, 4.0, 6.0, 0.1), TestFunctionParams(1.0))
    with pytest.raises(IntegrabilityError):
        rayleigh_quotient(ProblemParams.critical(4, 2.0, 6.0, 1e-4), TestFunctionParams(3.0))
    with pytest.raises(ConstraintError):
        # a narrow bubble makes the l-term dominate
        rayleigh_quotient(ProblemParams.critical(5, 2.0, 5.0, 1e-4), TestFunctionParams(1e-3))


def test_beta_constants():
    bp, bl = beta_constants(5, 2.0, 5.0)
    assert bp > 0 and bl > 0
    assert bp == pytest.approx(10 / 3 / 2 * norm_Ls(minimizer_profile(5, 2.0), 2.0))
    with pytest.raises(IntegrabilityError):
        beta_constants(4, 2.0, 6.0)


def test_optimal_scale_minimizes_psi():
    P = ProblemParams.critical(5, 2.0, 5.0, 1e-6)
    mu, R, psi = optimal_test_scales(P)
    assert math.isinf(R)
    # the power-law minimizer of beta_p eps mu^p + beta_l mu^{-e} sits at a fixed multiple of mu
    grid = mu * np.geomspace(0.1, 10.0, 201)
    vals = [psi_value(P, m) for m in grid]
    best = grid[int(np.argmin(vals))]
    assert 0.1 * mu < best < 10 * mu
    assert psi == pytest.approx(psi_value(P, mu))


def test_optimal_scales_need_critical_regime():
    with pytest.raises(RegimeError):
        optimal_test_scales(ProblemParams(3, 2.0, 4.0, 6.0, 0.1))


@pytest.mark.parametrize(
    "params",
    [
        ProblemParams.critical(5, 2.0, 5.0, 1e-6),
        ProblemParams.critical(4, 2.0, 6.0, 1e-6),
        ProblemParams.critical(6, 2.6, 8.0, 1e-6),
    ],
)
def test_doubling_the_optimal_scale_does_not_help(params):
    mu, R, psi = optimal_test_scales(params)
    assert psi_value(params, 2 * mu, R) >= psi
    assert psi_value(params, 2 * mu, R) <= 2**params.p * psi
