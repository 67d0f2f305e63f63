import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groundstate_lab import (
    DegenerateFitError,
    EquationKind,
    ExtremalParams,
    NoSolutionError,
    ParameterError,
    ProblemParams,
    RegimeError,
    U_eval,
    W_eval,
    barrier_check,
    blow_up_norm_check,
    canonical_rescale,
    concentration_lambda,
    decay_exponent_check,
    default_eps_grid,
    fit_power_law,
    minimizer_profile,
    norm_Ls,
    pointwise_bound_checks,
    predicted_rates,
    q_star,
    radial_residual,
    run_sweep,
    sandwich_constants,
)
from groundstate_lab.asymptotics import EXTRA_COLUMNS, TABLE_COLUMNS
from groundstate_lab.closed_form import ball_integral


def test_canonical_rescale_central_value(full_small):
    v = canonical_rescale(full_small, 0.01)
    assert v.kind is EquationKind.CANONICAL
    assert v.a == pytest.approx(full_small.a * 0.01 ** (-0.5), rel=1e-15)


def test_canonical_rescale_solves_canonical_equation(full_small):
    v = canonical_rescale(full_small, 0.01)
    r = np.geomspace(0.05, 5.0, 40)
    assert float(np.max(radial_residual(v, r))) < 1e-3


def test_full_profile_residual(full_small):
    r = np.geomspace(0.1, 50.0, 40)
    assert float(np.max(radial_residual(full_small, r))) < 1e-4


def test_canonical_rescale_rejects_nonpositive_eps(full_small):
    with pytest.raises(ParameterError):
        canonical_rescale(full_small, 0.0)


def test_radial_residual_order_argument(full_small):
    with pytest.raises(ValueError):
        radial_residual(full_small, [1.0], order=3)


@settings(max_examples=8, deadline=None)
@given(lam=st.floats(min_value=0.3, max_value=5.0))
def test_concentration_lambda_recovers_dilation(lam):
    Q = q_star(5, 2.0)
    found, v = concentration_lambda(minimizer_profile(5, 2.0, lam), Q)
    assert found == pytest.approx(lam, rel=1e-8)
    r = np.array([0.0, 0.5, 1.0, 3.0])
    np.testing.assert_allclose(v.u_at(r), W_eval(1.0, r, 5, 2.0), rtol=1e-8)


def test_concentration_ball_mass_equals_threshold():
    Q = q_star(4, 2.5)
    _, v = concentration_lambda(minimizer_profile(4, 2.5, 3.0), Q)
    assert ball_integral(4, 2.5, 1.0) == pytest.approx(Q, rel=1e-12)
    assert v.info["lambda"] == pytest.approx(3.0, rel=1e-8)


def test_concentration_lambda_monotone_in_dilation():
    Q = q_star(5, 2.0)
    lams = [concentration_lambda(minimizer_profile(5, 2.0, s), Q)[0] for s in (0.5, 1.0, 2.0, 4.0)]
    assert np.all(np.diff(lams) > 0)


def test_concentration_lambda_without_enough_mass():
    w = minimizer_profile(5, 2.0).rescaled(1.0, 0.5)
    with pytest.raises(NoSolutionError):
        concentration_lambda(w, q_star(5, 2.0))


@settings(max_examples=40)
@given(
    e=st.floats(min_value=-2.0, max_value=2.0),
    C=st.floats(min_value=1e-3, max_value=1e3),
    k=st.sampled_from([None, 1.0, -0.5]),
)
def test_fit_recovers_exact_power_law(e, C, k):
    eps = np.geomspace(1e-8, 1e-3, 12)
    y = C * eps**e * (1.0 if k is None else np.log(1 / eps) ** k)
    fit = fit_power_law((eps, y), "y", fixed_log_power=k, window=(1e-8, 1e-3))
    assert fit.exponent == pytest.approx(e, abs=1e-9)
    assert fit.prefactor == pytest.approx(C, rel=1e-8)
    assert fit.r_squared > 0.999999 or abs(e) < 1e-6
    assert fit.n_points == 12


def test_fit_default_window_uses_smallest_half():
    eps = np.geomspace(1e-6, 1e-1, 20)
    fit = fit_power_law((eps, eps**0.5), "y")
    assert fit.window[0] == pytest.approx(1e-6)
    assert fit.window[1] < 1e-3


def test_fit_flags_poor_fits():
    eps = np.geomspace(1e-6, 1e-2, 12)
    y = eps**0.5 * (1 + 0.5 * np.sin(np.arange(12)))
    assert fit_power_law((eps, y), "y", window=(1e-6, 1e-2)).flagged


def test_fit_degenerate_cases():
    eps = np.geomspace(1e-5, 1e-1, 8)
    with pytest.raises(DegenerateFitError):
        fit_power_law((eps[:3], eps[:3]), "y", window=(1e-5, 1e-1))
    narrow = np.geomspace(1e-5, 5e-5, 10)
    with pytest.raises(DegenerateFitError):
        fit_power_law((narrow, narrow), "y", window=(1e-5, 5e-5))
    with pytest.raises(DegenerateFitError):
        fit_power_law((eps, -eps), "y", window=(1e-5, 1e-1))


MU = np.geomspace(1e-3, 1e2, 30)
R = np.geomspace(1e-3, 1e3, 40)


@pytest.mark.parametrize("N,gamma", [(3, 1.0), (4, 2.0), (5, 3.0)])
def test_barrier_identity_for_p_two(N, gamma):
    rep = barrier_check(N, 2.0, gamma, MU, R)
    assert not rep.skipped and rep.equality_expected
    assert rep.max_equality_residual < 1e-13


@pytest.mark.parametrize("N,p", [(4, 2.5), (5, 3.0), (6, 2.2)])
def test_barrier_inequality_above_two(N, p):
    rep = barrier_check(N, p, (N - p) / (p - 1), MU, R)
    assert not rep.skipped and rep.holds


def test_barrier_rejections():
    assert barrier_check(3, 1.5, 3.0, MU, R).skipped
    # N-1-2 gamma (p-1) > 0
    assert barrier_check(5, 2.0, 1.0, MU, R).skipped
    # gamma (N-p-gamma (p-1)) > 0
    assert barrier_check(5, 2.0, 2.5, MU, R).skipped


def test_pointwise_bounds(full_small):
    out = pointwise_bound_checks(full_small)
    assert out["finite"]
    assert 0 < out["C_ni"] < 10 and 0 < out["C_s"] < 10
    assert out["sup_norm"] == pytest.approx(full_small.a)


def test_decay_exponent(zero_mass_groundstate, full_small):
    out = decay_exponent_check(zero_mass_groundstate)
    assert out["passes"]
    assert 0 < out["c_lower"] <= out["c_upper"] < 1.1 * out["c_lower"]
    with pytest.raises(ValueError):
        decay_exponent_check(full_small)


def test_critical_sweep_columns(critical5_sweep):
    row = critical5_sweep.rows()[0]
    assert set(TABLE_COLUMNS) | set(EXTRA_COLUMNS) <= set(row)
    assert critical5_sweep.n_failed == 0


def test_blow_up_profiles_stay_below_twice_the_bubble(critical5_sweep):
    _, v0 = critical5_sweep.column("v0")
    U0 = float(U_eval(ExtremalParams(5, 2.0), 0.0))
    assert np.all(v0 <= 2 * U0)
    assert v0[0] == pytest.approx(U0, rel=0.05)


def test_blow_up_norms_bounded_below_sqrt_n(critical5_sweep):
    out = blow_up_norm_check(critical5_sweep)
    assert out["branch"] == "below_sqrt_n"
    assert out["bounded"]


def test_blow_up_check_needs_critical_sweep(subcritical_sweep):
    with pytest.raises(RegimeError):
        blow_up_norm_check(subcritical_sweep)
    with pytest.raises(RegimeError):
        sandwich_constants(subcritical_sweep)


def test_default_grids():
    sub = default_eps_grid(ProblemParams(3, 2.0, 4.0, 6.0))
    assert sub[0] == pytest.approx(1e-1) and sub[-1] == pytest.approx(1e-5)
    assert np.all(np.diff(sub) < 0)
    assert sub.size == 33
    crit = default_eps_grid(ProblemParams.critical(5, 2.0, 5.0), points_per_decade=2)
    assert crit[0] == pytest.approx(1e-5) and crit[-1] == pytest.approx(1e-9)
    eq = default_eps_grid(ProblemParams.critical(4, 2.0, 6.0))
    assert eq[-1] == pytest.approx(1e-10)
    sup = default_eps_grid(ProblemParams(3, 2.0, 7.0, 9.0))
    assert sup[0] == pytest.approx(1e-3) and sup[-1] == pytest.approx(1e-11)


def test_sweep_is_independent_of_worker_count():
    P = ProblemParams(3, 2.0, 4.0, 6.0)
    grid = [1e-1, 3e-2, 1e-2]
    one = run_sweep(P, grid, jobs=1).rows()
    two = run_sweep(P, grid, jobs=2).rows()
    np.testing.assert_equal(one, two)
    assert [r["eps"] for r in one] == grid


def test_sweep_rejects_bad_grid():
    with pytest.raises(ParameterError):
        run_sweep(ProblemParams(3, 2.0, 4.0, 6.0), [1e-2, -1.0])


def test_subcritical_norms_follow_scaling(subcritical_sweep):
    eps, np_ = subcritical_sweep.column("norm_p")
    _, nq = subcritical_sweep.column("norm_q")
    # u = eps^{1/2} v(eps^{1/2} x) in three dimensions: ||u||_2^2 ~ eps^{-1/2}, ||u||_4^4 ~ eps^{1/2}
    assert fit_power_law((eps, np_), "p", window=(1e-4, 1e-3)).exponent == pytest.approx(-0.5, abs=0.02)
    assert fit_power_law((eps, nq), "q", window=(1e-4, 1e-3)).exponent == pytest.approx(0.5, abs=0.02)


def test_minimizer_profile_norm_is_one():
    assert norm_Ls(minimizer_profile(3, 2.0), 6.0) == pytest.approx(1.0, rel=1e-9)
    assert math.isfinite(q_star(3, 2.0))


@pytest.mark.slow
def test_critical_branch_above_sqrt_n():
    P = ProblemParams.critical(6, 2.6, 8.0)
    table = run_sweep(P, default_eps_grid(P, points_per_decade=2), jobs=4)
    assert table.n_failed == 0
    assert blow_up_norm_check(table)["bounded_below"]
    rates = predicted_rates(P)
    eps, lam = table.column("lambda")
    _, sig = table.column("sigma")
    # local slopes over the smallest half decade approach the predicted exponents
    slope_lam = math.log(lam[1] / lam[0]) / math.log(eps[1] / eps[0])
    slope_sig = math.log(sig[1] / sig[0]) / math.log(eps[1] / eps[0])
    assert slope_lam == pytest.approx(rates.lambda_exponent, rel=0.10)
    assert slope_sig == pytest.approx(rates.sigma_exponent, rel=0.10)
