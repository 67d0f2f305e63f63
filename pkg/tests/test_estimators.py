import subprocess
import sys

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from groundstate_lab import GroundstateSolver, PowerLawFitter


def test_solver_params_and_clone():
    est = GroundstateSolver(N=3, p=2.0, q=4.0, l=6.0, eps=0.01, kind="full")
    params = est.get_params()
    assert params["eps"] == 0.01 and params["kind"] == "full"
    twin = clone(est)
    assert twin.get_params() == params
    assert not hasattr(twin, "profile_")


def test_solver_fit_predict():
    est = GroundstateSolver(N=3, p=2.0, q=4.0, l=6.0, eps=0.01, kind="full").fit()
    assert est.a_ == pytest.approx(0.4177806828, rel=1e-8)
    u = est.predict([[0.5], [1.0], [5.0]])
    assert u.shape == (3,)
    assert np.all(np.diff(u) < 0)
    assert est.identities_.pohozaev_residual < 1e-6


def test_solver_predict_before_fit():
    with pytest.raises(NotFittedError):
        GroundstateSolver().predict([1.0])


def test_power_law_fitter():
    eps = np.geomspace(1e-6, 1e-2, 10)
    y = 3.0 * eps**0.25
    fitter = PowerLawFitter(window=(1e-6, 1e-2)).fit(eps.reshape(-1, 1), y)
    assert fitter.exponent_ == pytest.approx(0.25, abs=1e-12)
    assert fitter.prefactor_ == pytest.approx(3.0, rel=1e-10)
    np.testing.assert_allclose(fitter.predict(eps), y, rtol=1e-10)
    assert fitter.score(eps, y) == pytest.approx(1.0)
    assert clone(fitter).get_params() == fitter.get_params()


def test_power_law_fitter_with_log_power():
    eps = np.geomspace(1e-8, 1e-3, 10)
    y = eps**0.5 * np.log(1 / eps)
    fitter = PowerLawFitter(fixed_log_power=1.0, window=(1e-8, 1e-3)).fit(eps, y)
    assert fitter.exponent_ == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(fitter.predict(eps), y, rtol=1e-10)


def test_power_law_fitter_shape_mismatch():
    with pytest.raises(ValueError):
        PowerLawFitter().fit(np.ones(5), np.ones(4))


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "groundstate_lab", "rates", "--out", str(tmp_path), "--set", "problem.q=4", "--set", "problem.l=6"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "rates.json").is_file()
