import time

import pytest

from groundstate_lab import (
    EquationKind,
    ProblemParams,
    default_eps_grid,
    find_groundstate,
    run_sweep,
)

_CRITERIA: dict[int, tuple[bool, str]] = {}
BUILD_SECONDS: dict[str, float] = {}


def _timed(name, fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    BUILD_SECONDS[name] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="session")
def criterion():
    """Record one acceptance criterion outcome and print it."""

    def record(number: int, passed: bool, detail: str) -> None:
        _CRITERIA[number] = (bool(passed), detail)
        print(f"CRITERION {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"CRITERION {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def critical5_params():
    return ProblemParams.critical(5, 2.0, 5.0)


@pytest.fixture(scope="session")
def critical5_sweep(critical5_params):
    """Four-decade sweep of the N=5, p=2, l=5 critical problem."""
    return _timed("critical5_sweep", run_sweep, critical5_params, default_eps_grid(critical5_params), jobs=4)


@pytest.fixture(scope="session")
def subcritical_params():
    return ProblemParams(3, 2.0, 4.0, 6.0)


@pytest.fixture(scope="session")
def subcritical_sweep(subcritical_params):
    grid = default_eps_grid(subcritical_params, lo=1e-4, hi=1e-1)
    return _timed("subcritical_sweep", run_sweep, subcritical_params, grid, jobs=4)


@pytest.fixture(scope="session")
def canonical_limit(subcritical_params):
    """Groundstate of the canonical limit equation (positive mass, no l-term)."""
    return _timed("canonical_limit", find_groundstate, subcritical_params, EquationKind.POSITIVE_MASS)


@pytest.fixture(scope="session")
def supercritical_params():
    return ProblemParams(3, 2.0, 7.0, 9.0)


@pytest.fixture(scope="session")
def zero_mass_groundstate(supercritical_params):
    return _timed("zero_mass_groundstate", find_groundstate, supercritical_params, EquationKind.ZERO_MASS)


@pytest.fixture(scope="session")
def supercritical_sweep(supercritical_params):
    grid = default_eps_grid(supercritical_params, points_per_decade=4)
    return _timed("supercritical_sweep", run_sweep, supercritical_params, grid, jobs=4)


@pytest.fixture(scope="session")
def full_small():
    """Subcritical full-problem groundstate at a moderate eps."""
    return find_groundstate(ProblemParams(3, 2.0, 4.0, 6.0, 0.01), EquationKind.FULL)

