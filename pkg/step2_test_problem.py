"""Boundary Value Problem 테스트"""

import math

import mpmath
import numpy as np
import pytest

from src.errors import CoercivityError, ParameterError, ProblemValidationError
from src.problem.examples import build_problem, patch_problem, problem_names, sun_stynes, symmetric_problem
from src.problem.problem import (
    SingularPerturbationProblem,
    derivative_envelope_check,
    validate,
    validation_grid,
)

LAM = 0.005


def _mp_u(eps, lam):
    def u(x):
        s = x * x + eps
        k_const = (1 + eps) ** (lam / 2)
        return s ** (lam / 2) + x * s ** ((lam - 1) / 2) - k_const * (1 + x / mpmath.sqrt(1 + eps))
    return u


@pytest.mark.parametrize("eps", [1e-2, 1e-4, 1e-8])
def test_sun_stynes_derivatives_match_extended_precision(eps):
    _, sol = sun_stynes(eps, LAM)
    u_mp = _mp_u(mpmath.mpf(eps), mpmath.mpf(LAM))
    with mpmath.workdps(40):
        for x in (-0.7, -1e-3, 0.0, 2e-5, 0.3, 0.95):
            xm = mpmath.mpf(x)
            assert float(sol.u(np.array([x]))[0]) == pytest.approx(float(u_mp(xm)), rel=1e-12, abs=1e-14)
            d1 = float(mpmath.diff(u_mp, xm, 1))
            d2 = float(mpmath.diff(u_mp, xm, 2))
            assert float(sol.u_prime(np.array([x]))[0]) == pytest.approx(d1, rel=1e-9)
            assert float(sol.u_double_prime(np.array([x]))[0]) == pytest.approx(d2, rel=1e-8, abs=1e-12)


def test_sun_stynes_boundary_values_vanish():
    for eps in (1.0, 1e-4, 1e-12):
        _, sol = sun_stynes(eps, LAM)
        values = sol.u(np.array([-1.0, 1.0]))
        np.testing.assert_allclose(values, 0.0, atol=1e-14)


def test_sun_stynes_right_hand_side_is_consistent():
    """f = -eps u'' + a u' + c u 를 mpmath 로 재계산"""
    eps = 1e-4
    problem, _ = sun_stynes(eps, LAM)
    u_mp = _mp_u(mpmath.mpf(eps), mpmath.mpf(LAM))
    with mpmath.workdps(40):
        for x in (-0.5, 0.01, 0.8):
            xm = mpmath.mpf(x)
            f_mp = (-eps * mpmath.diff(u_mp, xm, 2)
                    - xm * (1 + xm ** 2) * mpmath.diff(u_mp, xm, 1)
                    + LAM * (1 + xm ** 3) * u_mp(xm))
            assert float(problem.f(np.array([x]))[0]) == pytest.approx(float(f_mp), rel=1e-8)


def test_sun_stynes_tiny_x_has_no_underflow():
    _, sol = sun_stynes(1e-12, LAM)
    values = sol.u_double_prime(np.array([1e-200, -1e-300, 0.0]))
    assert np.all(np.isfinite(values))


def test_validate_sun_stynes():
    problem, _ = sun_stynes(1e-8, LAM)
    spectral = validate(problem)
    assert spectral.lambda_bar == pytest.approx(LAM)
    assert spectral.lam == pytest.approx(LAM)
    assert spectral.gamma > 0.0


EPS_GRID = [10.0 ** -p for p in range(0, 15, 2)]
LAM_GRID = [10.0 ** -p for p in range(13, 0, -2)]


def _finite_difference_error(fn, dfn, x, step, scale):
    """중심 차분과 닫힌 형식의 차이를 1e-6 * (|도함수| + scale) 로 나눈 값"""
    fd = (fn(x + step) - fn(x - step)) / (2.0 * step)
    exact = dfn(x)
    return np.abs(fd - exact) / (np.abs(exact) + scale)


@pytest.mark.parametrize("eps", EPS_GRID)
@pytest.mark.parametrize("lam", LAM_GRID)
def test_manufactured_solution_invariants_on_full_grid(eps, lam):
    _, sol = sun_stynes(eps, lam)
    np.testing.assert_allclose(sol.u(np.array([-1.0, 1.0])), 0.0, atol=1e-12)

    rng = np.random.default_rng(7)
    # 절반은 [-1, 1] 균등, 절반은 layer 폭 sqrt(eps) 근처
    layer = np.sqrt(eps) * 10.0 ** rng.uniform(-2.0, 2.0, size=50) * rng.choice([-1.0, 1.0], size=50)
    x = np.concatenate([rng.uniform(-1.0, 1.0, size=50), np.clip(layer, -1.0, 1.0)])
    width = np.sqrt(eps) + np.abs(x)
    step = 1e-6 * width
    first = _finite_difference_error(sol.u, sol.u_prime, x, step, 1.0 / width)
    second = _finite_difference_error(sol.u_prime, sol.u_double_prime, x, step, 1.0 / width ** 2)
    assert np.max(first) <= 1e-6, x[np.argmax(first)]
    assert np.max(second) <= 1e-6, x[np.argmax(second)]


@pytest.mark.parametrize("eps", [1.0, 1e-6, 1e-14])
@pytest.mark.parametrize("lam", [1e-13, 1e-5, 0.1, 1.0])
def test_validate_is_idempotent_and_coercive(eps, lam):
    problem, _ = sun_stynes(eps, lam)
    first = validate(problem)
    second = validate(problem)
    assert first == second
    assert validate(problem, lam=first.lam) == first
    assert first.gamma > 0.0
    assert first.lambda_bar == pytest.approx(lam)


def test_validate_reports_every_violation():
    problem = SingularPerturbationProblem(
        eps=1e-4,
        a=lambda x: np.asarray(x, dtype=float),
        a_prime=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        c=lambda x: np.asarray(x, dtype=float) - 0.5,
        f=lambda x: np.ones_like(np.asarray(x, dtype=float)),
    )
    with pytest.raises(ProblemValidationError) as info:
        validate(problem)
    # b <= 0, c < 0, c(0) <= 0
    assert len(info.value.violations) >= 3
    assert not isinstance(info.value, CoercivityError)


def test_validate_rejects_non_coercive_problem():
    """b(x) = exp(-2x^2) 이면 c - a'/2 가 x = +-1 근처에서 음수"""
    problem = SingularPerturbationProblem(
        eps=1e-4,
        a=lambda x: -np.asarray(x, dtype=float) * np.exp(-2.0 * np.asarray(x, dtype=float) ** 2),
        a_prime=lambda x: -np.exp(-2.0 * np.asarray(x, dtype=float) ** 2) * (1.0 - 4.0 * np.asarray(x, dtype=float) ** 2),
        c=lambda x: 0.01 * np.ones_like(np.asarray(x, dtype=float)),
        f=lambda x: np.ones_like(np.asarray(x, dtype=float)),
    )
    with pytest.raises(CoercivityError):
        validate(problem)


def test_validate_rejects_lambda_above_lambda_bar():
    problem, _ = sun_stynes(1e-4, LAM)
    with pytest.raises(ProblemValidationError):
        validate(problem, lam=2 * LAM)
    assert validate(problem, lam=LAM / 2).lam == pytest.approx(LAM / 2)


def test_problem_construction_errors():
    with pytest.raises(ParameterError):
        sun_stynes(0.0, LAM)
    with pytest.raises(ParameterError):
        sun_stynes(1e-4, -1.0)
    with pytest.raises(ParameterError):
        SingularPerturbationProblem(eps=1e-4, a=np.negative, a_prime=np.negative, c=np.abs, f=np.abs, x0=0.5)


def test_validation_grid_contains_turning_point():
    grid = validation_grid(1000)
    assert 0.0 in grid
    assert grid[0] == -1.0 and grid[-1] == 1.0
    assert np.all(np.diff(grid) > 0.0)
    with pytest.raises(ParameterError):
        validation_grid(10)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_derivative_envelope_is_eps_uniform(order):
    constants = []
    for eps in (1e-4, 1e-8, 1e-12):
        _, sol = sun_stynes(eps, LAM)
        constants.append(derivative_envelope_check(sol, eps, LAM, order))
    assert all(math.isfinite(c) and 0.0 < c < 50.0 for c in constants)
    assert max(constants) / min(constants) < 2.0


def test_patch_problem_data():
    problem, sol = patch_problem()
    x = np.linspace(-1.0, 1.0, 11)
    lhs = -problem.eps * sol.u_double_prime(x) + problem.a(x) * sol.u_prime(x) + problem.c(x) * sol.u(x)
    np.testing.assert_allclose(lhs, problem.f(x), rtol=1e-14)
    np.testing.assert_allclose(problem.f(x), 3.0 + x * x, rtol=1e-14)
    assert validate(problem).lambda_bar == pytest.approx(1.0)


def test_registry():
    assert problem_names() == ["patch", "sun-stynes", "symmetric"]
    problem, sol = build_problem("symmetric", 1e-4, LAM)
    assert sol is None
    assert validate(problem).gamma > 0.0
    assert symmetric_problem(1e-4, LAM)[0].name == "symmetric"
    with pytest.raises(ParameterError):
        build_problem("unknown", 1e-4, LAM)


if __name__ == "__main__":
    import sys

    print("=" * 60)
    print("Boundary Value Problem 테스트")
    print("=" * 60)
    sys.exit(pytest.main([__file__, "-v"]))
