"""Mesh Generator 테스트"""

import math

import mpmath
import numpy as np
import pytest

from src.errors import ParameterError
from src.mesh.inequalities import check_scalar_inequalities, check_two_power_bounds
from src.mesh.meshgen import (
    MeshParams,
    bracket,
    build_mesh,
    format_nodes,
    kappa,
    kappa_bounds,
    mesh_function_property,
    phi,
    phi_derivative,
    uniform_mesh,
    verify_mesh_lemmas,
)

LAM = 0.005


def _mp_phi(xi, alpha, eps):
    """mpmath 50 자리로 계산한 phi"""
    with mpmath.workdps(50):
        a, e, x = mpmath.mpf(alpha), mpmath.mpf(eps), mpmath.mpf(xi)
        b = (1 + mpmath.sqrt(e)) ** a - e ** (a / 2)
        return (e ** (a / 2) + x * b) ** (1 / a) - mpmath.sqrt(e)


def _mp_phi_prime(xi, alpha, eps):
    with mpmath.workdps(50):
        a, e, x = mpmath.mpf(alpha), mpmath.mpf(eps), mpmath.mpf(xi)
        b = (1 + mpmath.sqrt(e)) ** a - e ** (a / 2)
        return b / a * (e ** (a / 2) + x * b) ** ((1 - a) / a)


def test_phi_endpoints_and_oddness():
    """phi(0) = 0, phi(+-1) = +-1, phi(-xi) = -phi(xi)"""
    params = MeshParams(N=16, alpha=0.0025, eps=1e-8)
    assert phi(0.0, params) == 0.0
    assert phi(1.0, params) == 1.0
    assert phi(-1.0, params) == -1.0
    for xi in (0.1, 0.37, 0.9):
        assert phi(-xi, params) == -phi(xi, params)


@pytest.mark.parametrize("alpha,eps", [(0.0025, 1e-14), (0.1, 1e-4), (0.5, 1e-2), (1e-6, 1e-8)])
def test_phi_matches_extended_precision(alpha, eps):
    params = MeshParams(N=8, alpha=alpha, eps=eps)
    for xi in (1e-6, 0.01, 0.25, 0.5, 0.999):
        expected = float(_mp_phi(xi, alpha, eps))
        assert phi(xi, params) == pytest.approx(expected, rel=1e-10)
        slope = float(_mp_phi_prime(xi, alpha, eps))
        assert phi_derivative(xi, params) == pytest.approx(slope, rel=1e-10)
        assert phi_derivative(-xi, params) == phi_derivative(xi, params)


def test_bracket_without_cancellation():
    """alpha 가 아주 작아도 B 의 유효숫자 유지"""
    for alpha in (1e-10, 1e-6, 1e-3):
        with mpmath.workdps(60):
            a, e = mpmath.mpf(alpha), mpmath.mpf(1e-8)
            expected = float((1 + mpmath.sqrt(e)) ** a - e ** (a / 2))
        assert bracket(alpha, 1e-8) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("alpha", [1.0, 0.5, 0.1, 1e-3, 1e-8])
@pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-8, 1e-14])
def test_kappa_bounds(alpha, eps):
    lower, upper = kappa_bounds(alpha, eps)
    value = kappa(alpha, eps)
    assert lower * (1 - 1e-12) <= value <= upper * (1 + 1e-12)


def test_alpha_one_is_uniform():
    mesh = uniform_mesh(8)
    np.testing.assert_allclose(mesh.nodes, np.linspace(-1.0, 1.0, 17), atol=1e-15, rtol=0)
    assert np.allclose(mesh.intervals, 1.0 / 8)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("eps", [1.0, 1e-4, 1e-8, 1e-14])
def test_graded_mesh_is_odd_and_monotone(k, eps):
    alpha = min(LAM / (k + 1), 1.0 / (2 * (k + 1)))
    mesh = build_mesh(MeshParams(N=64, alpha=alpha, eps=eps))
    x = np.asarray(mesh.nodes)
    assert x.size == 129
    assert x[0] == -1.0 and x[64] == 0.0 and x[-1] == 1.0
    assert np.array_equal(x, -x[::-1])
    assert np.all(np.diff(x) > 0.0)
    # 노드가 0 근처로 모임
    assert mesh.h_at(1) < mesh.h_at(64)
    assert mesh.hbar_at(0) == pytest.approx(0.5 * (mesh.h_at(0) + mesh.h_at(1)))


def test_mesh_is_read_only():
    mesh = build_mesh(MeshParams(N=8, alpha=0.1, eps=1e-4))
    with pytest.raises(ValueError):
        mesh.nodes[0] = 0.5


@pytest.mark.parametrize(
    "kwargs",
    [
        {"N": 1, "alpha": 0.5, "eps": 1e-4},
        {"N": 8, "alpha": 0.0, "eps": 1e-4},
        {"N": 8, "alpha": 1.5, "eps": 1e-4},
        {"N": 8, "alpha": 0.5, "eps": 0.0},
        {"N": 8, "alpha": 0.5, "eps": 2.0},
    ],
)
def test_invalid_parameters(kwargs):
    with pytest.raises(ParameterError):
        MeshParams(**kwargs)


def test_phi_outside_domain():
    params = MeshParams(N=8, alpha=0.5, eps=1e-4)
    with pytest.raises(ParameterError):
        phi(1.5, params)
    with pytest.raises(ParameterError):
        phi_derivative(float("nan"), params)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("eps", [1e-2, 1e-8, 1e-14])
def test_mesh_function_property_is_bounded(k, eps):
    """alpha <= lambda/k 이면 (phi')^k (phi + sqrt eps)^{lambda-k} <= 2 kappa^k"""
    alpha = LAM / k
    params = MeshParams(N=8, alpha=alpha, eps=eps)
    value = mesh_function_property(params, LAM, k)
    assert 0.0 < value <= 2.0 * kappa(alpha, eps) ** k * (1 + 1e-10)


@pytest.mark.parametrize("k", [1, 2])
def test_mesh_lemmas_pass_on_rule_alpha(k):
    alpha = min(LAM / (k + 1), 1.0 / (2 * (k + 1)))
    mesh = build_mesh(MeshParams(N=64, alpha=alpha, eps=1e-8))
    report = verify_mesh_lemmas(mesh, LAM, k)
    assert report.passed, [(c.name, c.detail) for c in report.checks]
    h_check = report.get("h_i <= C h")
    assert h_check.fitted <= 2.0 * mesh.kappa


@pytest.mark.parametrize("alpha,eps", [(1e-3, 1e-14), (1e-3, 1e-8), (0.1, 1e-4), (0.5, 1.0)])
def test_phi_monotone_on_random_samples(alpha, eps):
    """임의 10^4 점에서 xi 가 커지면 phi 도 커짐"""
    params = MeshParams(N=8, alpha=alpha, eps=eps)
    rng = np.random.default_rng(11)
    xi = np.unique(rng.uniform(-1.0, 1.0, size=10_000))
    values = np.array([phi(float(t), params) for t in xi])
    assert np.all(np.diff(values) > 0.0)


@pytest.mark.parametrize("alpha,eps", [(1e-3, 1e-14), (0.01, 1e-6), (0.3, 1e-2), (1e-8, 1e-10)])
def test_phi_oddness_is_bit_exact(alpha, eps):
    params = MeshParams(N=8, alpha=alpha, eps=eps)
    rng = np.random.default_rng(12)
    for xi in rng.uniform(0.0, 1.0, size=1000):
        assert phi(-float(xi), params) == -phi(float(xi), params)
        assert phi_derivative(-float(xi), params) == phi_derivative(float(xi), params)


def test_kappa_bounds_on_log_grid():
    """50 x 50 log 격자 (alpha in [1e-10, 1], eps in [1e-14, 1])"""
    failures = []
    for alpha in np.logspace(-10.0, 0.0, 50):
        for eps in np.logspace(-14.0, 0.0, 50):
            lower, upper = kappa_bounds(float(alpha), float(eps))
            value = kappa(float(alpha), float(eps))
            if not (lower * (1 - 1e-12) <= value <= upper * (1 + 1e-12)):
                failures.append((alpha, eps, value))
    assert not failures, failures[:5]


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("eps", [1.0, 1e-4, 1e-8, 1e-14])
def test_mesh_lemmas_pass_for_small_alpha(k, eps):
    """alpha = lambda/(k+1) 처럼 작은 alpha 에서도 kappa^p 로 나눈 상수는 상한 이하"""
    alpha = min(LAM / (k + 1), 1.0 / (2 * (k + 1)))
    mesh = build_mesh(MeshParams(N=64, alpha=alpha, eps=eps))
    report = verify_mesh_lemmas(mesh, LAM, k)
    assert report.passed, [(c.name, c.detail) for c in report.checks]
    for check in report.checks:
        if check.status == "pass":
            assert check.normalized <= 10.0, (check.name, check.normalized)


def test_mesh_lemma_ceiling_is_relative_to_kappa():
    """k = 4, eps = 1e-14 에서 원래 상수는 kappa^4 규모라 1e3 을 넘지만 정규화 값은 작음"""
    alpha = LAM / 5
    mesh = build_mesh(MeshParams(N=64, alpha=alpha, eps=1e-14))
    report = verify_mesh_lemmas(mesh, LAM, 4)
    check = report.get("mesh function property")
    assert check.fitted > 1e3
    assert check.normalized < 10.0
    assert check.status == "pass"
    tight = verify_mesh_lemmas(mesh, LAM, 4, ceiling=1e-3)
    assert tight.get("mesh function property").status == "fail"


def test_mesh_lemmas_not_applicable_for_large_alpha():
    mesh = build_mesh(MeshParams(N=32, alpha=0.9, eps=1e-6))
    report = verify_mesh_lemmas(mesh, LAM, 2)
    assert report.get("mesh function property").status == "not applicable"
    assert report.get("h_i <= C h").status == "pass"


def test_format_nodes_has_17_digits():
    mesh = uniform_mesh(2)
    lines = format_nodes(mesh).splitlines()
    assert len(lines) == 5
    assert lines[0] == f"{-1.0:.16e}"
    assert float(lines[3]) == 0.5


def test_scalar_inequalities_hold():
    results = check_scalar_inequalities(samples=1000, seed=0)
    assert len(results) == 5
    for name, result in results.items():
        assert result.holds, f"{name}: {result.max_violation:.3e}"


def test_inequality_check_detects_violation():
    """alpha > 1 에서는 2^alpha - 1 <= alpha 가 깨짐"""
    result = check_two_power_bounds(np.array([2.0, 3.0]))
    assert not result.holds


if __name__ == "__main__":
    import sys

    print("=" * 60)
    print("Mesh Generator 테스트")
    print("=" * 60)
    sys.exit(pytest.main([__file__, "-v"]))
