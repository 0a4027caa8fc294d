"""오차 노름 테스트"""

import math

import numpy as np
import pytest

from src.errors import MeshMismatchError, ParameterError, UnsupportedOrderError
from src.fem.fe_function import FeFunction, num_dofs
from src.fem.quadrature import gauss_rule
from src.fem.reference_element import reference_element
from src.mesh.meshgen import MeshParams, build_mesh, uniform_mesh
from src.norms.norms import (
    energy_from_parts, error_norms, interpolant, interpolation_energy,
    norm_equivalence_check, p1_exact_l2, supercloseness,
)
from src.problem.examples import sun_stynes
from src.problem.problem import ManufacturedSolution

LAM = 0.005


def _polynomial(power):
    return ManufacturedSolution(
        u=lambda x: np.asarray(x, dtype=float) ** power,
        u_prime=lambda x: power * np.asarray(x, dtype=float) ** (power - 1),
        u_double_prime=lambda x: power * (power - 1) * np.asarray(x, dtype=float) ** max(power - 2, 0),
    )


def _random_p1(mesh, seed):
    coeffs = np.random.default_rng(seed).normal(size=num_dofs(mesh, 1))
    return FeFunction(mesh=mesh, ref=reference_element(1), coefficients=coeffs)


def test_energy_from_parts():
    assert energy_from_parts(0.25, 3.0, 2.0) == pytest.approx(math.sqrt(0.25 * 4 + 9))
    assert energy_from_parts(1e-8, 0.0, 0.0) == 0.0


@pytest.mark.parametrize("eps", [1.0, 1e-4, 1e-8])
def test_error_of_zero_approximation(eps):
    """u = x, u_N = 0: ||u|| = sqrt(2/3), |u|_1 = sqrt(2)"""
    mesh = build_mesh(MeshParams(N=8, alpha=0.2, eps=eps))
    ref = reference_element(2)
    zero = FeFunction(mesh=mesh, ref=ref, coefficients=np.zeros(num_dofs(mesh, 2)))
    report = error_norms(_polynomial(1), zero, eps)
    assert report.l2 == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-12)
    assert report.h1_semi == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert report.energy == pytest.approx(math.sqrt(2.0 * eps + 2.0 / 3.0), rel=1e-12)
    # 보간은 정확하므로 u_I - u_N 도 같은 값
    assert report.interp_l2 == pytest.approx(0.0, abs=1e-14)
    assert report.supercloseness == pytest.approx(report.energy, rel=1e-12)
    assert report.quadrature_points_per_element == 5 * 2 ** report.subdivision_depth


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_interpolant_reproduces_polynomials(k):
    mesh = build_mesh(MeshParams(N=8, alpha=0.3, eps=1e-4))
    sol = _polynomial(k)
    uI = interpolant(sol, mesh, reference_element(k))
    assert interpolation_energy(sol, uI, 1e-4) == pytest.approx(0.0, abs=1e-10)


def test_interpolation_error_decreases_with_n():
    eps = 1e-8
    errors = []
    for n in (16, 32, 64):
        _, sol = sun_stynes(eps, LAM)
        mesh = build_mesh(MeshParams(N=n, alpha=LAM / 2, eps=eps))
        errors.append(interpolation_energy(sol, interpolant(sol, mesh, reference_element(1)), eps))
    assert errors[0] > errors[1] > errors[2]
    assert errors[1] / errors[2] > 1.5


def _rule_alpha(k):
    return min(LAM / (k + 1), 1.0 / (2 * (k + 1)))


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("eps", [1e-4, 1e-8])
def test_interpolation_rates(k, eps):
    """L2 는 k+1, energy 는 k 차 (N = 256 -> 512)"""
    _, sol = sun_stynes(eps, LAM)
    ref = reference_element(k)
    reports = []
    for n in (256, 512):
        mesh = build_mesh(MeshParams(N=n, alpha=_rule_alpha(k), eps=eps))
        reports.append(error_norms(sol, interpolant(sol, mesh, ref), eps))
    l2_rate = math.log2(reports[0].l2 / reports[1].l2)
    energy_rate = math.log2(reports[0].energy / reports[1].energy)
    assert l2_rate == pytest.approx(k + 1, abs=0.1)
    assert energy_rate == pytest.approx(k, abs=0.1)


@pytest.mark.parametrize("k", [1, 3])
@pytest.mark.parametrize("eps", [1e-2, 1e-8])
def test_error_measurement_is_stable_under_finer_quadrature(k, eps):
    """요소 분할을 한 단계 더 해도 측정 오차 변화는 0.5% 미만"""
    _, sol = sun_stynes(eps, LAM)
    mesh = build_mesh(MeshParams(N=64, alpha=_rule_alpha(k), eps=eps))
    uI = interpolant(sol, mesh, reference_element(k))
    base = error_norms(sol, uI, eps)
    finer = error_norms(sol, uI, eps, subdiv=base.subdivision_depth + 1, layer_subdiv=6)
    assert finer.subdivision_depth == base.subdivision_depth + 1
    for name in ("energy", "l2", "h1_semi"):
        before, after = getattr(base, name), getattr(finer, name)
        assert abs(after - before) / before < 0.005, name


def test_error_quadrature_order_is_enforced():
    mesh = uniform_mesh(4)
    fe = FeFunction(mesh=mesh, ref=reference_element(2), coefficients=np.zeros(num_dofs(mesh, 2)))
    with pytest.raises(ParameterError):
        error_norms(_polynomial(1), fe, 1.0, q_err=4)
    with pytest.raises(ParameterError):
        error_norms(_polynomial(1), fe, 1.0, subdiv=-1)


def test_supercloseness_requires_same_space():
    mesh = uniform_mesh(4)
    a = FeFunction(mesh=mesh, ref=reference_element(1), coefficients=np.zeros(9))
    b = FeFunction(mesh=mesh, ref=reference_element(2), coefficients=np.zeros(17))
    with pytest.raises(MeshMismatchError):
        supercloseness(a, b, 1.0)
    assert supercloseness(a, a, 1.0) == 0.0


def test_p1_hat_function():
    """h = 1/2 의 hat 함수: ||phi||^2 = 2h/3"""
    mesh = uniform_mesh(2)
    hat = FeFunction(mesh=mesh, ref=reference_element(1), coefficients=[0.0, 0.0, 1.0, 0.0, 0.0])
    assert p1_exact_l2(hat) == pytest.approx(math.sqrt(1.0 / 3.0), rel=1e-14)
    assert p1_exact_l2(hat, 0, 1) == pytest.approx(math.sqrt(1.0 / 6.0), rel=1e-14)
    assert p1_exact_l2(hat, 1, 2) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_p1_exact_l2_matches_quadrature(seed):
    mesh = build_mesh(MeshParams(N=16, alpha=0.1, eps=1e-6))
    fe = _random_p1(mesh, seed)
    rule = gauss_rule(2)
    values, _ = fe.element_values(rule.points)
    expected = math.sqrt(math.fsum(np.asarray(mesh.intervals) * rule.integrate(values ** 2)))
    assert p1_exact_l2(fe) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_norm_equivalence_random(seed):
    mesh = build_mesh(MeshParams(N=16, alpha=0.1, eps=1e-8))
    fe = _random_p1(mesh, seed)
    rng = np.random.default_rng(100 + seed)
    L, R = sorted(rng.choice(np.arange(-16, 17), size=2, replace=False))
    assert norm_equivalence_check(fe).holds
    result = norm_equivalence_check(fe, int(L), int(R))
    assert result.holds
    assert result.lhs >= 0.0


def test_p1_operations_reject_higher_order():
    mesh = uniform_mesh(4)
    fe = FeFunction(mesh=mesh, ref=reference_element(2), coefficients=np.zeros(17))
    with pytest.raises(UnsupportedOrderError):
        p1_exact_l2(fe)
    with pytest.raises(UnsupportedOrderError):
        norm_equivalence_check(fe)


def test_p1_index_range():
    fe = _random_p1(uniform_mesh(4), 0)
    for L, R in ((0, 0), (2, 1), (-5, 0), (0, 5)):
        with pytest.raises(ParameterError):
            p1_exact_l2(fe, L, R)


if __name__ == "__main__":
    import sys

    print("=" * 60)
    print("오차 노름 테스트")
    print("=" * 60)
    sys.exit(pytest.main([__file__, "-v"]))
