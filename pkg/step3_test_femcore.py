"""Finite Element Core 테스트 (기준 요소, quadrature, 조립, 풀이, 평가)"""

import numpy as np
import pytest

from src.errors import MeshMismatchError, ParameterError, SolverError
from src.fem.assembler import Assembler, apply_dirichlet, assemble, bilinear_form, galerkin_residual
from src.fem.fe_function import FeFunction, check_compatible, dof_coordinates, evaluate, num_dofs
from src.fem.quadrature import gauss_rule, subdivided_rule
from src.fem.reference_element import reference_element, reference_nodes
from src.mesh.meshgen import MeshParams, build_mesh, uniform_mesh
from src.norms.norms import interpolant
from src.problem.examples import patch_problem, sun_stynes, symmetric_problem
from src.problem.problem import ManufacturedSolution, SingularPerturbationProblem, validate
from src.solver.banded_solver import BandedLUSolver, _row_permutation, equilibrate, solve

LAM = 0.005


def _const(value):
    return lambda x: value * np.ones_like(np.asarray(x, dtype=float))


def _laplace_problem(eps=1.0, c=0.0, f=0.0, nu_left=0.0, nu_right=0.0):
    # a = -x * 0 은 turning point 가정 밖이므로 검증 없이 조립만 한다
    return SingularPerturbationProblem(
        eps=eps, a=_const(0.0), a_prime=_const(0.0), c=_const(c), f=_const(f),
        nu_left=nu_left, nu_right=nu_right,
    )


# ---------------------------------------------------------------------------
# 기준 요소 / quadrature
# ---------------------------------------------------------------------------

def test_linear_reference_element():
    ref = reference_element(1)
    np.testing.assert_allclose(ref.nodes, [0.0, 1.0])
    t = np.array([0.0, 0.25, 1.0])
    np.testing.assert_allclose(ref.basis(t), np.column_stack([1 - t, t]), atol=1e-15)
    np.testing.assert_allclose(ref.basis_derivative(t), [[-1.0, 1.0]] * 3, atol=1e-14)


def test_quadratic_lobatto_nodes():
    np.testing.assert_allclose(reference_nodes(2), [0.0, 0.5, 1.0], atol=1e-15)


@pytest.mark.parametrize("k", range(1, 11))
@pytest.mark.parametrize("scheme", ["lobatto", "equispaced"])
def test_kronecker_and_partition_of_unity(k, scheme):
    ref = reference_element(k, scheme)
    np.testing.assert_allclose(ref.basis(ref.nodes), np.eye(k + 1), atol=1e-11)
    t = np.linspace(0.0, 1.0, 37)
    np.testing.assert_allclose(ref.basis(t).sum(axis=1), 1.0, atol=1e-11)
    np.testing.assert_allclose(ref.basis_derivative(t).sum(axis=1), 0.0, atol=1e-9)


def test_partition_of_unity_at_point():
    assert reference_element(4).basis(0.3).sum() == pytest.approx(1.0, abs=1e-13)


def test_reference_element_errors():
    for k in (0, 11, 2.5):
        with pytest.raises(ParameterError):
            reference_element(k)
    with pytest.raises(ParameterError):
        reference_element(3, "chebyshev")


def test_gauss_rules():
    rule = gauss_rule(1)
    np.testing.assert_allclose(rule.points, [0.5])
    np.testing.assert_allclose(rule.weights, [1.0])
    assert gauss_rule(2).integrate(gauss_rule(2).points ** 3) == pytest.approx(0.25, abs=1e-15)
    assert gauss_rule(5).integrate(gauss_rule(5).points ** 9) == pytest.approx(0.1, abs=1e-14)
    for q in (1, 7, 30):
        assert gauss_rule(q).weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.all((gauss_rule(q).points > 0) & (gauss_rule(q).points < 1))
    with pytest.raises(ParameterError):
        gauss_rule(0)
    with pytest.raises(ParameterError):
        gauss_rule(31)


def test_subdivided_rule():
    rule = subdivided_rule(3, 2)
    assert rule.q == 12
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert rule.integrate(np.abs(rule.points - 0.5)) == pytest.approx(0.25, abs=1e-15)


# ---------------------------------------------------------------------------
# 조립
# ---------------------------------------------------------------------------

def test_p1_stiffness_row():
    """eps=1, a=c=0, h=1: 내부 행 (-1, 2, -1)"""
    mesh = uniform_mesh(2)
    # 균등 2N=4 구간 (h=1/2) 에서는 (-2, 4, -2); h=1 로 환산
    system = assemble(_laplace_problem(), mesh, 1)
    dense = system.to_dense() * mesh.intervals[0]
    np.testing.assert_allclose(dense[2, 1:4], [-1.0, 2.0, -1.0], atol=1e-14)


def test_p1_mass_row():
    mesh = uniform_mesh(2)
    problem = _laplace_problem(eps=1e-300, c=1.0)
    dense = assemble(problem, mesh, 1).to_dense() / mesh.intervals[0]
    np.testing.assert_allclose(dense[2, 1:4], [1 / 6, 4 / 6, 1 / 6], atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_band_structure(k):
    problem, _ = sun_stynes(1e-4, LAM)
    mesh = build_mesh(MeshParams(N=8, alpha=0.1, eps=1e-4))
    system = assemble(problem, mesh, k)
    n = num_dofs(mesh, k)
    assert system.band.shape == (2 * k + 1, n)
    assert system.rhs.shape == (n,)
    dense = system.to_dense()
    rows, cols = np.nonzero(dense)
    assert np.max(np.abs(rows - cols)) <= k
    # matvec 는 dense 곱과 같다
    v = np.random.default_rng(0).normal(size=n)
    np.testing.assert_allclose(system.matvec(v), dense @ v, rtol=1e-12, atol=1e-12)


def test_dof_coordinates():
    mesh = build_mesh(MeshParams(N=4, alpha=0.3, eps=1e-4))
    ref = reference_element(3)
    coords = dof_coordinates(mesh, ref)
    assert coords.size == num_dofs(mesh, 3)
    np.testing.assert_array_equal(coords[::3], mesh.nodes)
    assert np.all(np.diff(coords) > 0.0)


def test_apply_dirichlet():
    problem, _ = sun_stynes(1e-4, LAM)
    mesh = build_mesh(MeshParams(N=8, alpha=0.1, eps=1e-4))
    raw = assemble(problem, mesh, 2)
    system = apply_dirichlet(raw, 0.0, 0.0)
    dense = system.to_dense()
    n = system.num_dofs
    np.testing.assert_array_equal(dense[0], np.eye(n)[0])
    np.testing.assert_array_equal(dense[-1], np.eye(n)[-1])
    np.testing.assert_array_equal(dense[1:-1, 0], 0.0)
    assert system.rhs[0] == 0.0 and system.rhs[-1] == 0.0
    # 원본은 그대로
    assert not raw.dirichlet_applied
    assert raw.entry(0, 1) != 0.0
    assert system.entry(0, 1) == 0.0
    with pytest.raises(ParameterError):
        apply_dirichlet(system, 0.0, 0.0)


def test_harmonic_solution_is_linear():
    """eps=1, a=c=f=0, u(-1)=0, u(1)=1 -> u_N = (x+1)/2 at DOFs"""
    mesh = build_mesh(MeshParams(N=4, alpha=0.4, eps=1e-2))
    problem = _laplace_problem(nu_left=0.0, nu_right=1.0)
    for k in (1, 3):
        system = apply_dirichlet(assemble(problem, mesh, k), 0.0, 1.0)
        uN = solve(system)
        coords = dof_coordinates(mesh, uN.ref)
        np.testing.assert_allclose(uN.coefficients, (coords + 1.0) / 2.0, atol=1e-11)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("alpha,eps", [(1.0, 1.0), (0.2, 1e-6)])
def test_patch_test(k, alpha, eps):
    problem, sol = patch_problem(eps)
    mesh = build_mesh(MeshParams(N=8, alpha=alpha, eps=eps))
    assembler = Assembler(k)
    uN = BandedLUSolver().solve(apply_dirichlet(assembler.assemble(problem, mesh), 0.0, 0.0))
    exact = sol.u(dof_coordinates(mesh, assembler.ref))
    np.testing.assert_allclose(uN.coefficients, exact, atol=1e-10)
    assert uN.info.residual <= 1e-10


def test_zero_data_gives_zero_solution():
    problem = SingularPerturbationProblem(
        eps=1e-4, a=lambda x: -np.asarray(x) * (1 + np.asarray(x) ** 2),
        a_prime=lambda x: -(1 + 3 * np.asarray(x) ** 2), c=_const(LAM), f=_const(0.0),
    )
    mesh = build_mesh(MeshParams(N=8, alpha=0.1, eps=1e-4))
    uN = solve(apply_dirichlet(assemble(problem, mesh, 2), 0.0, 0.0))
    np.testing.assert_array_equal(uN.coefficients, 0.0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_symmetric_data_gives_even_solution(k):
    problem, _ = symmetric_problem(1e-6, LAM)
    mesh = build_mesh(MeshParams(N=16, alpha=0.05, eps=1e-6))
    uN = solve(apply_dirichlet(assemble(problem, mesh, k), 0.0, 0.0))
    np.testing.assert_allclose(uN.coefficients, uN.coefficients[::-1], rtol=1e-7, atol=1e-10)


def test_galerkin_orthogonality_and_coercivity():
    problem, _ = sun_stynes(1e-6, LAM)
    gamma = validate(problem).gamma
    mesh = build_mesh(MeshParams(N=16, alpha=LAM / 3, eps=1e-6))
    raw = assemble(problem, mesh, 2)
    uN = solve(apply_dirichlet(raw, 0.0, 0.0))
    assert galerkin_residual(raw, uN) <= 1e-8

    rng = np.random.default_rng(3)
    rule = gauss_rule(3)
    for _ in range(20):
        coeffs = rng.normal(size=uN.coefficients.size)
        coeffs[0] = coeffs[-1] = 0.0
        v = FeFunction(mesh=mesh, ref=uN.ref, coefficients=coeffs)
        values, _ = v.element_values(rule.points)
        l2_sq = float(np.sum(mesh.intervals * rule.integrate(values ** 2)))
        assert bilinear_form(problem, v, v) >= gamma * l2_sq * (1 - 1e-2)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_defect_matches_plain_residual(k):
    """차분 형태 잔차는 b - A v 와 반올림 수준까지 같음"""
    problem, _ = sun_stynes(1e-4, LAM)
    mesh = build_mesh(MeshParams(N=8, alpha=LAM / (k + 1), eps=1e-4))
    raw = assemble(problem, mesh, k)
    system = apply_dirichlet(raw, 0.0, 0.0)
    v = np.random.default_rng(5).normal(size=raw.num_dofs)
    scale = float(np.max(raw.row_scale()))
    np.testing.assert_allclose(raw.defect(v), raw.rhs - raw.matvec(v), rtol=0, atol=1e-12 * scale)
    v[0] = v[-1] = 0.0
    np.testing.assert_allclose(system.defect(v), system.rhs - system.matvec(v), rtol=0, atol=1e-12 * scale)


def test_row_sums_equal_reaction_integral():
    """A 1 = ((c, phi_r)): 확산/대류 부분의 행 합은 0"""
    problem, _ = sun_stynes(1e-6, LAM)
    mesh = build_mesh(MeshParams(N=8, alpha=0.1, eps=1e-6))
    raw = assemble(problem, mesh, 3)
    np.testing.assert_allclose(raw.row_sums, raw.matvec(np.ones(raw.num_dofs)),
                               rtol=0, atol=1e-12 * float(np.max(raw.row_scale())))


def test_equilibration_uses_powers_of_two():
    problem, _ = sun_stynes(1e-8, LAM)
    mesh = build_mesh(MeshParams(N=8, alpha=LAM / 3, eps=1e-8))
    system = apply_dirichlet(assemble(problem, mesh, 2), 0.0, 0.0)
    scaled, R, C = equilibrate(system.band, 2)
    for s in (R, C):
        exponents = np.log2(s)
        np.testing.assert_array_equal(exponents, np.round(exponents))
    dense = system.to_dense()
    rebuilt = np.zeros_like(dense)
    for d in range(-2, 3):
        for s in range(max(0, -d), min(dense.shape[0], dense.shape[0] - d)):
            rebuilt[s + d, s] = scaled[2 + d, s]
    np.testing.assert_array_equal(rebuilt, R[:, None] * dense * C[None, :])
    assert np.max(np.abs(scaled)) <= 2.0


def test_row_permutation_from_pivots():
    # 0 번 위치에 2 번 행, 그 다음 1 번 위치에 2 번 자리(원래 0 번)가 옴
    np.testing.assert_array_equal(_row_permutation(np.array([2, 2, 2])), [2, 0, 1])
    np.testing.assert_array_equal(_row_permutation(np.array([0, 1, 2])), [0, 1, 2])
    # LAPACK 1-based 표기
    np.testing.assert_array_equal(_row_permutation(np.array([3, 3, 3])), [2, 0, 1])


def test_refinement_reports_small_defect():
    problem, _ = sun_stynes(1.0, LAM)
    mesh = build_mesh(MeshParams(N=256, alpha=LAM / 4, eps=1.0))
    system = apply_dirichlet(assemble(problem, mesh, 3), 0.0, 0.0)
    plain = BandedLUSolver(refine_steps=0).solve(system)
    refined = BandedLUSolver(refine_steps=2).solve(system)
    assert refined.info.refine_steps == 2
    assert refined.info.defect <= plain.info.defect * (1 + 1e-12) + 1e-300
    assert refined.info.defect <= 1e-11
    np.testing.assert_allclose(refined.coefficients, plain.coefficients, rtol=0, atol=1e-8)
    with pytest.raises(ParameterError):
        BandedLUSolver(refine_steps=-1)


def test_pivot_threshold_raises():
    """경계 행의 pivot 비율은 1 이므로 임계값 10 이면 거절"""
    problem, _ = sun_stynes(1e-4, LAM)
    system = apply_dirichlet(assemble(problem, uniform_mesh(4), 1), 0.0, 0.0)
    with pytest.raises(SolverError):
        BandedLUSolver(pivot_tol=10.0).solve(system)


def test_solve_requires_boundary_conditions():
    problem, _ = sun_stynes(1e-4, LAM)
    system = assemble(problem, uniform_mesh(4), 1)
    with pytest.raises(ParameterError):
        solve(system)


# ---------------------------------------------------------------------------
# FeFunction
# ---------------------------------------------------------------------------

def test_evaluate_at_dof_nodes():
    mesh = build_mesh(MeshParams(N=4, alpha=0.3, eps=1e-4))
    ref = reference_element(3)
    coeffs = np.random.default_rng(4).normal(size=num_dofs(mesh, 3))
    fe = FeFunction(mesh=mesh, ref=ref, coefficients=coeffs)
    coords = dof_coordinates(mesh, ref)
    values, _ = fe.evaluate(coords)
    np.testing.assert_allclose(values, coeffs, atol=1e-12)


def test_constant_function():
    mesh = build_mesh(MeshParams(N=4, alpha=0.5, eps=1e-2))
    fe = FeFunction(mesh=mesh, ref=reference_element(2), coefficients=np.ones(num_dofs(mesh, 2)))
    x = np.linspace(-1.0, 1.0, 41)
    values, slopes = evaluate(fe, x)
    np.testing.assert_allclose(values, 1.0, atol=1e-13)
    np.testing.assert_allclose(slopes, 0.0, atol=1e-8)
    value, slope = fe.evaluate(0.0)
    assert isinstance(value, float) and value == pytest.approx(1.0)


def test_interpolant_derivative_of_square():
    """P1 보간의 요소 중점 도함수는 2x (x^2 에 대해 정확)"""
    sol = ManufacturedSolution(u=lambda x: np.asarray(x) ** 2, u_prime=lambda x: 2 * np.asarray(x),
                               u_double_prime=lambda x: 2 * np.ones_like(np.asarray(x)))
    mesh = build_mesh(MeshParams(N=8, alpha=0.5, eps=1e-2))
    uI = interpolant(sol, mesh, reference_element(1))
    mid = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
    _, slopes = uI.evaluate(mid)
    np.testing.assert_allclose(slopes, 2 * mid, atol=1e-12)


def test_evaluate_outside_domain():
    fe = FeFunction(mesh=uniform_mesh(2), ref=reference_element(1), coefficients=np.zeros(5))
    with pytest.raises(ParameterError):
        fe.evaluate(1.5)
    with pytest.raises(ParameterError):
        FeFunction(mesh=uniform_mesh(2), ref=reference_element(1), coefficients=np.zeros(4))


def test_check_compatible():
    mesh_a = build_mesh(MeshParams(N=4, alpha=0.3, eps=1e-4))
    mesh_b = build_mesh(MeshParams(N=4, alpha=0.5, eps=1e-4))
    fa = FeFunction(mesh=mesh_a, ref=reference_element(1), coefficients=np.zeros(9))
    fb = FeFunction(mesh=mesh_b, ref=reference_element(1), coefficients=np.zeros(9))
    fc = FeFunction(mesh=mesh_a, ref=reference_element(2), coefficients=np.zeros(17))
    check_compatible(fa, fa)
    with pytest.raises(MeshMismatchError):
        check_compatible(fa, fb)
    with pytest.raises(MeshMismatchError):
        check_compatible(fa, fc)


if __name__ == "__main__":
    import sys

    print("=" * 60)
    print("Finite Element Core 테스트")
    print("=" * 60)
    sys.exit(pytest.main([__file__, "-v"]))
