"""Galerkin 시스템 조립

B_eps(u, v) = eps (u', v') + (a u', v) + (c u, v)

행렬은 scipy.linalg.solve_banded 배치의 (2k+1, n) band 로 저장합니다.
    band[k + r - s, s] = A[r, s]
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from src.config import get_settings
from src.errors import MeshDegeneracyError, ParameterError
from src.fem.fe_function import FeFunction, dof_coordinates, element_dofs, num_dofs
from src.fem.quadrature import QuadratureRule, gauss_rule
from src.fem.reference_element import ReferenceElement, reference_element
from src.mesh.meshgen import GradedMesh
from src.problem.problem import SingularPerturbationProblem

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """band 행렬 + 우변 (Dirichlet 적용 여부 포함)"""

    band: np.ndarray
    rhs: np.ndarray
    mesh: GradedMesh
    ref: ReferenceElement
    dof_coords: np.ndarray
    dirichlet_applied: bool = False
    # A 1 = ((c, phi_r)) 을 직접 적분한 값, Dirichlet 소거 전 band / 우변
    row_sums: Optional[np.ndarray] = None
    free_band: Optional[np.ndarray] = None
    free_rhs: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return self.ref.k

    @property
    def num_dofs(self) -> int:
        return int(self.rhs.size)

    def entry(self, r: int, s: int) -> float:
        if abs(r - s) > self.k:
            return 0.0
        return float(self.band[self.k + r - s, s])

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """A v (band 저장 그대로)"""
        v = np.asarray(v, dtype=float)
        n, k = self.num_dofs, self.k
        out = np.zeros(n)
        for d in range(-k, k + 1):
            # 대각선 d = r - s
            s_lo, s_hi = max(0, -d), min(n, n - d)
            out[s_lo + d:s_hi + d] += self.band[k + d, s_lo:s_hi] * v[s_lo:s_hi]
        return out

    def defect(self, v: np.ndarray) -> np.ndarray:
        """
        b - A v 를 차분 형태로 계산

            (A v)_r = sum_{s != r} A_rs (v_s - v_r) + (A 1)_r v_r

        확산/대류 부분은 상수를 없애므로 (A 1)_r 은 반응항 적분뿐이고,
        반올림 오차가 |A| |v| 대신 |A| |v_s - v_r| 규모로 줄어듭니다.
        Dirichlet 소거 전 정보가 없으면 rhs - matvec(v) 와 같습니다.

        Args:
            v: 계수 벡터

        Returns:
            잔차 벡터 (경계 행은 nu - v)
        """
        v = np.asarray(v, dtype=float)
        if self.row_sums is None:
            return self.rhs - self.matvec(v)
        band = self.free_band if self.dirichlet_applied else self.band
        rhs = self.free_rhs if self.dirichlet_applied else self.rhs
        if band is None or rhs is None:
            return self.rhs - self.matvec(v)
        n, k = self.num_dofs, self.k
        av = self.row_sums * v
        for d in range(-k, k + 1):
            if d == 0:
                continue
            s_lo, s_hi = max(0, -d), min(n, n - d)
            rows = slice(s_lo + d, s_hi + d)
            av[rows] += band[k + d, s_lo:s_hi] * (v[s_lo:s_hi] - v[rows])
        out = rhs - av
        if self.dirichlet_applied:
            out[0] = self.rhs[0] - v[0]
            out[-1] = self.rhs[-1] - v[-1]
        return out

    def row_scale(self) -> np.ndarray:
        """각 행의 max |A[r, s]|"""
        n, k = self.num_dofs, self.k
        scale = np.zeros(n)
        for d in range(-k, k + 1):
            s_lo, s_hi = max(0, -d), min(n, n - d)
            rows = slice(s_lo + d, s_hi + d)
            scale[rows] = np.maximum(scale[rows], np.abs(self.band[k + d, s_lo:s_hi]))
        return scale

    def to_dense(self) -> np.ndarray:
        """작은 시스템 점검용 dense 행렬"""
        n, k = self.num_dofs, self.k
        dense = np.zeros((n, n))
        for d in range(-k, k + 1):
            s_lo, s_hi = max(0, -d), min(n, n - d)
            s = np.arange(s_lo, s_hi)
            dense[s + d, s] = self.band[k + d, s_lo:s_hi]
        return dense


class Assembler:
    """요소별 국소 행렬을 벡터화해서 계산하고 band 에 누적하는 클래스"""

    def __init__(
        self,
        k: int,
        quad_points: Optional[int] = None,
        node_scheme: Optional[str] = None,
    ):
        """
        Args:
            k: 다항식 차수
            quad_points: 요소당 Gauss 점 수 (기본값: k + FEM_QUAD_EXTRA)
            node_scheme: 기준 요소 노드 배치 (기본값: FEM_NODE_SCHEME)
        """
        settings = get_settings()
        self.ref = reference_element(k, node_scheme or settings.node_scheme)
        q = quad_points if quad_points is not None else k + settings.quad_extra
        if q < k + 1:
            raise ParameterError(f"quadrature needs at least k+1 = {k + 1} points, got {q}")
        self.quad: QuadratureRule = gauss_rule(q)
        self._phi = self.ref.basis(self.quad.points)
        self._dphi = self.ref.basis_derivative(self.quad.points)

    @property
    def k(self) -> int:
        return self.ref.k

    def _element_points(self, mesh: GradedMesh) -> np.ndarray:
        h = np.asarray(mesh.intervals)
        if np.any(h <= 0.0) or not np.all(np.isfinite(h)):
            raise MeshDegeneracyError("mesh has a non-positive or non-finite interval length")
        return np.asarray(mesh.nodes)[:-1, None] + h[:, None] * self.quad.points[None, :]

    def local_matrices(self, problem: SingularPerturbationProblem, mesh: GradedMesh) -> np.ndarray:
        """
        요소 행렬 (E, k+1, k+1), 인덱스 [e, r, s] = B(phi_s, phi_r)

        Args:
            problem: 경계값 문제
            mesh: 메쉬

        Returns:
            국소 행렬 배열
        """
        h = np.asarray(mesh.intervals)
        xq = self._element_points(mesh)
        w, phi, dphi = self.quad.weights, self._phi, self._dphi
        a_q = np.asarray(problem.a(xq), dtype=float)
        c_q = np.asarray(problem.c(xq), dtype=float)

        stiffness = np.einsum("m,mr,ms->rs", w, dphi, dphi)
        local = (problem.eps / h)[:, None, None] * stiffness[None, :, :]
        local += np.einsum("m,em,mr,ms->ers", w, a_q, phi, dphi)
        local += h[:, None, None] * np.einsum("m,em,mr,ms->ers", w, c_q, phi, phi)
        return local

    def local_row_sums(self, problem: SingularPerturbationProblem, mesh: GradedMesh) -> np.ndarray:
        """요소 (E, k+1) = (c, phi_r). sum_s phi_s = 1 이라 국소 행렬의 행 합과 같음"""
        h = np.asarray(mesh.intervals)
        c_q = np.asarray(problem.c(self._element_points(mesh)), dtype=float)
        return h[:, None] * np.einsum("m,em,mr->er", self.quad.weights, c_q, self._phi)

    def local_loads(self, problem: SingularPerturbationProblem, mesh: GradedMesh) -> np.ndarray:
        """요소 우변 (E, k+1) = (f, phi_r)"""
        h = np.asarray(mesh.intervals)
        f_q = np.asarray(problem.f(self._element_points(mesh)), dtype=float)
        return h[:, None] * np.einsum("m,em,mr->er", self.quad.weights, f_q, self._phi)

    def assemble(self, problem: SingularPerturbationProblem, mesh: GradedMesh) -> AssembledSystem:
        """
        전체 시스템 조립 (Dirichlet 미적용)

        Args:
            problem: 경계값 문제
            mesh: 메쉬

        Returns:
            AssembledSystem
        """
        k = self.k
        n = num_dofs(mesh, k)
        dofs = element_dofs(mesh, k)
        rows = np.broadcast_to(dofs[:, :, None], (dofs.shape[0], k + 1, k + 1))
        cols = np.broadcast_to(dofs[:, None, :], rows.shape)

        band = np.zeros((2 * k + 1, n))
        np.add.at(band, (k + rows - cols, cols), self.local_matrices(problem, mesh))
        rhs = np.zeros(n)
        np.add.at(rhs, dofs, self.local_loads(problem, mesh))
        row_sums = np.zeros(n)
        np.add.at(row_sums, dofs, self.local_row_sums(problem, mesh))

        if not (np.all(np.isfinite(band)) and np.all(np.isfinite(rhs))):
            raise MeshDegeneracyError("assembled system contains non-finite entries")
        logger.debug("assembled %s: k=%d, N=%d, dofs=%d, q=%d", problem.name, k, mesh.N, n, self.quad.q)
        return AssembledSystem(
            band=band, rhs=rhs, mesh=mesh, ref=self.ref,
            dof_coords=dof_coordinates(mesh, self.ref), row_sums=row_sums,
        )


def assemble(
    problem: SingularPerturbationProblem,
    mesh: GradedMesh,
    k: int,
    quad_points: Optional[int] = None,
) -> AssembledSystem:
    """
    조립 간편 함수

    Args:
        problem: 경계값 문제
        mesh: 메쉬
        k: 다항식 차수
        quad_points: 요소당 Gauss 점 수

    Returns:
        AssembledSystem (Dirichlet 미적용)
    """
    return Assembler(k, quad_points=quad_points).assemble(problem, mesh)


def apply_dirichlet(system: AssembledSystem, nu_left: float, nu_right: float) -> AssembledSystem:
    """
    경계 DOF 제거: 경계 열은 우변으로 옮기고 경계 행은 항등 행으로

    원본 system 은 바꾸지 않고 새 AssembledSystem 을 돌려줍니다.
    """
    if system.dirichlet_applied:
        raise ParameterError("Dirichlet conditions were already applied to this system")
    band = system.band.copy()
    rhs = system.rhs.copy()
    n, k = system.num_dofs, system.k
    for col, value in ((0, float(nu_left)), (n - 1, float(nu_right))):
        for r in range(max(0, col - k), min(n, col + k + 1)):
            rhs[r] -= band[k + r - col, col] * value
            band[k + r - col, col] = 0.0
        for s in range(max(0, col - k), min(n, col + k + 1)):
            band[k + col - s, s] = 0.0
        band[k, col] = 1.0
        rhs[col] = value
    return replace(system, band=band, rhs=rhs, dirichlet_applied=True,
                   free_band=system.band, free_rhs=system.rhs)


def galerkin_residual(system: AssembledSystem, uN: FeFunction) -> float:
    """
    Dirichlet 적용 전 시스템에서 내부 행의 max |(A u - b)_r| / max(1, |b|_inf)

    u_N 이 Galerkin 해라면 라운드오프 수준이어야 합니다.
    """
    if system.dirichlet_applied:
        raise ParameterError("galerkin_residual needs the system before Dirichlet elimination")
    residual = system.matvec(uN.coefficients) - system.rhs
    scale = max(1.0, float(np.max(np.abs(system.rhs))))
    return float(np.max(np.abs(residual[1:-1]))) / scale


def bilinear_form(
    problem: SingularPerturbationProblem,
    v: FeFunction,
    w: FeFunction,
    quad_points: Optional[int] = None,
) -> float:
    """B_eps(v, w) 를 요소별 Gauss 적분으로 계산"""
    q = quad_points if quad_points is not None else max(v.k, w.k) + get_settings().quad_extra
    rule = gauss_rule(q)
    h = np.asarray(v.mesh.intervals)
    xq = np.asarray(v.mesh.nodes)[:-1, None] + h[:, None] * rule.points[None, :]
    v_val, v_der = v.element_values(rule.points)
    w_val, w_der = w.element_values(rule.points)
    integrand = (problem.eps * v_der * w_der
                 + np.asarray(problem.a(xq)) * v_der * w_val
                 + np.asarray(problem.c(xq)) * v_val * w_val)
    return math.fsum(h * rule.integrate(integrand))
