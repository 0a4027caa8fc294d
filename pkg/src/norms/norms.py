"""오차 노름

|||v|||_eps = (eps |v|_1^2 + ||v||^2)^{1/2}

정확해와의 오차는 요소마다 Gauss 규칙을 2^subdiv 등분 구간에 적용해서 적분합니다.
x = 0 에 붙은 두 요소는 u'' 가 커지므로 더 깊게 나눕니다.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.config import get_settings
from src.errors import ParameterError, UnsupportedOrderError
from src.fem.fe_function import FeFunction, check_compatible, dof_coordinates
from src.fem.quadrature import QuadratureRule, gauss_rule, subdivided_rule
from src.fem.reference_element import ReferenceElement
from src.mesh.meshgen import GradedMesh
from src.problem.problem import ManufacturedSolution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ErrorReport:
    energy: float
    l2: float
    h1_semi: float
    interp_l2: float
    supercloseness: float
    quadrature_points_per_element: int
    subdivision_depth: int


@dataclass(frozen=True)
class NormEquivalenceResult:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + 1e-12) + 1e-300


def energy_from_parts(eps: float, l2: float, h1_semi: float) -> float:
    return math.sqrt(eps * h1_semi * h1_semi + l2 * l2)


def interpolant(sol: ManufacturedSolution, mesh: GradedMesh, ref: ReferenceElement) -> FeFunction:
    """DOF 계수가 u(x_{i,j}) 인 Lagrange 보간"""
    coords = dof_coordinates(mesh, ref)
    return FeFunction(mesh=mesh, ref=ref, coefficients=np.asarray(sol.u(coords), dtype=float))


def _element_error_squares(
    sol: ManufacturedSolution,
    fe: FeFunction,
    rule: QuadratureRule,
    elements: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """요소별 ||u - v||^2 와 |u - v|_1^2"""
    h = np.asarray(fe.mesh.intervals)
    left = np.asarray(fe.mesh.nodes)[:-1]
    coeffs = fe.element_coefficients()
    if elements is not None:
        h, left, coeffs = h[elements], left[elements], coeffs[elements]
    xq = left[:, None] + h[:, None] * rule.points[None, :]
    values = coeffs @ fe.ref.basis(rule.points).T
    # sum_j phi_j' = 0 이므로 c_0 을 빼고 곱해도 같은 값, 상쇄 오차는 |c_j - c_0| 규모
    dphi = fe.ref.basis_derivative(rule.points)
    slopes = ((coeffs[:, 1:] - coeffs[:, :1]) @ dphi[:, 1:].T) / h[:, None]
    diff = np.asarray(sol.u(xq)) - values
    diff_prime = np.asarray(sol.u_prime(xq)) - slopes
    return h * rule.integrate(diff * diff), h * rule.integrate(diff_prime * diff_prime)


def _error_parts(
    sol: ManufacturedSolution,
    fe: FeFunction,
    q_err: int,
    subdiv: int,
    layer_subdiv: int,
) -> Tuple[float, float]:
    """(||u - v||, |u - v|_1), 왼쪽에서 오른쪽 순서로 합산"""
    l2_sq, h1_sq = _element_error_squares(sol, fe, subdivided_rule(q_err, subdiv))
    if layer_subdiv > subdiv:
        center = np.array([fe.mesh.N - 1, fe.mesh.N])
        l2_c, h1_c = _element_error_squares(sol, fe, subdivided_rule(q_err, layer_subdiv), center)
        l2_sq = l2_sq.copy()
        h1_sq = h1_sq.copy()
        l2_sq[center] = l2_c
        h1_sq[center] = h1_c
    return math.sqrt(math.fsum(l2_sq)), math.sqrt(math.fsum(h1_sq))


def _resolve_quadrature(k: int, q_err: Optional[int], subdiv: Optional[int], layer_subdiv: Optional[int]):
    settings = get_settings()
    q_err = k + 3 if q_err is None else q_err
    subdiv = settings.err_subdiv if subdiv is None else subdiv
    layer_subdiv = settings.err_layer_subdiv if layer_subdiv is None else layer_subdiv
    if q_err < k + 3:
        raise ParameterError(f"error quadrature needs q_err >= k+3 = {k + 3}, got {q_err}")
    if subdiv < 0 or layer_subdiv < 0:
        raise ParameterError("subdivision depths must be >= 0")
    return q_err, subdiv, max(subdiv, layer_subdiv)


def error_norms(
    sol: ManufacturedSolution,
    uN: FeFunction,
    eps: float,
    q_err: Optional[int] = None,
    subdiv: Optional[int] = None,
    layer_subdiv: Optional[int] = None,
    uI: Optional[FeFunction] = None,
) -> ErrorReport:
    """
    u - u_N 의 노름들과 보간 오차, supercloseness

    Args:
        sol: 정확해
        uN: 이산해
        eps: 섭동 파라미터 (energy norm 가중치)
        q_err: 요소 조각당 Gauss 점 수 (기본값: k+3)
        subdiv: 요소 분할 깊이 (기본값: FEM_ERR_SUBDIV)
        layer_subdiv: x = 0 인접 두 요소의 분할 깊이 (기본값: FEM_ERR_LAYER_SUBDIV)
        uI: 미리 만든 보간 (없으면 생성)

    Returns:
        ErrorReport
    """
    q_err, subdiv, layer_subdiv = _resolve_quadrature(uN.k, q_err, subdiv, layer_subdiv)
    if uI is None:
        uI = interpolant(sol, uN.mesh, uN.ref)

    l2, h1_semi = _error_parts(sol, uN, q_err, subdiv, layer_subdiv)
    interp_l2, _ = _error_parts(sol, uI, q_err, subdiv, layer_subdiv)
    report = ErrorReport(
        energy=energy_from_parts(eps, l2, h1_semi),
        l2=l2,
        h1_semi=h1_semi,
        interp_l2=interp_l2,
        supercloseness=supercloseness(uI, uN, eps),
        quadrature_points_per_element=q_err * 2 ** subdiv,
        subdivision_depth=subdiv,
    )
    logger.debug("errors N=%d k=%d: energy=%.3e l2=%.3e", uN.mesh.N, uN.k, report.energy, report.l2)
    return report


def interpolation_energy(
    sol: ManufacturedSolution,
    uI: FeFunction,
    eps: float,
    q_err: Optional[int] = None,
    subdiv: Optional[int] = None,
    layer_subdiv: Optional[int] = None,
) -> float:
    """|||u - u_I|||_eps"""
    q_err, subdiv, layer_subdiv = _resolve_quadrature(uI.k, q_err, subdiv, layer_subdiv)
    l2, h1_semi = _error_parts(sol, uI, q_err, subdiv, layer_subdiv)
    return energy_from_parts(eps, l2, h1_semi)


def supercloseness(uI: FeFunction, uN: FeFunction, eps: float) -> float:
    """
    |||u_I - u_N|||_eps

    두 함수 모두 V^N 이므로 k+1 점 Gauss 규칙으로 정확히 적분됩니다.
    """
    check_compatible(uI, uN)
    diff = FeFunction(mesh=uN.mesh, ref=uN.ref, coefficients=uI.coefficients - uN.coefficients)
    rule = gauss_rule(uN.k + 1)
    h = np.asarray(uN.mesh.intervals)
    values, slopes = diff.element_values(rule.points)
    l2_sq = h * rule.integrate(values * values)
    h1_sq = h * rule.integrate(slopes * slopes)
    return energy_from_parts(eps, math.sqrt(math.fsum(l2_sq)), math.sqrt(math.fsum(h1_sq)))


def _p1_nodal_range(fe: FeFunction, L: Optional[int], R: Optional[int]):
    """(노드값 e_L..e_R, 구간 h_{L+1}..h_R, x_R - x_L)"""
    if fe.k != 1:
        raise UnsupportedOrderError(f"this operation needs piecewise linear functions, got k={fe.k}")
    n = fe.mesh.N
    L = -n if L is None else L
    R = n if R is None else R
    if not (-n <= L < R <= n):
        raise ParameterError(f"need -N <= L < R <= N, got L={L}, R={R} (N={n})")
    e = fe.nodal_values()[L + n:R + n + 1]
    h = np.asarray(fe.mesh.intervals)[L + n:R + n]
    span = fe.mesh.x(R) - fe.mesh.x(L)
    return e, h, span


def p1_exact_l2(fe: FeFunction, L: Optional[int] = None, R: Optional[int] = None) -> float:
    """
    구간별 선형 함수의 (x_L, x_R) 위 L2 노름 (닫힌 형식)

        ||e||^2 = 1/3 sum_{i=L+1}^{R} h_i (e_i^2 + e_i e_{i-1} + e_{i-1}^2)

    Args:
        fe: k = 1 FeFunction
        L, R: 부호 있는 노드 인덱스 (기본값: -N, N)

    Returns:
        L2 노름
    """
    e, h, _ = _p1_nodal_range(fe, L, R)
    terms = h * (e[1:] ** 2 + e[1:] * e[:-1] + e[:-1] ** 2) / 3.0
    return math.sqrt(max(math.fsum(terms), 0.0))


def norm_equivalence_check(fe: FeFunction, L: Optional[int] = None, R: Optional[int] = None) -> NormEquivalenceResult:
    """
    sum_{i=L+1}^{R-1} hbar_i |e_i| + (h_{L+1} |e_L| + h_R |e_R|) / 2
        <= sqrt(3) (x_R - x_L)^{1/2} ||e||_{(x_L, x_R)}
    """
    e, h, span = _p1_nodal_range(fe, L, R)
    abs_e = np.abs(e)
    hbar = 0.5 * (h[:-1] + h[1:])
    lhs = math.fsum(hbar * abs_e[1:-1]) + 0.5 * (h[0] * abs_e[0] + h[-1] * abs_e[-1])
    rhs = math.sqrt(3.0) * math.sqrt(span) * p1_exact_l2(fe, L, R)
    return NormEquivalenceResult(lhs=lhs, rhs=rhs)
