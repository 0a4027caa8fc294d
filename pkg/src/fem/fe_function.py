"""V^N 의 원소 (연속 구간별 k 차 다항식)

전역 DOF 번호는 왼쪽부터: 요소 e 의 국소 노드 j 는 e*k + j.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.errors import MeshMismatchError, ParameterError
from src.fem.reference_element import ReferenceElement
from src.mesh.meshgen import GradedMesh


def num_dofs(mesh: GradedMesh, k: int) -> int:
    return mesh.num_elements * k + 1


def element_dofs(mesh: GradedMesh, k: int) -> np.ndarray:
    """(E, k+1) 전역 DOF 인덱스"""
    starts = np.arange(mesh.num_elements)[:, None] * k
    return starts + np.arange(k + 1)[None, :]


def dof_coordinates(mesh: GradedMesh, ref: ReferenceElement) -> np.ndarray:
    """x_{i,j} = x_{i-1} + h_i t_j (공유 노드는 메쉬 노드 값 그대로)"""
    nodes = np.asarray(mesh.nodes)
    local = nodes[:-1, None] + np.asarray(mesh.intervals)[:, None] * ref.nodes[None, :]
    local[:, 0] = nodes[:-1]
    return np.concatenate([local[:, : ref.k].ravel(), [nodes[-1]]])


@dataclass(frozen=True)
class SolveInfo:
    residual: float
    min_pivot_ratio: float
    defect: Optional[float] = None
    refine_steps: int = 0


@dataclass(frozen=True, eq=False)
class FeFunction:
    """메쉬, 기준 요소, 전역 DOF 계수"""

    mesh: GradedMesh
    ref: ReferenceElement
    coefficients: np.ndarray
    info: Optional[SolveInfo] = None

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=float)
        expected = num_dofs(self.mesh, self.ref.k)
        if coeffs.shape != (expected,):
            raise ParameterError(f"expected {expected} coefficients, got shape {coeffs.shape}")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def k(self) -> int:
        return self.ref.k

    def element_coefficients(self) -> np.ndarray:
        """(E, k+1)"""
        return self.coefficients[element_dofs(self.mesh, self.k)]

    def element_values(self, t) -> Tuple[np.ndarray, np.ndarray]:
        """
        모든 요소에서 국소 좌표 t 의 값과 도함수

        Returns:
            (값 (E, len(t)), x 도함수 (E, len(t)))
        """
        coeffs = self.element_coefficients()
        values = coeffs @ self.ref.basis(t).T
        dphi = self.ref.basis_derivative(t)
        slopes = ((coeffs[:, 1:] - coeffs[:, :1]) @ dphi[:, 1:].T) / np.asarray(self.mesh.intervals)[:, None]
        return values, slopes

    def locate(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """이진 탐색으로 요소 번호와 국소 좌표. 공유 노드에서는 왼쪽 요소"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(np.isnan(x)) or np.any(x < -1.0) or np.any(x > 1.0):
            raise ParameterError("evaluation points must lie in [-1, 1]")
        nodes = np.asarray(self.mesh.nodes)
        elem = np.clip(np.searchsorted(nodes, x, side="left") - 1, 0, self.mesh.num_elements - 1)
        t = (x - nodes[elem]) / np.asarray(self.mesh.intervals)[elem]
        return elem, np.clip(t, 0.0, 1.0)

    def evaluate(self, x):
        """
        u_N(x) 와 u_N'(x)

        Args:
            x: [-1, 1] 의 점 (스칼라 또는 배열)

        Returns:
            (값, 도함수). 스칼라 입력이면 float 쌍
        """
        scalar = np.ndim(x) == 0
        elem, t = self.locate(x)
        coeffs = self.element_coefficients()[elem]
        phi = self.ref.basis(t)
        dphi = self.ref.basis_derivative(t)
        values = np.sum(coeffs * phi, axis=1)
        slopes = np.sum((coeffs[:, 1:] - coeffs[:, :1]) * dphi[:, 1:], axis=1) / np.asarray(self.mesh.intervals)[elem]
        if scalar:
            return float(values[0]), float(slopes[0])
        return values, slopes

    def nodal_values(self) -> np.ndarray:
        """메쉬 노드 x_{-N..N} 에서의 값"""
        return self.coefficients[:: self.k]


def evaluate(fe: FeFunction, x):
    """FeFunction.evaluate 의 함수형"""
    return fe.evaluate(x)


def check_compatible(first: FeFunction, second: FeFunction) -> None:
    """같은 메쉬와 같은 차수인지 확인"""
    if first.k != second.k:
        raise MeshMismatchError(f"polynomial orders differ: {first.k} vs {second.k}")
    if first.mesh is second.mesh:
        return
    if first.mesh.nodes.shape != second.mesh.nodes.shape or not np.array_equal(first.mesh.nodes, second.mesh.nodes):
        raise MeshMismatchError("functions live on different meshes")
    if not np.array_equal(first.ref.nodes, second.ref.nodes):
        raise MeshMismatchError("functions use different reference node placements")
