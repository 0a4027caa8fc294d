"""[0, 1] 위의 k 차 Lagrange 기준 요소

기저 계수는 shifted Legendre Vandermonde 의 역행렬로 구합니다. (k <= 10 에서 조건수 양호)
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

from src.errors import ParameterError

SCHEME_LOBATTO = "lobatto"
SCHEME_EQUISPACED = "equispaced"
MAX_ORDER = 10


def reference_nodes(k: int, scheme: str = SCHEME_LOBATTO) -> np.ndarray:
    """0 = t_0 < ... < t_k = 1"""
    if scheme == SCHEME_EQUISPACED or k == 1:
        return np.linspace(0.0, 1.0, k + 1)
    if scheme == SCHEME_LOBATTO:
        # Gauss-Lobatto: 양 끝점 + P_k' 의 근
        interior = np.sort(legendre.Legendre.basis(k).deriv().roots().real)
        return np.concatenate([[0.0], 0.5 * (interior + 1.0), [1.0]])
    raise ParameterError(f"unknown node scheme {scheme!r} (use '{SCHEME_LOBATTO}' or '{SCHEME_EQUISPACED}')")


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    """k 차 Lagrange 기저 phi_j (phi_j(t_m) = delta_jm)"""

    k: int
    nodes: np.ndarray
    scheme: str
    coefficients: np.ndarray  # (k+1, k+1), 열 j 가 phi_j 의 Legendre 계수

    def basis(self, t) -> np.ndarray:
        """
        기저 함수 값

        Args:
            t: [0, 1] 의 점 (스칼라 또는 배열)

        Returns:
            shape (len(t), k+1) 배열
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return legendre.legvander(2.0 * t - 1.0, self.k) @ self.coefficients

    def basis_derivative(self, t) -> np.ndarray:
        """d phi_j / dt, shape (len(t), k+1)"""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        d_coeffs = legendre.legder(self.coefficients, axis=0) * 2.0
        return legendre.legvander(2.0 * t - 1.0, self.k - 1) @ d_coeffs


@lru_cache(maxsize=None)
def reference_element(k: int, scheme: str = SCHEME_LOBATTO) -> ReferenceElement:
    """
    k 차 기준 요소 생성

    Args:
        k: 다항식 차수 (1 <= k <= 10)
        scheme: 내부 노드 배치 (lobatto | equispaced)

    Returns:
        ReferenceElement
    """
    if isinstance(k, bool) or int(k) != k or not (1 <= k <= MAX_ORDER):
        raise ParameterError(f"polynomial order k must be an integer in [1, {MAX_ORDER}], got {k!r}")
    k = int(k)
    nodes = reference_nodes(k, scheme)
    vander = legendre.legvander(2.0 * nodes - 1.0, k)
    coefficients = np.linalg.solve(vander, np.eye(k + 1))
    nodes.flags.writeable = False
    coefficients.flags.writeable = False
    return ReferenceElement(k=k, nodes=nodes, scheme=scheme, coefficients=coefficients)
