"""Gauss-Legendre quadrature on [0, 1]"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from src.errors import ParameterError

MAX_POINTS = 30


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """[0, 1] 위의 q 점 규칙 (2q-1 차 다항식까지 정확)"""

    points: np.ndarray
    weights: np.ndarray

    @property
    def q(self) -> int:
        return int(self.points.size)

    @property
    def degree(self) -> int:
        return 2 * self.q - 1

    def integrate(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        """points 에서 평가한 값의 적분 (길이 1 구간 기준)"""
        return np.tensordot(values, self.weights, axes=([axis], [0]))


@lru_cache(maxsize=None)
def gauss_rule(q: int) -> QuadratureRule:
    """
    q 점 Gauss-Legendre 규칙을 [0, 1] 로 옮긴 것

    Args:
        q: 점 수 (1 <= q <= 30)

    Returns:
        QuadratureRule
    """
    if isinstance(q, bool) or int(q) != q or not (1 <= q <= MAX_POINTS):
        raise ParameterError(f"quadrature points must be an integer in [1, {MAX_POINTS}], got {q!r}")
    x, w = special.roots_legendre(int(q))
    points = 0.5 * (x + 1.0)
    weights = 0.5 * w
    points.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(points=points, weights=weights)


def subdivided_rule(q: int, depth: int) -> QuadratureRule:
    """[0, 1] 을 2^depth 등분한 각 조각에 q 점 규칙을 적용한 복합 규칙"""
    if depth < 0:
        raise ParameterError(f"subdivision depth must be >= 0, got {depth!r}")
    base = gauss_rule(q)
    pieces = 2 ** depth
    offsets = np.arange(pieces, dtype=float)[:, None]
    points = ((offsets + base.points[None, :]) / pieces).ravel()
    weights = np.tile(base.weights / pieces, pieces)
    return QuadratureRule(points=points, weights=weights)
