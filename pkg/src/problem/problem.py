"""Turning point 경계값 문제 정의와 검증

    -eps u'' + a(x) u' + c(x) u = f(x)   in (-1, 1)
    u(-1) = nu_left,  u(1) = nu_right
    a(x) = -x b(x),  b > 0,  c >= 0,  c(0) > 0

계수 함수는 numpy 배열을 받아 같은 모양의 배열을 돌려주는 순수 함수여야 합니다.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from src.errors import CoercivityError, ParameterError, ProblemValidationError

logger = logging.getLogger(__name__)

ScalarFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SingularPerturbationProblem:
    """경계값 문제 (계수, 우변, 경계값)"""

    eps: float
    a: ScalarFunction
    a_prime: ScalarFunction
    c: ScalarFunction
    f: ScalarFunction
    nu_left: float = 0.0
    nu_right: float = 0.0
    x0: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        if not (0.0 < self.eps <= 1.0):
            raise ParameterError(f"eps must lie in (0, 1], got {self.eps!r}")
        if self.x0 != 0.0:
            raise ParameterError("only turning points at x0 = 0 are supported")


@dataclass(frozen=True)
class SpectralParams:
    lambda_bar: float
    lam: float
    gamma: float


@dataclass(frozen=True)
class ManufacturedSolution:
    """폐형식 정확해와 1, 2계 도함수"""

    u: ScalarFunction
    u_prime: ScalarFunction
    u_double_prime: ScalarFunction

    def derivative(self, order: int) -> ScalarFunction:
        if order == 0:
            return self.u
        if order == 1:
            return self.u_prime
        if order == 2:
            return self.u_double_prime
        raise ParameterError(f"derivative order must be 0, 1 or 2, got {order!r}")


def validation_grid(grid_size: int = 10_000, clustered: int = 1_000) -> np.ndarray:
    """
    검증용 격자: [-1, 1] 균등 grid_size 점 + 0 근처 기하 분포 clustered 점

    Args:
        grid_size: 균등 점 수 (>= 100)
        clustered: 0 근처 점 수 (양쪽 합)

    Returns:
        정렬된 격자 (0 포함)
    """
    if grid_size < 100:
        raise ParameterError(f"grid_size must be >= 100, got {grid_size!r}")
    uniform = np.linspace(-1.0, 1.0, grid_size)
    half = max(clustered // 2, 1)
    geometric = np.geomspace(1e-12, 1e-1, half)
    return np.unique(np.concatenate([uniform, geometric, -geometric, [0.0]]))


def validate(
    problem: SingularPerturbationProblem,
    grid_size: int = 10_000,
    lam: Optional[float] = None,
) -> SpectralParams:
    """
    구조적 가정 검사 후 SpectralParams 반환

    위반 항목을 모두 모은 뒤 한 번에 ProblemValidationError 로 보고합니다.
    가정은 모두 만족하고 gamma <= 0 만 실패하면 CoercivityError 입니다.

    Args:
        problem: 검증할 문제
        grid_size: 균등 검증 격자 점 수 (>= 100)
        lam: 사용할 lambda (기본값: lambda_bar)

    Returns:
        SpectralParams(lambda_bar, lam, gamma)
    """
    x = validation_grid(grid_size)
    zero = np.array([0.0])
    violations: List[str] = []

    a0 = float(problem.a(zero)[0])
    if abs(a0) > 1e-12:
        violations.append(f"a(0) = {a0:.3e} != 0: not a turning-point problem")

    nonzero = x[x != 0.0]
    b = -problem.a(nonzero) / nonzero
    if np.any(b <= 0.0):
        bad = float(nonzero[np.argmin(b)])
        violations.append(f"b(x) = -a(x)/x must be positive (fails at x = {bad:.6g})")

    c = problem.c(x)
    if np.any(c < 0.0):
        bad = float(x[np.argmin(c)])
        violations.append(f"c(x) must be nonnegative (fails at x = {bad:.6g})")
    c0 = float(problem.c(zero)[0])
    if not c0 > 0.0:
        violations.append(f"c(0) = {c0:.3e} must be positive")

    a_prime0 = float(problem.a_prime(zero)[0])
    if a_prime0 == 0.0:
        violations.append("a'(0) = 0: the turning point is not simple")
        lambda_bar = math.inf
    else:
        lambda_bar = c0 / abs(a_prime0)

    chosen = lambda_bar if lam is None else lam
    if lam is not None and not (0.0 < lam <= lambda_bar):
        violations.append(f"lambda = {lam!r} must lie in (0, lambda_bar = {lambda_bar!r}]")

    if violations:
        raise ProblemValidationError(violations)

    gamma = float(np.min(c - 0.5 * problem.a_prime(x)))
    if gamma <= 0.0:
        raise CoercivityError(
            [f"min (c - a'/2) = {gamma:.3e} <= 0: B_eps is not coercive "
             f"(the problem would need a variable transformation first)"]
        )

    logger.debug("validated problem '%s': lambda_bar=%.6g gamma=%.6g", problem.name, lambda_bar, gamma)
    return SpectralParams(lambda_bar=lambda_bar, lam=chosen, gamma=gamma)


def _envelope_grid(eps: float, points: int = 4000) -> np.ndarray:
    # 0 근처는 sqrt(eps) 아래까지 내려가는 기하 분포로 layer 를 해상
    inner = np.geomspace(min(1e-3 * math.sqrt(eps), 1e-3), 1.0, points)
    return np.concatenate([-inner[::-1], [0.0], inner])


def derivative_envelope_check(
    sol: ManufacturedSolution,
    eps: float,
    lam: float,
    order: int,
) -> float:
    """
    |u^{(i)}(x)| / (1 + (sqrt(eps) + |x|)^{lam - i}) 의 최댓값 (진단용 fitted constant)

    Args:
        sol: 정확해
        eps: 섭동 파라미터
        lam: lambda
        order: 도함수 차수 0, 1, 2

    Returns:
        layer 해상 격자 위 최댓값
    """
    x = _envelope_grid(eps)
    values = np.abs(sol.derivative(order)(x))
    envelope = 1.0 + np.power(math.sqrt(eps) + np.abs(x), lam - order)
    return float(np.max(values / envelope))
