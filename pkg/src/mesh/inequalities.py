"""메쉬 분석에 쓰이는 스칼라 부등식의 수치 검증

각 검사는 (우변 - 좌변) 이 음수가 되는 최대 상대 위반량을 돌려줍니다.
0 이하면 해당 샘플 전체에서 부등식이 성립한 것입니다.
overflow 를 피하려고 거듭제곱은 log 공간에서 비교합니다.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

LN2 = math.log(2.0)


@dataclass
class InequalityResult:
    name: str
    samples: int
    max_violation: float
    rtol: float

    @property
    def holds(self) -> bool:
        return self.max_violation <= self.rtol


def _relative_excess(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = np.maximum(np.abs(rhs), np.finfo(float).tiny)
    return float(np.max((lhs - rhs) / scale))


def _log_excess(log_lhs: np.ndarray, log_rhs: np.ndarray) -> float:
    # log 값 자체의 반올림 오차에 맞춰 |log_rhs| 로 정규화
    scale = np.maximum(1.0, np.abs(log_rhs))
    return float(np.max((log_lhs - log_rhs) / scale))


def one_plus_c_bracket(alpha: np.ndarray, c: np.ndarray) -> np.ndarray:
    """(1 + c)^alpha - c^alpha  (c = 0 이면 1)"""
    alpha = np.asarray(alpha, dtype=float)
    c = np.asarray(c, dtype=float)
    with np.errstate(divide="ignore"):
        lower = np.where(c > 0.0, np.expm1(alpha * np.log(np.where(c > 0.0, c, 1.0))), -1.0)
    return np.expm1(alpha * np.log1p(c)) - lower


def check_power_of_sum(alpha: np.ndarray, a: np.ndarray, b: np.ndarray, rtol: float = 1e-12) -> InequalityResult:
    """(a + b)^{1/alpha} <= 2^{1/alpha - 1} (a^{1/alpha} + b^{1/alpha})"""
    p = 1.0 / alpha
    log_lhs = p * np.log(a + b)
    log_rhs = (p - 1.0) * LN2 + np.logaddexp(p * np.log(a), p * np.log(b))
    return InequalityResult("power of sum", int(np.size(alpha)), _log_excess(log_lhs, log_rhs), rtol)


def check_subadditive_power(alpha: np.ndarray, a: np.ndarray, b: np.ndarray, rtol: float = 1e-12) -> InequalityResult:
    """(a + b)^alpha <= a^alpha + b^alpha"""
    log_lhs = alpha * np.log(a + b)
    log_rhs = np.logaddexp(alpha * np.log(a), alpha * np.log(b))
    return InequalityResult("subadditive power", int(np.size(alpha)), _log_excess(log_lhs, log_rhs), rtol)


def check_bracket_bounds(alpha: np.ndarray, c: np.ndarray, rtol: float = 1e-12) -> InequalityResult:
    """2^alpha - 1 <= (1 + c)^alpha - c^alpha <= 1,  alpha, c in [0, 1]"""
    middle = one_plus_c_bracket(alpha, c)
    low = np.expm1(alpha * LN2)
    excess = max(_relative_excess(low, middle), _relative_excess(middle, np.ones_like(middle)))
    return InequalityResult("bracket bounds", int(np.size(alpha)), excess, rtol)


def check_bracket_log_bound(alpha: np.ndarray, c: np.ndarray, rtol: float = 1e-12) -> InequalityResult:
    """0 < (1 + c)^alpha - c^alpha <= (2^alpha - 1)/ln 2 * (ln(1 + c) - ln c),  alpha, c in (0, 1]"""
    middle = one_plus_c_bracket(alpha, c)
    rhs = np.expm1(alpha * LN2) / LN2 * (np.log1p(c) - np.log(c))
    excess = _relative_excess(middle, rhs)
    if np.any(middle <= 0.0):
        excess = max(excess, 1.0)
    return InequalityResult("bracket log bound", int(np.size(alpha)), excess, rtol)


def check_two_power_bounds(alpha: np.ndarray, rtol: float = 1e-12) -> InequalityResult:
    """alpha ln 2 <= 2^alpha - 1 <= alpha"""
    middle = np.expm1(alpha * LN2)
    excess = max(_relative_excess(alpha * LN2, middle), _relative_excess(middle, alpha))
    return InequalityResult("two power bounds", int(np.size(alpha)), excess, rtol)


def check_scalar_inequalities(
    samples: int = 1000,
    seed: Optional[int] = 0,
    rtol: float = 1e-12,
) -> Dict[str, InequalityResult]:
    """
    모든 스칼라 부등식을 무작위 샘플에서 검사

    alpha 와 c 는 [1e-10, 1] 에서 log-균등, a 와 b 는 [1e-6, 1e2] 에서 log-균등으로 뽑습니다.

    Args:
        samples: 부등식당 샘플 수
        seed: 난수 시드
        rtol: 허용 상대 오차

    Returns:
        이름 -> InequalityResult
    """
    rng = np.random.default_rng(seed)
    alpha = 10.0 ** rng.uniform(-10.0, 0.0, samples)
    c = 10.0 ** rng.uniform(-10.0, 0.0, samples)
    a = 10.0 ** rng.uniform(-6.0, 2.0, samples)
    b = 10.0 ** rng.uniform(-6.0, 2.0, samples)
    # 1/alpha 가 크면 log 값의 반올림 오차가 rtol 을 넘으므로 power of sum 은 alpha >= 1e-2
    alpha_big = 10.0 ** rng.uniform(-2.0, 0.0, samples)
    results = [
        check_power_of_sum(alpha_big, a, b, rtol),
        check_subadditive_power(alpha, a, b, rtol),
        check_bracket_bounds(alpha, c, rtol),
        check_bracket_log_bound(alpha, c, rtol),
        check_two_power_bounds(alpha, rtol),
    ]
    return {r.name: r for r in results}
