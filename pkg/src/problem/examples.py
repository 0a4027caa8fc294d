"""이름으로 선택하는 테스트 문제들

- sun-stynes: cusp 형 interior layer 를 갖는 manufactured 문제
- patch:      u = 1 - x^2 가 정확해인 다항식 문제 (patch test 용)
- symmetric:  a 홀함수, c 와 f 짝함수 -> 해가 짝함수 (대칭성 검사용, 정확해 없음)
"""

import logging
import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.errors import ParameterError
from src.problem.problem import ManufacturedSolution, SingularPerturbationProblem

logger = logging.getLogger(__name__)


def _log_x2_plus_eps(x: np.ndarray, eps: float) -> np.ndarray:
    """ln(x^2 + eps). x^2 을 직접 만들지 않으므로 |x| << sqrt(eps) 에서도 underflow 없음"""
    with np.errstate(divide="ignore"):
        log_x2 = 2.0 * np.log(np.abs(x))
    return np.logaddexp(log_x2, math.log(eps))


def _turning_a(x):
    return -x * (1.0 + x * x)


def _turning_a_prime(x):
    return -(1.0 + 3.0 * x * x)


def sun_stynes(eps: float, lam: float) -> Tuple[SingularPerturbationProblem, ManufacturedSolution]:
    """
    -eps u'' - x(1+x^2) u' + lam (1+x^3) u = f,  u(-1) = u(1) = 0

    정확해
        u(x) = (x^2+eps)^{lam/2} + x (x^2+eps)^{(lam-1)/2}
               - (1+eps)^{lam/2} (1 + x (1+eps)^{-1/2})

    Args:
        eps: 섭동 파라미터 (0, 1]
        lam: layer 지수 lambda > 0 (= c(0)/|a'(0)|)

    Returns:
        (문제, 정확해)
    """
    if not (0.0 < eps <= 1.0):
        raise ParameterError(f"eps must lie in (0, 1], got {eps!r}")
    if not lam > 0.0:
        raise ParameterError(f"lambda must be positive, got {lam!r}")

    k_const = (1.0 + eps) ** (lam / 2.0)
    inv_sqrt = (1.0 + eps) ** -0.5

    def s_pow(x, p):
        return np.exp(p * _log_x2_plus_eps(x, eps))

    def u(x):
        x = np.asarray(x, dtype=float)
        return s_pow(x, lam / 2.0) + x * s_pow(x, (lam - 1.0) / 2.0) - k_const * (1.0 + x * inv_sqrt)

    def u_prime(x):
        x = np.asarray(x, dtype=float)
        x2 = x * x
        return (lam * x * s_pow(x, lam / 2.0 - 1.0)
                + s_pow(x, (lam - 3.0) / 2.0) * (eps + lam * x2)
                - k_const * inv_sqrt)

    def u_double_prime(x):
        x = np.asarray(x, dtype=float)
        x2 = x * x
        return (lam * s_pow(x, lam / 2.0 - 2.0) * (eps + (lam - 1.0) * x2)
                + (lam - 1.0) * x * s_pow(x, (lam - 5.0) / 2.0) * (3.0 * eps + lam * x2))

    def c(x):
        x = np.asarray(x, dtype=float)
        return lam * (1.0 + x * x * x)

    # f 는 폐형식 도함수로 매번 계산 (기호 단순화 없음)
    def f(x):
        x = np.asarray(x, dtype=float)
        return -eps * u_double_prime(x) + _turning_a(x) * u_prime(x) + c(x) * u(x)

    problem = SingularPerturbationProblem(
        eps=eps, a=_turning_a, a_prime=_turning_a_prime, c=c, f=f,
        nu_left=0.0, nu_right=0.0, name="sun-stynes",
    )
    return problem, ManufacturedSolution(u=u, u_prime=u_prime, u_double_prime=u_double_prime)


def patch_problem(eps: float = 1.0) -> Tuple[SingularPerturbationProblem, ManufacturedSolution]:
    """a = -x, c = 1, u = 1 - x^2  (eps = 1 이면 f = 3 + x^2)"""
    if not (0.0 < eps <= 1.0):
        raise ParameterError(f"eps must lie in (0, 1], got {eps!r}")

    def a(x):
        return -np.asarray(x, dtype=float)

    def a_prime(x):
        return -np.ones_like(np.asarray(x, dtype=float))

    def c(x):
        return np.ones_like(np.asarray(x, dtype=float))

    def f(x):
        x = np.asarray(x, dtype=float)
        return 2.0 * eps + 1.0 + x * x

    problem = SingularPerturbationProblem(eps=eps, a=a, a_prime=a_prime, c=c, f=f, name="patch")
    sol = ManufacturedSolution(
        u=lambda x: 1.0 - np.asarray(x, dtype=float) ** 2,
        u_prime=lambda x: -2.0 * np.asarray(x, dtype=float),
        u_double_prime=lambda x: -2.0 * np.ones_like(np.asarray(x, dtype=float)),
    )
    return problem, sol


def symmetric_problem(eps: float, lam: float) -> Tuple[SingularPerturbationProblem, None]:
    """a = -x(1+x^2), c = lam, f = 1: 해가 짝함수"""
    if not (0.0 < eps <= 1.0):
        raise ParameterError(f"eps must lie in (0, 1], got {eps!r}")

    def c(x):
        return lam * np.ones_like(np.asarray(x, dtype=float))

    def f(x):
        return np.ones_like(np.asarray(x, dtype=float))

    problem = SingularPerturbationProblem(
        eps=eps, a=_turning_a, a_prime=_turning_a_prime, c=c, f=f, name="symmetric",
    )
    return problem, None


_PROBLEMS: Dict[str, Callable[[float, float], Tuple[SingularPerturbationProblem, Optional[ManufacturedSolution]]]] = {
    "sun-stynes": sun_stynes,
    "patch": lambda eps, lam: patch_problem(eps),
    "symmetric": symmetric_problem,
}


def problem_names():
    return sorted(_PROBLEMS)


def build_problem(name: str, eps: float, lam: float) -> Tuple[SingularPerturbationProblem, Optional[ManufacturedSolution]]:
    """
    이름으로 문제 생성

    Args:
        name: sun-stynes | patch | symmetric
        eps: 섭동 파라미터
        lam: lambda (patch 는 무시)

    Returns:
        (문제, 정확해 또는 None)
    """
    try:
        factory = _PROBLEMS[name]
    except KeyError as e:
        raise ParameterError(f"unknown problem {name!r}; choose from {problem_names()}") from e
    logger.debug("building problem %s (eps=%g, lambda=%g)", name, eps, lam)
    return factory(eps, lam)
