"""Liseikin graded mesh 생성기

mesh generating function

    phi(xi) = (eps^{a/2} + xi * B)^{1/a} - eps^{1/2},      0 <= xi <= 1
    phi(xi) = -phi(-xi),                                    -1 <= xi < 0
    B       = (1 + eps^{1/2})^a - eps^{a/2}

으로 x_i = phi(i/N), i = -N..N 노드를 만들고, 보조정리(h_i <= C h 등)를
fitted constant 형태로 수치 검증합니다.

a -> 0 에서 B 의 두 항이 모두 1 로 수렴하므로 expm1/log1p 형태로만 계산합니다.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.config import get_settings
from src.errors import MeshDegeneracyError, ParameterError

logger = logging.getLogger(__name__)


def _check_alpha_eps(alpha: float, eps: float) -> None:
    if not (0.0 < alpha <= 1.0) or math.isnan(alpha):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not (0.0 < eps <= 1.0) or math.isnan(eps):
        raise ParameterError(f"eps must lie in (0, 1], got {eps!r}")


@dataclass(frozen=True)
class MeshParams:
    """메쉬 파라미터 (N: 반쪽 구간 수, 전체 구간 수는 2N)"""

    N: int
    alpha: float
    eps: float

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 2:
            raise ParameterError(f"N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        _check_alpha_eps(self.alpha, self.eps)

    @property
    def h(self) -> float:
        return 1.0 / self.N


def bracket(alpha: float, eps: float) -> float:
    """
    B = (1 + sqrt(eps))^alpha - eps^(alpha/2) 계산

    두 항을 각각 expm1(alpha * log1p(sqrt(eps))), expm1((alpha/2) * ln eps) 로
    구한 뒤 빼므로 alpha 가 1e-10 수준이어도 유효숫자가 남습니다.

    Args:
        alpha: grading 지수 (0, 1]
        eps: 섭동 파라미터 (0, 1]

    Returns:
        양수 B
    """
    _check_alpha_eps(alpha, eps)
    if alpha == 1.0:
        return 1.0
    upper = math.expm1(alpha * math.log1p(math.sqrt(eps)))
    lower = math.expm1(0.5 * alpha * math.log(eps))
    return upper - lower


def kappa(alpha: float, eps: float) -> float:
    """kappa = B / alpha,  ln 2 <= kappa <= min{1/alpha, 1 + |log2 sqrt(eps)|}"""
    return bracket(alpha, eps) / alpha


def kappa_bounds(alpha: float, eps: float) -> tuple:
    """kappa 의 (하한, 상한)"""
    _check_alpha_eps(alpha, eps)
    upper = min(1.0 / alpha, 1.0 + abs(0.5 * math.log2(eps)))
    return math.log(2.0), upper


def _phi_nonneg(xi: np.ndarray, alpha: float, eps: float) -> np.ndarray:
    # sqrt(eps) * expm1(log1p(xi * B / eps^{a/2}) / a) 는 원래 식과 대수적으로 같고
    # xi -> 0 근처의 뺄셈 손실이 없다
    xi = np.asarray(xi, dtype=float)
    if alpha == 1.0:
        return xi.copy()
    base = math.exp(0.5 * alpha * math.log(eps))
    b = bracket(alpha, eps)
    return math.sqrt(eps) * np.expm1(np.log1p(xi * (b / base)) / alpha)


def _phi_prime_nonneg(xi: np.ndarray, alpha: float, eps: float) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if alpha == 1.0:
        return np.ones_like(xi)
    base = math.exp(0.5 * alpha * math.log(eps))
    b = bracket(alpha, eps)
    # log(eps^{a/2} + xi B) = (a/2) ln eps + log1p(xi B / eps^{a/2})
    log_inner = 0.5 * alpha * math.log(eps) + np.log1p(xi * (b / base))
    return (b / alpha) * np.exp((1.0 - alpha) / alpha * log_inner)


def phi(xi: float, params: MeshParams) -> float:
    """
    mesh generating function phi(xi, eps)

    Args:
        xi: [-1, 1] 의 계산 좌표
        params: MeshParams

    Returns:
        물리 좌표 x = phi(xi). 음수 쪽은 -phi(-xi) 로 계산하여 정확히 홀함수
    """
    if math.isnan(xi) or abs(xi) > 1.0:
        raise ParameterError(f"xi must lie in [-1, 1], got {xi!r}")
    if xi < 0.0:
        return -phi(-xi, params)
    if xi == 0.0:
        return 0.0
    if xi == 1.0:
        return 1.0
    return float(_phi_nonneg(np.array([xi]), params.alpha, params.eps)[0])


def phi_derivative(xi: float, params: MeshParams) -> float:
    """d phi / d xi = kappa * (eps^{a/2} + |xi| B)^{(1-a)/a}  (xi 에 대해 짝함수)"""
    if math.isnan(xi) or abs(xi) > 1.0:
        raise ParameterError(f"xi must lie in [-1, 1], got {xi!r}")
    return float(_phi_prime_nonneg(np.array([abs(xi)]), params.alpha, params.eps)[0])


def mesh_function_property(
    params: MeshParams,
    lam: float,
    k: int = 1,
    samples: Optional[np.ndarray] = None,
) -> float:
    """
    (phi')^k (phi + sqrt(eps))^{lam - k} 의 최댓값 (fitted constant)

    alpha <= lam / k 이면 eps 와 무관하게 kappa^k 이하로 유계입니다.
    k = 1 이 기본 layer-damping 성질입니다.

    Args:
        params: MeshParams
        lam: layer 지수 lambda > 0
        k: 거듭제곱 차수 (>= 1)
        samples: [0, 1] 의 xi 샘플 (기본값: 균등 4097점)

    Returns:
        샘플 위 최댓값
    """
    if lam <= 0.0:
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k!r}")
    xi = np.linspace(0.0, 1.0, 4097) if samples is None else np.abs(np.asarray(samples, dtype=float))
    sqrt_eps = math.sqrt(params.eps)
    values = _phi_nonneg(xi, params.alpha, params.eps)
    slopes = _phi_prime_nonneg(xi, params.alpha, params.eps)
    log_terms = k * np.log(slopes) + (lam - k) * np.log(values + sqrt_eps)
    return float(np.exp(np.max(log_terms)))


@dataclass(frozen=True, eq=False)
class GradedMesh:
    """
    2N+1 개 노드 x_{-N..N} 와 구간 정보

    배열 인덱스 j 는 부호 있는 인덱스 i = j - N 에 대응합니다.
    intervals[j] = h_{j-N+1}, midspans[j] = hbar_{j-N+1}.
    """

    nodes: np.ndarray
    intervals: np.ndarray
    midspans: np.ndarray
    kappa: float
    params: MeshParams

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def num_elements(self) -> int:
        return 2 * self.params.N

    def x(self, i: int) -> float:
        """부호 있는 인덱스 i = -N..N 의 노드"""
        if abs(i) > self.N:
            raise ParameterError(f"node index {i} outside [-{self.N}, {self.N}]")
        return float(self.nodes[i + self.N])

    def h_at(self, i: int) -> float:
        """h_i = x_i - x_{i-1}, i = -N+1..N"""
        if not (-self.N + 1 <= i <= self.N):
            raise ParameterError(f"interval index {i} outside [{-self.N + 1}, {self.N}]")
        return float(self.intervals[i + self.N - 1])

    def hbar_at(self, i: int) -> float:
        """hbar_i = (h_i + h_{i+1}) / 2, i = -N+1..N-1"""
        if not (-self.N + 1 <= i <= self.N - 1):
            raise ParameterError(f"midspan index {i} outside [{-self.N + 1}, {self.N - 1}]")
        return float(self.midspans[i + self.N - 1])


def build_mesh(params: MeshParams) -> GradedMesh:
    """
    x_i = phi(i/N) 로 메쉬 생성

    양수 쪽만 계산한 뒤 부호를 바꿔 복사하므로 x_{-i} = -x_i 가 비트 단위로 성립하고,
    x_0 = 0, x_{+-N} = +-1 은 계산 후 고정합니다.

    Args:
        params: MeshParams

    Returns:
        GradedMesh
    """
    n = params.N
    xi = np.arange(n + 1, dtype=float) / n
    positive = _phi_nonneg(xi, params.alpha, params.eps)
    positive[0] = 0.0
    positive[-1] = 1.0
    nodes = np.concatenate([-positive[:0:-1], positive])

    intervals = np.diff(nodes)
    if not np.all(intervals > 0.0):
        bad = int(np.argmin(intervals))
        raise MeshDegeneracyError(
            f"non-monotone mesh at interval {bad - n + 1} (h = {intervals[bad]!r}) "
            f"for N={n}, alpha={params.alpha!r}, eps={params.eps!r}"
        )
    midspans = 0.5 * (intervals[:-1] + intervals[1:])

    for arr in (nodes, intervals, midspans):
        arr.flags.writeable = False

    mesh = GradedMesh(
        nodes=nodes,
        intervals=intervals,
        midspans=midspans,
        kappa=kappa(params.alpha, params.eps),
        params=params,
    )
    logger.debug(
        "built graded mesh N=%d alpha=%.3e eps=%.1e: h_min=%.3e h_max=%.3e",
        n, params.alpha, params.eps, intervals.min(), intervals.max(),
    )
    return mesh


def uniform_mesh(N: int) -> GradedMesh:
    """alpha = 1 인 균등 메쉬"""
    return build_mesh(MeshParams(N=N, alpha=1.0, eps=1.0))


def format_nodes(mesh: GradedMesh) -> str:
    """노드 한 줄에 하나, 유효숫자 17자리"""
    return "".join(f"{x:.16e}\n" for x in mesh.nodes)


def dump_nodes(mesh: GradedMesh, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_nodes(mesh))


# ---------------------------------------------------------------------------
# 메쉬 보조정리 진단
# ---------------------------------------------------------------------------

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_NOT_APPLICABLE = "not applicable"


@dataclass
class LemmaCheck:
    name: str
    status: str
    fitted: Optional[float] = None
    fitted_refined: Optional[float] = None
    normalized: Optional[float] = None
    ratio: Optional[float] = None
    detail: str = ""


@dataclass
class MeshLemmaReport:
    N: int
    alpha: float
    eps: float
    lam: float
    k: int
    checks: List[LemmaCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != STATUS_FAIL for c in self.checks)

    def get(self, name: str) -> LemmaCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


def _positive_half(mesh: GradedMesh):
    x = np.asarray(mesh.nodes[mesh.N:])
    return x, np.diff(x)


def _max_log_ratio(log_values: np.ndarray) -> float:
    if log_values.size == 0:
        return 0.0
    return float(np.exp(np.max(log_values)))


def _kappa_powers(k: int) -> dict:
    """부등식별 h 거듭제곱. C 는 kappa 의 같은 거듭제곱으로 커진다"""
    return {
        "h_i <= C h": 1,
        "h_i^k weighted <= C h^k": k,
        "first interval <= C h^k": k,
        "h_i - h_{i-1} <= C h^2 growth": 2,
        "h_i - h_{i-1} weighted <= C h^2": 2,
        "mesh function property": k,
    }


def _lemma_constants(mesh: GradedMesh, lam: float, k: int, alpha_hat: float) -> dict:
    """각 부등식의 fitted constant (적용 불가면 None)"""
    p = mesh.params
    alpha, eps, h = p.alpha, p.eps, p.h
    sqrt_eps = math.sqrt(eps)
    x, hp = _positive_half(mesh)
    out = {}

    # h_i <= C h, 1 <= i <= N
    out["h_i <= C h"] = float(np.max(hp) / h)

    # h_i^k (x_{i-1} + sqrt eps)^{ahat - k} <= C h^k, 2 <= i <= N
    if alpha <= min(alpha_hat / k, 1.0):
        logs = k * np.log(hp[1:]) + (alpha_hat - k) * np.log(x[1:-1] + sqrt_eps) - k * math.log(h)
        out["h_i^k weighted <= C h^k"] = _max_log_ratio(logs)
    else:
        out["h_i^k weighted <= C h^k"] = None

    # i = 1: eps >= h^{2/alpha} 이면 h_1^k eps^{(ahat-k)/2}, 아니면 x_1 <= C h^k
    if math.log(eps) >= (2.0 / alpha) * math.log(h):
        if alpha <= min(alpha_hat / k, 1.0):
            val = k * math.log(hp[0]) + 0.5 * (alpha_hat - k) * math.log(eps) - k * math.log(h)
            out["first interval <= C h^k"] = math.exp(val)
        else:
            out["first interval <= C h^k"] = None
    else:
        if alpha <= 1.0 / k:
            out["first interval <= C h^k"] = math.exp(math.log(x[1]) - k * math.log(h))
        else:
            out["first interval <= C h^k"] = None

    diffs = hp[1:] - hp[:-1]

    # h_i - h_{i-1} <= C h^2 (x_i + sqrt eps)^{1 - 2 alpha}, 2 <= i <= N
    if alpha <= 0.5:
        scaled = diffs / (h * h * np.power(x[2:] + sqrt_eps, 1.0 - 2.0 * alpha))
        out["h_i - h_{i-1} <= C h^2 growth"] = max(0.0, float(np.max(scaled)))
    else:
        out["h_i - h_{i-1} <= C h^2 growth"] = None

    # (h_i - h_{i-1}) (x_{i-1} + sqrt eps)^{ahat - 1} <= C h^2, 2 <= i <= N
    if alpha <= min(alpha_hat / 2.0, 0.5):
        scaled = diffs * np.power(x[1:-1] + sqrt_eps, alpha_hat - 1.0) / (h * h)
        out["h_i - h_{i-1} weighted <= C h^2"] = max(0.0, float(np.max(scaled)))
    else:
        out["h_i - h_{i-1} weighted <= C h^2"] = None

    # (phi')^k (phi + sqrt eps)^{lam - k} <= C
    if alpha <= lam / k:
        xi = np.arange(mesh.N + 1, dtype=float) / mesh.N
        out["mesh function property"] = mesh_function_property(p, lam, k, samples=xi)
    else:
        out["mesh function property"] = None

    return out


def verify_mesh_lemmas(
    mesh: GradedMesh,
    lam: float,
    k: int,
    alpha_hat: Optional[float] = None,
    ceiling: Optional[float] = None,
    growth: Optional[float] = None,
) -> MeshLemmaReport:
    """
    메쉬 보조정리를 fitted constant 로 검증

    각 부등식의 (좌변 / h^p) 최댓값을 N 과 2N 메쉬에서 구합니다.
    상수 C 는 alpha -> 0 에서 kappa^p 처럼 커지므로 상한(ceiling)은
    fitted / max(kappa, 1)^p 에 적용하고, N 두 배에서 growth 배 이상 커지는 것은
    그대로 fail 로 표시합니다. 가정(alpha 범위)이 맞지 않는 부등식은 not applicable 입니다.

    Args:
        mesh: 검증할 GradedMesh
        lam: lambda > 0
        k: 다항식 차수 (>= 1)
        alpha_hat: 보조정리의 hat-alpha (기본값: lam)
        ceiling: fitted constant 상한 (기본값: 설정 FEM_LEMMA_CEILING)
        growth: N 두 배 시 허용 비율 (기본값: 설정 FEM_LEMMA_GROWTH)

    Returns:
        MeshLemmaReport
    """
    if lam <= 0.0:
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k!r}")
    settings = get_settings()
    ceiling = settings.lemma_ceiling if ceiling is None else ceiling
    growth = settings.lemma_growth if growth is None else growth
    alpha_hat = lam if alpha_hat is None else alpha_hat

    p = mesh.params
    refined = build_mesh(MeshParams(N=2 * p.N, alpha=p.alpha, eps=p.eps))
    coarse_vals = _lemma_constants(mesh, lam, k, alpha_hat)
    fine_vals = _lemma_constants(refined, lam, k, alpha_hat)

    powers = _kappa_powers(k)
    kappa_scale = max(mesh.kappa, 1.0)

    report = MeshLemmaReport(N=p.N, alpha=p.alpha, eps=p.eps, lam=lam, k=k)
    for name, fitted in coarse_vals.items():
        if fitted is None:
            report.checks.append(LemmaCheck(name=name, status=STATUS_NOT_APPLICABLE,
                                            detail="alpha outside the admissible range"))
            continue
        fitted_refined = fine_vals[name]
        # 반올림 오차 수준의 값은 비율을 보지 않는다
        ratio = fitted_refined / fitted if fitted > 1e-10 else None
        normalized = max(fitted, fitted_refined) / kappa_scale ** powers[name]
        problems = []
        if normalized > ceiling:
            problems.append(f"fitted constant / kappa^{powers[name]} = {normalized:.3g} above ceiling {ceiling:g}")
        if ratio is not None and ratio > growth:
            problems.append(f"grows by {ratio:.3f} under N-doubling")
        status = STATUS_FAIL if problems else STATUS_PASS
        check = LemmaCheck(name=name, status=status, fitted=fitted,
                           fitted_refined=fitted_refined, normalized=normalized,
                           ratio=ratio, detail="; ".join(problems))
        if status == STATUS_FAIL:
            logger.warning("mesh lemma '%s' failed: %s", name, check.detail)
        report.checks.append(check)
    return report
