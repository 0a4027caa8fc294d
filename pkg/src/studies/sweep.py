"""(k, N, eps, lambda, alpha0) sweep 와 수렴률

rate = (ln E_N - ln E_2N) / ln 2 는 작은 N 의 행에 기록합니다.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from src.config import get_settings
from src.errors import FemError, ParameterError
from src.studies.case_runner import CaseRunner, alpha_rule

logger = logging.getLogger(__name__)

NAN = float("nan")


@dataclass
class SweepSpec:
    """sweep 입력. lambda / alpha0 는 목록으로 받아 robustness sweep 도 같은 형식으로 처리"""

    k_list: List[int]
    n_list: List[int]
    eps_list: List[float]
    lambda_list: List[float] = field(default_factory=lambda: [0.005])
    alpha0_list: List[float] = field(default_factory=lambda: [1.0])
    problem: str = "sun-stynes"
    quad_points: Optional[int] = None
    err_subdiv: Optional[int] = None

    def __post_init__(self):
        for name in ("k_list", "n_list", "eps_list", "lambda_list", "alpha0_list"):
            if not getattr(self, name):
                raise ParameterError(f"{name} must not be empty")
        for k in self.k_list:
            if isinstance(k, bool) or int(k) != k or k < 1:
                raise ParameterError(f"k must be a positive integer, got {k!r}")
        for n in self.n_list:
            if isinstance(n, bool) or int(n) != n or n < 8 or n % 2:
                raise ParameterError(f"N must be an even integer >= 8, got {n!r}")
        for eps in self.eps_list:
            if not (0.0 < eps <= 1.0):
                raise ParameterError(f"eps must lie in (0, 1], got {eps!r}")
        for lam in self.lambda_list:
            if not lam > 0.0:
                raise ParameterError(f"lambda must be positive, got {lam!r}")
        for alpha0 in self.alpha0_list:
            if not (0.0 < alpha0 <= 1.0):
                raise ParameterError(f"alpha0 must lie in (0, 1], got {alpha0!r}")

    def cases(self) -> List[Tuple[int, int, float, float, float]]:
        """(k, N, eps, lambda, alpha0) 전체 조합"""
        return [
            (int(k), int(n), float(eps), float(lam), float(a0))
            for k in self.k_list
            for eps in self.eps_list
            for lam in self.lambda_list
            for a0 in self.alpha0_list
            for n in self.n_list
        ]

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class ConvergenceRow:
    k: int
    N: int
    eps: float
    lam: float
    alpha0: float
    alpha: float
    energy_err: float = NAN
    l2_err: float = NAN
    h1semi_err: float = NAN
    interp_l2: float = NAN
    supercloseness: float = NAN
    energy_rate: Optional[float] = None
    l2_rate: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def group_key(self) -> Tuple[int, float, float, float]:
        return (self.k, self.eps, self.lam, self.alpha0)

    def sort_key(self) -> Tuple[int, float, float, float, int]:
        return (self.k, self.eps, self.lam, self.alpha0, self.N)


def convergence_rate(coarse: float, fine: float) -> Optional[float]:
    """(ln E_N - ln E_2N) / ln 2, 값이 유효하지 않으면 None"""
    if not (coarse > 0.0 and fine > 0.0) or math.isinf(coarse) or math.isinf(fine):
        return None
    return (math.log(coarse) - math.log(fine)) / math.log(2.0)


def fill_rates(rows: List[ConvergenceRow]) -> List[ConvergenceRow]:
    """같은 (k, eps, lambda, alpha0) 에서 N 과 2N 을 짝지어 rate 기록 (rows 를 직접 수정)"""
    index = {(row.group_key(), row.N): row for row in rows}
    for row in rows:
        row.energy_rate = None
        row.l2_rate = None
        partner = index.get((row.group_key(), 2 * row.N))
        if partner is None or not (row.ok and partner.ok):
            continue
        row.energy_rate = convergence_rate(row.energy_err, partner.energy_err)
        row.l2_rate = convergence_rate(row.l2_err, partner.l2_err)
    return rows


def sort_rows(rows: List[ConvergenceRow]) -> List[ConvergenceRow]:
    return sorted(rows, key=ConvergenceRow.sort_key)


def _run_one(runner: CaseRunner, case: Tuple[int, int, float, float, float]) -> ConvergenceRow:
    k, n, eps, lam, alpha0 = case
    try:
        result = runner.run(k, n, eps, lam, alpha0=alpha0)
    except FemError as e:
        logger.warning("case k=%d N=%d eps=%.1e lambda=%g alpha0=%g failed: %s", k, n, eps, lam, alpha0, e)
        try:
            alpha = alpha_rule(k, lam, alpha0)
        except ParameterError:
            alpha = NAN
        return ConvergenceRow(k=k, N=n, eps=eps, lam=lam, alpha0=alpha0, alpha=alpha,
                              error=f"{type(e).__name__}: {e}")
    report = result.report
    if report is None:
        return ConvergenceRow(k=k, N=n, eps=eps, lam=lam, alpha0=alpha0, alpha=result.alpha,
                              error="no exact solution")
    return ConvergenceRow(
        k=k, N=n, eps=eps, lam=lam, alpha0=alpha0, alpha=result.alpha,
        energy_err=report.energy, l2_err=report.l2, h1semi_err=report.h1_semi,
        interp_l2=report.interp_l2, supercloseness=report.supercloseness,
    )


def run_sweep(
    spec: SweepSpec,
    max_workers: Optional[int] = None,
    runner: Optional[CaseRunner] = None,
) -> List[ConvergenceRow]:
    """
    sweep 실행

    케이스는 스레드 풀에서 독립적으로 실행되고, 실패한 케이스는 error 필드에 기록됩니다.

    Args:
        spec: SweepSpec
        max_workers: 동시 실행 수 (기본값: FEM_MAX_WORKERS)
        runner: CaseRunner (기본값: spec 의 문제/quadrature 설정)

    Returns:
        (k, eps, lambda, alpha0, N) 로 정렬되고 rate 가 채워진 행 목록
    """
    runner = runner or CaseRunner(spec.problem, quad_points=spec.quad_points, err_subdiv=spec.err_subdiv)
    workers = get_settings().max_workers if max_workers is None else max(1, max_workers)
    cases = spec.cases()
    logger.info("running sweep with %d cases on %d worker(s)", len(cases), workers)

    if workers == 1:
        rows = [_run_one(runner, case) for case in cases]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda case: _run_one(runner, case), cases))

    failed = sum(1 for row in rows if not row.ok)
    if failed:
        logger.warning("%d of %d sweep cases failed", failed, len(rows))
    return fill_rates(sort_rows(rows))


@dataclass
class FittedConstant:
    k: int
    N: int
    eps: float
    lam: float
    alpha0: float
    value: float
    ratio: Optional[float] = None


def fitted_constants(
    rows: List[ConvergenceRow],
    norm: str = "energy",
    power: Optional[int] = None,
) -> List[FittedConstant]:
    """
    E_N * N^power 와 N 두 배 시 비율 (작은 N 행에 기록)

    Args:
        rows: sweep 결과
        norm: energy | l2
        power: 거듭제곱 (기본값: energy 는 k, l2 는 k+1)

    Returns:
        FittedConstant 목록 (rows 순서)
    """
    if norm not in ("energy", "l2"):
        raise ParameterError(f"norm must be 'energy' or 'l2', got {norm!r}")
    out = []
    for row in rows:
        if not row.ok:
            continue
        p = power if power is not None else (row.k if norm == "energy" else row.k + 1)
        err = row.energy_err if norm == "energy" else row.l2_err
        out.append(FittedConstant(k=row.k, N=row.N, eps=row.eps, lam=row.lam,
                                  alpha0=row.alpha0, value=err * float(row.N) ** p))
    index = {((c.k, c.eps, c.lam, c.alpha0), c.N): c for c in out}
    for c in out:
        partner = index.get(((c.k, c.eps, c.lam, c.alpha0), 2 * c.N))
        if partner is not None and c.value > 0.0:
            c.ratio = partner.value / c.value
    return out
