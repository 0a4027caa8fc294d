"""Case Runner - 한 번의 (k, N, eps, lambda, alpha0) 풀이

메쉬 생성 -> 조립 -> Dirichlet 적용 -> 풀이 -> 오차 측정을 묶습니다.
"""

import logging
import time
from dataclasses import dataclass
from typing import Optional

from src.errors import ParameterError
from src.fem.assembler import Assembler, AssembledSystem, apply_dirichlet
from src.fem.fe_function import FeFunction
from src.mesh.meshgen import GradedMesh, MeshParams, build_mesh
from src.norms.norms import ErrorReport, error_norms, interpolant
from src.problem.examples import build_problem
from src.problem.problem import SpectralParams, validate
from src.solver.banded_solver import BandedLUSolver
from src.solver.linear_solver import LinearSolver

logger = logging.getLogger(__name__)


def alpha_rule(k: int, lam: float, alpha0: float = 1.0) -> float:
    """alpha = alpha0 * min{lam/(k+1), 1/(2(k+1))}"""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k!r}")
    if not lam > 0.0:
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    return alpha0 * min(lam / (k + 1), 1.0 / (2 * (k + 1)))


def theorem_alpha_admissible(alpha: float, k: int, lam: float) -> bool:
    """수렴 정리가 다루는 범위 alpha <= min{lam/(k+1), 1/(2(k+1))} 인지"""
    return 0.0 < alpha <= alpha_rule(k, lam) * (1.0 + 1e-12)


@dataclass
class CaseResult:
    k: int
    N: int
    eps: float
    lam: float
    alpha0: float
    alpha: float
    problem_name: str
    mesh: GradedMesh
    system: AssembledSystem
    solution: FeFunction
    spectral: SpectralParams
    report: Optional[ErrorReport] = None
    elapsed: float = 0.0


class CaseRunner:
    """단일 케이스 실행기 (설정은 생성 시 고정, run 은 입력에 대해 결정적)"""

    def __init__(
        self,
        problem_name: str = "sun-stynes",
        quad_points: Optional[int] = None,
        err_subdiv: Optional[int] = None,
        err_layer_subdiv: Optional[int] = None,
        node_scheme: Optional[str] = None,
        solver: Optional[LinearSolver] = None,
    ):
        """
        Args:
            problem_name: 문제 이름 (sun-stynes | patch | symmetric)
            quad_points: 조립 Gauss 점 수 (기본값: k + FEM_QUAD_EXTRA)
            err_subdiv: 오차 적분 분할 깊이 (기본값: FEM_ERR_SUBDIV)
            err_layer_subdiv: x = 0 인접 요소 분할 깊이 (기본값: FEM_ERR_LAYER_SUBDIV)
            node_scheme: 기준 요소 노드 배치 (기본값: FEM_NODE_SCHEME)
            solver: 선형 솔버 (기본값: BandedLUSolver)
        """
        self.problem_name = problem_name
        self.quad_points = quad_points
        self.err_subdiv = err_subdiv
        self.err_layer_subdiv = err_layer_subdiv
        self.node_scheme = node_scheme
        self.solver = solver or BandedLUSolver()

    def run(
        self,
        k: int,
        N: int,
        eps: float,
        lam: float,
        alpha0: float = 1.0,
        alpha: Optional[float] = None,
    ) -> CaseResult:
        """
        한 케이스 풀이와 측정

        Args:
            k: 다항식 차수
            N: 반쪽 구간 수 (전체 2N 요소)
            eps: 섭동 파라미터
            lam: 문제의 lambda
            alpha0: alpha 규칙의 배율
            alpha: 직접 지정한 grading 지수 (주면 alpha0 규칙 무시)

        Returns:
            CaseResult (정확해가 없는 문제는 report = None)
        """
        started = time.perf_counter()
        problem, sol = build_problem(self.problem_name, eps, lam)
        spectral = validate(problem)

        # 메쉬에는 문제의 lambda_bar 를 넘긴다
        lam_mesh = spectral.lambda_bar
        if alpha is None:
            alpha = alpha_rule(k, lam_mesh, alpha0)
        if not (0.0 < alpha <= 1.0):
            raise ParameterError(f"alpha = {alpha!r} outside (0, 1] (alpha0 = {alpha0!r})")
        if not theorem_alpha_admissible(alpha, k, lam_mesh):
            logger.warning(
                "alpha=%.3e exceeds min{lambda/(k+1), 1/(2(k+1))} = %.3e for k=%d: "
                "uniform convergence is not guaranteed", alpha, alpha_rule(k, lam_mesh), k,
            )

        mesh = build_mesh(MeshParams(N=N, alpha=alpha, eps=eps))
        assembler = Assembler(k, quad_points=self.quad_points, node_scheme=self.node_scheme)
        system = assembler.assemble(problem, mesh)
        uN = self.solver.solve(apply_dirichlet(system, problem.nu_left, problem.nu_right))

        report = None
        if sol is not None:
            report = error_norms(
                sol, uN, eps,
                subdiv=self.err_subdiv,
                layer_subdiv=self.err_layer_subdiv,
                uI=interpolant(sol, mesh, assembler.ref),
            )
        elapsed = time.perf_counter() - started
        logger.info(
            "case %s k=%d N=%d eps=%.1e lambda=%.3g alpha=%.3e done in %.3fs",
            problem.name, k, N, eps, lam, alpha, elapsed,
        )
        return CaseResult(
            k=k, N=N, eps=eps, lam=lam, alpha0=alpha0, alpha=alpha,
            problem_name=problem.name, mesh=mesh, system=system, solution=uN,
            spectral=spectral, report=report, elapsed=elapsed,
        )


def run_case(
    k: int,
    N: int,
    eps: float,
    lam: float,
    alpha0: float = 1.0,
    problem_name: str = "sun-stynes",
    quad_points: Optional[int] = None,
    err_subdiv: Optional[int] = None,
) -> ErrorReport:
    """
    run_case 간편 함수: 오차 보고서만 반환

    Returns:
        ErrorReport
    """
    result = CaseRunner(problem_name, quad_points=quad_points, err_subdiv=err_subdiv).run(
        k, N, eps, lam, alpha0=alpha0,
    )
    if result.report is None:
        raise ParameterError(f"problem {problem_name!r} has no exact solution to measure errors against")
    return result.report
