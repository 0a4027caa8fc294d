"""LAPACK band LU (dgbtrf / dgbtrs) 솔버

행/열을 2 의 거듭제곱으로 평형화한 뒤 분해하고, AssembledSystem.defect 의
차분 형태 잔차로 반복 개선(iterative refinement)을 합니다.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import get_lapack_funcs

from src.config import get_settings
from src.errors import ParameterError, SolverError
from src.fem.assembler import AssembledSystem
from src.fem.fe_function import FeFunction, SolveInfo
from src.solver.linear_solver import LinearSolver

logger = logging.getLogger(__name__)

RESIDUAL_WARN = 1e-10


def _power_of_two(scale: np.ndarray) -> np.ndarray:
    """1 / scale 에 가장 가까운 2 의 거듭제곱 (0 행/열은 1)"""
    out = np.ones_like(scale)
    nonzero = scale > 0.0
    out[nonzero] = np.exp2(-np.round(np.log2(scale[nonzero])))
    return out


def _band_rows(n: int, k: int) -> np.ndarray:
    """band 위치 [k + d, s] 의 행 번호 r = s + d (범위 밖은 잘라냄)"""
    offsets = np.arange(-k, k + 1)[:, None]
    return np.clip(np.arange(n)[None, :] + offsets, 0, n - 1)


def equilibrate(band: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    행 스케일 R, 열 스케일 C 로 R A C 의 band 를 만듦

    스케일은 2 의 거듭제곱이라 곱셈에 반올림이 없습니다.

    Args:
        band: band[k + r - s, s] = A[r, s]
        k: 반대역폭

    Returns:
        (스케일된 band, R, C)
    """
    n = band.shape[1]
    rows = _band_rows(n, k)
    absband = np.abs(band)
    row_max = np.zeros(n)
    np.maximum.at(row_max, rows.ravel(), absband.ravel())
    R = _power_of_two(row_max)
    scaled = band * R[rows]
    C = _power_of_two(np.max(np.abs(scaled), axis=0))
    return scaled * C[None, :], R, C


def _row_permutation(ipiv: np.ndarray) -> np.ndarray:
    """gbtrf 의 행 교환을 차례로 적용해 위치 j 에 온 원래 행 번호를 구함"""
    ipiv = np.asarray(ipiv, dtype=int)
    n = ipiv.size
    # LAPACK 의 1-based 피벗이 그대로 오면 마지막 값이 n
    if n and ipiv[-1] == n:
        ipiv = ipiv - 1
    perm = np.arange(n)
    for j in range(n):
        p = ipiv[j]
        if p != j:
            perm[j], perm[p] = perm[p], perm[j]
    return perm


class BandedLUSolver(LinearSolver):
    """부분 피벗팅 band LU. 비용은 O(n k^2)"""

    def __init__(self, pivot_tol: Optional[float] = None, refine_steps: Optional[int] = None):
        """
        Args:
            pivot_tol: |U_jj| < pivot_tol * (위치 j 로 온 행의 max |A|) 이면 singular 로 판정
                       (기본값: FEM_PIVOT_TOL)
            refine_steps: 반복 개선 횟수 (기본값: FEM_REFINE_STEPS)
        """
        settings = get_settings()
        self.pivot_tol = settings.pivot_tol if pivot_tol is None else pivot_tol
        self.refine_steps = settings.refine_steps if refine_steps is None else refine_steps
        if self.refine_steps < 0:
            raise ParameterError(f"refine_steps must be >= 0, got {self.refine_steps}")

    def solve(self, system: AssembledSystem) -> FeFunction:
        if not system.dirichlet_applied:
            raise ParameterError("apply Dirichlet conditions before solving")
        n, k = system.num_dofs, system.k

        scaled, R, C = equilibrate(system.band, k)
        # LAPACK 배치: 위쪽 k 행은 fill-in 용, A[i, j] 는 ab[2k + i - j, j]
        ab = np.zeros((3 * k + 1, n))
        ab[k:, :] = scaled
        gbtrf, gbtrs = get_lapack_funcs(("gbtrf", "gbtrs"), (ab,))

        lu, ipiv, info = gbtrf(ab, k, k)
        if info < 0:
            raise SolverError(f"dgbtrf: illegal value in argument {-info}")
        if info > 0:
            raise SolverError(f"singular matrix: zero pivot at row {info - 1}")

        scale = np.zeros(n)
        np.maximum.at(scale, _band_rows(n, k).ravel(), np.abs(scaled).ravel())
        scale[scale == 0.0] = 1.0
        ratios = np.abs(lu[2 * k, :]) / scale[_row_permutation(ipiv)]
        worst = int(np.argmin(ratios))
        if ratios[worst] < self.pivot_tol:
            raise SolverError(
                f"near-singular pivot at row {worst}: |U| / row scale = {ratios[worst]:.3e} "
                f"< {self.pivot_tol:.1e}"
            )

        def lu_solve(b: np.ndarray) -> np.ndarray:
            y, status = gbtrs(lu, k, k, R * b, ipiv)
            if status != 0:
                raise SolverError(f"dgbtrs failed with info={status}")
            return C * y

        x = lu_solve(system.rhs)
        for _ in range(self.refine_steps):
            x = x + lu_solve(system.defect(x))
        if not np.all(np.isfinite(x)):
            raise SolverError("solution contains non-finite values")

        b_norm = float(np.max(np.abs(system.rhs)))
        b_norm = b_norm if b_norm > 0.0 else 1.0
        residual = float(np.max(np.abs(system.matvec(x) - system.rhs))) / b_norm
        defect = float(np.max(np.abs(system.defect(x)))) / b_norm
        if defect > RESIDUAL_WARN:
            logger.warning("large relative defect %.3e (N=%d, k=%d)", defect, system.mesh.N, k)
        else:
            logger.debug("solved n=%d, residual=%.3e, defect=%.3e, min pivot ratio=%.3e",
                         n, residual, defect, ratios[worst])

        return FeFunction(
            mesh=system.mesh, ref=system.ref, coefficients=x,
            info=SolveInfo(residual=residual, min_pivot_ratio=float(ratios[worst]),
                           defect=defect, refine_steps=self.refine_steps),
        )


def solve(system: AssembledSystem, solver: Optional[LinearSolver] = None) -> FeFunction:
    """기본 솔버(BandedLUSolver)로 풀이"""
    return (solver or BandedLUSolver()).solve(system)
