"""예외 계층

CLI 종료 코드:
- 0: 성공
- 2: 파라미터/문제 검증 실패
- 3: 솔버 실패 (singular pivot, 메쉬 퇴화)
- 4: reference regression 실패
"""

from typing import List, Optional


class FemError(Exception):
    """패키지 공통 예외"""


class ParameterError(FemError, ValueError):
    """입력 파라미터가 허용 범위를 벗어난 경우"""


class UnsupportedOrderError(ParameterError):
    """P1 전용 연산에 k != 1 함수가 들어온 경우"""


class MeshMismatchError(ParameterError):
    """서로 다른 메쉬/차수의 FeFunction을 비교하려는 경우"""


class MeshDegeneracyError(FemError, RuntimeError):
    """메쉬 노드가 단조 증가하지 않거나 구간 길이가 0 이하인 경우"""


class ProblemValidationError(FemError, ValueError):
    """경계값 문제의 구조적 가정 위반 (위반 항목 전체를 보관)"""

    def __init__(self, violations: List[str], message: Optional[str] = None):
        self.violations = list(violations)
        text = message or "problem validation failed: " + "; ".join(self.violations)
        super().__init__(text)


class CoercivityError(ProblemValidationError):
    """(c - a'/2) >= gamma > 0 이 성립하지 않는 경우"""


class SolverError(FemError, RuntimeError):
    """선형 시스템 풀이 실패"""


class RegressionError(FemError):
    """기준 오차표와의 비교 실패"""


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_REGRESSION = 4


def exit_code_for(exc: BaseException) -> int:
    """예외 타입을 CLI 종료 코드로 변환"""
    if isinstance(exc, (ProblemValidationError, ParameterError)):
        return EXIT_VALIDATION
    if isinstance(exc, (SolverError, MeshDegeneracyError)):
        return EXIT_SOLVER
    if isinstance(exc, RegressionError):
        return EXIT_REGRESSION
    return 1
