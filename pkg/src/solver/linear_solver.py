"""선형 솔버 추상화 계층"""

from abc import ABC, abstractmethod

from src.fem.assembler import AssembledSystem
from src.fem.fe_function import FeFunction


class LinearSolver(ABC):
    """Dirichlet 조건이 적용된 AssembledSystem 을 풀어 FeFunction 을 돌려주는 인터페이스"""

    @abstractmethod
    def solve(self, system: AssembledSystem) -> FeFunction:
        """
        선형 시스템 풀이

        Args:
            system: apply_dirichlet 를 거친 시스템

        Returns:
            계수를 담은 FeFunction (info 에 잔차/pivot 진단)
        """
        pass
