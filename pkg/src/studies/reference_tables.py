"""회귀 비교용 기준 오차표 (Example: sun-stynes, lambda = 0.005, alpha0 = 1)

rate 는 N 과 2N 을 짝지은 값이며 작은 N 의 셀에 둡니다.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

from src.errors import ParameterError

TABLE_ENERGY_ORDER = "energy-order"
TABLE_L2_LINEAR = "l2-linear"

NORM_ENERGY = "energy"
NORM_L2 = "l2"


@dataclass(frozen=True)
class ReferenceCell:
    k: int
    N: int
    eps: float
    norm: str
    value: float
    rate: Optional[float] = None
    exclude_value: bool = False
    exclude_rate: bool = False


@dataclass(frozen=True)
class ReferenceTable:
    table_id: str
    title: str
    lam: float
    alpha0: float
    cells: List[ReferenceCell]
    tolerance_factor: float
    rate_tolerance: float
    rate_min_n: int

    def keys(self):
        return sorted({(c.k, c.eps, c.N) for c in self.cells})


# 차수 k = 1..4, N = 512 / 1024 의 energy 오차
_ENERGY_ORDER_VALUES: Dict[float, Dict[int, tuple]] = {
    1.0:   {1: (5.89e-04, 2.95e-04), 2: (2.36e-07, 5.91e-08), 3: (1.37e-10, 1.71e-11), 4: (1.49e-13, 2.06e-13)},
    1e-2:  {1: (7.64e-04, 3.82e-04), 2: (1.31e-06, 3.28e-07), 3: (2.36e-09, 2.95e-10), 4: (4.07e-12, 3.06e-13)},
    1e-4:  {1: (4.61e-04, 2.30e-04), 2: (1.52e-06, 3.81e-07), 3: (5.28e-09, 6.60e-10), 4: (1.75e-11, 1.10e-12)},
    1e-6:  {1: (2.16e-04, 1.08e-04), 2: (1.07e-06, 2.68e-07), 3: (5.56e-09, 6.95e-10), 4: (2.76e-11, 1.73e-12)},
    1e-8:  {1: (9.04e-05, 4.52e-05), 2: (6.12e-07, 1.53e-07), 3: (4.14e-09, 5.17e-10), 4: (2.75e-11, 1.72e-12)},
    1e-10: {1: (3.54e-05, 1.77e-05), 2: (3.69e-07, 9.17e-08), 3: (2.54e-09, 3.17e-10), 4: (2.17e-11, 1.35e-12)},
    1e-12: {1: (1.33e-05, 6.66e-06), 2: (3.53e-07, 8.79e-08), 3: (1.38e-09, 1.72e-10), 4: (1.80e-11, 1.12e-12)},
    1e-14: {1: (4.95e-06, 2.45e-06), 2: (4.49e-07, 1.12e-07), 3: (6.87e-10, 8.58e-11), 4: (2.31e-11, 1.44e-12)},
}

# 반올림 오차에 묻힌 셀: (k, eps) -> (값 제외, rate 제외)
_ENERGY_ORDER_EXCLUDED = {
    (4, 1.0): (True, True),
    (4, 1e-2): (False, True),
}

# k = 1: N, (eps=1e-8: energy, rate, l2, rate), (eps=1e-12: energy, rate, l2, rate)
_L2_LINEAR_ROWS = [
    (8,    (7.58e-03, 1.402, 4.11e-03, 2.467), (2.22e-03, 1.623, 2.06e-03, 1.846)),
    (16,   (2.87e-03, 0.986, 7.43e-04, 2.108), (7.22e-04, 1.460, 5.72e-04, 1.853)),
    (32,   (1.45e-03, 1.002, 1.72e-04, 2.009), (2.62e-04, 1.203, 1.59e-04, 1.947)),
    (64,   (7.23e-04, 1.001, 4.28e-05, 2.002), (1.14e-04, 1.070, 4.11e-05, 1.986)),
    (128,  (3.62e-04, 1.000, 1.07e-05, 2.000), (5.43e-05, 1.019, 1.04e-05, 1.997)),
    (256,  (1.81e-04, 1.000, 2.67e-06, 2.000), (2.68e-05, 1.005, 2.60e-06, 1.999)),
    (512,  (9.04e-05, 1.000, 6.68e-07, 2.000), (1.33e-05, 1.001, 6.50e-07, 2.000)),
    (1024, (4.52e-05, 1.000, 1.67e-07, 2.000), (6.66e-06, 1.000, 1.63e-07, 2.000)),
    (2048, (2.26e-05, 1.000, 4.17e-08, 2.000), (3.33e-06, 1.000, 4.07e-08, 2.000)),
]


def _energy_order_table() -> ReferenceTable:
    cells = []
    for eps, by_k in _ENERGY_ORDER_VALUES.items():
        for k, (e512, e1024) in by_k.items():
            skip_value, skip_rate = _ENERGY_ORDER_EXCLUDED.get((k, eps), (False, False))
            # 이 표에는 rate 가 없으므로 512 -> 1024 쌍을 이론 차수 k 와 비교
            cells.append(ReferenceCell(k=k, N=512, eps=eps, norm=NORM_ENERGY, value=e512,
                                       rate=float(k), exclude_value=skip_value, exclude_rate=skip_rate))
            cells.append(ReferenceCell(k=k, N=1024, eps=eps, norm=NORM_ENERGY, value=e1024,
                                       exclude_value=skip_value, exclude_rate=skip_rate))
    return ReferenceTable(
        table_id=TABLE_ENERGY_ORDER,
        title="energy norm error, k = 1..4, N = 512 / 1024",
        lam=0.005, alpha0=1.0, cells=cells,
        tolerance_factor=3.0, rate_tolerance=0.15, rate_min_n=512,
    )


def _l2_linear_table() -> ReferenceTable:
    cells = []
    for n, col_8, col_12 in _L2_LINEAR_ROWS:
        for eps, (energy, energy_rate, l2, l2_rate) in ((1e-8, col_8), (1e-12, col_12)):
            cells.append(ReferenceCell(k=1, N=n, eps=eps, norm=NORM_ENERGY, value=energy, rate=energy_rate))
            cells.append(ReferenceCell(k=1, N=n, eps=eps, norm=NORM_L2, value=l2, rate=l2_rate))
    return ReferenceTable(
        table_id=TABLE_L2_LINEAR,
        title="energy and L2 error for linear elements, eps = 1e-8 / 1e-12",
        lam=0.005, alpha0=1.0, cells=cells,
        tolerance_factor=2.0, rate_tolerance=0.05, rate_min_n=128,
    )


_TABLES = {
    TABLE_ENERGY_ORDER: _energy_order_table,
    TABLE_L2_LINEAR: _l2_linear_table,
}


def table_ids() -> List[str]:
    return sorted(_TABLES)


def get_table(table_id: str) -> ReferenceTable:
    """
    기준 표 조회

    Args:
        table_id: energy-order | l2-linear

    Returns:
        ReferenceTable
    """
    try:
        return _TABLES[table_id]()
    except KeyError as e:
        raise ParameterError(f"unknown reference table {table_id!r}; choose from {table_ids()}") from e
