"""기준 오차표와 sweep 결과 비교"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from src.errors import RegressionError
from src.studies.reference_tables import NORM_ENERGY, NORM_L2, ReferenceTable, get_table
from src.studies.sweep import ConvergenceRow

logger = logging.getLogger(__name__)

KIND_VALUE = "value"
KIND_RATE = "rate"


@dataclass
class CellComparison:
    k: int
    N: int
    eps: float
    norm: str
    kind: str
    expected: float
    measured: Optional[float]
    passed: bool
    detail: str = ""


@dataclass
class RegressionReport:
    table_id: str
    tolerance_factor: float
    rate_tolerance: float
    comparisons: List[CellComparison] = field(default_factory=list)
    missing: List[Tuple[int, float, int]] = field(default_factory=list)
    skipped: int = 0

    @property
    def complete(self) -> bool:
        return not self.missing

    @property
    def failures(self) -> List[CellComparison]:
        return [c for c in self.comparisons if not c.passed]

    @property
    def passed(self) -> bool:
        return self.complete and not self.failures

    def raise_for_status(self) -> None:
        if self.passed:
            return
        parts = []
        if self.missing:
            parts.append(f"{len(self.missing)} reference cell(s) not covered")
        if self.failures:
            first = self.failures[0]
            parts.append(
                f"{len(self.failures)} cell(s) out of tolerance, first: k={first.k} N={first.N} "
                f"eps={first.eps:.0e} {first.norm} {first.kind}"
            )
        raise RegressionError(f"reference check '{self.table_id}' failed: " + "; ".join(parts))


def _match_rows(rows: List[ConvergenceRow], table: ReferenceTable) -> Dict[Tuple[int, float, int], ConvergenceRow]:
    matched = {}
    for row in rows:
        if not (math.isclose(row.lam, table.lam, rel_tol=1e-12)
                and math.isclose(row.alpha0, table.alpha0, rel_tol=1e-12)):
            continue
        for k, eps, n in table.keys():
            if row.k == k and row.N == n and math.isclose(row.eps, eps, rel_tol=1e-12):
                matched[(k, eps, n)] = row
    return matched


def _measured(row: ConvergenceRow, norm: str, kind: str) -> Optional[float]:
    if kind == KIND_VALUE:
        return row.energy_err if norm == NORM_ENERGY else row.l2_err
    return row.energy_rate if norm == NORM_ENERGY else row.l2_rate


def compare_reference(
    rows: List[ConvergenceRow],
    table_id: str,
    tolerance_factor: Optional[float] = None,
    rate_tolerance: Optional[float] = None,
) -> RegressionReport:
    """
    sweep 결과를 기준 표와 비교

    오차 값은 기준값의 tolerance_factor 배 이내, rate 는 N >= rate_min_n 에서
    rate_tolerance 이내여야 합니다. 제외 표시된 셀은 비교하지 않고,
    2N 행이 없어 rate 를 계산할 수 없는 셀은 건너뜁니다.

    Args:
        rows: sweep 결과
        table_id: 기준 표 id
        tolerance_factor: 오차 배율 허용치 (기본값: 표마다 정한 값)
        rate_tolerance: rate 허용치 (기본값: 표마다 정한 값)

    Returns:
        RegressionReport
    """
    table = get_table(table_id)
    factor = table.tolerance_factor if tolerance_factor is None else tolerance_factor
    rate_tol = table.rate_tolerance if rate_tolerance is None else rate_tolerance
    report = RegressionReport(table_id=table_id, tolerance_factor=factor, rate_tolerance=rate_tol)
    matched = _match_rows(rows, table)

    for key in table.keys():
        if key not in matched:
            report.missing.append(key)

    for cell in table.cells:
        row = matched.get((cell.k, cell.eps, cell.N))
        if row is None:
            continue

        if not cell.exclude_value:
            measured = _measured(row, cell.norm, KIND_VALUE)
            ok = (row.ok and measured is not None and measured > 0.0
                  and cell.value / factor <= measured <= cell.value * factor)
            detail = row.error or ("" if ok else f"outside factor {factor:g}")
            report.comparisons.append(CellComparison(
                k=cell.k, N=cell.N, eps=cell.eps, norm=cell.norm, kind=KIND_VALUE,
                expected=cell.value, measured=measured, passed=ok, detail=detail,
            ))
        else:
            report.skipped += 1

        if cell.rate is None or cell.N < table.rate_min_n:
            continue
        if cell.exclude_rate:
            report.skipped += 1
            continue
        measured_rate = _measured(row, cell.norm, KIND_RATE)
        if measured_rate is None:
            if row.ok:
                # 2N 행이 sweep 에 없음
                report.skipped += 1
                continue
            report.comparisons.append(CellComparison(
                k=cell.k, N=cell.N, eps=cell.eps, norm=cell.norm, kind=KIND_RATE,
                expected=cell.rate, measured=None, passed=False, detail=row.error or "",
            ))
            continue
        ok = abs(measured_rate - cell.rate) <= rate_tol
        report.comparisons.append(CellComparison(
            k=cell.k, N=cell.N, eps=cell.eps, norm=cell.norm, kind=KIND_RATE,
            expected=cell.rate, measured=measured_rate, passed=ok,
            detail="" if ok else f"differs by more than {rate_tol:g}",
        ))

    for failure in report.failures:
        logger.warning(
            "reference %s: k=%d N=%d eps=%.0e %s %s expected %.3e measured %s",
            table_id, failure.k, failure.N, failure.eps, failure.norm, failure.kind,
            failure.expected, "n/a" if failure.measured is None else f"{failure.measured:.3e}",
        )
    if report.missing:
        logger.warning("reference %s: %d cell(s) not covered by the sweep", table_id, len(report.missing))
    return report


def rows_from_table(table_id: str) -> List[ConvergenceRow]:
    """기준 표 자체를 ConvergenceRow 로 (자기 비교와 curve 기준점용)"""
    table = get_table(table_id)
    rows: Dict[Tuple[int, float, int], ConvergenceRow] = {}
    for cell in table.cells:
        key = (cell.k, cell.eps, cell.N)
        row = rows.get(key)
        if row is None:
            row = ConvergenceRow(k=cell.k, N=cell.N, eps=cell.eps, lam=table.lam,
                                 alpha0=table.alpha0, alpha=float("nan"))
            rows[key] = row
        if cell.norm == NORM_ENERGY:
            row.energy_err, row.energy_rate = cell.value, cell.rate
        elif cell.norm == NORM_L2:
            row.l2_err, row.l2_rate = cell.value, cell.rate
    return sorted(rows.values(), key=ConvergenceRow.sort_key)
