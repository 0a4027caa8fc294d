"""결과 출력: CSV, 참조 곡선 O(N^-k), 콘솔 표"""

import csv
import io
import math
import os
from typing import Dict, List, Optional, Sequence, Tuple

from src.errors import ParameterError
from src.studies.sweep import ConvergenceRow, sort_rows

CSV_HEADER = [
    "k", "N", "eps", "lambda", "alpha0", "alpha",
    "energy_err", "l2_err", "h1semi_err", "interp_l2", "supercloseness",
    "energy_rate", "l2_rate",
]


def _sci(value: Optional[float]) -> str:
    if value is None:
        return ""
    return f"{value:.5e}"


def _csv_record(row: ConvergenceRow) -> List[str]:
    return [
        str(row.k), str(row.N),
        _sci(row.eps), _sci(row.lam), _sci(row.alpha0), _sci(row.alpha),
        _sci(row.energy_err), _sci(row.l2_err), _sci(row.h1semi_err),
        _sci(row.interp_l2), _sci(row.supercloseness),
        _sci(row.energy_rate), _sci(row.l2_rate),
    ]


def format_csv(rows: Sequence[ConvergenceRow]) -> str:
    """헤더 + (k, eps, lambda, alpha0, N) 정렬 행, 줄 끝은 항상 \\n"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in sort_rows(list(rows)):
        writer.writerow(_csv_record(row))
    return buffer.getvalue()


def emit_csv(rows: Sequence[ConvergenceRow], path: str) -> str:
    """
    CSV 파일 저장

    Args:
        rows: sweep 결과
        path: 출력 경로 (상위 디렉토리는 생성)

    Returns:
        저장한 경로
    """
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(format_csv(rows))
    except OSError as e:
        raise ParameterError(f"cannot write CSV to {path!r}: {e}") from e
    return path


def emit_reference_curves(
    k_list: Sequence[int],
    n_list: Sequence[int],
    anchor_rows: Sequence[ConvergenceRow],
) -> Dict[int, List[Tuple[int, float]]]:
    """
    k 마다 c_k N^{-k} 곡선 (c_k 는 기준 행의 energy 오차에 맞춤)

    같은 k 의 기준 행이 여러 개면 N 이 가장 작은 성공 행을 씁니다.

    Args:
        k_list: 차수 목록
        n_list: 곡선을 계산할 N 목록
        anchor_rows: 기준 행

    Returns:
        {k: [(N, 값), ...]}
    """
    curves: Dict[int, List[Tuple[int, float]]] = {}
    for k in k_list:
        anchors = sorted(
            (r for r in anchor_rows if r.k == k and r.ok and r.energy_err > 0.0),
            key=lambda r: r.N,
        )
        if not anchors:
            raise ParameterError(f"no anchor row for k={k}")
        anchor = anchors[0]
        c_k = anchor.energy_err * float(anchor.N) ** k
        curves[k] = [(int(n), c_k * float(n) ** (-k)) for n in sorted(n_list)]
    return curves


def write_curves(curves: Dict[int, List[Tuple[int, float]]], out_dir: str, prefix: str = "reference_curve") -> List[str]:
    """k 마다 두 열 CSV (N, value) 저장, 경로 목록 반환"""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for k, points in sorted(curves.items()):
        path = os.path.join(out_dir, f"{prefix}_k{k}.csv")
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["N", "value"])
            for n, value in points:
                writer.writerow([n, f"{value:.5e}"])
        paths.append(path)
    return paths


def _rate_cell(rate: Optional[float]) -> str:
    return "" if rate is None else f"{rate:.3f}"


def format_table(rows: Sequence[ConvergenceRow]) -> str:
    """
    콘솔용 표: (k, eps, lambda, alpha0) 묶음마다 N, 오차, rate 열

    Returns:
        여러 줄 문자열
    """
    if not rows:
        return "(0 rows)"
    lines: List[str] = []
    current = None
    for row in sort_rows(list(rows)):
        if row.group_key() != current:
            current = row.group_key()
            if lines:
                lines.append("")
            lines.append(f"k={row.k}  eps={row.eps:.0e}  lambda={row.lam:g}  alpha0={row.alpha0:g}  alpha={row.alpha:.4g}")
            lines.append(f"{'N':>6} | {'energy':>10} | {'rate':>6} | {'L2':>10} | {'rate':>6} | {'u_I - u_N':>10}")
            lines.append(" | ".join(["------", "-" * 10, "-" * 6, "-" * 10, "-" * 6, "-" * 10]))
        if not row.ok:
            lines.append(f"{row.N:>6} | failed: {row.error}")
            continue
        lines.append(
            f"{row.N:>6} | {row.energy_err:>10.3e} | {_rate_cell(row.energy_rate):>6} | "
            f"{row.l2_err:>10.3e} | {_rate_cell(row.l2_rate):>6} | {row.supercloseness:>10.3e}"
        )
    return "\n".join(lines)


def format_regression(report) -> str:
    """RegressionReport 요약"""
    lines = [
        f"reference table: {report.table_id} "
        f"(factor {report.tolerance_factor:g}, rate tolerance {report.rate_tolerance:g})",
        f"  compared: {len(report.comparisons)}, failed: {len(report.failures)}, "
        f"skipped: {report.skipped}, missing: {len(report.missing)}",
    ]
    for c in report.failures:
        measured = "n/a" if c.measured is None or (isinstance(c.measured, float) and math.isnan(c.measured)) \
            else f"{c.measured:.3e}"
        lines.append(
            f"  ❌ k={c.k} N={c.N} eps={c.eps:.0e} {c.norm} {c.kind}: "
            f"expected {c.expected:.3e}, measured {measured} {c.detail}".rstrip()
        )
    for k, eps, n in report.missing[:10]:
        lines.append(f"  missing: k={k} N={n} eps={eps:.0e}")
    if len(report.missing) > 10:
        lines.append(f"  ... {len(report.missing) - 10} more missing")
    return "\n".join(lines)
