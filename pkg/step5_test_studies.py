"""수치 실험 계층 테스트 (케이스 실행, sweep, CSV, 기준 표 비교, 참조 곡선)"""

import logging
import math

import pytest

from src.errors import ParameterError, RegressionError, SolverError
from src.solver.linear_solver import LinearSolver
from src.studies import verification
from src.studies.case_runner import CaseRunner, alpha_rule, run_case, theorem_alpha_admissible
from src.studies.compare import compare_reference, rows_from_table
from src.studies.reference_tables import (
    NORM_ENERGY, TABLE_ENERGY_ORDER, TABLE_L2_LINEAR, get_table, table_ids,
)
from src.studies.report import (
    CSV_HEADER, emit_csv, emit_reference_curves, format_csv, format_regression, format_table, write_curves,
)
from src.studies.sweep import (
    ConvergenceRow, SweepSpec, convergence_rate, fill_rates, fitted_constants, run_sweep,
)

LAM = 0.005


def _row(k, n, energy, l2=None, eps=1e-8):
    return ConvergenceRow(k=k, N=n, eps=eps, lam=LAM, alpha0=1.0, alpha=alpha_rule(k, LAM),
                          energy_err=energy, l2_err=energy if l2 is None else l2,
                          h1semi_err=energy, interp_l2=energy, supercloseness=energy)


# ---------------------------------------------------------------------------
# alpha 규칙 / 단일 케이스
# ---------------------------------------------------------------------------

def test_alpha_rule():
    assert alpha_rule(1, 0.005) == pytest.approx(0.0025)
    assert alpha_rule(3, 0.005) == pytest.approx(0.00125)
    assert alpha_rule(1, 1.0) == pytest.approx(0.25)
    assert alpha_rule(2, 0.005, alpha0=0.5) == pytest.approx(0.005 / 6)
    assert theorem_alpha_admissible(0.0025, 1, 0.005)
    assert not theorem_alpha_admissible(0.01, 1, 0.005)
    with pytest.raises(ParameterError):
        alpha_rule(0, 0.005)
    with pytest.raises(ParameterError):
        alpha_rule(1, 0.0)


def test_run_case_reports_errors():
    report = run_case(1, 16, 1e-8, LAM)
    assert 0.0 < report.l2 < report.energy
    assert report.energy == pytest.approx(math.sqrt(1e-8 * report.h1_semi ** 2 + report.l2 ** 2))
    assert report.interp_l2 > 0.0
    assert report.supercloseness > 0.0


def test_case_runner_keeps_artifacts():
    result = CaseRunner().run(2, 8, 1e-6, LAM)
    assert result.alpha == pytest.approx(alpha_rule(2, LAM))
    assert result.mesh.N == 8
    assert result.solution.coefficients.size == 2 * 16 + 1
    assert result.spectral.lambda_bar == pytest.approx(LAM)
    assert result.report is not None


def test_problem_without_exact_solution():
    result = CaseRunner("symmetric").run(1, 8, 1e-6, LAM)
    assert result.report is None
    with pytest.raises(ParameterError):
        run_case(1, 8, 1e-6, LAM, problem_name="symmetric")


def test_explicit_alpha(caplog):
    runner = CaseRunner()
    with pytest.raises(ParameterError):
        runner.run(1, 8, 1e-4, LAM, alpha=1.5)
    with caplog.at_level(logging.WARNING, logger="src.studies.case_runner"):
        result = runner.run(1, 8, 1e-4, LAM, alpha=0.5)
    assert result.alpha == 0.5
    assert any("not guaranteed" in record.getMessage() for record in caplog.records)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def test_sweep_spec_validation():
    with pytest.raises(ParameterError):
        SweepSpec(k_list=[1], n_list=[6], eps_list=[1e-8])
    with pytest.raises(ParameterError):
        SweepSpec(k_list=[1], n_list=[9], eps_list=[1e-8])
    with pytest.raises(ParameterError):
        SweepSpec(k_list=[1], n_list=[8], eps_list=[2.0])
    with pytest.raises(ParameterError):
        SweepSpec(k_list=[], n_list=[8], eps_list=[1e-8])
    spec = SweepSpec(k_list=[1, 2], n_list=[8, 16], eps_list=[1e-8, 1e-12])
    assert len(spec.cases()) == 8
    assert spec.to_dict()["lambda_list"] == [0.005]


def test_convergence_rate():
    assert convergence_rate(4.0, 1.0) == pytest.approx(2.0)
    assert convergence_rate(0.0, 1.0) is None
    assert convergence_rate(float("nan"), 1.0) is None


def test_fill_rates_pairs_n_with_2n():
    rows = fill_rates([_row(1, 8, 0.4), _row(1, 16, 0.2), _row(1, 32, 0.1), _row(1, 128, 0.01)])
    assert rows[0].energy_rate == pytest.approx(1.0)
    assert rows[1].energy_rate == pytest.approx(1.0)
    assert rows[2].energy_rate is None
    assert rows[3].energy_rate is None


def test_sweep_rates_and_order():
    spec = SweepSpec(k_list=[1], n_list=[32, 8, 16], eps_list=[1e-8])
    rows = run_sweep(spec, max_workers=1)
    assert [row.N for row in rows] == [8, 16, 32]
    assert all(row.ok for row in rows)
    assert rows[0].energy_err > rows[1].energy_err > rows[2].energy_err
    assert rows[0].energy_rate == pytest.approx(
        math.log2(rows[0].energy_err / rows[1].energy_err), rel=1e-12)
    assert rows[1].l2_rate is not None
    assert rows[2].energy_rate is None and rows[2].l2_rate is None


def test_single_n_sweep_has_no_rates():
    rows = run_sweep(SweepSpec(k_list=[2], n_list=[8], eps_list=[1e-8]), max_workers=1)
    assert len(rows) == 1
    assert rows[0].energy_rate is None
    assert format_csv(rows).splitlines()[1].endswith(",,")


def test_sweep_is_deterministic_across_workers():
    spec = SweepSpec(k_list=[1, 2], n_list=[8, 16], eps_list=[1e-6, 1e-10])
    sequential = format_csv(run_sweep(spec, max_workers=1))
    parallel = format_csv(run_sweep(spec, max_workers=3))
    assert sequential == parallel


class _FailingSolver(LinearSolver):
    def solve(self, system):
        raise SolverError("zero pivot")


def test_failed_cases_are_recorded():
    spec = SweepSpec(k_list=[1], n_list=[8, 16], eps_list=[1e-8])
    rows = run_sweep(spec, max_workers=1, runner=CaseRunner(solver=_FailingSolver()))
    assert [row.ok for row in rows] == [False, False]
    assert "SolverError" in rows[0].error
    assert math.isnan(rows[0].energy_err)
    assert rows[0].energy_rate is None
    assert "failed" in format_table(rows)


def test_fitted_constants():
    rows = [_row(1, 8, 0.1, l2=0.01), _row(1, 16, 0.05, l2=0.0025)]
    energy = fitted_constants(rows)
    assert [c.value for c in energy] == pytest.approx([0.8, 0.8])
    assert energy[0].ratio == pytest.approx(1.0)
    assert energy[1].ratio is None
    l2 = fitted_constants(rows, norm="l2")
    assert [c.value for c in l2] == pytest.approx([0.64, 0.64])
    with pytest.raises(ParameterError):
        fitted_constants(rows, norm="h1")


# ---------------------------------------------------------------------------
# CSV / 참조 곡선
# ---------------------------------------------------------------------------

def test_csv_format():
    rows = fill_rates([_row(1, 16, 0.05), _row(1, 8, 0.1)])
    lines = format_csv(rows).split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1].startswith("1,8,1.00000e-08,5.00000e-03,1.00000e+00,2.50000e-03,1.00000e-01,")
    assert lines[1].endswith(",1.00000e+00,1.00000e+00")
    assert lines[2].startswith("1,16,")
    assert lines[-1] == ""
    assert "\r" not in format_csv(rows)


def test_emit_csv(tmp_path):
    rows = [_row(1, 8, 0.1)]
    path = emit_csv(rows, str(tmp_path / "out" / "results.csv"))
    with open(path, encoding="utf-8") as f:
        assert f.read() == format_csv(rows)

    blocker = tmp_path / "blocker"
    blocker.write_text("x")
    with pytest.raises(ParameterError):
        emit_csv(rows, str(blocker / "results.csv"))


def test_reference_curves(tmp_path):
    anchors = [_row(1, 32, 1e-2), _row(2, 32, 1e-4), _row(1, 64, 3e-3)]
    curves = emit_reference_curves([1, 2], [128, 32, 64], anchors)
    assert [n for n, _ in curves[1]] == [32, 64, 128]
    assert [v for _, v in curves[1]] == pytest.approx([1e-2, 5e-3, 2.5e-3])
    assert [v for _, v in curves[2]] == pytest.approx([1e-4, 2.5e-5, 6.25e-6])
    with pytest.raises(ParameterError):
        emit_reference_curves([3], [32], anchors)

    paths = write_curves(curves, str(tmp_path / "curves"))
    assert [p.rsplit("/", 1)[-1] for p in paths] == ["reference_curve_k1.csv", "reference_curve_k2.csv"]
    with open(paths[0], encoding="utf-8") as f:
        assert f.read().splitlines() == ["N,value", "32,1.00000e-02", "64,5.00000e-03", "128,2.50000e-03"]


# ---------------------------------------------------------------------------
# 기준 표 비교
# ---------------------------------------------------------------------------

def test_reference_tables_are_registered():
    assert table_ids() == [TABLE_ENERGY_ORDER, TABLE_L2_LINEAR]
    table = get_table(TABLE_ENERGY_ORDER)
    assert len(table.keys()) == 8 * 4 * 2
    with pytest.raises(ParameterError):
        get_table("missing")


@pytest.mark.parametrize("table_id", [TABLE_ENERGY_ORDER, TABLE_L2_LINEAR])
def test_table_compares_equal_to_itself(table_id):
    report = compare_reference(rows_from_table(table_id), table_id)
    assert report.passed, format_regression(report)
    report.raise_for_status()
    assert report.skipped > 0 or table_id == TABLE_L2_LINEAR


def test_perturbed_values_fail():
    rows = rows_from_table(TABLE_L2_LINEAR)
    for row in rows:
        if row.N == 64 and row.eps == 1e-8:
            row.energy_err *= 3.0
    report = compare_reference(rows, TABLE_L2_LINEAR)
    assert not report.passed
    assert [(c.N, c.norm, c.kind) for c in report.failures] == [(64, NORM_ENERGY, "value")]
    with pytest.raises(RegressionError):
        report.raise_for_status()
    assert "k=1 N=64" in format_regression(report)


def test_perturbed_rate_fails():
    rows = rows_from_table(TABLE_ENERGY_ORDER)
    for row in rows:
        if row.k == 2 and row.N == 512 and row.eps == 1e-6:
            row.energy_rate = 1.7
    report = compare_reference(rows, TABLE_ENERGY_ORDER)
    assert [(c.k, c.kind) for c in report.failures] == [(2, "rate")]


def test_excluded_cells_are_ignored():
    rows = rows_from_table(TABLE_ENERGY_ORDER)
    for row in rows:
        if row.k == 4 and row.eps == 1.0:
            row.energy_err *= 100.0
            row.energy_rate = 0.0
    assert compare_reference(rows, TABLE_ENERGY_ORDER).passed


def test_missing_cells_fail():
    rows = [row for row in rows_from_table(TABLE_L2_LINEAR) if row.N != 2048]
    report = compare_reference(rows, TABLE_L2_LINEAR)
    assert not report.complete
    assert not report.passed
    assert len(report.missing) == 2
    assert not report.failures
    # 1024 행은 짝이 없어도 값 비교는 한다
    assert any(c.N == 1024 for c in report.comparisons)


def test_missing_rate_partner_is_skipped():
    rows = rows_from_table(TABLE_L2_LINEAR)
    for row in rows:
        if row.N == 1024:
            row.energy_rate = None
            row.l2_rate = None
    assert compare_reference(rows, TABLE_L2_LINEAR).passed


def test_failed_row_fails_comparison():
    rows = rows_from_table(TABLE_L2_LINEAR)
    rows[0].error = "SolverError: zero pivot"
    report = compare_reference(rows, TABLE_L2_LINEAR)
    assert not report.passed
    assert all(c.N == rows[0].N for c in report.failures)


def test_tolerance_overrides():
    rows = rows_from_table(TABLE_L2_LINEAR)
    for row in rows:
        row.l2_err *= 1.5
    assert compare_reference(rows, TABLE_L2_LINEAR).passed
    assert not compare_reference(rows, TABLE_L2_LINEAR, tolerance_factor=1.2).passed


# ---------------------------------------------------------------------------
# 기준 표 재현 (오래 걸림)
# ---------------------------------------------------------------------------

def test_linear_elements_match_reference_on_coarse_meshes():
    spec = SweepSpec(k_list=[1], n_list=[8, 16, 32, 64], eps_list=[1e-8, 1e-12])
    rows = run_sweep(spec, max_workers=2)
    table = get_table(TABLE_L2_LINEAR)
    expected = {(c.eps, c.N, c.norm): c.value for c in table.cells}
    for row in rows:
        assert row.energy_err == pytest.approx(expected[(row.eps, row.N, "energy")], rel=0.5)
        assert row.l2_err == pytest.approx(expected[(row.eps, row.N, "l2")], rel=0.5)


def test_energy_order_subset_matches_reference():
    """k = 1, 3, 4 의 N = 512 / 1024 셀 (반올림 바닥이 rate 를 망치지 않는지)"""
    spec = SweepSpec(k_list=[1, 3, 4], n_list=[512, 1024], eps_list=[1.0, 1e-2, 1e-4, 1e-8])
    rows = run_sweep(spec)
    report = compare_reference(rows, TABLE_ENERGY_ORDER)
    assert report.comparisons
    assert not report.failures, format_regression(report)
    rates = {(r.k, r.eps): r.energy_rate for r in rows if r.N == 512}
    assert rates[(3, 1.0)] == pytest.approx(3.0, abs=0.15)
    assert rates[(4, 1e-4)] == pytest.approx(4.0, abs=0.15)


def test_l2_linear_subset_matches_reference():
    spec = SweepSpec(k_list=[1], n_list=[128, 256, 512], eps_list=[1e-8, 1e-12])
    report = compare_reference(run_sweep(spec), TABLE_L2_LINEAR)
    assert report.comparisons
    assert not report.failures, format_regression(report)
    assert {c.kind for c in report.comparisons} == {"value", "rate"}


def test_fitted_constants_are_stable_on_real_sweep():
    """E_N N^k 와 (k = 1) E_N N^2 의 N 두 배 비율이 [0.7, 1.4]"""
    eps_list = [1e-4, 1e-6, 1e-8, 1e-10, 1e-12]
    rows = run_sweep(SweepSpec(k_list=[1, 2], n_list=[128, 256, 512], eps_list=eps_list))
    assert all(row.ok for row in rows)
    energy = fitted_constants(rows)
    l2 = fitted_constants([r for r in rows if r.k == 1], norm="l2")
    ratios = [c.ratio for c in energy + l2 if c.ratio is not None]
    assert len(ratios) == 2 * 2 * len(eps_list) + 2 * len(eps_list)
    assert all(0.7 <= r <= 1.4 for r in ratios), ratios


def test_fitted_constant_check_flags_unstable_constants():
    passed, detail = verification.check_fitted_constant_stability(
        k_list=(1,), n_list=(128, 256), eps_list=(1e-8,), bounds=(1.5, 2.0))
    assert not passed
    assert "outside" in detail


@pytest.mark.slow
def test_reproduce_linear_table():
    spec = SweepSpec(k_list=[1], n_list=[8, 16, 32, 64, 128, 256, 512, 1024, 2048], eps_list=[1e-8, 1e-12])
    report = compare_reference(run_sweep(spec), TABLE_L2_LINEAR)
    assert report.passed, format_regression(report)


@pytest.mark.slow
def test_reproduce_energy_order_table():
    table = get_table(TABLE_ENERGY_ORDER)
    eps_list = sorted({c.eps for c in table.cells})
    spec = SweepSpec(k_list=[1, 2, 3, 4], n_list=[512, 1024], eps_list=eps_list)
    report = compare_reference(run_sweep(spec), TABLE_ENERGY_ORDER)
    assert report.passed, format_regression(report)


# ---------------------------------------------------------------------------
# verify 배터리
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("check", [
    verification.check_basis,
    verification.check_inequalities,
    verification.check_patch_test,
    verification.check_galerkin_and_coercivity,
    verification.check_csv_determinism,
])
def test_fast_property_checks(check):
    passed, detail = check()
    assert passed, detail


def test_p1_identity_check():
    passed, detail = verification.check_p1_identities(trials=100)
    assert passed, detail


def test_run_verification_collects_results(monkeypatch):
    def broken():
        raise SolverError("zero pivot")

    monkeypatch.setattr(verification, "PROPERTY_CHECKS", [
        ("reference basis", verification.check_basis),
        ("broken", broken),
    ])
    seen = []
    report = verification.run_verification(reference=False, on_result=seen.append)
    assert [r.name for r in report.results] == ["reference basis", "broken"]
    assert seen == report.results
    assert not report.passed
    assert [r.name for r in report.property_failures] == ["broken"]
    assert "SolverError" in report.results[1].detail
    assert report.reference_failures == []


def test_mesh_invariant_check():
    passed, detail = verification.check_mesh_invariants()
    assert passed, detail


if __name__ == "__main__":
    import sys

    print("=" * 60)
    print("수치 실험 테스트")
    print("=" * 60)
    sys.exit(pytest.main([__file__, "-v"]))
