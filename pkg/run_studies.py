"""
수치 실험 CLI

사용법:
    python run_studies.py mesh   --n 16 --eps 1e-8 --k 1 --lambda 0.005
    python run_studies.py solve  --k 2 --n 64 --eps 1e-8 --out solution.txt
    python run_studies.py sweep  --k 1 --n-list 8:2048 --eps-list 1e-8,1e-12 --out results.csv \\
                                 --reference-check l2-linear
    python run_studies.py verify
    python run_studies.py curves --k 1,2,3,4 --n-list 32:4096 --anchor-n 32 --out curves/

종료 코드: 0 성공, 2 입력/문제 검증 실패, 3 솔버 실패, 4 회귀 비교 실패
"""

import argparse
import logging
import sys
from typing import List, Optional

from src.config import get_settings
from src.database.db import get_session, init_database
from src.errors import EXIT_OK, EXIT_REGRESSION, EXIT_SOLVER, FemError, ParameterError, exit_code_for
from src.fem.fe_function import dof_coordinates
from src.mesh.meshgen import MeshParams, build_mesh, format_nodes, verify_mesh_lemmas
from src.problem.examples import problem_names
from src.studies.case_runner import CaseRunner, alpha_rule
from src.studies.compare import compare_reference
from src.studies.reference_tables import table_ids
from src.studies.report import (
    emit_csv, emit_reference_curves, format_csv, format_regression, format_table, write_curves,
)
from src.studies.result_store import ResultStore
from src.studies.sweep import SweepSpec, run_sweep
from src.studies.verification import run_verification


def parse_int_list(text: str) -> List[int]:
    """'8,16,32' 또는 '8:2048' (2 배씩) 형식"""
    text = text.strip()
    try:
        if ":" in text:
            start, stop = (int(p) for p in text.split(":", 1))
            if start < 1 or stop < start:
                raise ValueError(text)
            values = []
            n = start
            while n <= stop:
                values.append(n)
                n *= 2
            return values
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from e


def parse_float_list(text: str) -> List[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}") from e


def _add_case_args(parser: argparse.ArgumentParser, single_n: bool = True) -> None:
    parser.add_argument("--k", type=parse_int_list, default=[1], help="다항식 차수 (목록 가능: 1,2,3)")
    if single_n:
        parser.add_argument("--n", type=int, default=64, help="반쪽 구간 수 N")
        parser.add_argument("--eps", type=float, default=1e-8)
    parser.add_argument("--lambda", dest="lam", type=float, default=0.005)
    parser.add_argument("--alpha0", type=float, default=1.0)
    parser.add_argument("--problem", choices=problem_names(), default="sun-stynes")
    parser.add_argument("--quad-points", type=int, default=None, help="조립 Gauss 점 수 (기본값: k+3)")
    parser.add_argument("--err-subdiv", type=int, default=None, help="오차 적분 분할 깊이")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Turning-point FEM on graded meshes")
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG 로그 출력")
    sub = parser.add_subparsers(dest="command", required=True)

    p_mesh = sub.add_parser("mesh", help="메쉬 노드 출력")
    p_mesh.add_argument("--n", type=int, default=16)
    p_mesh.add_argument("--eps", type=float, default=1e-8)
    p_mesh.add_argument("--k", type=int, default=1)
    p_mesh.add_argument("--lambda", dest="lam", type=float, default=0.005)
    p_mesh.add_argument("--alpha0", type=float, default=1.0)
    p_mesh.add_argument("--alpha", type=float, default=None, help="grading 지수 직접 지정")
    p_mesh.add_argument("--lemmas", action="store_true", help="메쉬 보조정리 진단 출력")
    p_mesh.add_argument("--out", default=None)

    p_solve = sub.add_parser("solve", help="단일 케이스 풀이")
    _add_case_args(p_solve)
    p_solve.add_argument("--out", default=None, help="(x, u_N(x)) 저장 경로")

    p_sweep = sub.add_parser("sweep", help="수렴 sweep (CSV)")
    _add_case_args(p_sweep, single_n=False)
    p_sweep.add_argument("--n-list", type=parse_int_list, default=[8, 16, 32, 64, 128, 256, 512, 1024, 2048])
    p_sweep.add_argument("--eps-list", type=parse_float_list, default=[1e-8])
    p_sweep.add_argument("--lambda-list", type=parse_float_list, default=None)
    p_sweep.add_argument("--alpha0-list", type=parse_float_list, default=None)
    p_sweep.add_argument("--workers", type=int, default=None)
    p_sweep.add_argument("--out", default=None, help="CSV 경로 (없으면 stdout)")
    p_sweep.add_argument("--reference-check", choices=table_ids(), default=None)
    p_sweep.add_argument("--tolerance-factor", type=float, default=None)
    p_sweep.add_argument("--rate-tolerance", type=float, default=None)
    p_sweep.add_argument("--db", default=None, help="결과 저장 DB URL (기본값: STUDIES_DATABASE_URL)")
    p_sweep.add_argument("--label", default=None)

    p_verify = sub.add_parser("verify", help="성질 검사 + 기준 표 회귀 비교")
    p_verify.add_argument("--skip-reference", action="store_true")
    p_verify.add_argument("--tolerance-factor", type=float, default=None)
    p_verify.add_argument("--rate-tolerance", type=float, default=None)

    p_curves = sub.add_parser("curves", help="O(N^-k) 참조 곡선")
    p_curves.add_argument("--k", type=parse_int_list, default=[1, 2, 3, 4])
    p_curves.add_argument("--n-list", type=parse_int_list, default=[32, 64, 128, 256, 512, 1024, 2048, 4096])
    p_curves.add_argument("--anchor-n", type=int, default=32)
    p_curves.add_argument("--eps", type=float, default=1e-8)
    p_curves.add_argument("--lambda", dest="lam", type=float, default=0.005)
    p_curves.add_argument("--out", default="curves")
    return parser


def cmd_mesh(args) -> int:
    alpha = args.alpha if args.alpha is not None else alpha_rule(args.k, args.lam, args.alpha0)
    mesh = build_mesh(MeshParams(N=args.n, alpha=alpha, eps=args.eps))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(format_nodes(mesh))
        print(f"✅ {2 * args.n + 1} nodes written to {args.out} (alpha={alpha:.4e}, kappa={mesh.kappa:.6f})")
    else:
        sys.stdout.write(format_nodes(mesh))
    if args.lemmas:
        report = verify_mesh_lemmas(mesh, args.lam, args.k)
        print("=" * 60)
        print(f"메쉬 보조정리 (N={args.n}, alpha={alpha:.4e}, eps={args.eps:g})")
        print("=" * 60)
        for check in report.checks:
            mark = {"pass": "✅", "fail": "❌"}.get(check.status, "➖")
            fitted = "" if check.fitted is None else f" C={check.fitted:.4g}"
            ratio = "" if check.ratio is None else f" ratio={check.ratio:.3f}"
            print(f"{mark} {check.name}:{fitted}{ratio} {check.detail}".rstrip())
    return EXIT_OK


def cmd_solve(args) -> int:
    if len(args.k) != 1:
        raise ParameterError(f"solve takes exactly one --k value, got {args.k}; use sweep for several")
    runner = CaseRunner(args.problem, quad_points=args.quad_points, err_subdiv=args.err_subdiv)
    result = runner.run(args.k[0], args.n, args.eps, args.lam, alpha0=args.alpha0)
    uN = result.solution
    if args.out:
        coords = dof_coordinates(result.mesh, uN.ref)
        with open(args.out, "w", encoding="utf-8") as f:
            for x, value in zip(coords, uN.coefficients):
                f.write(f"{x:.16e} {value:.16e}\n")

    print("=" * 60)
    print(f"{result.problem_name}: k={result.k} N={result.N} eps={result.eps:g} "
          f"lambda={result.lam:g} alpha={result.alpha:.4e}")
    print("=" * 60)
    print(f"DOF 수: {uN.coefficients.size}, 잔차: {uN.info.residual:.2e}, 시간: {result.elapsed:.3f}s")
    if result.report is not None:
        r = result.report
        print(f"energy 오차:      {r.energy:.6e}")
        print(f"L2 오차:          {r.l2:.6e}")
        print(f"H1 semi 오차:     {r.h1_semi:.6e}")
        print(f"보간 L2 오차:     {r.interp_l2:.6e}")
        print(f"supercloseness:   {r.supercloseness:.6e}")
    if args.out:
        print(f"\n✅ 해 저장: {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    settings = get_settings()
    spec = SweepSpec(
        k_list=args.k,
        n_list=args.n_list,
        eps_list=args.eps_list,
        lambda_list=args.lambda_list or [args.lam],
        alpha0_list=args.alpha0_list or [args.alpha0],
        problem=args.problem,
        quad_points=args.quad_points,
        err_subdiv=args.err_subdiv,
    )
    rows = run_sweep(spec, max_workers=args.workers)

    if args.out:
        emit_csv(rows, args.out)
        print(format_table(rows))
        print(f"\n✅ CSV 저장: {args.out} ({len(rows)} rows)")
    else:
        sys.stdout.write(format_csv(rows))

    database_url = args.db or settings.database_url
    if database_url:
        engine = init_database(database_url)
        store = ResultStore(get_session(engine))
        run = store.create_run(spec.to_dict(), label=args.label)
        store.save_rows(run.id, rows)
        print(f"✅ DB 저장: run_id={run.id} ({store.count_rows(run.id)} rows)")

    failed = [row for row in rows if not row.ok]
    if failed:
        print(f"❌ 실패한 케이스 {len(failed)}개", file=sys.stderr)

    if args.reference_check:
        report = compare_reference(rows, args.reference_check, args.tolerance_factor, args.rate_tolerance)
        print(format_regression(report), file=sys.stderr if not args.out else sys.stdout)
        if not report.passed:
            return EXIT_REGRESSION
    if failed:
        return EXIT_SOLVER
    return EXIT_OK


def cmd_verify(args) -> int:
    print("=" * 60)
    print("verify")
    print("=" * 60)

    def show(result):
        mark = "✅" if result.passed else "❌"
        print(f"{mark} {result.name} ({result.elapsed:.1f}s)")
        for line in result.detail.splitlines():
            print(f"   {line}")

    report = run_verification(
        reference=not args.skip_reference,
        tolerance_factor=args.tolerance_factor,
        rate_tolerance=args.rate_tolerance,
        on_result=show,
    )
    total = len(report.results)
    failed = total - sum(1 for r in report.results if r.passed)
    print("-" * 60)
    print(f"{total - failed}/{total} passed")
    return EXIT_OK if report.passed else EXIT_REGRESSION


def cmd_curves(args) -> int:
    spec = SweepSpec(k_list=args.k, n_list=[args.anchor_n], eps_list=[args.eps], lambda_list=[args.lam])
    anchors = run_sweep(spec)
    curves = emit_reference_curves(args.k, args.n_list, anchors)
    for path in write_curves(curves, args.out):
        print(f"✅ {path}")
    return EXIT_OK


COMMANDS = {
    "mesh": cmd_mesh,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "curves": cmd_curves,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else get_settings().log_level
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FemError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code_for(e)
    except ValueError as e:
        # 설정 값 오류 등
        print(f"❌ {e}", file=sys.stderr)
        return exit_code_for(ParameterError(str(e)))


if __name__ == "__main__":
    sys.exit(main())
