"""verify 배터리

성질 검사(메쉬, 부등식, 기저, 패치 테스트, 노름 항등식 ...)와 기준 표 회귀 비교를
차례로 실행하고 결과를 모읍니다. 각 검사는 (통과 여부, 설명) 을 돌려주는 함수입니다.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.errors import FemError
from src.fem.assembler import Assembler, apply_dirichlet, bilinear_form, galerkin_residual
from src.fem.fe_function import FeFunction, dof_coordinates
from src.fem.quadrature import gauss_rule
from src.fem.reference_element import reference_element
from src.mesh.inequalities import check_scalar_inequalities
from src.mesh.meshgen import MeshParams, build_mesh, kappa_bounds, uniform_mesh, verify_mesh_lemmas
from src.norms.norms import norm_equivalence_check, p1_exact_l2
from src.problem.examples import patch_problem, sun_stynes
from src.problem.problem import validate
from src.solver.banded_solver import BandedLUSolver
from src.studies.case_runner import CaseRunner, alpha_rule
from src.studies.compare import compare_reference
from src.studies.reference_tables import TABLE_ENERGY_ORDER, TABLE_L2_LINEAR, get_table
from src.studies.report import format_csv, format_regression
from src.studies.sweep import SweepSpec, fitted_constants, run_sweep

logger = logging.getLogger(__name__)

CheckOutcome = Tuple[bool, str]

LAM = 0.005


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float
    is_reference: bool = False


@dataclass
class VerificationReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def property_failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed and not r.is_reference]

    @property
    def reference_failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed and r.is_reference]


def random_p1_function(rng: np.random.Generator) -> FeFunction:
    """임의의 graded 메쉬 위 임의의 P1 함수"""
    n = int(rng.integers(2, 13))
    alpha = float(rng.uniform(0.05, 1.0))
    eps = float(10.0 ** rng.uniform(-12.0, 0.0))
    mesh = build_mesh(MeshParams(N=n, alpha=alpha, eps=eps))
    coeffs = rng.normal(size=2 * n + 1)
    return FeFunction(mesh=mesh, ref=reference_element(1), coefficients=coeffs)


def p1_quadrature_l2(fe: FeFunction) -> float:
    """2 점 Gauss 로 계산한 L2 노름 (P1 제곱은 2 차라 정확)"""
    rule = gauss_rule(2)
    values, _ = fe.element_values(rule.points)
    return math.sqrt(math.fsum(np.asarray(fe.mesh.intervals) * rule.integrate(values * values)))


# ---------------------------------------------------------------------------
# 성질 검사
# ---------------------------------------------------------------------------

def check_mesh_invariants() -> CheckOutcome:
    problems = []
    for eps in (1.0, 1e-4, 1e-8, 1e-14):
        for k in (1, 4):
            params = MeshParams(N=64, alpha=alpha_rule(k, LAM), eps=eps)
            mesh = build_mesh(params)
            x = np.asarray(mesh.nodes)
            if not np.array_equal(x, -x[::-1]):
                problems.append(f"not odd-symmetric (eps={eps:g}, k={k})")
            if not np.all(np.diff(x) > 0.0):
                problems.append(f"not monotone (eps={eps:g}, k={k})")
            lower, upper = kappa_bounds(params.alpha, eps)
            if not (lower * (1 - 1e-12) <= mesh.kappa <= upper * (1 + 1e-12)):
                problems.append(f"kappa={mesh.kappa:.4g} outside [{lower:.4g}, {upper:.4g}]")
            report = verify_mesh_lemmas(mesh, LAM, k)
            if not report.passed:
                failed = [c.name for c in report.checks if c.status == "fail"]
                problems.append(f"mesh lemmas failed (eps={eps:g}, k={k}): {failed}")
    uniform = uniform_mesh(16)
    if not np.allclose(uniform.nodes, np.linspace(-1.0, 1.0, 33), rtol=0.0, atol=1e-15):
        problems.append("alpha = 1 mesh is not uniform")
    return not problems, "; ".join(problems) or "odd, monotone, kappa bounded, lemma constants stable"


def check_inequalities() -> CheckOutcome:
    results = check_scalar_inequalities(samples=1000, seed=0)
    failed = [name for name, r in results.items() if not r.holds]
    return not failed, f"violated: {failed}" if failed else f"{len(results)} inequalities at 1000 points each"


def check_basis() -> CheckOutcome:
    worst_kron = worst_pou = 0.0
    t = np.linspace(0.0, 1.0, 101)
    for k in range(1, 11):
        ref = reference_element(k)
        worst_kron = max(worst_kron, float(np.max(np.abs(ref.basis(ref.nodes) - np.eye(k + 1)))))
        worst_pou = max(worst_pou, float(np.max(np.abs(ref.basis(t).sum(axis=1) - 1.0))),
                        float(np.max(np.abs(ref.basis_derivative(t).sum(axis=1)))))
    ok = worst_kron <= 1e-13 and worst_pou <= 1e-12
    return ok, f"Kronecker {worst_kron:.1e}, partition of unity {worst_pou:.1e}"


def check_patch_test() -> CheckOutcome:
    problem, sol = patch_problem()
    worst = 0.0
    for k in (2, 3, 4):
        for alpha, eps in ((1.0, 1.0), (0.2, 1e-6)):
            mesh = build_mesh(MeshParams(N=8, alpha=alpha, eps=eps))
            assembler = Assembler(k)
            system = apply_dirichlet(assembler.assemble(problem, mesh), problem.nu_left, problem.nu_right)
            uN = BandedLUSolver().solve(system)
            exact = sol.u(dof_coordinates(mesh, assembler.ref))
            worst = max(worst, float(np.max(np.abs(uN.coefficients - exact))))
    return worst <= 1e-10, f"max DOF error {worst:.2e}"


def check_galerkin_and_coercivity() -> CheckOutcome:
    problem, _ = sun_stynes(1e-6, LAM)
    gamma = validate(problem).gamma
    mesh = build_mesh(MeshParams(N=16, alpha=alpha_rule(2, LAM), eps=1e-6))
    assembler = Assembler(2)
    raw = assembler.assemble(problem, mesh)
    uN = BandedLUSolver().solve(apply_dirichlet(raw, 0.0, 0.0))
    orth = galerkin_residual(raw, uN)
    orth_ok = orth <= max(10.0 * uN.info.residual, 1e-12)

    rng = np.random.default_rng(1)
    worst = math.inf
    for _ in range(20):
        coeffs = rng.normal(size=uN.coefficients.size)
        coeffs[0] = coeffs[-1] = 0.0
        v = FeFunction(mesh=mesh, ref=assembler.ref, coefficients=coeffs)
        rule = gauss_rule(3)
        values, _ = v.element_values(rule.points)
        l2_sq = math.fsum(np.asarray(mesh.intervals) * rule.integrate(values * values))
        margin = bilinear_form(problem, v, v) - gamma * l2_sq
        worst = min(worst, margin / max(l2_sq, 1e-300))
    coercive_ok = worst >= -1e-10
    return orth_ok and coercive_ok, f"Galerkin residual {orth:.1e}, min (B(v,v) - gamma|v|^2)/|v|^2 = {worst:.2e}"


def check_p1_identities(trials: int = 1000) -> CheckOutcome:
    rng = np.random.default_rng(2)
    worst_rel = 0.0
    violations = 0
    for _ in range(trials):
        fe = random_p1_function(rng)
        exact = p1_exact_l2(fe)
        oracle = p1_quadrature_l2(fe)
        worst_rel = max(worst_rel, abs(exact - oracle) / max(oracle, 1e-300))
        if not norm_equivalence_check(fe).holds:
            violations += 1
    ok = worst_rel <= 1e-12 and violations == 0
    return ok, f"closed form vs quadrature {worst_rel:.1e}, norm equivalence violations {violations}/{trials}"


def check_quadrature_sufficiency() -> CheckOutcome:
    worst = 0.0
    for k in (1, 2, 3, 4):
        base = CaseRunner().run(k, 256, 1e-8, LAM).report.energy
        doubled = CaseRunner(quad_points=2 * (k + 3)).run(k, 256, 1e-8, LAM).report.energy
        worst = max(worst, abs(doubled - base) / base)
    return worst < 0.01, f"max relative change {worst:.2e} when doubling q"


def check_supercloseness_rate() -> CheckOutcome:
    rows = run_sweep(SweepSpec(k_list=[1], n_list=[128, 256, 512, 1024], eps_list=[1e-8]))
    rates = []
    for coarse, fine in zip(rows[:-1], rows[1:]):
        rates.append(math.log(coarse.supercloseness / fine.supercloseness) / math.log(2.0))
    ok = all(abs(r - 2.0) <= 0.15 for r in rates)
    return ok, "rates " + ", ".join(f"{r:.3f}" for r in rates)


def check_fitted_constant_stability(
    k_list=(1, 2, 3),
    n_list=(256, 512, 1024),
    eps_list=(1e-4, 1e-6, 1e-8, 1e-10, 1e-12),
    bounds=(0.7, 1.4),
) -> CheckOutcome:
    """E_N N^k (energy) 와 k = 1 의 E_N N^2 (L2) 가 N 두 배에서 bounds 안에 머무는지"""
    rows = run_sweep(SweepSpec(k_list=list(k_list), n_list=list(n_list), eps_list=list(eps_list)))
    failed = [r for r in rows if not r.ok]
    if failed:
        return False, f"{len(failed)} case(s) failed, first: {failed[0].error}"
    low, high = bounds
    constants = fitted_constants(rows) + fitted_constants([r for r in rows if r.k == 1], norm="l2")
    ratios = [c.ratio for c in constants if c.ratio is not None]
    outside = [c for c in constants if c.ratio is not None and not (low <= c.ratio <= high)]
    detail = f"{len(ratios)} ratios in [{min(ratios):.3f}, {max(ratios):.3f}]" if ratios else "no ratios"
    if outside:
        first = outside[0]
        detail += f"; {len(outside)} outside [{low:g}, {high:g}], first k={first.k} N={first.N} eps={first.eps:.0e}"
    return bool(ratios) and not outside, detail


def check_csv_determinism() -> CheckOutcome:
    spec = SweepSpec(k_list=[1, 2], n_list=[8, 16], eps_list=[1e-4])
    first = format_csv(run_sweep(spec))
    second = format_csv(run_sweep(spec, max_workers=1))
    return first == second, "identical CSV over two runs" if first == second else "CSV output differs"


def _robustness(label: str, spec: SweepSpec) -> CheckOutcome:
    rows = run_sweep(spec)
    worst = 1.0
    for k in spec.k_list:
        errors = [r.energy_err for r in rows if r.k == k and r.ok]
        if len(errors) != len([r for r in rows if r.k == k]):
            return False, f"{label}: failed cases for k={k}"
        worst = max(worst, max(errors) / min(errors))
    return worst < 3.0, f"{label}: max/min energy error per k = {worst:.3f}"


def check_lambda_robustness() -> CheckOutcome:
    lams = [10.0 ** p for p in range(-13, 0, 2)]
    return _robustness("lambda", SweepSpec(k_list=[1, 2, 3, 4], n_list=[1024], eps_list=[1e-8], lambda_list=lams))


def check_alpha0_robustness() -> CheckOutcome:
    alpha0s = [10.0 ** p for p in range(-10, 1, 2)]
    return _robustness("alpha0", SweepSpec(k_list=[1, 2, 3, 4], n_list=[1024], eps_list=[1e-8], alpha0_list=alpha0s))


def check_eps_robustness() -> CheckOutcome:
    eps_list = [10.0 ** -p for p in range(0, 15, 2)]
    rows = run_sweep(SweepSpec(k_list=[1], n_list=[256, 512, 1024, 2048], eps_list=eps_list))
    at_1024 = [r.energy_err for r in rows if r.N == 1024 and r.ok]
    ratio = max(at_1024) / min(at_1024) if at_1024 else math.inf
    low_rates = [r for r in rows if r.N >= 256 and r.l2_rate is not None and r.l2_rate < 1.9]
    ok = len(at_1024) == len(eps_list) and ratio <= 200.0 and not low_rates
    return ok, f"max/min energy error at N=1024 = {ratio:.1f}, L2 rates below 1.9: {len(low_rates)}"


def reference_check(table_id: str, tolerance_factor: Optional[float] = None,
                    rate_tolerance: Optional[float] = None) -> CheckOutcome:
    table = get_table(table_id)
    keys = table.keys()
    spec = SweepSpec(
        k_list=sorted({k for k, _, _ in keys}),
        n_list=sorted({n for _, _, n in keys}),
        eps_list=sorted({eps for _, eps, _ in keys}, reverse=True),
        lambda_list=[table.lam],
        alpha0_list=[table.alpha0],
    )
    report = compare_reference(run_sweep(spec), table_id, tolerance_factor, rate_tolerance)
    return report.passed, format_regression(report)


PROPERTY_CHECKS: List[Tuple[str, Callable[[], CheckOutcome]]] = [
    ("mesh invariants", check_mesh_invariants),
    ("scalar inequalities", check_inequalities),
    ("reference basis", check_basis),
    ("patch test", check_patch_test),
    ("Galerkin orthogonality and coercivity", check_galerkin_and_coercivity),
    ("P1 norm identities", check_p1_identities),
    ("quadrature sufficiency", check_quadrature_sufficiency),
    ("supercloseness rate", check_supercloseness_rate),
    ("fitted constant stability", check_fitted_constant_stability),
    ("CSV determinism", check_csv_determinism),
    ("eps robustness", check_eps_robustness),
    ("lambda robustness", check_lambda_robustness),
    ("alpha0 robustness", check_alpha0_robustness),
]


def _timed(name: str, fn: Callable[[], CheckOutcome], is_reference: bool = False) -> CheckResult:
    started = time.perf_counter()
    try:
        passed, detail = fn()
    except FemError as e:
        passed, detail = False, f"{type(e).__name__}: {e}"
    elapsed = time.perf_counter() - started
    if passed:
        logger.info("verify '%s' passed in %.2fs", name, elapsed)
    else:
        logger.warning("verify '%s' failed: %s", name, detail)
    return CheckResult(name=name, passed=passed, detail=detail, elapsed=elapsed, is_reference=is_reference)


def run_verification(
    reference: bool = True,
    tolerance_factor: Optional[float] = None,
    rate_tolerance: Optional[float] = None,
    on_result: Optional[Callable[[CheckResult], None]] = None,
) -> VerificationReport:
    """
    전체 verify 배터리 실행

    Args:
        reference: 기준 표 회귀 비교 포함 여부
        tolerance_factor: 기준 오차 배율 허용치 (기본값: 표마다 정한 값)
        rate_tolerance: rate 허용치 (기본값: 표마다 정한 값)
        on_result: 검사 하나가 끝날 때마다 호출 (진행 출력용)

    Returns:
        VerificationReport
    """
    report = VerificationReport()
    jobs = [(name, fn, False) for name, fn in PROPERTY_CHECKS]
    if reference:
        for table_id in (TABLE_L2_LINEAR, TABLE_ENERGY_ORDER):
            jobs.append((
                f"reference {table_id}",
                lambda t=table_id: reference_check(t, tolerance_factor, rate_tolerance),
                True,
            ))
    for name, fn, is_reference in jobs:
        result = _timed(name, fn, is_reference)
        report.results.append(result)
        if on_result is not None:
            on_result(result)
    return report
