"""결과 저장소와 CLI 테스트"""

import math

import pytest

from run_studies import main, parse_int_list
from src.database.db import get_session, init_database, resolve_database_url
from src.errors import EXIT_OK, EXIT_REGRESSION, EXIT_VALIDATION
from src.studies.result_store import ResultStore
from src.studies.sweep import ConvergenceRow, SweepSpec


@pytest.fixture
def store():
    engine = init_database("sqlite:///:memory:")
    session = get_session(engine)
    yield ResultStore(session)
    session.close()


def _rows():
    ok = ConvergenceRow(k=1, N=8, eps=1e-8, lam=0.005, alpha0=1.0, alpha=0.0025,
                        energy_err=7.5e-3, l2_err=4.1e-3, h1semi_err=0.1, interp_l2=1e-3,
                        supercloseness=2e-4, energy_rate=1.4, l2_rate=None)
    failed = ConvergenceRow(k=1, N=16, eps=1e-8, lam=0.005, alpha0=1.0, alpha=0.0025,
                            error="SolverError: zero pivot")
    return [failed, ok]


def test_save_and_load_rows(store):
    spec = SweepSpec(k_list=[1], n_list=[8, 16], eps_list=[1e-8])
    run = store.create_run(spec.to_dict(), label="smoke")
    assert store.save_rows(run.id, _rows()) == 2
    assert store.count_rows(run.id) == 2

    loaded = store.load_rows(run.id)
    assert [row.N for row in loaded] == [8, 16]
    ok, failed = loaded
    assert ok.energy_err == pytest.approx(7.5e-3)
    assert ok.energy_rate == pytest.approx(1.4)
    assert ok.l2_rate is None
    assert ok.ok
    assert not failed.ok
    assert math.isnan(failed.energy_err)
    assert failed.error == "SolverError: zero pivot"


def test_latest_run(store):
    assert store.latest_run() is None
    first = store.create_run({"k_list": [1]}, label="first")
    second = store.create_run({"k_list": [2]}, label="second")
    assert store.latest_run().id == second.id
    assert store.latest_run().spec == {"k_list": [2]}
    assert store.count_rows(first.id) == 0


def test_resolve_database_url():
    assert resolve_database_url("sqlite:///x.db") == "sqlite:///x.db"
    assert resolve_database_url(None).startswith("sqlite:///")


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_parse_int_list():
    assert parse_int_list("8:64") == [8, 16, 32, 64]
    assert parse_int_list("8,16") == [8, 16]
    assert parse_int_list("8:100") == [8, 16, 32, 64]


def test_cli_mesh(tmp_path, capsys):
    out = tmp_path / "nodes.txt"
    assert main(["mesh", "--n", "8", "--eps", "1e-8", "--out", str(out)]) == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 17
    assert float(lines[0]) == -1.0 and float(lines[8]) == 0.0 and float(lines[-1]) == 1.0

    assert main(["mesh", "--n", "8", "--k", "2", "--lemmas"]) == EXIT_OK
    assert "보조정리" in capsys.readouterr().out


def test_cli_solve(tmp_path, capsys):
    out = tmp_path / "solution.txt"
    assert main(["solve", "--k", "2", "--n", "8", "--eps", "1e-6", "--out", str(out)]) == EXIT_OK
    assert len(out.read_text(encoding="utf-8").splitlines()) == 2 * 16 + 1
    assert "energy" in capsys.readouterr().out


def test_cli_invalid_input_exit_code(capsys):
    assert main(["solve", "--k", "1", "--n", "8", "--eps", "2.0"]) == EXIT_VALIDATION
    assert main(["sweep", "--k", "1", "--n-list", "7", "--eps-list", "1e-8"]) == EXIT_VALIDATION
    assert main(["solve", "--k", "1,2", "--n", "8"]) == EXIT_VALIDATION
    assert "ParameterError" in capsys.readouterr().err


def test_cli_sweep_writes_csv_and_db(tmp_path):
    csv_path = tmp_path / "results.csv"
    db_url = f"sqlite:///{tmp_path / 'studies.db'}"
    code = main([
        "sweep", "--k", "1", "--n-list", "8:16", "--eps-list", "1e-8",
        "--workers", "1", "--out", str(csv_path), "--db", db_url, "--label", "cli",
    ])
    assert code == EXIT_OK
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("k,N,eps,lambda")
    assert len(lines) == 3

    store = ResultStore(get_session(init_database(db_url)))
    run = store.latest_run()
    assert run.label == "cli"
    assert store.count_rows(run.id) == 2


def test_cli_reference_check_incomplete_sweep(tmp_path):
    code = main([
        "sweep", "--k", "1", "--n-list", "8,16", "--eps-list", "1e-8",
        "--workers", "1", "--out", str(tmp_path / "r.csv"), "--reference-check", "l2-linear",
    ])
    assert code == EXIT_REGRESSION


def test_cli_curves(tmp_path):
    out = tmp_path / "curves"
    code = main(["curves", "--k", "1,2", "--n-list", "8:32", "--anchor-n", "8", "--out", str(out)])
    assert code == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["reference_curve_k1.csv", "reference_curve_k2.csv"]


if __name__ == "__main__":
    import sys

    print("=" * 60)
    print("결과 저장소 / CLI 테스트")
    print("=" * 60)
    sys.exit(pytest.main([__file__, "-v"]))
