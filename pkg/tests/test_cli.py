from __future__ import annotations

import json

import pandas as pd
import pytest

from src.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, EXIT_RESOURCE, main
from src.common import TOOL_VERSION


def _run(capsys, *argv: str) -> tuple[int, dict]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else {})


def test_sat_count_xnor(capsys, examples_dir):
    code, payload = _run(capsys, "sat", "count", str(examples_dir / "xnor.cnf"), "--verify")
    assert code == EXIT_OK
    assert payload["solutions"] == 2
    assert payload["chi"] == -1
    assert payload["brute_force"] == 2
    assert payload["meta"]["version"] == TOOL_VERSION
    assert "elapsed" not in payload


def test_sat_count_elapsed_only_with_timing(capsys, examples_dir):
    code, payload = _run(capsys, "sat", "count", str(examples_dir / "xnor.cnf"), "--timing")
    assert code == EXIT_OK
    assert payload["elapsed"] >= 0
    with pytest.raises(SystemExit):
        main(["sat", "count", "--help"])
    assert "omitted by default so seeded reruns are" in " ".join(capsys.readouterr().out.split())


def test_betti_of_k4(capsys, examples_dir):
    code, payload = _run(capsys, "homology", "betti", "--edges", str(examples_dir / "k4.txt"))
    assert code == EXIT_OK
    assert payload["betti"] == [1, 0, 0, 0]
    meta = payload["meta"]
    assert meta["budgets"]["max_simplices"] == 2_000_000
    assert meta["primes"] == [1_000_000_007, 998_244_353]
    assert meta["seed"] == 0


def test_square_build_then_betti(capsys, examples_dir, tmp_path):
    faces = tmp_path / "square.faces"
    code, payload = _run(
        capsys, "complex", "build", "--points", str(examples_dir / "square.csv"), "--eps", "1.1", "--faces-out", str(faces)
    )
    assert code == EXIT_OK
    assert payload["complex"]["simplex_counts"] == [4, 4]
    code, payload = _run(capsys, "homology", "betti", "--faces", str(faces))
    assert code == EXIT_OK
    assert payload["betti"] == [1, 1]


def test_export_round_trip_is_byte_identical(capsys, examples_dir, tmp_path):
    faces = tmp_path / "c4.faces"
    assert main(["complex", "export", "--edges", str(examples_dir / "c4.txt"), "--output", str(faces)]) == EXIT_OK
    main(["homology", "betti", "--edges", str(examples_dir / "c4.txt")])
    direct = capsys.readouterr().out
    main(["homology", "betti", "--faces", str(faces)])
    assert capsys.readouterr().out == direct


def test_seeded_reruns_are_byte_identical(capsys, examples_dir):
    argv = ["lgz", "simulate", "--edges", str(examples_dir / "c4.txt"), "--k", "1", "--seed", "4", "--samples", "500"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
    assert json.loads(first)["c_k_true"] == 0.25


def test_timing_flag_adds_elapsed(capsys, examples_dir):
    code, payload = _run(capsys, "euler", "--edges", str(examples_dir / "k4.txt"), "--timing")
    assert code == EXIT_OK
    assert payload["chi"] == 1
    assert payload["elapsed"] >= 0


def test_spectrum_command(capsys, examples_dir):
    code, payload = _run(capsys, "spectrum", "--edges", str(examples_dir / "c4.txt"))
    assert code == EXIT_OK
    assert [s["nullity"] for s in payload["spectra"]] == [1, 1]
    assert payload["global"]["nullity"] == 2


def test_reduce_cochordal(capsys, examples_dir, tmp_path):
    out = tmp_path / "hbar.txt"
    code, payload = _run(
        capsys, "reduce", "cochordal", "--edges", str(examples_dir / "c4.txt"), "--legs", "--graph-out", str(out)
    )
    assert code == EXIT_OK
    assert payload["all_match"]
    assert payload["N"] == 6
    assert out.read_text().startswith("n 6\n")


def test_reduce_cochordal_density_k(capsys, examples_dir):
    code, payload = _run(capsys, "reduce", "cochordal", "--edges", str(examples_dir / "c4.txt"), "--density-k", "3")
    assert code == EXIT_OK
    assert payload["density_k"] == 3
    assert payload["density"]["passes"] is False


def test_lgz_cost_csv(capsys, examples_dir, tmp_path):
    csv = tmp_path / "cost.csv"
    for _ in range(2):
        code, payload = _run(capsys, "lgz", "cost", "--edges", str(examples_dir / "c4.txt"), "--k", "1", "--csv", str(csv))
        assert code == EXIT_OK
    table = pd.read_csv(csv)
    assert len(table) == 2
    assert payload["xi_squared_exact"] == "6"


def test_skeleton_command(capsys):
    code, payload = _run(capsys, "skeleton", "--n", "4", "--k", "2")
    assert code == EXIT_OK
    assert payload["betti"][2] == 4


def test_sat_random_writes_dimacs(tmp_path):
    path = tmp_path / "r.cnf"
    assert main(["sat", "random", "--vars", "5", "--clauses", "7", "--seed", "1", "--output", str(path)]) == EXIT_OK
    assert path.read_text().startswith("p cnf 5 7\n")


def test_random_sweep_and_plot(capsys, tmp_path):
    spec = tmp_path / "spec.yaml"
    spec.write_text("model: erdos-renyi\nn: [10]\nk: [1]\np: [0.3, 0.5]\ntrials: 2\nseed: 5\n")
    csv = tmp_path / "rows.csv"
    code, payload = _run(capsys, "random", "sweep", "--spec", str(spec), "--csv", str(csv))
    assert code == EXIT_OK
    assert payload["rows"] == 4
    assert main(["plot", "--input", str(csv), "--output-dir", str(tmp_path / "fig"), "--kind", "beta-vs-n"]) == EXIT_OK
    assert (tmp_path / "fig" / "beta-vs-n.svg").exists()


# ---------------------------------------------------------------------------
# Exit codes
# ---------------------------------------------------------------------------

def test_parse_error_exits_2(tmp_path):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 1 1\n1 -1 0\n")
    assert main(["sat", "count", str(bad)]) == EXIT_INPUT


def test_missing_file_exits_2(tmp_path):
    assert main(["homology", "betti", "--edges", str(tmp_path / "nope.txt")]) == EXIT_INPUT


def test_budget_exits_3(examples_dir):
    argv = ["homology", "betti", "--edges", str(examples_dir / "k4.txt"), "--max-simplices", "5"]
    assert main(argv) == EXIT_RESOURCE


def test_eigensolver_cap_exits_3(examples_dir):
    argv = ["spectrum", "--edges", str(examples_dir / "k4.txt"), "--eigensolver-cap", "2"]
    assert main(argv) == EXIT_RESOURCE


def test_cochordal_precondition_exits_2(tmp_path):
    c5 = tmp_path / "c5.txt"
    c5.write_text("n 5\n0 1\n1 2\n2 3\n3 4\n0 4\n")
    assert main(["reduce", "cochordal", "--edges", str(c5)]) == EXIT_INPUT


def test_brute_force_mismatch_exits_4(monkeypatch, examples_dir):
    monkeypatch.setattr("src.cli.brute_force_count", lambda formula, max_vars: 3)
    assert main(["sat", "count", str(examples_dir / "xnor.cnf"), "--verify"]) == EXIT_NUMERIC


def test_config_without_budgets_exits_2(tmp_path, examples_dir):
    cfg = tmp_path / "config.yaml"
    cfg.write_text("homology:\n  rational_fallback: true\n")
    assert main(["homology", "betti", "--edges", str(examples_dir / "k4.txt"), "--config", str(cfg)]) == EXIT_INPUT


def test_config_values_are_echoed(capsys, tmp_path, examples_dir):
    cfg = tmp_path / "config.yaml"
    cfg.write_text("budgets:\n  max_simplices: 1000\nrng:\n  generator: PCG64\n  seed: 9\n")
    code, payload = _run(capsys, "homology", "betti", "--edges", str(examples_dir / "k4.txt"), "--config", str(cfg))
    assert code == EXIT_OK
    assert payload["meta"]["budgets"]["max_simplices"] == 1000
    assert payload["meta"]["seed"] == 9


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit) as info:
        main(["homology", "betti", "--edges", "x", "--bogus"])
    assert info.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert TOOL_VERSION in capsys.readouterr().out
