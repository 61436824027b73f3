from __future__ import annotations

import json
from fractions import Fraction
from math import comb, sqrt

import pandas as pd
import pytest

from src.common import InputError, Settings
from src.complex_core import Graph, clique_complex, from_maximal_faces, k_skeleton_of_simplex
from src.experiments import (
    ERDOS_RENYI,
    ROW_COLUMNS,
    VIETORIS_RIPS,
    SweepSpec,
    aggregate_sweep,
    classify_regime,
    er_window,
    load_sweep_spec,
    run_sweep,
    speedup_table,
    write_table,
)


@pytest.mark.parametrize("epsilon,label", [(0.01, "subcritical"), (0.1, "critical"), (0.5, "supercritical")])
def test_classify_regime(epsilon, label):
    regime = classify_regime(100, 2, epsilon)
    assert regime.label == label
    assert regime.r_hat == pytest.approx(0.1)


def test_classify_regime_custom_thresholds():
    assert classify_regime(100, 2, 0.1, thresholds=(2.0, 4.0)).label == "subcritical"
    with pytest.raises(InputError):
        classify_regime(1, 2, 0.1)


def test_er_window_lies_inside_interval():
    for n, k in [(20, 2), (50, 1), (100, 3)]:
        p = er_window(n, k)
        assert n ** (-1.0 / k) < p < n ** (-1.0 / (k + 1))
    with pytest.raises(InputError):
        er_window(20, 0)


# ---------------------------------------------------------------------------
# Sweep specs
# ---------------------------------------------------------------------------

def test_spec_from_mapping_and_cells():
    spec = SweepSpec.from_mapping(
        {"model": VIETORIS_RIPS, "n": [40, 20], "k": 1, "epsilon_ratio": [1.0, 0.1], "trials": 2, "seed": 3}
    )
    cells = spec.cells()
    assert [c["n"] for c in cells] == [20, 20, 40, 40]
    assert cells[0]["epsilon_ratio"] == pytest.approx(0.1)
    assert cells[0]["epsilon"] == pytest.approx(0.1 * 20 ** -0.5)


def test_er_window_spec_adds_midpoints():
    spec = SweepSpec.from_mapping({"model": ERDOS_RENYI, "n": [20], "k": [1, 2], "p": "window"})
    assert spec.p_window
    assert sorted(c["p"] for c in spec.cells()) == sorted([er_window(20, 1), er_window(20, 2)])


@pytest.mark.parametrize(
    "data",
    [
        {"model": "lattice", "n": [10], "epsilon": [0.1]},
        {"model": VIETORIS_RIPS, "n": [10]},
        {"model": ERDOS_RENYI, "n": [10], "p": [1.5]},
        {"model": VIETORIS_RIPS, "n": [1], "epsilon": [0.1]},
        {"model": VIETORIS_RIPS, "n": [10], "epsilon": [0.1], "colour": "red"},
    ],
)
def test_invalid_specs(data):
    with pytest.raises(InputError):
        SweepSpec.from_mapping(data)


@pytest.mark.parametrize("suffix", [".yaml", ".json", ".toml"])
def test_load_sweep_spec_formats(tmp_path, suffix):
    path = tmp_path / f"spec{suffix}"
    if suffix == ".yaml":
        path.write_text("model: erdos-renyi\nn: [12]\nk: [1]\np: [0.3]\ntrials: 2\n")
    elif suffix == ".json":
        path.write_text(json.dumps({"model": "erdos-renyi", "n": [12], "k": [1], "p": [0.3], "trials": 2}))
    else:
        path.write_text('model = "erdos-renyi"\nn = [12]\nk = [1]\np = [0.3]\ntrials = 2\n')
    spec = load_sweep_spec(path)
    assert spec.model == ERDOS_RENYI
    assert spec.n_values == (12,)


# ---------------------------------------------------------------------------
# Running sweeps
# ---------------------------------------------------------------------------

def _small_er_spec(**overrides) -> SweepSpec:
    data = {"model": ERDOS_RENYI, "n": [10, 14], "k": [1, 2], "p": [0.3, 0.6], "trials": 3, "seed": 21}
    data.update(overrides)
    return SweepSpec.from_mapping(data)


def test_rows_satisfy_cost_identities():
    rows = run_sweep(_small_er_spec())
    assert list(rows.columns) == ROW_COLUMNS
    assert (rows["status"] == "ok").all()
    for row in rows.itertuples():
        if row.s_k:
            assert row.c_k * row.s_k == pytest.approx(row.beta_k)
        if row.beta_k:
            assert Fraction(row.xi_squared) * row.beta_k == comb(row.n, row.k + 1)
            assert row.xi == pytest.approx(sqrt(comb(row.n, row.k + 1) / row.beta_k))


def test_complete_graph_rows_have_no_higher_homology():
    rows = run_sweep(_small_er_spec(p=[1.0]))
    assert (rows["beta_k"] == 0).all()
    assert (rows["xi_squared"] == "inf").all()


def test_sweep_is_deterministic(tmp_path):
    spec = _small_er_spec()
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_table(run_sweep(spec), first)
    write_table(run_sweep(spec), second)
    assert first.read_bytes() == second.read_bytes()


def test_threads_do_not_change_rows():
    spec = _small_er_spec()
    serial = run_sweep(spec, Settings(seed=spec.seed, threads=1))
    parallel = run_sweep(spec, Settings(seed=spec.seed, threads=2))
    pd.testing.assert_frame_equal(serial, parallel)


def test_budget_skips_are_recorded():
    rows = run_sweep(_small_er_spec(p=[1.0]), Settings(max_simplices=20))
    assert (rows["status"] == "skipped").all()
    assert rows["beta_k"].isna().all()
    assert aggregate_sweep(rows).empty


def test_aggregate_columns():
    agg = aggregate_sweep(run_sweep(_small_er_spec()))
    for column in ("trials", "beta_mean", "beta_var", "beta_ci_low", "beta_ci_high", "growth_ratio"):
        assert column in agg.columns
    assert (agg["trials"] == 3).all()
    assert (agg["beta_ci_low"] <= agg["beta_mean"]).all()


def test_er_window_cell_reports_median_normalized_betti():
    spec = SweepSpec.from_mapping({"model": ERDOS_RENYI, "n": [20], "k": [2], "p": "window", "trials": 20, "seed": 5})
    rows = run_sweep(spec)
    assert (rows["status"] == "ok").all()
    assert rows["p"].unique().tolist() == pytest.approx([er_window(20, 2)])
    agg = aggregate_sweep(rows)
    assert len(agg) == 1
    cell = agg.iloc[0]
    assert cell["trials"] == 20
    assert 0.0 <= cell["c_k_median"] <= 1.0
    with_triangles = rows[rows["s_k"] > 0]
    assert cell["c_k_median"] == pytest.approx(with_triangles["c_k"].astype(float).median())


@pytest.mark.slow
def test_critical_regime_maximizes_first_betti():
    spec = SweepSpec.from_mapping(
        {"model": VIETORIS_RIPS, "n": [40, 80], "k": [1], "d": 2, "epsilon_ratio": [0.1, 1.0, 5.0], "trials": 20, "seed": 7}
    )
    agg = aggregate_sweep(run_sweep(spec))
    for n, group in agg.groupby("n"):
        means = dict(zip(group["epsilon_ratio"].round(6), group["beta_mean"]))
        assert means[1.0] > means[0.1], n
        assert means[1.0] > means[5.0], n
    regimes = set(agg["regime"])
    assert regimes == {"subcritical", "critical", "supercritical"}


# ---------------------------------------------------------------------------
# Speedup tables
# ---------------------------------------------------------------------------

def test_speedup_table(c4):
    table = speedup_table(
        [
            ("cycle", clique_complex(c4)),
            ("skeleton", k_skeleton_of_simplex(7, 3)),
            ("points", from_maximal_faces([[0], [1], [2]])),
            ("k4", clique_complex(Graph.complete(4))),
        ],
        k=1,
    ).set_index("name")
    assert table.loc["cycle", "xi"] == pytest.approx(sqrt(6))
    assert table.loc["cycle", "t_classical"] == 6
    assert table.loc["k4", "beta_zero"]
    assert table.loc["points", "beta_zero"]


def test_speedup_on_skeleton_uses_vertex_count():
    table = speedup_table([("skeleton", k_skeleton_of_simplex(7, 3))], k=3)
    row = table.iloc[0]
    assert row["n"] == 8
    assert row["beta_k"] == comb(7, 4)
    assert row["xi"] ** 2 * row["beta_k"] == pytest.approx(comb(8, 4))


def test_speedup_is_one_when_every_possible_simplex_is_a_cycle():
    table = speedup_table([("points", from_maximal_faces([[0], [1], [2], [3]]))], k=0)
    assert table.iloc[0]["xi"] == 1.0
