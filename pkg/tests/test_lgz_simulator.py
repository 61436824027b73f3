from __future__ import annotations

from fractions import Fraction
from math import comb, exp, sqrt

import numpy as np
import pytest

from src.common import EmptyDimensionError, InputError
from src.complex_core import Graph, clique_complex, from_maximal_faces, k_skeleton_of_simplex
from src.lgz_simulator import (
    LgzRunConfig,
    construction_estimation_split,
    cost_report,
    default_qpe_bits,
    eigenvalue_distribution,
    estimate_normalized_betti,
    hoeffding_samples,
    qpe_threshold_round,
    sample_eigenvalue,
)


@pytest.fixture
def skeleton_5_2():
    return k_skeleton_of_simplex(5, 2)


@pytest.fixture
def path3():
    return clique_complex(Graph.from_edges(3, [(0, 1), (1, 2)]))


# ---------------------------------------------------------------------------
# Configuration and helpers
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "kwargs",
    [
        {"k": -1},
        {"k": 0, "samples_M": 0},
        {"k": 0, "qpe_bits": 0},
        {"k": 0, "additive_eps": 1.5},
        {"k": 0, "mult_delta": 0.0},
        {"k": 0, "rescale": "guess"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(InputError):
        LgzRunConfig(**kwargs)


@pytest.mark.parametrize("kappa,bits", [(None, 1), (1.0, 1), (2.0, 2), (3.0, 3), (8.0, 4), (9.0, 5)])
def test_default_qpe_bits(kappa, bits):
    assert default_qpe_bits(kappa) == bits


def test_threshold_rounding():
    values = np.array([0.0, 0.1, 0.5, 1.0])
    assert qpe_threshold_round(values, 1.0, 1).tolist() == [0.0, 0.0, 0.5, 1.0]
    assert qpe_threshold_round(values, 1.0, 4).tolist() == [0.0, 0.1, 0.5, 1.0]
    assert qpe_threshold_round(values, 0.0, 4).tolist() == [0.0, 0.0, 0.0, 0.0]


def test_hoeffding_samples():
    assert hoeffding_samples(0.05, 0.01) == 1060
    with pytest.raises(InputError):
        hoeffding_samples(0.0, 0.1)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def test_eigenvalue_distribution_of_four_cycle(c4):
    levels, probs = eigenvalue_distribution(clique_complex(c4), 1)
    assert levels.tolist() == [0.0, 2.0, 4.0]
    assert probs.tolist() == [0.25, 0.5, 0.25]


def test_single_edge_zero_frequency():
    cx = clique_complex(Graph.from_edges(2, [(0, 1)]))
    draws = sample_eigenvalue(cx, 0, LgzRunConfig(k=0, seed=3), count=20_000)
    assert abs(np.mean(np.asarray(draws) == 0.0) - 0.5) < 0.02


def test_sampled_law_matches_spectrum(octahedron):
    cx = clique_complex(octahedron)
    config = LgzRunConfig(k=1, qpe_bits=40, seed=11)
    draws = np.round(np.asarray(sample_eigenvalue(cx, 1, config, count=100_000)), 9)
    levels, probs = eigenvalue_distribution(cx, 1)
    empirical = np.array([np.mean(draws == level) for level in levels])
    assert empirical.sum() == pytest.approx(1.0)
    assert 0.5 * np.abs(empirical - probs).sum() <= 0.02


def test_sampling_is_reproducible(c4):
    cx = clique_complex(c4)
    config = LgzRunConfig(k=1, seed=5)
    assert sample_eigenvalue(cx, 1, config, count=9000) == sample_eigenvalue(cx, 1, config, count=9000)


def test_degenerate_spectrum_reads_zero():
    cx = clique_complex(Graph.from_edges(3, []))
    assert sample_eigenvalue(cx, 0, LgzRunConfig(k=0), count=10) == [0.0] * 10
    estimate = estimate_normalized_betti(cx, 0, LgzRunConfig(k=0, samples_M=50))
    assert estimate.degenerate
    assert estimate.c_k_hat == estimate.c_k_true == 1.0


def test_sampling_empty_dimension(c4):
    with pytest.raises(EmptyDimensionError):
        sample_eigenvalue(clique_complex(c4), 2, LgzRunConfig(k=2))


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("which,k,expected", [("skeleton", 2, 0.5), ("cycle", 1, 0.25)])
def test_additive_error_rate(skeleton_5_2, c4, which, k, expected):
    cx = skeleton_5_2 if which == "skeleton" else clique_complex(c4)
    hits = 0
    for trial in range(100):
        estimate = estimate_normalized_betti(cx, k, LgzRunConfig(k=k, samples_M=2000, seed=trial))
        assert estimate.c_k_true == expected
        assert estimate.false_zero_rate == 0.0
        hits += estimate.abs_error <= 0.05
    assert hits >= 95


@pytest.mark.slow
def test_four_cycle_estimate_within_three_hundredths(c4):
    cx = clique_complex(c4)
    hits = sum(
        estimate_normalized_betti(cx, 1, LgzRunConfig(k=1, samples_M=5000, seed=trial), beta_k=1).abs_error <= 0.03
        for trial in range(100)
    )
    assert hits >= 95


def test_estimator_is_unbiased(c4):
    cx = clique_complex(c4)
    m, runs = 500, 200
    estimates = [
        estimate_normalized_betti(cx, 1, LgzRunConfig(k=1, samples_M=m, seed=1000 + r), beta_k=1).c_k_hat
        for r in range(runs)
    ]
    standard_error = sqrt(0.25 * 0.75 / m) / sqrt(runs)
    assert abs(np.mean(estimates) - 0.25) <= 3 * standard_error


@pytest.mark.parametrize("samples", [1, 100, 3000])
def test_contractible_complex_reads_no_zeros(samples):
    cx = clique_complex(Graph.complete(5))
    estimate = estimate_normalized_betti(cx, 1, LgzRunConfig(k=1, samples_M=samples, seed=8))
    assert estimate.c_k_true == 0.0
    assert estimate.zero_count == 0
    assert estimate.c_k_hat == 0.0
    assert estimate.false_zero_rate == 0.0


def test_estimate_fields(skeleton_5_2):
    estimate = estimate_normalized_betti(skeleton_5_2, 2, LgzRunConfig(k=2, samples_M=2000, seed=1))
    assert estimate.c_k_true == 0.5
    assert estimate.zero_count == round(estimate.c_k_hat * 2000)
    assert estimate.ci_low <= estimate.c_k_hat <= estimate.ci_high
    assert estimate.hoeffding_failure_bound == pytest.approx(2 * exp(-2 * 2000 * 0.05 ** 2))
    assert estimate.to_dict()["wilson_ci"] == [estimate.ci_low, estimate.ci_high]


def test_too_few_bits_create_false_zeros(path3):
    # Delta_0 of the path has eigenvalues 0, 1, 3
    estimate = estimate_normalized_betti(path3, 0, LgzRunConfig(k=0, qpe_bits=1, samples_M=3000, seed=2))
    assert estimate.false_zero_rate == pytest.approx(0.5)
    assert estimate.c_k_hat > estimate.c_k_true
    default = estimate_normalized_betti(path3, 0, LgzRunConfig(k=0, samples_M=3000, seed=2))
    assert default.qpe_bits == 3
    assert default.false_zero_rate == 0.0


def test_gershgorin_rescale_can_only_add_zeros(path3):
    exact = estimate_normalized_betti(path3, 0, LgzRunConfig(k=0, qpe_bits=2, seed=4))
    loose = estimate_normalized_betti(path3, 0, LgzRunConfig(k=0, qpe_bits=2, seed=4, rescale="gershgorin"))
    assert loose.lambda_scale >= exact.lambda_scale
    assert loose.false_zero_rate >= exact.false_zero_rate


def test_estimation_is_seeded(c4):
    cx = clique_complex(c4)
    first = estimate_normalized_betti(cx, 1, LgzRunConfig(k=1, seed=8))
    second = estimate_normalized_betti(cx, 1, LgzRunConfig(k=1, seed=8))
    assert first == second


# ---------------------------------------------------------------------------
# Cost model
# ---------------------------------------------------------------------------

def test_cost_report_for_four_cycle(c4):
    report = cost_report(clique_complex(c4), 1, LgzRunConfig(k=1))
    assert report.beta_k == 1
    assert report.s_k == 4
    assert report.zeta_k == pytest.approx(4 / 6)
    assert report.xi == pytest.approx(sqrt(6))
    assert report.xi_squared == Fraction(6)
    assert report.t_classical == 6
    assert report.kappa == pytest.approx(2.0)
    assert not report.flags


def test_cost_identity_on_skeleton(skeleton_5_2):
    report = cost_report(skeleton_5_2, 2, LgzRunConfig(k=2))
    assert report.xi_squared * report.beta_k == comb(6, 3)
    assert report.zeta_k == 1.0
    assert report.clique_dense_flag


def test_cost_identities_on_seven_simplex_skeleton():
    cx = k_skeleton_of_simplex(7, 3)
    report = cost_report(cx, 3, LgzRunConfig(k=3))
    # n counts the 8 vertices, so C(8, 4) / C(7, 4) = 2
    assert report.n == 8
    assert report.beta_k == comb(7, 4)
    assert report.xi_squared == Fraction(2)
    assert report.xi_squared * report.beta_k == report.t_classical
    assert Fraction(report.s_k, report.t_classical) * report.xi_squared * Fraction(report.beta_k, report.s_k) == 1


@pytest.mark.parametrize(
    "cx,k",
    [
        (k_skeleton_of_simplex(7, 3), 3),
        (from_maximal_faces([[0, 1, 2]], n_vertices=6), 2),
        (from_maximal_faces([[0], [1], [2], [3]]), 0),
    ],
)
def test_xi_is_inverse_root_zeta_when_every_simplex_is_a_cycle(cx, k):
    report = cost_report(cx, k, LgzRunConfig(k=k), beta_k=cx.count(k))
    assert report.xi_squared == Fraction(report.t_classical, report.s_k)
    assert report.xi == pytest.approx(report.zeta_k ** -0.5, rel=1e-12)


def test_beta_zero_gives_infinite_multiplicative_cost(k4):
    report = cost_report(clique_complex(k4), 1, LgzRunConfig(k=1))
    assert report.beta_k == 0
    assert report.xi == float("inf")
    assert report.runtime_naive_mult == float("inf")
    assert "beta_zero_multiplicative_infinite" in report.flags
    assert np.isfinite(report.runtime_additive)


def test_all_zero_spectrum_flags_kappa():
    report = cost_report(clique_complex(Graph.from_edges(4, [])), 0, LgzRunConfig(k=0))
    assert report.kappa == 1.0
    assert "kappa_undefined_all_zero_spectrum" in report.flags


def test_cost_monotonicity(c4):
    cx = clique_complex(c4)
    config = LgzRunConfig(k=1)
    xis = [cost_report(cx, 1, config, beta_k=b).xi for b in (1, 2, 3, 4)]
    assert xis == sorted(xis, reverse=True)
    runtimes = [cost_report(cx, 1, config, kappa=kappa).runtime_additive for kappa in (1.0, 2.0, 10.0)]
    assert runtimes == sorted(runtimes)


def test_construction_estimation_split():
    split = construction_estimation_split(n=6, k=2, s_k=20, beta_k=5)
    assert split["construction_quantum"] == pytest.approx(1.0)
    assert split["estimation_quantum"] == pytest.approx(2.0)
    assert split["construction_classical"] == 20
    assert construction_estimation_split(6, 2, 20, 0)["estimation_quantum"] == float("inf")
    with pytest.raises(EmptyDimensionError):
        construction_estimation_split(6, 2, 0, 0)
