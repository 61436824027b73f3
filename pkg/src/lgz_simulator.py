"""
Classical simulation of the quantum Betti-number estimator.

The maximally mixed state over k-simplices, measured in the eigenbasis of the
Hodge Laplacian, returns each eigenvalue with probability proportional to its
multiplicity. Phase estimation is modelled as threshold rounding: an eigenvalue
is reported as zero when lambda / lambda_scale < 2^-qpe_bits. The fraction of
zero readings estimates c_k = beta_k / |S_k|.

Cost formulas are evaluated with every hidden constant set to 1; the numbers
are dimensionless formula units, not seconds or gate counts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, comb, exp, inf, log, log2, sqrt
from typing import Optional

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .common import EmptyDimensionError, InputError, ResourceBudgetError, StateError, child_seeds, make_rng
from .complex_core import SimplicialComplex
from .homology_engine import DEFAULT_EIGENSOLVER_CAP, SpectralSummary, betti_numbers, gershgorin_bound, spectrum

LOGGER = logging.getLogger(__name__)

BATCH_SIZE = 4096
RESCALE_MODES = ("exact", "gershgorin")
FORMULA_UNITS = "formula units (all hidden constants = 1)"


@dataclass(frozen=True)
class LgzRunConfig:
    k: int
    samples_M: int = 2000
    qpe_bits: Optional[int] = None
    additive_eps: float = 0.05
    mult_delta: float = 0.1
    seed: int = 0
    rescale: str = "exact"
    eigensolver_cap: int = DEFAULT_EIGENSOLVER_CAP

    def __post_init__(self) -> None:
        if self.k < 0:
            raise InputError(f"k must be non-negative, got {self.k}")
        if self.samples_M < 1:
            raise InputError(f"samples_M must be >= 1, got {self.samples_M}")
        if self.qpe_bits is not None and self.qpe_bits < 1:
            raise InputError(f"qpe_bits must be >= 1, got {self.qpe_bits}")
        if not 0 < self.additive_eps < 1:
            raise InputError(f"additive_eps must lie in (0, 1), got {self.additive_eps}")
        if not 0 < self.mult_delta < 1:
            raise InputError(f"mult_delta must lie in (0, 1), got {self.mult_delta}")
        if self.rescale not in RESCALE_MODES:
            raise InputError(f"rescale must be one of {RESCALE_MODES}, got {self.rescale!r}")


@dataclass(frozen=True)
class LgzEstimate:
    k: int
    samples_M: int
    qpe_bits: int
    zero_count: int
    c_k_hat: float
    c_k_true: float
    abs_error: float
    false_zero_rate: float
    ci_low: float
    ci_high: float
    hoeffding_failure_bound: float
    lambda_scale: float
    rescale: str
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "samples_M": self.samples_M,
            "qpe_bits": self.qpe_bits,
            "zero_count": self.zero_count,
            "c_k_hat": self.c_k_hat,
            "c_k_true": self.c_k_true,
            "abs_error": self.abs_error,
            "false_zero_rate": self.false_zero_rate,
            "wilson_ci": [self.ci_low, self.ci_high],
            "hoeffding_failure_bound": self.hoeffding_failure_bound,
            "lambda_scale": self.lambda_scale,
            "rescale": self.rescale,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class CostReport:
    n: int
    k: int
    s_k: int
    beta_k: int
    zeta_k: float
    kappa: float
    runtime_additive: float
    runtime_naive_mult: float
    runtime_improved_mult: float
    t_q_lower: float
    t_classical: int
    xi: float
    construction_cost: float
    estimation_cost: float
    clique_dense_flag: bool
    flags: tuple[str, ...] = ()
    units: str = FORMULA_UNITS
    xi_squared: Optional[Fraction] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "s_k": self.s_k,
            "beta_k": self.beta_k,
            "zeta_k": self.zeta_k,
            "kappa": self.kappa,
            "runtime_additive": self.runtime_additive,
            "runtime_naive_mult": self.runtime_naive_mult,
            "runtime_improved_mult": self.runtime_improved_mult,
            "t_q_lower": self.t_q_lower,
            "t_classical": self.t_classical,
            "xi": self.xi,
            "xi_squared_exact": str(self.xi_squared) if self.xi_squared is not None else None,
            "construction_cost": self.construction_cost,
            "estimation_cost": self.estimation_cost,
            "clique_dense_flag": self.clique_dense_flag,
            "flags": list(self.flags),
            "units": self.units,
        }


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def eigenvalue_distribution(
    cx: SimplicialComplex,
    k: int,
    eigensolver_cap: int = DEFAULT_EIGENSOLVER_CAP,
    decimals: int = 9,
) -> tuple[np.ndarray, np.ndarray]:
    """Distinct eigenvalues of Delta_k (rounded) and their multiplicity / |S_k|."""
    summary = spectrum(cx, k, eigensolver_cap)
    values = np.round(np.asarray(summary.eigenvalues), decimals)
    levels, counts = np.unique(values, return_counts=True)
    return levels, counts / counts.sum()


def qpe_threshold_round(eigenvalues: np.ndarray, scale: float, qpe_bits: int) -> np.ndarray:
    if scale <= 0:
        return np.zeros_like(eigenvalues)
    return np.where(eigenvalues / scale < 2.0 ** (-qpe_bits), 0.0, eigenvalues)


def default_qpe_bits(kappa: Optional[float]) -> int:
    """ceil(log2 kappa) + 1 bits resolve the smallest nonzero eigenvalue."""
    if kappa is None or kappa <= 1:
        return 1
    return int(ceil(log2(kappa))) + 1


def _lambda_scale(cx: SimplicialComplex, summary: SpectralSummary, rescale: str) -> float:
    if rescale == "gershgorin":
        return gershgorin_bound(cx, summary.dim_k)
    return summary.lambda_max


def _draw(eigenvalues: np.ndarray, count: int, seed: int) -> np.ndarray:
    """Batch i of BATCH_SIZE draws uses child seed i of the master seed."""
    n_batches = max(1, ceil(count / BATCH_SIZE))
    out = []
    for i, child in enumerate(child_seeds(seed, n_batches)):
        size = min(BATCH_SIZE, count - i * BATCH_SIZE)
        rng = make_rng(child)
        out.append(eigenvalues[rng.integers(0, len(eigenvalues), size=size)])
    return np.concatenate(out) if out else np.zeros(0)


def sample_eigenvalue(
    cx: SimplicialComplex,
    k: int,
    config: LgzRunConfig,
    count: Optional[int] = None,
    summary: Optional[SpectralSummary] = None,
) -> list[float]:
    if cx.count(k) == 0:
        raise EmptyDimensionError(f"No {k}-simplices; nothing to sample")
    summary = summary or spectrum(cx, k, config.eigensolver_cap)
    count = config.samples_M if count is None else int(count)
    eigenvalues = np.asarray(summary.eigenvalues, dtype=float)
    if summary.lambda_max == 0:
        LOGGER.warning("Delta_%s has an all-zero spectrum; every sample reads 0 (degenerate)", k)
        return [0.0] * count
    bits = config.qpe_bits or default_qpe_bits(summary.kappa)
    draws = _draw(eigenvalues, count, config.seed)
    return qpe_threshold_round(draws, _lambda_scale(cx, summary, config.rescale), bits).tolist()


def hoeffding_samples(eps: float, failure_prob: float) -> int:
    """M with 2 exp(-2 M eps^2) <= failure_prob."""
    if not 0 < eps < 1 or not 0 < failure_prob < 1:
        raise InputError("eps and failure_prob must lie in (0, 1)")
    return int(ceil(log(2 / failure_prob) / (2 * eps * eps)))


def estimate_normalized_betti(
    cx: SimplicialComplex,
    k: int,
    config: LgzRunConfig,
    beta_k: Optional[int] = None,
) -> LgzEstimate:
    s_k = cx.count(k)
    if s_k == 0:
        raise EmptyDimensionError(f"No {k}-simplices; c_{k} is undefined")
    if beta_k is None:
        homology = betti_numbers(cx)
        if k >= len(homology.betti):
            raise StateError(f"beta_{k} is undefined for a complex truncated at dimension {cx.dimension}")
        beta_k = homology.betti[k]
    summary = spectrum(cx, k, config.eigensolver_cap, expected_betti=beta_k)
    bits = config.qpe_bits or default_qpe_bits(summary.kappa)
    degenerate = summary.lambda_max == 0
    scale = 0.0 if degenerate else _lambda_scale(cx, summary, config.rescale)

    eigenvalues = np.asarray(summary.eigenvalues, dtype=float)
    nonzero = eigenvalues[eigenvalues > 0]
    false_zero_rate = 0.0
    if nonzero.size and scale > 0:
        false_zero_rate = float(np.mean(nonzero / scale < 2.0 ** (-bits)))
    if false_zero_rate:
        LOGGER.warning("qpe_bits=%s rounds %.3f of the nonzero eigenvalues of Delta_%s to zero", bits, false_zero_rate, k)

    if degenerate:
        readings = np.zeros(config.samples_M)
    else:
        readings = qpe_threshold_round(_draw(eigenvalues, config.samples_M, config.seed), scale, bits)
    zero_count = int(np.count_nonzero(readings == 0))
    c_hat = zero_count / config.samples_M
    c_true = beta_k / s_k
    low, high = proportion_confint(zero_count, config.samples_M, alpha=0.05, method="wilson")
    LOGGER.info("k=%s M=%s bits=%s: c_hat=%.4f c_true=%.4f", k, config.samples_M, bits, c_hat, c_true)
    return LgzEstimate(
        k=k,
        samples_M=config.samples_M,
        qpe_bits=bits,
        zero_count=zero_count,
        c_k_hat=c_hat,
        c_k_true=c_true,
        abs_error=abs(c_hat - c_true),
        false_zero_rate=false_zero_rate,
        ci_low=float(low),
        ci_high=float(high),
        hoeffding_failure_bound=min(1.0, 2 * exp(-2 * config.samples_M * config.additive_eps ** 2)),
        lambda_scale=scale,
        rescale=config.rescale,
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# Cost model
# ---------------------------------------------------------------------------

def construction_estimation_split(n: int, k: int, s_k: int, beta_k: int, delta: float = 1.0) -> dict:
    """Grover construction cost against quantum and classical estimation costs."""
    if s_k < 1:
        raise EmptyDimensionError(f"|S_{k}| = 0")
    total = comb(n, k + 1)
    return {
        "construction_quantum": sqrt(total / s_k),
        "construction_classical": total,
        "estimation_quantum": sqrt(s_k / beta_k) / delta if beta_k else inf,
        "estimation_classical": s_k,
    }


def cost_report(
    cx: SimplicialComplex,
    k: int,
    config: LgzRunConfig,
    beta_k: Optional[int] = None,
    kappa: Optional[float] = None,
    clique_dense_exponent: float = 3.0,
) -> CostReport:
    """Runtime formulas for the additive and multiplicative estimators.

    `beta_k` and `kappa` override the exact values for hypothetical scaling
    studies; without them both come from the homology engine.
    """
    # vertex count; the k-skeleton of the m-simplex has m + 1 vertices
    n = cx.n_vertices
    s_k = cx.count(k)
    if s_k == 0:
        raise EmptyDimensionError(f"No {k}-simplices; zeta_{k} is zero")
    flags: list[str] = []
    if beta_k is None:
        homology = betti_numbers(cx)
        if k >= len(homology.betti):
            raise StateError(f"beta_{k} is undefined for a complex truncated at dimension {cx.dimension}")
        beta_k = homology.betti[k]
    if kappa is None:
        try:
            kappa = spectrum(cx, k, config.eigensolver_cap).kappa
        except ResourceBudgetError:
            LOGGER.error("Spectrum of Delta_%s exceeds the eigensolver cap; pass an explicit kappa", k)
            raise
        if kappa is None:
            kappa = 1.0
            flags.append("kappa_undefined_all_zero_spectrum")
    total = comb(n, k + 1)
    zeta = s_k / total
    eps, delta = config.additive_eps, config.mult_delta
    common = n ** 3 * kappa + n * k * k * zeta ** -0.5
    runtime_additive = common / eps ** 2
    if beta_k > 0:
        naive = (s_k / beta_k) ** 2 * common / delta ** 2
        improved = (n * n * sqrt(total / beta_k) + n * kappa * sqrt(s_k / beta_k)) / delta
        xi = sqrt(total / beta_k)
        xi_squared = Fraction(total, beta_k)
    else:
        naive = improved = xi = inf
        xi_squared = None
        flags.append("beta_zero_multiplicative_infinite")
    split = construction_estimation_split(n, k, s_k, beta_k, delta)
    return CostReport(
        n=n,
        k=k,
        s_k=s_k,
        beta_k=int(beta_k),
        zeta_k=zeta,
        kappa=float(kappa),
        runtime_additive=runtime_additive,
        runtime_naive_mult=naive,
        runtime_improved_mult=improved,
        t_q_lower=xi,
        t_classical=total,
        xi=xi,
        construction_cost=split["construction_quantum"],
        estimation_cost=split["estimation_quantum"],
        clique_dense_flag=(1 / zeta) <= n ** clique_dense_exponent,
        flags=tuple(flags),
        xi_squared=xi_squared,
    )
