"""
Random-complex sweeps
=====================
Vietoris-Rips sweeps over (n, epsilon) and Erdos-Renyi sweeps over (n, p),
with exact Betti numbers per trial, per-cell aggregates and the speedup
factor xi = sqrt(C(n, k+1) / beta_k).

Run:
    python -m src.experiments --spec sweeps/vr_regimes.yaml --output results/vr_sweep.csv
"""

from __future__ import annotations

import argparse
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb, inf, sqrt
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .common import (
    InputError,
    ResourceBudgetError,
    Settings,
    child_seeds,
    ensure_parent_dir,
    load_config,
    resolve_settings,
    setup_logging,
)
from .complex_core import (
    RandomModelParams,
    SimplicialComplex,
    average_distance_scale,
    build_epsilon_graph,
    clique_complex,
    random_graph,
    random_point_cloud,
)
from .formats import read_structured
from .homology_engine import betti_numbers, clique_betti_numbers

LOGGER = logging.getLogger(__name__)

SCHEMA_VERSION = 1
VIETORIS_RIPS = "vietoris-rips"
ERDOS_RENYI = "erdos-renyi"
DEFAULT_THRESHOLDS = (0.5, 2.0)

ROW_COLUMNS = [
    "schema_version",
    "model",
    "n",
    "d",
    "p",
    "epsilon",
    "epsilon_ratio",
    "k",
    "trial",
    "seed",
    "status",
    "s_k",
    "beta_k",
    "c_k",
    "zeta_k",
    "xi",
    "xi_squared",
    "regime",
]
SORT_KEYS = ["model", "n", "d", "p", "epsilon", "k", "trial"]


@dataclass(frozen=True)
class RegimeLabel:
    label: str
    ratio: float
    r_hat: float
    thresholds: tuple[float, float] = DEFAULT_THRESHOLDS

    def to_dict(self) -> dict:
        return {"label": self.label, "ratio": self.ratio, "r_hat": self.r_hat, "thresholds": list(self.thresholds)}


@dataclass(frozen=True)
class SweepSpec:
    model: str
    n_values: tuple[int, ...]
    k_values: tuple[int, ...]
    trials: int = 20
    seed: int = 0
    d: int = 2
    epsilons: tuple[float, ...] = ()
    epsilon_ratios: tuple[float, ...] = ()
    p_values: tuple[float, ...] = ()
    p_window: bool = False
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if self.model not in (VIETORIS_RIPS, ERDOS_RENYI):
            raise InputError(f"sweep model must be {VIETORIS_RIPS!r} or {ERDOS_RENYI!r}, got {self.model!r}")
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if not self.n_values or any(n < 2 for n in self.n_values):
            raise InputError("n grid must be nonempty with every n >= 2")
        if not self.k_values or any(k < 0 for k in self.k_values):
            raise InputError("k grid must be nonempty and non-negative")
        if self.model == VIETORIS_RIPS:
            if not (self.epsilons or self.epsilon_ratios):
                raise InputError("Vietoris-Rips sweeps need 'epsilon' or 'epsilon_ratio' values")
            if any(e <= 0 for e in (*self.epsilons, *self.epsilon_ratios)):
                raise InputError("epsilon values must be positive")
            if self.d < 1:
                raise InputError("d must be >= 1")
        else:
            if not (self.p_values or self.p_window):
                raise InputError("Erdos-Renyi sweeps need 'p' values or p: window")
            if any(not 0 <= p <= 1 for p in self.p_values):
                raise InputError("p values must lie in [0, 1]")

    @classmethod
    def from_mapping(cls, data: dict) -> "SweepSpec":
        def as_tuple(value, cast) -> tuple:
            if value is None:
                return ()
            if isinstance(value, (list, tuple)):
                return tuple(cast(v) for v in value)
            return (cast(value),)

        p_raw = data.get("p")
        p_window = isinstance(p_raw, str) and p_raw.strip().lower() == "window"
        known = {"model", "n", "k", "trials", "seed", "d", "epsilon", "epsilon_ratio", "p", "output"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError(f"unknown sweep spec keys: {unknown}")
        return cls(
            model=str(data.get("model", VIETORIS_RIPS)),
            n_values=as_tuple(data.get("n"), int),
            k_values=as_tuple(data.get("k", 1), int),
            trials=int(data.get("trials", 20)),
            seed=int(data.get("seed", 0)),
            d=int(data.get("d", 2)),
            epsilons=as_tuple(data.get("epsilon"), float),
            epsilon_ratios=as_tuple(data.get("epsilon_ratio"), float),
            p_values=() if p_window else as_tuple(p_raw, float),
            p_window=p_window,
            output=data.get("output"),
        )

    def cells(self) -> list[dict]:
        """Grid cells in canonical order; cell i draws its trial seeds from child i of the master seed."""
        out = []
        for n in sorted(self.n_values):
            if self.model == VIETORIS_RIPS:
                r_hat = average_distance_scale(n, self.d)
                eps_cells = [(e, e / r_hat) for e in sorted(self.epsilons)]
                eps_cells += [(ratio * r_hat, ratio) for ratio in sorted(self.epsilon_ratios)]
                for eps, ratio in eps_cells:
                    out.append({"model": self.model, "n": n, "d": self.d, "epsilon": eps, "epsilon_ratio": ratio, "p": np.nan})
            else:
                ps = sorted(self.p_values)
                if self.p_window:
                    ps += sorted({er_window(n, k) for k in self.k_values if k >= 1})
                for p in ps:
                    out.append({"model": self.model, "n": n, "d": np.nan, "epsilon": np.nan, "epsilon_ratio": np.nan, "p": p})
        return out


def load_sweep_spec(path: str | Path) -> SweepSpec:
    spec = SweepSpec.from_mapping(read_structured(path))
    LOGGER.info("Sweep spec %s: model=%s cells=%s trials=%s", path, spec.model, len(spec.cells()), spec.trials)
    return spec


def classify_regime(
    n: int,
    d: int,
    epsilon: float,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> RegimeLabel:
    if n < 2 or d < 1 or epsilon < 0:
        raise InputError(f"classify_regime needs n >= 2, d >= 1, epsilon >= 0; got n={n}, d={d}, epsilon={epsilon}")
    lower, upper = float(thresholds[0]), float(thresholds[1])
    r_hat = average_distance_scale(n, d)
    ratio = epsilon / r_hat
    if ratio < lower:
        label = "subcritical"
    elif ratio > upper:
        label = "supercritical"
    else:
        label = "critical"
    return RegimeLabel(label=label, ratio=ratio, r_hat=r_hat, thresholds=(lower, upper))


def er_window(n: int, k: int) -> float:
    """Geometric midpoint of (n^(-1/k), n^(-1/(k+1)))."""
    if k < 1 or n < 2:
        raise InputError(f"er_window needs n >= 2 and k >= 1, got n={n}, k={k}")
    return float(np.sqrt(n ** (-1.0 / k) * n ** (-1.0 / (k + 1))))


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _TrialTask:
    cell: dict
    k_values: tuple[int, ...]
    trial: int
    seed: int
    max_simplices: int
    primes: tuple[int, int]
    thresholds: tuple[float, float]


def _speedup_fields(n: int, k: int, s_k: int, beta_k: int) -> dict:
    total = comb(n, k + 1)
    return {
        "c_k": beta_k / s_k if s_k else np.nan,
        "zeta_k": s_k / total if total else np.nan,
        "xi": sqrt(total / beta_k) if beta_k else inf,
        "xi_squared": str(Fraction(total, beta_k)) if beta_k else "inf",
    }


def _run_trial(task: _TrialTask) -> list[dict]:
    cell = task.cell
    n = int(cell["n"])
    max_k = max(task.k_values)
    base = {**cell, "trial": task.trial, "seed": task.seed, "schema_version": SCHEMA_VERSION}
    if cell["model"] == VIETORIS_RIPS:
        params = RandomModelParams(model=VIETORIS_RIPS, n=n, seed=task.seed, d=int(cell["d"]), epsilon=float(cell["epsilon"]))
        graph = build_epsilon_graph(random_point_cloud(params), params.epsilon)
        regime = classify_regime(n, params.d, params.epsilon, task.thresholds).label
    else:
        params = RandomModelParams(model=ERDOS_RENYI, n=n, seed=task.seed, p=float(cell["p"]))
        graph = random_graph(params)
        regime = ""

    try:
        counts = clique_complex(graph, max_dim=max_k, max_simplices=task.max_simplices).counts
        betti = clique_betti_numbers(graph, max_k, task.primes, max_simplices=task.max_simplices)
    except ResourceBudgetError as exc:
        LOGGER.warning("Skipping n=%s trial=%s: %s", n, task.trial, exc)
        return [{**base, "k": k, "status": "skipped", "regime": regime} for k in task.k_values]

    rows = []
    for k in task.k_values:
        s_k = counts[k] if k < len(counts) else 0
        rows.append(
            {
                **base,
                "k": k,
                "status": "ok",
                "s_k": s_k,
                "beta_k": betti[k],
                "regime": regime,
                **_speedup_fields(n, k, s_k, betti[k]),
            }
        )
    return rows


def _tasks(spec: SweepSpec, settings: Settings) -> list[_TrialTask]:
    cells = spec.cells()
    tasks = []
    for cell, cell_seed in zip(cells, child_seeds(spec.seed, len(cells))):
        for trial, seed in enumerate(child_seeds(cell_seed, spec.trials)):
            tasks.append(
                _TrialTask(
                    cell=cell,
                    k_values=tuple(sorted(set(spec.k_values))),
                    trial=trial,
                    seed=seed,
                    max_simplices=settings.max_simplices,
                    primes=tuple(settings.primes),
                    thresholds=tuple(settings.regime_thresholds),
                )
            )
    return tasks


def run_sweep(spec: SweepSpec, settings: Optional[Settings] = None) -> pd.DataFrame:
    """One row per (cell, trial, k), sorted canonically; skipped cells keep their rows."""
    settings = settings or Settings(seed=spec.seed)
    tasks = _tasks(spec, settings)
    LOGGER.info("Running %s trials (%s threads)", len(tasks), settings.threads)
    if settings.threads > 1:
        with ProcessPoolExecutor(max_workers=settings.threads) as pool:
            chunks = list(pool.map(_run_trial, tasks))
    else:
        chunks = [_run_trial(task) for task in tasks]
    rows = pd.DataFrame([row for chunk in chunks for row in chunk])
    rows = rows.reindex(columns=ROW_COLUMNS)
    rows[["s_k", "beta_k"]] = rows[["s_k", "beta_k"]].astype("Int64")
    rows = rows.sort_values(SORT_KEYS, kind="mergesort", na_position="first").reset_index(drop=True)
    skipped = int((rows["status"] == "skipped").sum())
    if skipped:
        LOGGER.warning("%s rows skipped on budget", skipped)
    return rows


def aggregate_sweep(rows: pd.DataFrame, confidence: float = 0.95) -> pd.DataFrame:
    """Per-cell mean, variance and t-interval of beta_k, plus max beta_k / n^(k/2 + 1/2)."""
    ok = rows[rows["status"] == "ok"].copy()
    if ok.empty:
        return pd.DataFrame(columns=["model", "n", "d", "p", "epsilon", "epsilon_ratio", "k", "trials"])
    ok["beta_k"] = ok["beta_k"].astype(float)
    ok["c_k"] = ok["c_k"].astype(float)
    keys = ["model", "n", "d", "p", "epsilon", "epsilon_ratio", "k", "regime"]
    agg = (
        ok.groupby(keys, dropna=False, as_index=False)
        .agg(
            trials=("beta_k", "size"),
            beta_mean=("beta_k", "mean"),
            beta_var=("beta_k", "var"),
            beta_median=("beta_k", "median"),
            beta_max=("beta_k", "max"),
            s_k_mean=("s_k", "mean"),
            c_k_median=("c_k", "median"),
        )
    )
    sem = np.sqrt(agg["beta_var"].fillna(0.0) / agg["trials"])
    half = stats.t.ppf(0.5 + confidence / 2, np.maximum(agg["trials"] - 1, 1)) * sem
    agg["beta_ci_low"] = agg["beta_mean"] - half
    agg["beta_ci_high"] = agg["beta_mean"] + half
    agg["growth_ratio"] = agg["beta_max"] / agg["n"].astype(float) ** (agg["k"] / 2 + 0.5)
    agg["schema_version"] = SCHEMA_VERSION
    return agg.sort_values(["model", "n", "p", "epsilon", "k"], kind="mergesort").reset_index(drop=True)


def speedup_table(complexes: Iterable[tuple[str, SimplicialComplex]], k: int) -> pd.DataFrame:
    """Per-complex xi, classical cost and the growth ratio beta_k / n^(k/2 + 1/2)."""
    records = []
    for name, cx in complexes:
        # n is the vertex count, so the k-skeleton of the m-simplex uses n = m + 1
        n = cx.n_vertices
        homology = betti_numbers(cx)
        beta_k = homology.betti[k] if k < len(homology.betti) else 0
        s_k = cx.count(k)
        total = comb(n, k + 1)
        xi = sqrt(total / beta_k) if beta_k else inf
        records.append(
            {
                "name": name,
                "n": n,
                "k": k,
                "s_k": s_k,
                "beta_k": beta_k,
                "xi": xi,
                "t_classical": total,
                "t_q_lower": xi,
                "growth_ratio": beta_k / n ** (k / 2 + 0.5) if n else np.nan,
                "beta_zero": beta_k == 0,
            }
        )
    table = pd.DataFrame.from_records(records)
    flagged = table.loc[table["beta_zero"], "name"].tolist() if not table.empty else []
    if flagged:
        LOGGER.warning("beta_%s = 0 for %s; xi is infinite", k, flagged)
    return table


def write_table(table: pd.DataFrame, path: str | Path) -> None:
    ensure_parent_dir(path)
    table.to_csv(path, index=False)
    LOGGER.info("Wrote %s rows to %s", len(table), path)


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Run a random-complex Betti sweep.")
    parser.add_argument("--spec", required=True, help="Sweep spec (.yaml, .json or .toml)")
    parser.add_argument("--config", default=None, help="Optional config.yaml")
    parser.add_argument("--output", default=None, help="Row CSV (defaults to the sweep file's output key)")
    parser.add_argument("--threads", type=int, default=None)
    return parser.parse_args()


if __name__ == "__main__":
    setup_logging()
    args = parse_args()
    cfg = load_config(args.config) if args.config else None
    sweep = load_sweep_spec(args.spec)
    resolved = resolve_settings(cfg, {"threads": args.threads, "seed": sweep.seed})
    table = run_sweep(sweep, resolved)
    out = args.output or sweep.output or "results/sweep.csv"
    write_table(table, out)
    write_table(aggregate_sweep(table), Path(out).with_name(Path(out).stem + "_aggregate.csv"))
