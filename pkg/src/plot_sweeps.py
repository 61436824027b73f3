from __future__ import annotations

import argparse
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from .common import InputError, ensure_parent_dir, setup_logging  # noqa: E402
from .experiments import aggregate_sweep  # noqa: E402

LOGGER = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "results/figures"
PLOT_KINDS = ("beta-vs-n", "beta-vs-epsilon")


def _style() -> None:
    plt.style.use("seaborn-v0_8-whitegrid")
    plt.rcParams.update(
        {
            "figure.dpi": 160,
            "axes.titlesize": 12,
            "axes.labelsize": 10,
            "xtick.labelsize": 9,
            "ytick.labelsize": 9,
            "svg.hashsalt": "clique-homology",
        }
    )


def _save(fig: plt.Figure, output: str | Path) -> None:
    ensure_parent_dir(output)
    fig.tight_layout()
    # no timestamp so reruns produce identical files
    fig.savefig(output, format="svg", metadata={"Date": None})
    plt.close(fig)
    LOGGER.info("Saved %s", output)


def _as_aggregate(table: pd.DataFrame) -> pd.DataFrame:
    if "beta_mean" in table.columns:
        return table
    if "status" not in table.columns:
        raise InputError("table is neither a sweep row table nor an aggregate table")
    return aggregate_sweep(table)


def plot_beta_vs_n(table: pd.DataFrame, output: str | Path) -> None:
    """Mean beta_k against n, one line per (k, epsilon ratio or p) with t-interval bands."""
    agg = _as_aggregate(table)
    if agg.empty:
        raise InputError("no successful sweep rows to plot")
    _style()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    series_key = "epsilon_ratio" if agg["epsilon_ratio"].notna().any() else "p"
    for (k, key), group in agg.groupby(["k", series_key], dropna=False):
        group = group.sort_values("n")
        label = f"k={k}, {'eps/r' if series_key == 'epsilon_ratio' else 'p'}={key:.3g}"
        ax.plot(group["n"], group["beta_mean"], marker="o", linewidth=1.4, label=label)
        ax.fill_between(group["n"], group["beta_ci_low"], group["beta_ci_high"], alpha=0.15)
    ax.set_xlabel("n (vertices)")
    ax.set_ylabel("mean beta_k")
    ax.set_title("Betti number vs. number of vertices")
    ax.legend(fontsize=8)
    _save(fig, output)


def plot_beta_vs_epsilon(table: pd.DataFrame, output: str | Path) -> None:
    """Mean beta_k against epsilon / r_hat per n; the critical band is shaded."""
    agg = _as_aggregate(table)
    agg = agg[agg["epsilon_ratio"].notna()]
    if agg.empty:
        raise InputError("beta-vs-epsilon needs a Vietoris-Rips sweep")
    _style()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (k, n), group in agg.groupby(["k", "n"]):
        group = group.sort_values("epsilon_ratio")
        ax.plot(group["epsilon_ratio"], group["beta_mean"], marker="o", linewidth=1.4, label=f"k={k}, n={n}")
    ax.axvspan(0.5, 2.0, color="#f5c26b", alpha=0.2, label="critical band")
    ax.set_xscale("log")
    ax.set_xlabel("epsilon / r_hat")
    ax.set_ylabel("mean beta_k")
    ax.set_title("Betti number across connectivity regimes")
    ax.legend(fontsize=8)
    _save(fig, output)


def plot_sweep(table: pd.DataFrame, output_dir: str | Path, kinds: tuple[str, ...] = PLOT_KINDS) -> list[Path]:
    written = []
    for kind in kinds:
        if kind not in PLOT_KINDS:
            raise InputError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
        path = Path(output_dir) / f"{kind}.svg"
        if kind == "beta-vs-n":
            plot_beta_vs_n(table, path)
        else:
            plot_beta_vs_epsilon(table, path)
        written.append(path)
    return written


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Plot sweep CSVs as SVG line charts.")
    parser.add_argument("--input", required=True, help="Sweep row or aggregate CSV")
    parser.add_argument("--output-dir", default=DEFAULT_OUTPUT_DIR)
    parser.add_argument("--kind", choices=PLOT_KINDS, action="append", default=None)
    return parser.parse_args()


if __name__ == "__main__":
    setup_logging()
    args = parse_args()
    plot_sweep(pd.read_csv(args.input), args.output_dir, tuple(args.kind or PLOT_KINDS))
