"""
Exact simplicial homology over a field.

Boundary ranks are computed by sparse Gaussian elimination over two large
prime fields; if the primes disagree the rank is recomputed over the
rationals. Spectra of the Hodge Laplacians and of the Dirac operator use a
dense symmetric eigensolver and are only computed inside the eigensolver cap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .common import (
    DEFAULT_PRIMES,
    EmptyDimensionError,
    InputError,
    NumericIntegrityError,
    ResourceBudgetError,
    StateError,
    ensure_parent_dir,
)
from .complex_core import (
    DEFAULT_MAX_SIMPLICES,
    Graph,
    Simplex,
    SimplicialComplex,
    clique_complex,
    clique_counts,
    strong_collapse_core,
)

LOGGER = logging.getLogger(__name__)

DEFAULT_EIGENSOLVER_CAP = 4096
MACHINE_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class BoundaryMatrix:
    dim_k: int
    rows: int
    cols: int
    # (row, col, sign) sorted by column then row
    entries: tuple[tuple[int, int, int], ...]
    row_simplices: tuple[Simplex, ...]
    col_simplices: tuple[Simplex, ...]

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def columns(self) -> list[dict[int, int]]:
        cols: list[dict[int, int]] = [{} for _ in range(self.cols)]
        for r, c, s in self.entries:
            cols[c][r] = s
        return cols

    def to_sparse(self, dtype=np.int64) -> sparse.csc_matrix:
        if not self.entries:
            return sparse.csc_matrix((self.rows, self.cols), dtype=dtype)
        r, c, s = zip(*self.entries)
        return sparse.coo_matrix((np.asarray(s, dtype=dtype), (r, c)), shape=(self.rows, self.cols)).tocsc()

    def to_dense(self, dtype=float) -> np.ndarray:
        return self.to_sparse(dtype=dtype).toarray()


@dataclass(frozen=True)
class SpectralSummary:
    dim_k: int
    eigenvalues: tuple[float, ...]
    lambda_min_nonzero: Optional[float]
    lambda_max: float
    kappa: Optional[float]
    nullity: int
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "dim_k": self.dim_k,
            "eigenvalues": list(self.eigenvalues),
            "lambda_min_nonzero": self.lambda_min_nonzero,
            "lambda_max": self.lambda_max,
            "kappa": self.kappa,
            "nullity": self.nullity,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class HomologyResult:
    betti: tuple[int, ...]
    normalized: tuple[Optional[float], ...]
    euler_from_counts: Optional[int]
    euler_from_betti: Optional[int]
    simplex_counts: tuple[int, ...]
    ranks: tuple[int, ...]
    primes: tuple[int, int]
    rational_dims: tuple[int, ...] = ()
    complete: bool = True

    @property
    def reduced(self) -> tuple[int, ...]:
        return tuple(reduced_betti(self.betti, nonempty=bool(self.simplex_counts and self.simplex_counts[0])))

    def to_dict(self) -> dict:
        return {
            "betti": list(self.betti),
            "reduced_betti": list(self.reduced),
            "normalized": list(self.normalized),
            "euler_from_counts": self.euler_from_counts,
            "euler_from_betti": self.euler_from_betti,
            "simplex_counts": list(self.simplex_counts),
            "boundary_ranks": list(self.ranks),
            "primes": list(self.primes),
            "rational_fallback_dims": list(self.rational_dims),
            "complete": self.complete,
        }


# ---------------------------------------------------------------------------
# Boundary matrices
# ---------------------------------------------------------------------------

def boundary_matrix(cx: SimplicialComplex, k: int) -> BoundaryMatrix:
    """Column of simplex s holds (-1)^i in the row of the face omitting s[i]."""
    if k < 1:
        raise InputError(f"boundary_matrix needs k >= 1, got {k}")
    if not (cx.is_enumerated(k) and cx.is_enumerated(k - 1)):
        raise StateError(f"Dimension {k} was not enumerated (complex truncated at dimension {cx.dimension})")
    faces = cx.simplices(k - 1)
    cofaces = cx.simplices(k)
    row_of = cx.index(k - 1)
    entries = []
    for col, s in enumerate(cofaces):
        for i in range(len(s)):
            entries.append((row_of[s[:i] + s[i + 1:]], col, -1 if i % 2 else 1))
    entries.sort(key=lambda e: (e[1], e[0]))
    return BoundaryMatrix(
        dim_k=k,
        rows=len(faces),
        cols=len(cofaces),
        entries=tuple(entries),
        row_simplices=faces,
        col_simplices=cofaces,
    )


def write_boundary_triplets(matrix: BoundaryMatrix, path: str | Path) -> None:
    """Header 'rows cols nnz', then one 'row col sign' line per entry."""
    ensure_parent_dir(path)
    lines = [f"{matrix.rows} {matrix.cols} {matrix.nnz}"]
    lines.extend(f"{r} {c} {s}" for r, c, s in matrix.entries)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    LOGGER.info("Wrote boundary matrix d_%s (%sx%s, nnz=%s) to %s", matrix.dim_k, matrix.rows, matrix.cols, matrix.nnz, path)


# ---------------------------------------------------------------------------
# Exact ranks
# ---------------------------------------------------------------------------

def rank_mod_p(matrix: BoundaryMatrix | Sequence[dict[int, int]], p: int) -> int:
    """Column reduction over F_p keyed on the lowest nonzero row ("low" pivot)."""
    columns = matrix.columns() if isinstance(matrix, BoundaryMatrix) else matrix
    pivots: dict[int, dict[int, int]] = {}
    for column in columns:
        col = {r: v % p for r, v in column.items() if v % p}
        while col:
            low = max(col)
            pivot = pivots.get(low)
            if pivot is None:
                inv = pow(col[low], p - 2, p)
                pivots[low] = {r: (v * inv) % p for r, v in col.items()}
                break
            factor = col[low]
            for r, v in pivot.items():
                nv = (col.get(r, 0) - factor * v) % p
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
    return len(pivots)


def rank_rational(matrix: BoundaryMatrix | Sequence[dict[int, int]]) -> int:
    columns = matrix.columns() if isinstance(matrix, BoundaryMatrix) else matrix
    pivots: dict[int, dict[int, Fraction]] = {}
    for column in columns:
        col = {r: Fraction(v) for r, v in column.items() if v}
        while col:
            low = max(col)
            pivot = pivots.get(low)
            if pivot is None:
                lead = col[low]
                pivots[low] = {r: v / lead for r, v in col.items()}
                break
            factor = col[low]
            for r, v in pivot.items():
                nv = col.get(r, Fraction(0)) - factor * v
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
    return len(pivots)


def boundary_rank(
    matrix: BoundaryMatrix,
    primes: Sequence[int] = DEFAULT_PRIMES,
    rational_fallback: bool = True,
) -> tuple[int, bool]:
    """Rank over two primes; returns (rank, used_rational)."""
    if matrix.nnz == 0:
        return 0, False
    first, second = (rank_mod_p(matrix, p) for p in primes)
    if first == second:
        return first, False
    message = f"rank of d_{matrix.dim_k} differs mod {primes[0]} ({first}) and mod {primes[1]} ({second})"
    if not rational_fallback:
        raise NumericIntegrityError(message)
    LOGGER.warning("%s; recomputing over the rationals", message)
    return rank_rational(matrix), True


# ---------------------------------------------------------------------------
# Betti numbers and Euler characteristic
# ---------------------------------------------------------------------------

def reduced_betti(betti: Sequence[int], nonempty: bool = True) -> list[int]:
    out = list(betti)
    if out and nonempty:
        out[0] -= 1
    return out


def betti_numbers(
    cx: SimplicialComplex,
    primes: Sequence[int] = DEFAULT_PRIMES,
    rational_fallback: bool = True,
) -> HomologyResult:
    """beta_k = |S_k| - rank d_k - rank d_{k+1}, with rank d_0 = 0."""
    counts = cx.counts
    top = cx.dimension
    # ranks[k] = rank d_k; index 0 and top+1 are zero for a complete complex
    ranks = [0] * (top + 2)
    rational_dims: list[int] = []
    for k in range(1, top + 1):
        bm = boundary_matrix(cx, k)
        rank, used_rational = boundary_rank(bm, primes, rational_fallback)
        ranks[k] = rank
        if used_rational:
            rational_dims.append(k)
        LOGGER.debug("rank d_%s = %s (%sx%s)", k, rank, bm.rows, bm.cols)

    defined = top + 1 if not cx.truncated else top
    betti = tuple(counts[k] - ranks[k] - ranks[k + 1] for k in range(defined))
    normalized = tuple(b / counts[k] if counts[k] else None for k, b in enumerate(betti))
    euler_counts = None if cx.truncated else sum((-1) ** k * c for k, c in enumerate(counts))
    euler_betti = None if cx.truncated else sum((-1) ** k * b for k, b in enumerate(betti))
    if cx.truncated:
        LOGGER.warning("Complex truncated at dimension %s; beta_%s and above are undefined", top, top)
    elif euler_counts != euler_betti:
        raise NumericIntegrityError(f"Euler-Poincare violated: {euler_counts} != {euler_betti}")
    return HomologyResult(
        betti=betti,
        normalized=normalized,
        euler_from_counts=euler_counts,
        euler_from_betti=euler_betti,
        simplex_counts=tuple(counts),
        ranks=tuple(ranks[1: top + 1]),
        primes=(int(primes[0]), int(primes[1])),
        rational_dims=tuple(rational_dims),
        complete=not cx.truncated,
    )


def euler_characteristic(cx: SimplicialComplex) -> int:
    if cx.truncated:
        raise StateError(
            f"Euler characteristic undefined: enumeration stopped at dimension {cx.dimension} before the top dimension"
        )
    return sum((-1) ** k * c for k, c in enumerate(cx.counts))


def clique_euler_characteristic(graph: Graph, max_states: int = 2_000_000) -> tuple[int, list[int]]:
    """chi(Cl(G)) and the simplex counts, from clique counts without enumeration."""
    per_size = clique_counts(graph, max_states=max_states)
    counts = per_size[1:]
    chi = sum((-1) ** k * c for k, c in enumerate(counts))
    return chi, counts


# ---------------------------------------------------------------------------
# Laplacians, spectra and the Dirac operator
# ---------------------------------------------------------------------------

def _boundary_sparse(cx: SimplicialComplex, k: int) -> sparse.csc_matrix:
    return boundary_matrix(cx, k).to_sparse(dtype=float)


def hodge_laplacian(cx: SimplicialComplex, k: int) -> np.ndarray:
    """Delta_k = d_k^T d_k + d_{k+1} d_{k+1}^T as a dense symmetric matrix."""
    size = cx.count(k)
    if k < 0 or size == 0:
        raise EmptyDimensionError(f"No {k}-simplices; the Laplacian Delta_{k} is empty")
    if not cx.is_enumerated(k + 1):
        raise StateError(f"Dimension {k + 1} was not enumerated; Delta_{k} needs it")
    lap = sparse.csc_matrix((size, size), dtype=float)
    if k >= 1:
        down = _boundary_sparse(cx, k)
        lap = lap + down.T @ down
    if cx.count(k + 1):
        up = _boundary_sparse(cx, k + 1)
        lap = lap + up @ up.T
    return np.asarray(lap.toarray(), dtype=float)


def zero_tolerance(size: int, n_vertices: int, lambda_max: float) -> float:
    return max(size, n_vertices) * MACHINE_EPS * lambda_max


def spectrum(
    cx: SimplicialComplex,
    k: int,
    eigensolver_cap: int = DEFAULT_EIGENSOLVER_CAP,
    expected_betti: Optional[int] = None,
) -> SpectralSummary:
    size = cx.count(k)
    if size > eigensolver_cap:
        raise ResourceBudgetError(
            "eigensolver_cap",
            eigensolver_cap,
            f"|S_{k}| = {size} is too large for the dense eigensolver; use `homology betti` (rank-only path)",
        )
    lap = hodge_laplacian(cx, k)
    values = np.linalg.eigvalsh(lap)
    lambda_max = float(max(values.max(), 0.0))
    tol = zero_tolerance(size, cx.n_vertices, lambda_max)
    is_zero = np.abs(values) <= tol
    cleaned = np.where(is_zero, 0.0, values)
    nullity = int(is_zero.sum())
    nonzero = cleaned[~is_zero]
    lam_min = float(nonzero.min()) if nonzero.size else None
    kappa = lambda_max / lam_min if lam_min else None
    if expected_betti is not None and nullity != expected_betti:
        raise NumericIntegrityError(
            f"nullity(Delta_{k}) = {nullity} disagrees with rank-based beta_{k} = {expected_betti} (tolerance {tol:.3e})"
        )
    return SpectralSummary(
        dim_k=k,
        eigenvalues=tuple(float(v) for v in np.sort(cleaned)),
        lambda_min_nonzero=lam_min,
        lambda_max=lambda_max,
        kappa=kappa,
        nullity=nullity,
        tolerance=tol,
    )


def global_spectrum(cx: SimplicialComplex, eigensolver_cap: int = DEFAULT_EIGENSOLVER_CAP) -> dict:
    """Per-k spectra plus the global kappa of Delta = direct sum of the Delta_k."""
    per_k = [spectrum(cx, k, eigensolver_cap) for k in range(cx.dimension + 1) if cx.count(k)]
    lam_max = max((s.lambda_max for s in per_k), default=0.0)
    mins = [s.lambda_min_nonzero for s in per_k if s.lambda_min_nonzero is not None]
    lam_min = min(mins) if mins else None
    return {
        "per_k": [s.to_dict() for s in per_k],
        "lambda_max": lam_max,
        "lambda_min_nonzero": lam_min,
        "kappa": lam_max / lam_min if lam_min else None,
        "nullity": sum(s.nullity for s in per_k),
    }


def gershgorin_bound(cx: SimplicialComplex, k: int) -> float:
    lap = hodge_laplacian(cx, k)
    return float(np.abs(lap).sum(axis=1).max())


def dirac_operator(cx: SimplicialComplex, eigensolver_cap: int = DEFAULT_EIGENSOLVER_CAP) -> np.ndarray:
    """Symmetric block matrix with off-diagonal blocks d_k; B @ B = direct sum of Delta_k."""
    total = cx.total_simplices
    if total > eigensolver_cap:
        raise ResourceBudgetError("eigensolver_cap", eigensolver_cap, f"Dirac operator on {total} simplices is too large")
    if cx.truncated:
        raise StateError("Dirac operator needs every dimension enumerated")
    offsets = np.concatenate([[0], np.cumsum(cx.counts)]).astype(int)
    blocks = sparse.lil_matrix((total, total), dtype=float)
    for k in range(1, cx.dimension + 1):
        d = _boundary_sparse(cx, k)
        r0, c0 = offsets[k - 1], offsets[k]
        blocks[r0: r0 + d.shape[0], c0: c0 + d.shape[1]] = d
        blocks[c0: c0 + d.shape[1], r0: r0 + d.shape[0]] = d.T
    return blocks.toarray()


def clique_betti_numbers(
    graph: Graph,
    max_k: int,
    primes: Sequence[int] = DEFAULT_PRIMES,
    rational_fallback: bool = True,
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
    collapse: bool = True,
) -> tuple[int, ...]:
    """beta_0..beta_max_k of Cl(G), computed on the strong-collapse core when `collapse` is set."""
    if max_k < 0:
        raise InputError(f"max_k must be non-negative, got {max_k}")
    core = strong_collapse_core(graph)[0] if collapse else graph
    cx = clique_complex(core, max_dim=max_k + 1, max_simplices=max_simplices)
    betti = betti_numbers(cx, primes, rational_fallback).betti
    return tuple(betti[k] if k < len(betti) else 0 for k in range(max_k + 1))
