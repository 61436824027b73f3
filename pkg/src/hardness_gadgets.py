"""
Reduction gadgets
=================
Executable versions of the two hardness constructions and the checks on
their consequences:

- CNF formula -> reduction graph whose clique complex has
  (-1)^n (1 - chi) = number of satisfying assignments;
- graph g -> complement of a bipartite graph H whose clique complex carries
  the homology of Cl(g), shifted in degree;
- clique-density certificates gamma = |E| / N^2.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, comb
from pathlib import Path
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from .common import (
    DEFAULT_PRIMES,
    InputError,
    ParseError,
    PreconditionError,
    ResourceBudgetError,
    StateError,
    make_rng,
)
from .complex_core import (
    DEFAULT_MAX_SIMPLICES,
    Graph,
    Simplex,
    alexander_dual,
    clique_complex,
    clique_counts,
    complement,
    is_chordal,
    maximal_cliques,
)
from .homology_engine import HomologyResult, betti_numbers

LOGGER = logging.getLogger(__name__)

BRUTE_FORCE_MAX_VARS = 24
AUTO_ENUMERATE_LIMIT = 50_000
SAT_METHODS = ("auto", "complex", "polynomial")


# ---------------------------------------------------------------------------
# CNF formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CnfFormula:
    n_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.n_vars < 0:
            raise InputError("n_vars must be non-negative")
        for j, clause in enumerate(self.clauses):
            lits = set(clause)
            if len(lits) != len(clause):
                raise InputError(f"clause {j + 1} repeats a literal: {list(clause)}")
            for lit in clause:
                if lit == 0 or abs(lit) > self.n_vars:
                    raise InputError(f"clause {j + 1} has literal {lit} outside 1..{self.n_vars}")
                if -lit in lits:
                    raise InputError(f"clause {j + 1} is tautological (contains {abs(lit)} and -{abs(lit)})")

    @classmethod
    def from_clauses(cls, n_vars: int, clauses: Sequence[Sequence[int]]) -> "CnfFormula":
        return cls(n_vars=int(n_vars), clauses=tuple(tuple(dict.fromkeys(int(x) for x in c)) for c in clauses))

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    @property
    def literal_count(self) -> int:
        return sum(len(c) for c in self.clauses)

    def uniform_width(self) -> Optional[int]:
        widths = {len(c) for c in self.clauses}
        return widths.pop() if len(widths) == 1 else None

    def is_satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in clause) for clause in self.clauses)


def parse_dimacs(text: str, source: str | Path = "<string>") -> CnfFormula:
    """DIMACS CNF; clauses may span lines and end at a 0 token."""
    header: Optional[tuple[int, int]] = None
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []
    pending_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise ParseError("duplicate problem line", source, lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed problem line {line!r}; expected 'p cnf <vars> <clauses>'", source, lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError as exc:
                raise ParseError(f"malformed problem line {line!r}", source, lineno) from exc
            if header[0] < 0 or header[1] < 0:
                raise ParseError("problem line counts must be non-negative", source, lineno)
            continue
        if header is None:
            raise ParseError("clause before the 'p cnf' problem line", source, lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError as exc:
                raise ParseError(f"bad literal {tok!r}", source, lineno) from exc
            if lit == 0:
                clause = tuple(dict.fromkeys(pending))
                if any(-l in clause for l in clause):
                    raise ParseError(f"tautological clause {list(pending)}", source, pending_line or lineno)
                clauses.append(clause)
                pending = []
                pending_line = 0
                continue
            if abs(lit) > header[0]:
                raise ParseError(f"literal {lit} outside 1..{header[0]}", source, lineno)
            if not pending:
                pending_line = lineno
            pending.append(lit)
    if header is None:
        raise ParseError("missing 'p cnf' problem line", source)
    if pending:
        raise ParseError(f"clause {pending} is missing its terminating 0", source, pending_line)
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses but {len(clauses)} were read", source)
    return CnfFormula(n_vars=header[0], clauses=tuple(clauses))


def read_dimacs(path: str | Path) -> CnfFormula:
    formula = parse_dimacs(Path(path).read_text(encoding="utf-8"), source=path)
    LOGGER.info("Loaded CNF n=%s s=%s from %s", formula.n_vars, formula.n_clauses, path)
    return formula


def format_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.n_vars} {formula.n_clauses}"]
    lines.extend(" ".join(str(l) for l in clause) + " 0" for clause in formula.clauses)
    return "\n".join(lines) + "\n"


def random_cnf(n_vars: int, n_clauses: int, width: int, seed: int) -> CnfFormula:
    """Uniform width-CNF: each clause picks `width` distinct variables and random signs."""
    if not 1 <= width <= n_vars:
        raise InputError(f"clause width must lie in 1..n_vars, got width={width}, n_vars={n_vars}")
    if n_clauses < 0:
        raise InputError("n_clauses must be non-negative")
    rng = make_rng(seed)
    clauses = []
    for _ in range(n_clauses):
        variables = np.sort(rng.choice(n_vars, size=width, replace=False)) + 1
        signs = rng.integers(0, 2, size=width) * 2 - 1
        clauses.append(tuple(int(v * s) for v, s in zip(variables, signs)))
    return CnfFormula(n_vars=n_vars, clauses=tuple(clauses))


def brute_force_count(formula: CnfFormula, max_vars: int = BRUTE_FORCE_MAX_VARS) -> int:
    """Exhaustive model count, 2^16 assignments at a time."""
    n = formula.n_vars
    if n > max_vars:
        raise ResourceBudgetError("brute_force_max_vars", max_vars, f"brute force over 2^{n} assignments refused")
    total = 1 << n
    chunk = 1 << 16
    bits = np.arange(n, dtype=np.int64)
    count = 0
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        # column i is the truth value of variable i+1
        values = ((codes[:, None] >> bits) & 1).astype(bool)
        ok = np.ones(len(codes), dtype=bool)
        for clause in formula.clauses:
            sat = np.zeros(len(codes), dtype=bool)
            for lit in clause:
                col = values[:, abs(lit) - 1]
                sat |= col if lit > 0 else ~col
            ok &= sat
        count += int(ok.sum())
    return count


# ---------------------------------------------------------------------------
# The counting gadget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionGraph:
    graph: Graph
    labels: tuple[str, ...]
    source: CnfFormula

    @property
    def n_vars(self) -> int:
        return self.source.n_vars

    def t(self, i: int) -> int:
        return i

    def f(self, i: int) -> int:
        return self.n_vars + i

    def p(self, i: int) -> int:
        return 2 * self.n_vars + i

    def c(self, j: int) -> int:
        return 3 * self.n_vars + j

    @property
    def assignment_vertices(self) -> range:
        return range(2 * self.n_vars)


def build_reduction_graph(formula: CnfFormula) -> ReductionGraph:
    """Vertices t_1..t_n, f_1..f_n, p_1..p_n, c_1..c_s in that order (0-indexed ids)."""
    n, s = formula.n_vars, formula.n_clauses
    labels = (
        [f"t_{i + 1}" for i in range(n)]
        + [f"f_{i + 1}" for i in range(n)]
        + [f"p_{i + 1}" for i in range(n)]
        + [f"c_{j + 1}" for j in range(s)]
    )
    edges: list[tuple[int, int]] = []
    # variable gadgets: v_i -- w_j for every role pair iff i != j
    for i, j in itertools.combinations(range(n), 2):
        for a in range(3):
            for b in range(3):
                edges.append((a * n + i, b * n + j))
    for j, clause in enumerate(formula.clauses):
        cj = 3 * n + j
        missing = {i - 1 for i in clause if i > 0} | {n + (-i) - 1 for i in clause if i < 0}
        edges.extend((v, cj) for v in range(3 * n) if v not in missing)
    edges.extend((3 * n + a, 3 * n + b) for a, b in itertools.combinations(range(s), 2))
    graph = Graph.from_edges(3 * n + s, edges, vertex_labels=labels)
    LOGGER.debug("Reduction graph: %s vertices, %s edges", graph.n_vertices, graph.edge_count)
    return ReductionGraph(graph=graph, labels=tuple(labels), source=formula)


def edge_count_formula(n: int, s: int, width: int) -> Fraction:
    """|E| of the reduction graph of a width-uniform formula with n variables and s clauses."""
    return Fraction(9, 2) * n * (n - 1) + 3 * n * s - width * s + Fraction(s * (s - 1), 2)


def maximal_cliques_in_A(reduction: ReductionGraph) -> list[Simplex]:
    """Maximal cliques of the whole graph using only t/f vertices; one per satisfying assignment."""
    return maximal_cliques(reduction.graph, within=reduction.assignment_vertices)


def decode_assignment(reduction: ReductionGraph, clique: Sequence[int]) -> tuple[bool, ...]:
    n = reduction.n_vars
    values: list[Optional[bool]] = [None] * n
    for v in clique:
        if not 0 <= v < 2 * n:
            raise InputError(f"vertex {v} is not a t/f vertex")
        i, value = (v, True) if v < n else (v - n, False)
        if values[i] is not None:
            raise InputError(f"clique assigns variable {i + 1} twice")
        values[i] = value
    if any(v is None for v in values):
        raise InputError("clique does not assign every variable")
    return tuple(bool(v) for v in values)


@dataclass(frozen=True)
class SatCountReport:
    solutions: int
    chi: int
    simplex_counts: tuple[int, ...]
    gamma: Fraction
    n_vertices: int
    n_edges: int
    method: str

    def to_dict(self) -> dict:
        return {
            "solutions": self.solutions,
            "chi": self.chi,
            "simplex_counts": list(self.simplex_counts),
            "gamma": float(self.gamma),
            "gamma_exact": str(self.gamma),
            "n_vertices": self.n_vertices,
            "n_edges": self.n_edges,
            "method": self.method,
        }


def euler_sat_report(
    formula: CnfFormula,
    method: str = "auto",
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
) -> SatCountReport:
    """Solution count as (-1)^n (1 - chi(Cl(G))) of the reduction graph G.

    "complex" enumerates every simplex; "polynomial" reads the simplex counts
    off the clique polynomial; "auto" uses the polynomial and cross-checks
    against enumeration when the complex is small.
    """
    if method not in SAT_METHODS:
        raise InputError(f"method must be one of {SAT_METHODS}, got {method!r}")
    reduction = build_reduction_graph(formula)
    graph = reduction.graph

    if method == "complex":
        counts = clique_complex(graph, max_simplices=max_simplices).counts
    else:
        counts = clique_counts(graph, max_states=max_simplices)[1:]
        total = sum(counts)
        if method == "auto" and total <= min(max_simplices, AUTO_ENUMERATE_LIMIT):
            enumerated = clique_complex(graph, max_simplices=max_simplices)
            if enumerated.counts != counts:
                raise StateError(f"clique polynomial {counts} disagrees with enumeration {enumerated.counts}")
        elif method == "auto":
            LOGGER.info("Complex has %s simplices; using clique-polynomial counts only", total)
    chi = sum((-1) ** k * c for k, c in enumerate(counts))
    solutions = (-1) ** formula.n_vars * (1 - chi)
    if solutions < 0:
        raise StateError(f"negative solution count {solutions} from chi={chi}")
    return SatCountReport(
        solutions=int(solutions),
        chi=int(chi),
        simplex_counts=tuple(counts),
        gamma=Fraction(graph.edge_count, graph.n_vertices ** 2) if graph.n_vertices else Fraction(0),
        n_vertices=graph.n_vertices,
        n_edges=graph.edge_count,
        method=method,
    )


def count_sat_via_euler(
    formula: CnfFormula,
    method: str = "auto",
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
) -> int:
    return euler_sat_report(formula, method=method, max_simplices=max_simplices).solutions


# ---------------------------------------------------------------------------
# Clique density
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityCertificate:
    gamma: Fraction
    N: int
    k: int
    k_max_certified: int
    passes: bool

    def to_dict(self) -> dict:
        return {
            "gamma": float(self.gamma),
            "gamma_exact": str(self.gamma),
            "N": self.N,
            "k": self.k,
            "k_max_certified": self.k_max_certified,
            "passes": self.passes,
        }


def density_threshold(k: int) -> Fraction:
    return Fraction(1, 2) * (1 - Fraction(1, k))


def density_certificate(graph: Graph, k: int) -> DensityCertificate:
    """gamma > (1 - 1/k)/2 guarantees Omega(N^(k+1)) cliques of size k+1."""
    if k < 1:
        raise InputError(f"density certificate needs k >= 1, got {k}")
    n = graph.n_vertices
    gamma = Fraction(graph.edge_count, n * n) if n else Fraction(0)
    # largest k with 1/k > 1 - 2 gamma; gamma < 1/2 for any simple graph
    k_max = ceil(1 / (1 - 2 * gamma)) - 1
    return DensityCertificate(gamma=gamma, N=n, k=k, k_max_certified=k_max, passes=gamma > density_threshold(k))


# ---------------------------------------------------------------------------
# Homology transfer to co-bipartite complexes
# ---------------------------------------------------------------------------

def alexander_suspension_reduction(g: Graph) -> Graph:
    """Complement of the bipartite H, where x_i ~ F_j in H iff x_i lies on the non-edge e_j.

    So in the returned graph x_i joins F_j = V \\ e_j iff x_i is a member of F_j.

    Vertices 0..n-1 are x_1..x_n, vertices n..n+m-1 are F_1..F_m in sorted non-edge order.
    """
    n = g.n_vertices
    if n < 3:
        raise InputError(f"reduction needs at least 3 vertices, got {n}")
    non_edges = complement(g).sorted_edges()
    if not non_edges:
        raise InputError("reduction needs at least one non-edge; the graph is complete")
    m = len(non_edges)
    labels = [f"x_{i + 1}" for i in range(n)] + [f"F_{j + 1}" for j in range(m)]
    edges = list(itertools.combinations(range(n), 2))
    edges.extend((n + a, n + b) for a, b in itertools.combinations(range(m), 2))
    for j, (u, v) in enumerate(non_edges):
        edges.extend((i, n + j) for i in range(n) if i not in (u, v))
    return Graph.from_edges(n + m, edges, vertex_labels=labels)


def _reduced_at(result: HomologyResult, k: int) -> int:
    if k < 0:
        return 0
    reduced = result.reduced
    if k < len(reduced):
        return reduced[k]
    if not result.complete:
        raise StateError(f"reduced beta_{k} lies beyond the enumerated dimensions")
    return 0


@dataclass
class TransferReport:
    n: int
    m: int
    N: int
    reduced_betti_g: list[int]
    reduced_betti_h: list[int]
    matches: list[dict]
    density: DensityCertificate
    density_bound: Fraction
    legs: dict = field(default_factory=dict)

    @property
    def all_match(self) -> bool:
        return all(row["match"] for row in self.matches)

    @property
    def density_passes(self) -> bool:
        return self.density.gamma > self.density_bound

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "N": self.N,
            "homology": "reduced",
            "reduced_betti_g": self.reduced_betti_g,
            "reduced_betti_h": self.reduced_betti_h,
            "matches": self.matches,
            "all_match": self.all_match,
            "density_k": self.density.k,
            "density": self.density.to_dict(),
            "density_bound": float(self.density_bound),
            "density_bound_exact": str(self.density_bound),
            "density_passes": self.density_passes,
            "legs": self.legs,
        }


def verify_homology_transfer(
    g: Graph,
    primes: Sequence[int] = DEFAULT_PRIMES,
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
    include_legs: bool = False,
    density_k: int = 1,
) -> TransferReport:
    """Check reduced beta_k(Cl(g)) == reduced beta_{n-k-2}(Cl(H)) for 0 <= k <= n-2.

    The clique-density certificate of H is evaluated at `density_k`.
    """
    if density_k < 1:
        raise InputError(f"density_k must be >= 1, got {density_k}")
    if not is_chordal(complement(g)):
        raise PreconditionError("the complement of g is not chordal; the transfer relation is not guaranteed")
    h_bar = alexander_suspension_reduction(g)
    n = g.n_vertices
    m = h_bar.n_vertices - n

    homology_g = betti_numbers(clique_complex(g, max_simplices=max_simplices), primes)
    # dimensions 0..n-2 of Cl(H) need simplices up to dimension n-1
    homology_h = betti_numbers(clique_complex(h_bar, max_dim=n - 1, max_simplices=max_simplices), primes)

    matches = []
    for k in range(n - 1):
        lhs = _reduced_at(homology_g, k)
        rhs = _reduced_at(homology_h, n - k - 2)
        matches.append({"k": k, "dual_k": n - k - 2, "g": lhs, "h": rhs, "match": lhs == rhs})
    if not all(row["match"] for row in matches):
        LOGGER.warning("Transfer mismatch on n=%s graph: %s", n, [r for r in matches if not r["match"]])

    N = h_bar.n_vertices
    report = TransferReport(
        n=n,
        m=m,
        N=N,
        reduced_betti_g=list(homology_g.reduced),
        reduced_betti_h=list(homology_h.reduced),
        matches=matches,
        density=density_certificate(h_bar, density_k),
        density_bound=Fraction(1, 2) * (1 - Fraction(5, N)),
    )
    if include_legs:
        dual = betti_numbers(alexander_dual(g, max_simplices=max_simplices), primes)
        report.legs = {
            "duality": [
                {"k": k, "g": _reduced_at(homology_g, k), "dual": _reduced_at(dual, n - k - 3)}
                for k in range(n - 2)
            ],
            "suspension": [
                {"k": k, "dual": _reduced_at(dual, k), "h": _reduced_at(homology_h, k + 1)}
                for k in range(n - 2)
            ],
        }
        for leg in report.legs.values():
            for row in leg:
                values = [v for key, v in row.items() if key != "k"]
                row["match"] = values[0] == values[1]
    return report


def enumerate_cochordal_graphs(n: int) -> list[Graph]:
    """One graph per isomorphism class on n <= 7 vertices with a chordal complement and a non-edge."""
    if not 3 <= n <= 7:
        raise InputError(f"co-chordal enumeration covers 3 <= n <= 7 (graph atlas), got {n}")
    found = []
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() != n or g.number_of_edges() == comb(n, 2):
            continue
        if nx.is_chordal(nx.complement(g)):
            found.append(Graph.from_edges(n, g.edges()))
    LOGGER.debug("%s co-chordal graphs on %s vertices", len(found), n)
    return found
