"""
Graphs and simplicial complexes
================================
Builds epsilon-graphs from point clouds, clique (Vietoris-Rips) complexes,
closed-form families, set-system complexes and abstract complexes, and samples
simplices uniformly.

Simplices are strictly increasing vertex tuples; the global vertex order fixes
every orientation. Complexes are immutable once built.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .common import EmptyDimensionError, InputError, ResourceBudgetError, make_rng

LOGGER = logging.getLogger(__name__)

CLIQUE_COMPLEX = "clique-complex"
ABSTRACT = "abstract"

DEFAULT_MAX_DIM = 16
DEFAULT_MAX_SIMPLICES = 2_000_000

Simplex = tuple[int, ...]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.points, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InputError(f"Point cloud must be an (n, d) array with n >= 1, d >= 1; got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = int(np.argwhere(~np.isfinite(arr))[0][0])
            raise InputError(f"Point cloud has non-finite coordinates (first at row {bad})")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim_d(self) -> int:
        return int(self.points.shape[1])


@dataclass(frozen=True, eq=False)
class Graph:
    n_vertices: int
    edges: frozenset[tuple[int, int]]
    vertex_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if self.n_vertices < 0:
            raise InputError("Graph vertex count must be non-negative")
        for u, v in self.edges:
            if not (0 <= u < v < self.n_vertices):
                raise InputError(f"Edge ({u}, {v}) is not a normalized pair inside [0, {self.n_vertices})")
        if self.vertex_labels is not None and len(self.vertex_labels) != self.n_vertices:
            raise InputError("vertex_labels must have one entry per vertex")

    @classmethod
    def from_edges(
        cls,
        n_vertices: int,
        edges: Iterable[Sequence[int]],
        vertex_labels: Optional[Sequence[str]] = None,
    ) -> "Graph":
        normalized: set[tuple[int, int]] = set()
        for edge in edges:
            u, v = (int(x) for x in edge)
            if u == v:
                raise InputError(f"Self-loop on vertex {u} is not allowed")
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise InputError(f"Edge ({u}, {v}) has an endpoint outside [0, {n_vertices})")
            normalized.add((min(u, v), max(u, v)))
        labels = tuple(vertex_labels) if vertex_labels is not None else None
        return cls(n_vertices=int(n_vertices), edges=frozenset(normalized), vertex_labels=labels)

    @classmethod
    def complete(cls, n_vertices: int) -> "Graph":
        return cls.from_edges(n_vertices, itertools.combinations(range(n_vertices), 2))

    @classmethod
    def cycle(cls, n_vertices: int) -> "Graph":
        return cls.from_edges(n_vertices, ((i, (i + 1) % n_vertices) for i in range(n_vertices)))

    @cached_property
    def adjacency_masks(self) -> tuple[int, ...]:
        masks = [0] * self.n_vertices
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return tuple(masks)

    @cached_property
    def neighbors(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(_bits(mask)) for mask in self.adjacency_masks)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency_masks[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adjacency_masks[v].bit_count()

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    n_vertices: int
    simplices_by_dim: tuple[tuple[Simplex, ...], ...]
    kind: str = ABSTRACT
    # Set when enumeration stopped at max_dim while larger cliques exist.
    truncated: bool = False

    @property
    def dimension(self) -> int:
        return len(self.simplices_by_dim) - 1

    @property
    def counts(self) -> list[int]:
        return [len(s) for s in self.simplices_by_dim]

    @property
    def total_simplices(self) -> int:
        return sum(self.counts)

    def simplices(self, k: int) -> tuple[Simplex, ...]:
        if 0 <= k < len(self.simplices_by_dim):
            return self.simplices_by_dim[k]
        return ()

    def count(self, k: int) -> int:
        return len(self.simplices(k))

    def is_enumerated(self, k: int) -> bool:
        """True when dimension k is known completely (possibly empty)."""
        if k < 0:
            return True
        return not self.truncated or k <= self.dimension

    @cached_property
    def _indices(self) -> tuple[dict[Simplex, int], ...]:
        return tuple({s: i for i, s in enumerate(dim)} for dim in self.simplices_by_dim)

    def index(self, k: int) -> dict[Simplex, int]:
        if 0 <= k < len(self._indices):
            return self._indices[k]
        return {}

    def __contains__(self, simplex: Sequence[int]) -> bool:
        key = tuple(simplex)
        return key in self.index(len(key) - 1)

    def maximal_faces(self) -> list[Simplex]:
        out: list[Simplex] = []
        for k, dim in enumerate(self.simplices_by_dim):
            higher = self.simplices(k + 1)
            covered: set[Simplex] = set()
            for s in higher:
                covered.update(_faces(s))
            out.extend(s for s in dim if s not in covered)
        return sorted(out, key=lambda s: (len(s), s))

    def validate(self) -> None:
        """Check canonical form, uniqueness and downward closure."""
        for k, dim in enumerate(self.simplices_by_dim):
            if len(set(dim)) != len(dim):
                raise InputError(f"Duplicate simplices in dimension {k}")
            for s in dim:
                if len(s) != k + 1 or any(a >= b for a, b in zip(s, s[1:])):
                    raise InputError(f"Simplex {s} is not a strictly increasing tuple of length {k + 1}")
                if s[0] < 0 or s[-1] >= self.n_vertices:
                    raise InputError(f"Simplex {s} uses a vertex outside [0, {self.n_vertices})")
                if k > 0:
                    lower = self.index(k - 1)
                    for face in _faces(s):
                        if face not in lower:
                            raise InputError(f"Face {face} of {s} is missing (downward closure)")

    def summary(self) -> dict:
        return {
            "n_vertices": self.n_vertices,
            "kind": self.kind,
            "dimension": self.dimension,
            "simplex_counts": self.counts,
            "truncated": self.truncated,
        }


@dataclass(frozen=True)
class SetSystem:
    n_vertices: int
    sets: tuple[frozenset[int], ...]

    @classmethod
    def from_sets(cls, n_vertices: int, sets: Iterable[Iterable[int]]) -> "SetSystem":
        seen: dict[frozenset[int], None] = {}
        for members in sets:
            group = frozenset(int(m) for m in members)
            for m in group:
                if not 0 <= m < n_vertices:
                    raise InputError(f"Set member {m} outside [0, {n_vertices})")
            seen.setdefault(group, None)
        ordered = sorted(seen, key=lambda g: (len(g), sorted(g)))
        return cls(n_vertices=int(n_vertices), sets=tuple(ordered))


@dataclass(frozen=True)
class RandomModelParams:
    model: str
    n: int
    seed: int
    d: int = 2
    epsilon: float = 0.0
    p: float = 0.0

    def __post_init__(self) -> None:
        if self.model not in {"vietoris-rips", "erdos-renyi"}:
            raise InputError(f"Unknown random model {self.model!r}")
        if self.n < 1:
            raise InputError("Random model needs n >= 1")
        if self.model == "vietoris-rips":
            if self.d < 1 or not np.isfinite(self.epsilon) or self.epsilon < 0:
                raise InputError("Vietoris-Rips model needs d >= 1 and finite epsilon >= 0")
        elif not 0.0 <= self.p <= 1.0:
            raise InputError(f"Edge probability must lie in [0, 1], got {self.p}")


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _faces(simplex: Simplex) -> Iterator[Simplex]:
    for i in range(len(simplex)):
        yield simplex[:i] + simplex[i + 1:]


def _check_budget(total: int, max_simplices: int) -> None:
    if total > max_simplices:
        raise ResourceBudgetError(
            "max_simplices",
            max_simplices,
            f"Complex exceeds {max_simplices} simplices; instance is too large for exact enumeration",
        )


def _from_dimension_sets(
    n_vertices: int,
    by_dim: Sequence[Iterable[Simplex]],
    kind: str,
    truncated: bool = False,
) -> SimplicialComplex:
    dims = [tuple(sorted(set(dim))) for dim in by_dim]
    while dims and not dims[-1]:
        dims.pop()
    return SimplicialComplex(n_vertices=n_vertices, simplices_by_dim=tuple(dims), kind=kind, truncated=truncated)


def average_distance_scale(n: int, d: int) -> float:
    """r-hat = n^(-1/d), the typical spacing of n uniform points in the unit cube."""
    if n < 1 or d < 1:
        raise InputError("average distance scale needs n >= 1 and d >= 1")
    return float(n) ** (-1.0 / d)


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------

def build_epsilon_graph(cloud: PointCloud, epsilon: float) -> Graph:
    """Connect i, j iff ||x_i - x_j|| < epsilon (strict)."""
    if not np.isfinite(epsilon) or epsilon <= 0:
        raise InputError(f"epsilon must be a positive finite real, got {epsilon}")
    n = cloud.n
    if n < 2:
        return Graph(n_vertices=n, edges=frozenset())
    dist = pdist(cloud.points, metric="euclidean")
    iu, ju = np.triu_indices(n, k=1)
    hit = dist < epsilon
    edges = frozenset(zip(iu[hit].tolist(), ju[hit].tolist()))
    LOGGER.debug("epsilon-graph n=%s epsilon=%s edges=%s", n, epsilon, len(edges))
    return Graph(n_vertices=n, edges=edges)


def random_point_cloud(params: RandomModelParams) -> PointCloud:
    rng = make_rng(params.seed)
    return PointCloud(rng.random((params.n, params.d)))


def random_graph(params: RandomModelParams) -> Graph:
    if params.model == "vietoris-rips":
        cloud = random_point_cloud(params)
        if params.epsilon == 0:
            return Graph(n_vertices=params.n, edges=frozenset())
        return build_epsilon_graph(cloud, params.epsilon)

    rng = make_rng(params.seed)
    pairs = list(itertools.combinations(range(params.n), 2))
    draws = rng.random(len(pairs))
    edges = frozenset(pair for pair, u in zip(pairs, draws) if u < params.p)
    return Graph(n_vertices=params.n, edges=edges)


def complement(graph: Graph) -> Graph:
    n = graph.n_vertices
    edges = frozenset(pair for pair in itertools.combinations(range(n), 2) if pair not in graph.edges)
    return Graph(n_vertices=n, edges=edges)


def induced_subgraph(graph: Graph, vertices: Iterable[int]) -> Graph:
    """Subgraph on the given vertices, relabelled 0..len-1 in increasing order."""
    keep = sorted(set(int(v) for v in vertices))
    position = {v: i for i, v in enumerate(keep)}
    edges = [(position[u], position[v]) for u, v in graph.edges if u in position and v in position]
    labels = None
    if graph.vertex_labels is not None:
        labels = [graph.vertex_labels[v] for v in keep]
    return Graph.from_edges(len(keep), edges, vertex_labels=labels)


def strong_collapse_core(graph: Graph) -> tuple[Graph, tuple[int, ...]]:
    """Repeatedly drop a vertex v whose closed neighbourhood lies inside another's.

    Removing such a dominated vertex is a strong collapse of Cl(G), so the core
    has the same homotopy type and Betti numbers. Returns the core and the kept
    original vertex ids.
    """
    adj = graph.adjacency_masks
    alive = (1 << graph.n_vertices) - 1
    changed = True
    while changed:
        changed = False
        for v in _bits(alive):
            closed_v = (adj[v] | (1 << v)) & alive
            for w in _bits(adj[v] & alive):
                if closed_v & ~(adj[w] | (1 << w)) == 0:
                    alive &= ~(1 << v)
                    changed = True
                    break
    kept = tuple(_bits(alive))
    LOGGER.debug("strong collapse kept %s of %s vertices", len(kept), graph.n_vertices)
    return induced_subgraph(graph, kept), kept


def is_chordal(graph: Graph) -> bool:
    """Maximum cardinality search, then verify the reverse visit order is a perfect elimination ordering."""
    n = graph.n_vertices
    if n <= 3:
        return True
    adj = graph.neighbors
    weight = [0] * n
    visited = [False] * n
    position = [-1] * n
    order: list[int] = []
    for step in range(n):
        v = max((u for u in range(n) if not visited[u]), key=lambda u: (weight[u], -u))
        visited[v] = True
        position[v] = step
        order.append(v)
        for u in adj[v]:
            if not visited[u]:
                weight[u] += 1

    for v in order:
        earlier = [u for u in adj[v] if position[u] < position[v]]
        if len(earlier) < 2:
            continue
        parent = max(earlier, key=lambda u: position[u])
        for u in earlier:
            if u != parent and u not in adj[parent]:
                return False
    return True


# ---------------------------------------------------------------------------
# Clique enumeration
# ---------------------------------------------------------------------------

def _iter_cliques(graph: Graph, max_size: int) -> Iterator[Simplex]:
    """All cliques of size 1..max_size, depth-first, each extended only by larger vertices."""
    adj = graph.adjacency_masks
    stack: list[tuple[Simplex, int]] = []
    for v in range(graph.n_vertices - 1, -1, -1):
        stack.append(((v,), adj[v] >> (v + 1) << (v + 1)))
    while stack:
        clique, candidates = stack.pop()
        yield clique
        if len(clique) >= max_size or not candidates:
            continue
        for w in sorted(_bits(candidates), reverse=True):
            higher = candidates >> (w + 1) << (w + 1)
            stack.append((clique + (w,), higher & adj[w]))


def clique_complex(
    graph: Graph,
    max_dim: Optional[int] = None,
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
) -> SimplicialComplex:
    """Clique complex Cl(G): (k+1)-cliques become k-simplices, for k <= max_dim."""
    cap = graph.n_vertices if max_dim is None else max(int(max_dim), 0) + 1
    by_dim: list[list[Simplex]] = [[] for _ in range(cap)]
    total = 0
    truncated = False
    adj = graph.adjacency_masks
    for clique in _iter_cliques(graph, cap):
        by_dim[len(clique) - 1].append(clique)
        total += 1
        if total > max_simplices:
            _check_budget(total, max_simplices)
    if max_dim is not None and by_dim and cap <= graph.n_vertices:
        # any top-size clique that still has a common higher neighbour means the complex continues
        for clique in by_dim[cap - 1]:
            common = (1 << graph.n_vertices) - 1
            for v in clique:
                common &= adj[v]
            if common:
                truncated = True
                break
    cx = _from_dimension_sets(graph.n_vertices, by_dim, CLIQUE_COMPLEX, truncated=truncated)
    LOGGER.debug("clique complex counts=%s truncated=%s", cx.counts, truncated)
    return cx


def maximal_cliques(graph: Graph, within: Optional[Iterable[int]] = None) -> list[Simplex]:
    """Bron-Kerbosch with Tomita pivoting; canonical (size, lexicographic) order.

    With `within`, only cliques inside that vertex set that are maximal in the
    whole graph are returned (the outside vertices seed the excluded set).
    """
    adj = graph.adjacency_masks
    found: list[Simplex] = []

    def expand(clique: list[int], candidates: int, excluded: int) -> None:
        if not candidates and not excluded:
            found.append(tuple(sorted(clique)))
            return
        pool = candidates | excluded
        pivot = max(_bits(pool), key=lambda u: (candidates & adj[u]).bit_count())
        for v in list(_bits(candidates & ~adj[pivot])):
            clique.append(v)
            expand(clique, candidates & adj[v], excluded & adj[v])
            clique.pop()
            candidates &= ~(1 << v)
            excluded |= 1 << v

    full = (1 << graph.n_vertices) - 1
    candidates = full
    if within is not None:
        candidates = 0
        for v in within:
            if not 0 <= int(v) < graph.n_vertices:
                raise InputError(f"Vertex {v} outside [0, {graph.n_vertices})")
            candidates |= 1 << int(v)
    if candidates:
        expand([], candidates, full & ~candidates)
    return sorted(found, key=lambda s: (len(s), s))


def clique_counts(graph: Graph, max_states: int = DEFAULT_MAX_SIMPLICES) -> list[int]:
    """Number of cliques of each size 0..omega (size 0 is the empty clique).

    Uses C(G) = C(G - v) + x * C(G[N(v)]) on vertex masks, memoized, with the
    closed form (1 + x)^m for complete subgraphs and (1 + x) * C(G - u) for a
    vertex u adjacent to everything else. No simplex is materialized.
    """
    adj = graph.adjacency_masks
    memo: dict[int, tuple[int, ...]] = {}

    def binomial_row(m: int) -> tuple[int, ...]:
        return tuple(comb(m, j) for j in range(m + 1))

    def add(a: tuple[int, ...], b: tuple[int, ...], shift: int) -> tuple[int, ...]:
        size = max(len(a), len(b) + shift)
        out = [0] * size
        for i, c in enumerate(a):
            out[i] += c
        for i, c in enumerate(b):
            out[i + shift] += c
        return tuple(out)

    def poly(mask: int) -> tuple[int, ...]:
        if mask == 0:
            return (1,)
        hit = memo.get(mask)
        if hit is not None:
            return hit
        size = mask.bit_count()
        best_v, best_deg = -1, size
        for v in _bits(mask):
            deg = (adj[v] & mask).bit_count()
            if deg == size - 1:
                # v is a cone apex over the rest
                rest = poly(mask & ~(1 << v))
                result = add(rest, rest, 1)
                break
            if deg < best_deg:
                best_v, best_deg = v, deg
        else:
            result = add(poly(mask & ~(1 << best_v)), poly(adj[best_v] & mask), 1)
        memo[mask] = result
        if len(memo) > max_states:
            raise ResourceBudgetError("max_simplices", max_states, "Clique-count recursion exceeded its state budget")
        return result

    n = graph.n_vertices
    full = (1 << n) - 1
    if graph.edge_count == n * (n - 1) // 2:
        return list(binomial_row(n))
    return list(poly(full))


# ---------------------------------------------------------------------------
# Other complex families
# ---------------------------------------------------------------------------

def k_skeleton_of_simplex(n: int, k: int, max_simplices: int = DEFAULT_MAX_SIMPLICES) -> SimplicialComplex:
    """Every subset of size <= k+1 of the n+1 vertices {0..n}."""
    if n < 0 or k < 0:
        raise InputError("k-skeleton needs n >= 0 and k >= 0")
    if k > n:
        raise InputError(f"k-skeleton of the {n}-simplex needs k <= n, got k={k}")
    _check_budget(sum(comb(n + 1, j + 1) for j in range(k + 1)), max_simplices)
    verts = range(n + 1)
    by_dim = [list(itertools.combinations(verts, j + 1)) for j in range(k + 1)]
    return SimplicialComplex(
        n_vertices=n + 1,
        simplices_by_dim=tuple(tuple(d) for d in by_dim),
        kind=ABSTRACT,
    )


def from_set_system(system: SetSystem, k: int, max_simplices: int = DEFAULT_MAX_SIMPLICES) -> SimplicialComplex:
    """j-simplices (j <= k) are the distinct (j+1)-subsets lying inside at least one set."""
    if k < 0:
        raise InputError("from_set_system needs k >= 0")
    by_dim: list[set[Simplex]] = [set() for _ in range(k + 1)]
    total = 0
    for group in system.sets:
        members = sorted(group)
        for j in range(min(k, len(members) - 1) + 1):
            for s in itertools.combinations(members, j + 1):
                if s not in by_dim[j]:
                    by_dim[j].add(s)
                    total += 1
        _check_budget(total, max_simplices)
    return _from_dimension_sets(system.n_vertices, by_dim, ABSTRACT)


def from_maximal_faces(
    faces: Iterable[Iterable[int]],
    n_vertices: Optional[int] = None,
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
) -> SimplicialComplex:
    """Abstract complex generated by the given faces (all their subsets)."""
    generators = {tuple(sorted(set(int(v) for v in face))) for face in faces}
    generators.discard(())
    if any(v < 0 for face in generators for v in face):
        raise InputError("Face vertices must be non-negative")
    top = max((face[-1] for face in generators), default=-1)
    n = top + 1 if n_vertices is None else int(n_vertices)
    if top >= n:
        raise InputError(f"Face vertex {top} outside [0, {n})")
    width = max((len(f) for f in generators), default=0)
    by_dim: list[set[Simplex]] = [set() for _ in range(width)]
    total = 0
    for face in sorted(generators, key=len, reverse=True):
        if face in by_dim[len(face) - 1]:
            continue
        for j in range(len(face)):
            for s in itertools.combinations(face, j + 1):
                if s not in by_dim[j]:
                    by_dim[j].add(s)
                    total += 1
        _check_budget(total, max_simplices)
    return _from_dimension_sets(n, by_dim, ABSTRACT)


def disjoint_union(a: SimplicialComplex, b: SimplicialComplex) -> SimplicialComplex:
    shift = a.n_vertices
    width = max(len(a.simplices_by_dim), len(b.simplices_by_dim))
    by_dim = []
    for k in range(width):
        moved = [tuple(v + shift for v in s) for s in b.simplices(k)]
        by_dim.append(list(a.simplices(k)) + moved)
    kind = CLIQUE_COMPLEX if a.kind == b.kind == CLIQUE_COMPLEX else ABSTRACT
    return _from_dimension_sets(a.n_vertices + b.n_vertices, by_dim, kind, truncated=a.truncated or b.truncated)


def suspension(cx: SimplicialComplex) -> SimplicialComplex:
    """Join with two new cone points n and n+1."""
    north, south = cx.n_vertices, cx.n_vertices + 1
    width = len(cx.simplices_by_dim) + 1
    by_dim: list[list[Simplex]] = [[] for _ in range(width)]
    by_dim[0].extend([(north,), (south,)])
    for k, dim in enumerate(cx.simplices_by_dim):
        by_dim[k].extend(dim)
        by_dim[k + 1].extend(s + (north,) for s in dim)
        by_dim[k + 1].extend(s + (south,) for s in dim)
    return _from_dimension_sets(cx.n_vertices + 2, by_dim, ABSTRACT)


def alexander_dual(graph: Graph, max_simplices: int = DEFAULT_MAX_SIMPLICES) -> SimplicialComplex:
    """A_G = {s : V \\ s is not a clique}; its maximal faces are V \\ e for the non-edges e."""
    n = graph.n_vertices
    verts = set(range(n))
    faces = [tuple(sorted(verts - set(e))) for e in complement(graph).sorted_edges()]
    if not faces:
        raise InputError("Alexander dual of a complete graph's clique complex is the void complex")
    return from_maximal_faces(faces, n_vertices=n, max_simplices=max_simplices)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_simplices(cx: SimplicialComplex, k: int, count: int, seed: int) -> list[Simplex]:
    dim = cx.simplices(k)
    if not dim:
        raise EmptyDimensionError(f"No {k}-simplices to sample from")
    rng = make_rng(seed)
    picks = rng.integers(0, len(dim), size=int(count))
    return [dim[i] for i in picks.tolist()]


def sample_uniform_simplex(cx: SimplicialComplex, k: int, seed: int) -> Simplex:
    """One k-simplex, each with probability exactly 1/|S_k|."""
    return sample_simplices(cx, k, 1, seed)[0]
