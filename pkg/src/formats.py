from __future__ import annotations

import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import pandas as pd
import yaml

from .common import ParseError, ensure_parent_dir
from .complex_core import Graph, PointCloud, SetSystem, SimplicialComplex, from_maximal_faces

LOGGER = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


def _content_lines(path: str | Path) -> Iterable[tuple[int, str]]:
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            yield lineno, line


def _ints(line: str, path: str | Path, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError as exc:
        raise ParseError(f"expected integers, got {line!r}", path, lineno) from exc


def _count_header(line: str, path: str | Path, lineno: int) -> Optional[int]:
    parts = line.split()
    if parts[0] != "n":
        return None
    if len(parts) != 2:
        raise ParseError(f"header must read 'n <count>', got {line!r}", path, lineno)
    value = _ints(parts[1], path, lineno)[0]
    if value < 0:
        raise ParseError("vertex count must be non-negative", path, lineno)
    return value


def read_point_cloud(path: str | Path) -> PointCloud:
    """CSV, one point per row; a non-numeric first row is treated as a header."""
    raw = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True, comment="#")
    if raw.empty:
        raise ParseError("point cloud file has no rows", path)
    first = pd.to_numeric(raw.iloc[0].str.strip(), errors="coerce")
    offset = 1
    if first.isna().any():
        LOGGER.info("Treating first row of %s as a header: %s", path, raw.iloc[0].tolist())
        raw = raw.iloc[1:]
        offset = 2
    values = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    # literal "nan" cells parse fine here and are rejected as non-finite by PointCloud
    literal_nan = raw.apply(lambda col: col.str.strip().str.lower().isin({"nan", "+nan", "-nan"}))
    bad_rows = (values.isna() & ~literal_nan).any(axis=1)
    if bad_rows.any():
        row = int(np.flatnonzero(bad_rows.to_numpy())[0])
        raise ParseError(f"row has a missing or non-numeric coordinate: {raw.iloc[row].tolist()}", path, row + offset)
    cloud = PointCloud(values.to_numpy(dtype=float))
    LOGGER.info("Loaded %s points in dimension %s from %s", cloud.n, cloud.dim_d, path)
    return cloud


def read_edge_list(path: str | Path) -> Graph:
    """First line 'n <count>', then one 0-indexed 'u v' pair per line."""
    lines = list(_content_lines(path))
    if not lines:
        raise ParseError("edge list is empty; expected header 'n <count>'", path)
    lineno, header = lines[0]
    n = _count_header(header, path, lineno)
    if n is None:
        raise ParseError(f"first line must read 'n <count>', got {header!r}", path, lineno)
    edges = []
    for lineno, line in lines[1:]:
        pair = _ints(line, path, lineno)
        if len(pair) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", path, lineno)
        u, v = pair
        if u == v:
            raise ParseError(f"self-loop on vertex {u}", path, lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"edge ({u}, {v}) outside [0, {n})", path, lineno)
        edges.append((u, v))
    graph = Graph.from_edges(n, edges)
    LOGGER.info("Loaded graph n=%s edges=%s from %s", n, graph.edge_count, path)
    return graph


def write_edge_list(graph: Graph, path: str | Path) -> None:
    ensure_parent_dir(path)
    lines = [f"n {graph.n_vertices}"] + [f"{u} {v}" for u, v in graph.sorted_edges()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_vertex_sets(path: str | Path) -> tuple[Optional[int], list[list[int]]]:
    n: Optional[int] = None
    groups: list[list[int]] = []
    for i, (lineno, line) in enumerate(_content_lines(path)):
        if i == 0:
            header = _count_header(line, path, lineno)
            if header is not None:
                n = header
                continue
        members = _ints(line, path, lineno)
        if any(v < 0 for v in members):
            raise ParseError("vertex indices must be non-negative", path, lineno)
        if n is not None and any(v >= n for v in members):
            raise ParseError(f"vertex index outside [0, {n})", path, lineno)
        groups.append(members)
    return n, groups


def read_faces(path: str | Path) -> SimplicialComplex:
    """One maximal face per line; optional first line 'n <count>'."""
    n, faces = _read_vertex_sets(path)
    cx = from_maximal_faces(faces, n_vertices=n)
    LOGGER.info("Loaded abstract complex counts=%s from %s", cx.counts, path)
    return cx


def write_faces(cx: SimplicialComplex, path: str | Path) -> None:
    ensure_parent_dir(path)
    lines = [f"n {cx.n_vertices}"] + [" ".join(str(v) for v in face) for face in cx.maximal_faces()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    LOGGER.info("Wrote %s maximal faces to %s", len(lines) - 1, path)


def read_set_system(path: str | Path) -> SetSystem:
    n, groups = _read_vertex_sets(path)
    if n is None:
        n = 1 + max((v for g in groups for v in g), default=-1)
    return SetSystem.from_sets(n, groups)


def read_structured(path: str | Path) -> dict:
    """YAML, JSON or TOML mapping, chosen by suffix."""
    suffix = Path(path).suffix.lower()
    if suffix == ".toml":
        with open(path, "rb") as f:
            data = tomllib.load(f)
    elif suffix == ".json":
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    elif suffix in {".yaml", ".yml"}:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    else:
        raise ParseError(f"unsupported spec format {suffix!r}; use .yaml, .json or .toml", path)
    if not isinstance(data, dict):
        raise ParseError("spec file must contain a mapping at top level", path)
    return data
