from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.complex_core import Graph, PointCloud  # noqa: E402
from src.hardness_gadgets import CnfFormula  # noqa: E402

EXAMPLES_DIR = ROOT / "data" / "examples"


@pytest.fixture
def examples_dir() -> Path:
    return EXAMPLES_DIR


@pytest.fixture
def square_cloud() -> PointCloud:
    return PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


@pytest.fixture
def c4() -> Graph:
    return Graph.cycle(4)


@pytest.fixture
def k4() -> Graph:
    return Graph.complete(4)


@pytest.fixture
def octahedron() -> Graph:
    """K_{2,2,2}: every pair adjacent except the antipodes (0,1), (2,3), (4,5)."""
    antipodes = {(0, 1), (2, 3), (4, 5)}
    edges = [(u, v) for u in range(6) for v in range(u + 1, 6) if (u, v) not in antipodes]
    return Graph.from_edges(6, edges)


@pytest.fixture
def xnor_formula() -> CnfFormula:
    """(X1 or not X2) and (not X1 or X2)."""
    return CnfFormula.from_clauses(2, [[1, -2], [-1, 2]])
