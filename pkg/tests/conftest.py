import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tlprof import NeighborhoodGraph, ScalarField


@pytest.fixture
def path_field():
    """The 5-vertex path example used throughout: values [3,1,2,0,4]."""
    fld = ScalarField(np.arange(5.0)[:, None], np.array([3., 1., 2., 0., 4.]))
    graph = NeighborhoodGraph(
        5, np.array([[0, 1], [1, 2], [2, 3], [3, 4]]), k=1, method="exact")
    return fld, graph


def make_field(values, coords=None):
    values = np.asarray(values, dtype=np.float64)
    if coords is None:
        coords = np.arange(len(values), dtype=np.float64)[:, None]
    return ScalarField(coords, values)


def make_graph(N, edges, k=1):
    return NeighborhoodGraph(N, np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                             k=k, method="exact")
