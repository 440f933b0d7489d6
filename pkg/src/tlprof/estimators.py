"""scikit-learn style estimators wrapping the pipeline stages.

`LandscapeProfiler` behaves like a clusterer: `fit(X, y)` takes sample
coordinates and loss values, computes the mutual kNN graph, merge tree and
landscape profile, and exposes the branch segmentation as `labels_`.
`MutualKNNGraph` is a transformer from coordinates to a sparse symmetric
adjacency matrix, so the graph stage composes with the wider ecosystem.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import graph as graph_mod
from . import tree as tree_mod
from .field import ScalarField
from .pipeline import PipelineConfig, build_graph, resolve_epsilon
from .profile import annotate_critical_points, build_profile, color_basins


def _as_field(X, y) -> ScalarField:
    X = check_array(X, dtype=np.float64)
    y = check_array(y, dtype=np.float64, ensure_2d=False)
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError(
            f"y must be one loss value per row of X; got {y.shape}")
    return ScalarField(X, y)


class MutualKNNGraph(TransformerMixin, BaseEstimator):
    """Transform sample coordinates into a mutual kNN adjacency matrix."""

    def __init__(self, k: Optional[int] = None, method: str = "auto",
                 seed: int = 0):
        self.k = k
        self.method = method
        self.seed = seed

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        fld = ScalarField(X, np.zeros(X.shape[0]))
        cfg = PipelineConfig(k=self.k, method=self.method, seed=self.seed)
        self.graph_ = build_graph(fld, cfg)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X=None):
        """Sparse symmetric adjacency of the fitted graph (X is ignored)."""
        check_is_fitted(self, "graph_")
        g = self.graph_
        e = g.edges
        data = np.ones(2 * e.shape[0])
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sp.csr_matrix((data, (rows, cols)),
                             shape=(g.vertex_count, g.vertex_count))

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)


class LandscapeProfiler(ClusterMixin, BaseEstimator):
    """Segment sampled points into merge-tree branches and build the profile.

    Parameters mirror the pipeline config: `k` (default 4*n), kNN `method`,
    simplification via absolute `epsilon` or `relative_epsilon` (fraction of
    the value range), and the `seed` for the approximate kNN route.
    """

    def __init__(self, k: Optional[int] = None, method: str = "auto",
                 epsilon: float = 0.0,
                 relative_epsilon: Optional[float] = None, seed: int = 0):
        self.k = k
        self.method = method
        self.epsilon = epsilon
        self.relative_epsilon = relative_epsilon
        self.seed = seed

    def fit(self, X, y):
        fld = _as_field(X, y)
        cfg = PipelineConfig(k=self.k, method=self.method,
                             epsilon=self.epsilon,
                             relative_epsilon=self.relative_epsilon,
                             seed=self.seed)
        self.graph_ = build_graph(fld, cfg)
        tree = tree_mod.compute_merge_tree(fld, self.graph_)
        decomp = tree_mod.branch_decomposition(tree)
        eps = resolve_epsilon(cfg, float(fld.values.max() - fld.values.min()))
        if eps > 0:
            tree = tree_mod.simplify(tree, decomp, eps)
            decomp = tree_mod.branch_decomposition(tree)
        self.merge_tree_ = tree
        self.decomposition_ = decomp
        self.diagram_ = tree_mod.persistence_pairs(decomp, tree)
        profile = build_profile(tree, decomp)
        color_basins(profile, fld)
        annotate_critical_points(profile, tree)
        self.profile_ = profile
        self.labels_ = tree.segmentation.copy()
        self.n_features_in_ = fld.n
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X, y).labels_
