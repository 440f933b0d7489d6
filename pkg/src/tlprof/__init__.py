"""Topological landscape profiles of n-dimensional sampled loss landscapes."""

from .errors import (FieldFormatError, FieldSizeError, ParameterError,
                     PipelineError, TlprofError)
from .field import (GridSpec, ScalarField, default_scale, generate_grid,
                    grid_coords, grid_index, parse_field, synth_wells,
                    write_field)
from .graph import (NeighborhoodGraph, NeighborLists, connected_components,
                    default_k, exact_knn, nn_descent, symmetrize_mutual,
                    write_edge_list)
from .tree import (Branch, BranchDecomposition, MergeTree,
                   PersistenceDiagram, branch_decomposition,
                   compute_merge_tree, persistence_pairs, simplify,
                   write_tree_json)
from .profile import (Basin, LandscapeProfile, annotate_critical_points,
                      build_profile, color_basins)
from .render import RenderStyle, to_svg
from .pipeline import PipelineConfig, build_graph, run_pipeline
from .estimators import LandscapeProfiler, MutualKNNGraph

__version__ = "0.1.0"
