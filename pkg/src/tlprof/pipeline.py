"""End-to-end orchestration: field -> graph -> tree -> profile -> artifacts.

The pipeline is a thin shell over the module operations; composing them by
hand gives identical results.  Every stage failure is re-raised as a
:class:`PipelineError` labeled with the stage name.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field as dc_field
from typing import Optional

from . import field as field_io
from . import graph as graph_mod
from . import tree as tree_mod
from .errors import ParameterError, PipelineError
from .profile import annotate_critical_points, build_profile, color_basins
from .render import RenderStyle, to_svg


@dataclass
class PipelineConfig:
    input: Optional[str] = None
    format: str = "auto"
    k: Optional[int] = None              # None -> 4 * n
    method: str = "auto"                 # auto | exact | nn_descent
    exact_threshold: int = graph_mod.AUTO_EXACT_THRESHOLD
    epsilon: float = 0.0                 # absolute simplification threshold
    relative_epsilon: Optional[float] = None  # fraction of the value range
    seed: int = 0
    svg_out: Optional[str] = None
    json_out: Optional[str] = None
    tree_out: Optional[str] = None
    graph_out: Optional[str] = None
    style: RenderStyle = dc_field(default_factory=RenderStyle)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        style = RenderStyle(**data.pop("style", {}))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(style=style, **data)


def _stage(name: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, PipelineError):
                raise PipelineError(name, str(exc)) from exc
            return False

    return _Ctx()


def build_graph(fld, config: PipelineConfig):
    """kNN construction + mutual symmetrization per the config."""
    k = config.k if config.k is not None else graph_mod.default_k(fld.n)
    method = config.method
    if method == "auto":
        method = "exact" if fld.N <= config.exact_threshold else "nn_descent"
    if method == "exact":
        nbrs = graph_mod.exact_knn(fld, k)
    elif method == "nn_descent":
        nbrs = graph_mod.nn_descent(fld, k, seed=config.seed)
    else:
        raise ParameterError(f"unknown knn method {config.method!r}")
    return graph_mod.symmetrize_mutual(nbrs)


def resolve_epsilon(config: PipelineConfig, value_range: float) -> float:
    if config.relative_epsilon is not None:
        return config.relative_epsilon * value_range
    return config.epsilon


def run_pipeline(config: PipelineConfig, fld=None, emit=True) -> dict:
    """Run the full pipeline; returns (and optionally prints) the summary."""
    if fld is None:
        with _stage("parse"):
            if config.input is None:
                raise ParameterError("no input field given")
            fld = field_io.parse_field(config.input, config.format)

    with _stage("graph"):
        graph = build_graph(fld, config)
        if config.graph_out:
            graph_mod.write_edge_list(graph, config.graph_out)

    with _stage("tree"):
        tree = tree_mod.compute_merge_tree(fld, graph)
        decomp = tree_mod.branch_decomposition(tree)
        vrange = float(fld.values.max() - fld.values.min())
        eps = resolve_epsilon(config, vrange)
        if eps > 0:
            tree = tree_mod.simplify(tree, decomp, eps)
            decomp = tree_mod.branch_decomposition(tree)
        if config.tree_out:
            tree_mod.write_tree_json(tree, config.tree_out)

    with _stage("profile"):
        profile = build_profile(tree, decomp)
        color_basins(profile, fld, dark=config.style.ramp_dark,
                     light=config.style.ramp_light)
        annotate_critical_points(profile, tree)
        if config.json_out:
            with open(config.json_out, "w") as fh:
                json.dump(profile.to_json_dict(), fh)
                fh.write("\n")

    with _stage("render"):
        if config.svg_out:
            with open(config.svg_out, "w") as fh:
                fh.write(to_svg(profile, config.style))

    diagram = tree_mod.persistence_pairs(decomp, tree)
    max_pers = max((b.persistence for b in decomp.branches), default=0.0)
    summary = {
        "N": fld.N,
        "n": fld.n,
        "components": len(decomp.master_branches),
        "minima": len(tree.minima),
        "saddles": len(tree.saddles),
        "pairs": len(diagram.pairs),
        "maxPersistence": max_pers,
        "epsilon": resolve_epsilon(
            config, float(fld.values.max() - fld.values.min())),
        "artifacts": {
            "svg": config.svg_out,
            "json": config.json_out,
            "tree": config.tree_out,
            "graph": config.graph_out,
        },
    }
    if emit:
        sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return summary
