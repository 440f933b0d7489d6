"""Command-line interface.

Subcommands mirror the pipeline stages: `synth`, `graph`, `tree`, `profile`,
`render`, `pipeline`.  A JSON config file may supply any pipeline option via
--config; explicit flags win.  TLPROF_THREADS caps worker threads for the
exact kNN stage.
"""

from __future__ import annotations

import json
import sys

import click

from . import field as field_io
from . import graph as graph_mod
from . import tree as tree_mod
from .errors import PipelineError, TlprofError
from .pipeline import PipelineConfig, run_pipeline
from .profile import annotate_critical_points, build_profile, color_basins
from .render import RenderStyle, to_svg


@click.group()
def main():
    """Topological landscape profiles of sampled loss landscapes."""


def _fail(stage: str, exc: Exception):
    click.echo(f"error [{stage}]: {exc}", err=True)
    sys.exit(1)


def _parse_wells(text: str, n: int):
    """Wells as `c1,..,cn:depth:width` separated by `;`."""
    wells = []
    for part in text.split(";"):
        center_s, depth_s, width_s = part.split(":")
        center = [float(c) for c in center_s.split(",")]
        wells.append((center, float(depth_s), float(width_s)))
    return wells


_pipeline_options = [
    click.option("--k", type=int, default=None,
                 help="neighbors per vertex (default 4*n)"),
    click.option("--method", type=click.Choice(["auto", "exact", "nn_descent"]),
                 default="auto"),
    click.option("--epsilon", type=float, default=0.0,
                 help="absolute simplification threshold"),
    click.option("--relative-epsilon", type=float, default=None,
                 help="simplification threshold as a fraction of the value range"),
    click.option("--seed", type=int, default=0),
    click.option("--format", "fmt", type=click.Choice(["auto", "csv", "tlpf"]),
                 default="auto"),
]


def pipeline_options(fn):
    for opt in reversed(_pipeline_options):
        fn = opt(fn)
    return fn


def _make_config(input, fmt, k, method, epsilon, relative_epsilon, seed,
                 config_path=None, **outputs) -> PipelineConfig:
    data = {}
    if config_path:
        with open(config_path) as fh:
            data = json.load(fh)
    cfg = PipelineConfig.from_dict(data)
    cfg.input = input or cfg.input
    if fmt != "auto":
        cfg.format = fmt
    if k is not None:
        cfg.k = k
    if method != "auto":
        cfg.method = method
    if epsilon:
        cfg.epsilon = epsilon
    if relative_epsilon is not None:
        cfg.relative_epsilon = relative_epsilon
    if seed:
        cfg.seed = seed
    for key, val in outputs.items():
        if val is not None:
            setattr(cfg, key, val)
    return cfg


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--r", type=int, default=21, show_default=True)
@click.option("--wells", required=True,
              help="semicolon-separated wells `c1,..,cn:depth:width`")
@click.option("--baseline", type=float, default=0.0)
@click.option("--out", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "tlpf"]),
              default="tlpf", show_default=True)
def synth(n, r, wells, baseline, out, fmt):
    """Generate a synthetic Gaussian-well field."""
    try:
        fld = field_io.synth_wells(n, r, _parse_wells(wells, n), baseline)
        field_io.write_field(fld, out, fmt)
    except (TlprofError, ValueError) as exc:
        _fail("synth", exc)
    click.echo(f"wrote {fld.N} points to {out}")


@main.command()
@click.argument("input", type=click.Path(exists=True))
@pipeline_options
@click.option("--out", required=True, type=click.Path(),
              help="edge-list output path")
def graph(input, k, method, epsilon, relative_epsilon, seed, fmt, out):
    """Build the mutual kNN graph and dump its edge list."""
    cfg = _make_config(input, fmt, k, method, epsilon, relative_epsilon, seed,
                       graph_out=out)
    try:
        fld = field_io.parse_field(cfg.input, cfg.format)
    except TlprofError as exc:
        _fail("parse", exc)
    try:
        from .pipeline import build_graph
        g = build_graph(fld, cfg)
        graph_mod.write_edge_list(g, out)
    except TlprofError as exc:
        _fail("graph", exc)
    click.echo(f"wrote {g.edge_count} edges to {out}")


@main.command()
@click.argument("input", type=click.Path(exists=True))
@pipeline_options
@click.option("--out", required=True, type=click.Path(),
              help="merge-tree JSON output path")
def tree(input, k, method, epsilon, relative_epsilon, seed, fmt, out):
    """Compute the (optionally simplified) merge tree."""
    cfg = _make_config(input, fmt, k, method, epsilon, relative_epsilon, seed,
                       tree_out=out)
    try:
        run_pipeline(cfg, emit=True)
    except PipelineError as exc:
        _fail(exc.stage, exc)


@main.command()
@click.argument("input", type=click.Path(exists=True))
@pipeline_options
@click.option("--out", required=True, type=click.Path(),
              help="profile JSON output path")
def profile(input, k, method, epsilon, relative_epsilon, seed, fmt, out):
    """Compute the landscape profile as JSON."""
    cfg = _make_config(input, fmt, k, method, epsilon, relative_epsilon, seed,
                       json_out=out)
    try:
        run_pipeline(cfg, emit=True)
    except PipelineError as exc:
        _fail(exc.stage, exc)


@main.command()
@click.argument("profile_json", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--width", type=int, default=900, show_default=True)
@click.option("--height", type=int, default=600, show_default=True)
@click.option("--no-axis", is_flag=True, default=False)
def render(profile_json, out, width, height, no_axis):
    """Render a profile JSON document to SVG."""
    try:
        with open(profile_json) as fh:
            doc = json.load(fh)
        style = RenderStyle(width=width, height=height, axis=not no_axis)
        with open(out, "w") as fh:
            fh.write(to_svg(doc, style))
    except (TlprofError, ValueError, KeyError) as exc:
        _fail("render", exc)
    click.echo(f"wrote {out}")


@main.command()
@click.argument("input", type=click.Path(exists=True), required=False)
@pipeline_options
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON file with PipelineConfig fields")
@click.option("--svg", "svg_out", type=click.Path(), default=None)
@click.option("--json", "json_out", type=click.Path(), default=None)
@click.option("--tree-out", type=click.Path(), default=None)
@click.option("--graph-out", type=click.Path(), default=None)
def pipeline(input, k, method, epsilon, relative_epsilon, seed, fmt,
             config_path, svg_out, json_out, tree_out, graph_out):
    """Run field -> graph -> tree -> profile -> render end to end."""
    try:
        cfg = _make_config(input, fmt, k, method, epsilon, relative_epsilon,
                           seed, config_path=config_path, svg_out=svg_out,
                           json_out=json_out, tree_out=tree_out,
                           graph_out=graph_out)
        run_pipeline(cfg, emit=True)
    except PipelineError as exc:
        _fail(exc.stage, exc)
    except (TlprofError, OSError, ValueError) as exc:
        _fail("config", exc)


if __name__ == "__main__":
    main()
