"""Basin-metaphor landscape profiles built from merge trees.

Every branch ending in a minimum becomes a basin; a paired branch becomes a
sub-basin nested inside its parent at the pairing saddle's value.  Basin
width is population: the width function counts subtree member vertices by
value, one step per distinct member value, so a horizontal cut through the
root basins recovers the number of vertices at or below that value exactly.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ParameterError
from .field import ScalarField
from .tree import Branch, BranchDecomposition, MergeTree

DARK_BLUE = "#08306b"
LIGHT_BLUE = "#c6dbef"


@dataclass
class Marker:
    x: float
    y: float
    kind: str  # "minimum" | "saddle"


@dataclass
class Basin:
    branch_id: int
    min_vertex: int
    min_value: float
    top_value: float          # pairing saddle value; component max for masters
    saddle_vertex: int        # vertex of the terminating node
    own_members: np.ndarray
    subtree_values: np.ndarray  # sorted values of own + descendant members
    persistence: float
    children: list["Basin"] = dc_field(default_factory=list)
    # layout (filled by build_profile)
    x0: float = 0.0
    x1: float = 0.0
    center: float = 0.0
    # color (filled by color_basins)
    avg_loss: float = float("nan")
    shade: float = 0.0
    color: str = ""

    @property
    def top_width(self) -> int:
        """Subtree population: own members plus all descendants."""
        return int(self.subtree_values.size)

    def width_at(self, v: float) -> int:
        """Cumulative subtree member count at value v (0 below the bottom)."""
        return int(np.searchsorted(self.subtree_values, v, side="right"))

    def width_steps(self) -> list[tuple[float, float, int]]:
        """(y0, y1, width) rectangles of the piecewise-constant silhouette."""
        vals = np.unique(self.subtree_values)
        counts = np.searchsorted(self.subtree_values, vals, side="right")
        steps: list[tuple[float, float, int]] = []
        for j in range(vals.size - 1):
            steps.append((float(vals[j]), float(vals[j + 1]), int(counts[j])))
        if self.top_value > vals[-1]:
            steps.append((float(vals[-1]), float(self.top_value), self.top_width))
        if not steps:  # degenerate: all members at one value, flat band
            steps.append((float(vals[0]), float(vals[0]), self.top_width))
        return steps

    def rectangles(self) -> list[tuple[float, float, float, float]]:
        """(x0, x1, y0, y1) per width step, centered on the basin center but
        kept inside the basin's slot."""
        rects = []
        for y0, y1, w in self.width_steps():
            left = self.center - w / 2.0
            left = min(max(left, self.x0), self.x1 - w)
            rects.append((left, left + w, y0, y1))
        return rects

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def to_json_dict(self) -> dict:
        return {
            "branch": int(self.branch_id),
            "minVertex": int(self.min_vertex),
            "minValue": float(self.min_value),
            "topValue": float(self.top_value),
            "persistence": float(self.persistence),
            "avgLoss": float(self.avg_loss),
            "color": self.color,
            "x0": self.x0,
            "x1": self.x1,
            "center": self.center,
            "widthSteps": [[y0, y1, w] for y0, y1, w in self.width_steps()],
            "rectangles": [list(r) for r in self.rectangles()],
            "children": [c.to_json_dict() for c in self.children],
        }


@dataclass
class LandscapeProfile:
    roots: list[Basin]
    vertex_count: int
    markers: list[Marker] = dc_field(default_factory=list)

    def basins(self) -> list[Basin]:
        out: list[Basin] = []
        for r in self.roots:
            out.extend(r.walk())
        return out

    def width_at(self, v: float) -> int:
        """Outer-silhouette width of the whole profile at a value cut."""
        return sum(r.width_at(v) for r in self.roots)

    @property
    def value_range(self) -> tuple[float, float]:
        lo = min(r.min_value for r in self.roots)
        hi = max(r.top_value for r in self.roots)
        return lo, hi

    def to_json_dict(self) -> dict:
        return {
            "format": "tlprof-profile",
            "version": 1,
            "vertexCount": self.vertex_count,
            "components": len(self.roots),
            "valueRange": [float(v) for v in self.value_range],
            "basins": [r.to_json_dict() for r in self.roots],
            "markers": [{"x": m.x, "y": m.y, "kind": m.kind}
                        for m in self.markers],
        }


def _raise_recursion_limit(extra: int) -> None:
    want = extra + 200
    if sys.getrecursionlimit() < want:
        sys.setrecursionlimit(want)


def build_profile(tree: MergeTree, decomp: BranchDecomposition) -> LandscapeProfile:
    """Recursive basin construction with deterministic layout.

    Children are ordered by descending persistence (ties by minimum vertex)
    and placed on alternating sides of the parent's own column, largest
    first; sibling slots are disjoint and nested inside the parent's slot.
    Root basins sit side by side ordered by component minimum value.
    """
    if tree.vertex_values is None:
        raise ParameterError("merge tree carries no vertex values")
    values = tree.vertex_values
    children_of: dict[int, list[Branch]] = {b.branch_id: [] for b in decomp.branches}
    for b in decomp.branches:
        if not b.is_master:
            children_of[b.parent_branch].append(b)
    node = {nd.id: nd for nd in tree.nodes}
    _raise_recursion_limit(len(decomp.branches))

    def make_basin(b: Branch) -> Basin:
        kids = sorted(children_of[b.branch_id],
                      key=lambda c: (-c.persistence, node[c.min_node].vertex))
        child_basins = [make_basin(c) for c in kids]
        own_vals = np.sort(values[b.members])
        subtree = np.sort(np.concatenate(
            [own_vals] + [cb.subtree_values for cb in child_basins]))
        return Basin(
            branch_id=b.branch_id,
            min_vertex=node[b.min_node].vertex,
            min_value=node[b.min_node].value,
            top_value=node[b.end_node].value,
            saddle_vertex=node[b.end_node].vertex,
            own_members=b.members,
            subtree_values=subtree,
            persistence=b.persistence,
            children=child_basins,
        )

    def layout(basin: Basin, x0: float) -> None:
        basin.x0 = x0
        basin.x1 = x0 + basin.top_width
        own = len(basin.own_members)
        # alternate sides around the own column: largest innermost-left,
        # second innermost-right, and so on outward
        left = basin.children[0::2]
        right = basin.children[1::2]
        x = x0
        for c in reversed(left):
            layout(c, x)
            x = c.x1
        basin.center = x + own / 2.0
        x += own
        for c in right:
            layout(c, x)
            x = c.x1

    by_id = decomp.by_id()
    masters = sorted((by_id[m] for m in decomp.master_branches),
                     key=lambda b: (node[b.min_node].value,
                                    node[b.min_node].vertex))
    roots = []
    x = 0.0
    for m in masters:
        basin = make_basin(m)
        layout(basin, x)
        x = basin.x1
        roots.append(basin)
    return LandscapeProfile(roots, vertex_count=tree.vertex_count)


def color_basins(profile: LandscapeProfile, field: ScalarField,
                 dark: str = DARK_BLUE, light: str = LIGHT_BLUE) -> LandscapeProfile:
    """Assign average-loss colors on a linear dark-to-light blue ramp.

    The average is taken over a basin's own branch members only, so nested
    basins do not double-count descendant points; darker means lower.
    """
    basins = profile.basins()
    for b in basins:
        b.avg_loss = float(np.mean(field.values[b.own_members]))
    lo = min(b.avg_loss for b in basins)
    hi = max(b.avg_loss for b in basins)
    span = hi - lo
    for b in basins:
        b.shade = 0.0 if span == 0 else (b.avg_loss - lo) / span
        b.color = _lerp_hex(dark, light, b.shade)
    return profile


def annotate_critical_points(profile: LandscapeProfile,
                             tree: MergeTree) -> LandscapeProfile:
    """Red dot per minimum at the basin bottom, orange dot per saddle at the
    sub-basin's attachment point."""
    markers: list[Marker] = []
    root_ids = {id(r) for r in profile.roots}
    for basin in profile.basins():
        markers.append(Marker(basin.center, basin.min_value, "minimum"))
        if id(basin) not in root_ids:
            markers.append(Marker(basin.center, basin.top_value, "saddle"))
    markers.sort(key=lambda m: (m.kind, m.x, m.y))
    profile.markers = markers
    n_min = len(tree.minima)
    n_sad = len(tree.saddles)
    got_min = sum(1 for m in markers if m.kind == "minimum")
    got_sad = sum(1 for m in markers if m.kind == "saddle")
    if (got_min, got_sad) != (n_min, n_sad):
        raise ParameterError(
            f"marker counts ({got_min} minima, {got_sad} saddles) disagree "
            f"with the tree ({n_min}, {n_sad}); inputs are inconsistent")
    return profile


def _lerp_hex(a: str, b: str, t: float) -> str:
    av = [int(a[i:i + 2], 16) for i in (1, 3, 5)]
    bv = [int(b[i:i + 2], 16) for i in (1, 3, 5)]
    mix = [round(x + (y - x) * t) for x, y in zip(av, bv)]
    return "#" + "".join(f"{c:02x}" for c in mix)
