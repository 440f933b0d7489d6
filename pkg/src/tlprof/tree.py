"""Merge trees of sublevel-set filtrations, branch decomposition,
persistence pairs, and persistence-based simplification.

The filtration sweeps vertices in ascending (value, vertex index) order --
that total order is the tie-breaking convention everywhere.  A vertex with
no lower-ordered neighbor spawns a minimum; a vertex joining m > 1 distinct
components becomes m-1 chained degree-three saddles at equal value.  The
elder rule decides pairing: at every merge the component whose minimum is
lower (ties by lower vertex index) survives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .errors import ParameterError
from .field import ScalarField
from .graph import NeighborhoodGraph

MINIMUM = "minimum"
SADDLE = "saddle"
ROOT = "root"


@dataclass
class TreeNode:
    id: int
    vertex: int
    value: float
    kind: str


@dataclass
class MergeTree:
    """Critical-point nodes with parent arcs and a vertex segmentation.

    `segmentation[v]` is the branch id (the minimum node id) of the branch
    vertex v joined during the sweep.  `parent[node_id]` is the parent node
    id, -1 for roots.
    """

    nodes: list[TreeNode]
    parent: np.ndarray
    segmentation: np.ndarray
    vertex_count: int
    vertex_values: Optional[np.ndarray] = None

    def nodes_of_kind(self, kind: str) -> list[TreeNode]:
        return [nd for nd in self.nodes if nd.kind == kind]

    @property
    def minima(self) -> list[TreeNode]:
        return self.nodes_of_kind(MINIMUM)

    @property
    def saddles(self) -> list[TreeNode]:
        return self.nodes_of_kind(SADDLE)

    @property
    def roots(self) -> list[TreeNode]:
        return self.nodes_of_kind(ROOT)

    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in self.nodes]
        for nd in self.nodes:
            p = self.parent[nd.id]
            if p >= 0:
                ch[p].append(nd.id)
        return ch

    def to_json_dict(self) -> dict:
        return {
            "format": "tlprof-tree",
            "version": 1,
            "vertexCount": self.vertex_count,
            "nodes": [
                {"id": nd.id, "vertexId": nd.vertex,
                 "value": nd.value, "kind": nd.kind}
                for nd in self.nodes
            ],
            "arcs": [
                {"child": nd.id, "parent": int(self.parent[nd.id])}
                for nd in self.nodes if self.parent[nd.id] >= 0
            ],
            "segmentation": self.segmentation.tolist(),
        }


@dataclass
class Branch:
    """One minimum-to-saddle (or minimum-to-root) monotone path."""

    branch_id: int          # minimum node id
    min_node: int
    end_node: int           # terminating saddle node, or root for the master
    persistence: float
    members: np.ndarray     # vertices segmented to this branch
    parent_branch: int = -1  # branch id this one merges into; -1 for masters

    @property
    def is_master(self) -> bool:
        return self.parent_branch < 0


@dataclass
class BranchDecomposition:
    branches: list[Branch]
    master_branches: list[int]  # branch ids, one per component

    def by_id(self) -> dict[int, Branch]:
        return {b.branch_id: b for b in self.branches}


@dataclass
class PersistenceDiagram:
    """(birth, death) pairs of the 0-dimensional sublevel persistence."""

    pairs: list[tuple[float, float]]
    unpaired: list[float]  # one global minimum value per component


def compute_merge_tree(field: ScalarField, graph: NeighborhoodGraph) -> MergeTree:
    """Sweep the sublevel filtration over the graph with union-find."""
    N = field.N
    if graph.vertex_count != N:
        raise ParameterError(
            f"graph has {graph.vertex_count} vertices, field has {N}"
        )
    values = field.values
    order = np.lexsort((np.arange(N), values))
    rank = np.empty(N, dtype=np.int64)
    rank[order] = np.arange(N)
    adj = graph.adjacency()

    parent_uf = np.arange(N, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent_uf[root] != root:
            root = parent_uf[root]
        while parent_uf[x] != root:
            parent_uf[x], x = root, parent_uf[x]
        return root

    nodes: list[TreeNode] = []
    node_parent: list[int] = []
    seg = np.full(N, -1, dtype=np.int64)

    # per union-find root: the component's elder branch, chain head node,
    # elder minimum rank, and last processed vertex
    comp_branch: dict[int, int] = {}
    comp_head: dict[int, int] = {}
    comp_min_rank: dict[int, int] = {}
    comp_last: dict[int, int] = {}

    def new_node(vertex: int, kind: str) -> int:
        nid = len(nodes)
        nodes.append(TreeNode(nid, vertex, float(values[vertex]), kind))
        node_parent.append(-1)
        return nid

    for v in order:
        v = int(v)
        lower = [int(u) for u in adj[v] if rank[u] < rank[v]]
        roots = sorted({find(u) for u in lower}, key=lambda rt: comp_min_rank[rt])
        if not roots:
            nid = new_node(v, MINIMUM)
            comp_branch[v] = nid
            comp_head[v] = nid
            comp_min_rank[v] = int(rank[v])
            comp_last[v] = v
            seg[v] = nid
            continue
        if len(roots) == 1:
            rt = roots[0]
            seg[v] = comp_branch[rt]
            parent_uf[v] = rt
            comp_last[rt] = v
            continue
        # saddle: binarize an m-way merge into m-1 equal-value saddles,
        # younger components absorbed in ascending order of their minima
        elder = roots[0]
        head = comp_head[elder]
        for rt in roots[1:]:
            sid = new_node(v, SADDLE)
            node_parent[head] = sid
            node_parent[comp_head[rt]] = sid
            head = sid
        # merge union-find sets into the elder's root
        for rt in roots[1:]:
            parent_uf[rt] = elder
        parent_uf[v] = elder
        comp_head[elder] = head
        comp_last[elder] = v
        seg[v] = comp_branch[elder]

    # close each surviving component with a root node at its last vertex
    final_roots = sorted({find(int(v)) for v in order},
                         key=lambda rt: comp_min_rank[rt])
    for rt in final_roots:
        rid = new_node(comp_last[rt], ROOT)
        node_parent[comp_head[rt]] = rid

    return MergeTree(nodes, np.asarray(node_parent, dtype=np.int64),
                     seg, vertex_count=N, vertex_values=values.copy())


def branch_decomposition(tree: MergeTree) -> BranchDecomposition:
    """Elder-rule pairing of minima with saddles, plus member lists."""
    n_nodes = len(tree.nodes)
    values = np.array([nd.value for nd in tree.nodes])
    # best (elder) minimum in each node's subtree, as (rank key, node id);
    # nodes are created in filtration order, so parents follow children
    best_min = [None] * n_nodes
    end_of: dict[int, int] = {}      # branch id -> terminating node
    parent_of: dict[int, int] = {}   # branch id -> parent branch id
    children = tree.children()

    def min_key(nid: int) -> tuple[float, int]:
        nd = tree.nodes[nid]
        return (nd.value, nd.vertex)

    for nd in tree.nodes:
        if nd.kind == MINIMUM:
            best_min[nd.id] = nd.id
        elif nd.kind == SADDLE:
            subs = [best_min[c] for c in children[nd.id]]
            subs.sort(key=min_key)
            survivor, dying = subs[0], subs[1:]
            for m in dying:
                end_of[m] = nd.id
                parent_of[m] = survivor
            best_min[nd.id] = survivor
        else:  # root
            (child,) = children[nd.id]
            m = best_min[child]
            end_of[m] = nd.id
            best_min[nd.id] = m

    members: dict[int, list[int]] = {}
    for v, b in enumerate(tree.segmentation):
        members.setdefault(int(b), []).append(v)

    branches: list[Branch] = []
    masters: list[int] = []
    for nd in tree.minima:
        bid = nd.id
        end = end_of[bid]
        pers = float(values[end] - nd.value)
        pb = parent_of.get(bid, -1)
        if pb < 0:
            masters.append(bid)
        branches.append(Branch(
            branch_id=bid, min_node=bid, end_node=end, persistence=pers,
            members=np.asarray(members.get(bid, []), dtype=np.int64),
            parent_branch=pb))
    branches.sort(key=lambda b: (tree.nodes[b.min_node].value,
                                 tree.nodes[b.min_node].vertex))
    return BranchDecomposition(branches, masters)


def persistence_pairs(decomp: BranchDecomposition,
                      tree: MergeTree) -> PersistenceDiagram:
    """One (birth, death) pair per non-master branch."""
    pairs = []
    unpaired = []
    for b in decomp.branches:
        birth = tree.nodes[b.min_node].value
        if b.is_master:
            unpaired.append(birth)
        else:
            pairs.append((birth, tree.nodes[b.end_node].value))
    return PersistenceDiagram(pairs, unpaired)


def simplify(tree: MergeTree, decomp: BranchDecomposition,
             epsilon: float) -> MergeTree:
    """Merge every branch with persistence <= epsilon into its parent.

    Master branches always survive.  Surviving pairs all have persistence
    strictly greater than epsilon; for fields without zero-persistence pairs,
    epsilon = 0 is the identity.
    """
    if epsilon < 0:
        raise ParameterError(f"epsilon must be >= 0, got {epsilon}")
    by_id = decomp.by_id()
    surviving = {b.branch_id for b in decomp.branches
                 if b.is_master or b.persistence > epsilon}

    def surviving_ancestor(bid: int) -> int:
        while bid not in surviving:
            bid = by_id[bid].parent_branch
        return bid

    # group children under their surviving ancestors
    child_map: dict[int, list[Branch]] = {bid: [] for bid in surviving}
    for b in decomp.branches:
        if b.branch_id in surviving and not b.is_master:
            child_map[surviving_ancestor(b.parent_branch)].append(b)

    nodes: list[TreeNode] = []
    node_parent: list[int] = []
    seg = np.full(tree.vertex_count, -1, dtype=np.int64)
    new_id_of: dict[int, int] = {}

    def new_node(vertex: int, value: float, kind: str) -> int:
        nid = len(nodes)
        nodes.append(TreeNode(nid, vertex, value, kind))
        node_parent.append(-1)
        return nid

    def build_branch(bid: int) -> int:
        """Create the branch's min and its child saddles; return chain top."""
        mn = tree.nodes[bid]
        new_min = new_node(mn.vertex, mn.value, MINIMUM)
        new_id_of[bid] = new_min
        kids = sorted(child_map[bid],
                      key=lambda b: (tree.nodes[b.end_node].value,
                                     tree.nodes[b.min_node].vertex))
        top = new_min
        for kid in kids:
            kid_top = build_branch(kid.branch_id)
            snd = tree.nodes[kid.end_node]
            sid = new_node(snd.vertex, snd.value, SADDLE)
            node_parent[top] = sid
            node_parent[kid_top] = sid
            top = sid
        return top

    for master in sorted(decomp.master_branches,
                         key=lambda bid: (tree.nodes[bid].value,
                                          tree.nodes[bid].vertex)):
        top = build_branch(master)
        old_root = tree.nodes[by_id[master].end_node]
        rid = new_node(old_root.vertex, old_root.value, ROOT)
        node_parent[top] = rid

    for b in decomp.branches:
        target = new_id_of[surviving_ancestor(b.branch_id)]
        seg[b.members] = target

    return MergeTree(nodes, np.asarray(node_parent, dtype=np.int64),
                     seg, vertex_count=tree.vertex_count,
                     vertex_values=tree.vertex_values)


def write_tree_json(tree: MergeTree, path) -> None:
    with open(path, "w") as fh:
        json.dump(tree.to_json_dict(), fh, indent=1)
        fh.write("\n")
