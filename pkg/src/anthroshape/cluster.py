"""Agglomerative hierarchical clustering over a precomputed distance matrix."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidKError, TooFewSubjectsError, ValidationError
from .similarity import SimilarityMatrix


class Linkage(enum.Enum):
    SINGLE = "single"
    AVERAGE = "average"
    COMPLETE = "complete"

    @classmethod
    def parse(cls, text: str) -> "Linkage":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValidationError(f"unknown linkage {text!r}")


@dataclass
class Dendrogram:
    leaves: list   # subject labels, leaf node id = index
    merges: list   # [(node_a, node_b, height, new_node_id)], node_a < node_b
    linkage: Linkage

    def __post_init__(self):
        n = len(self.leaves)
        if len(self.merges) != n - 1:
            raise ValidationError("a dendrogram over n leaves needs n-1 merges")
        seen_children = set()
        for a, b, _h, _new in self.merges:
            for child in (a, b):
                if child in seen_children:
                    raise ValidationError(f"node {child} merged twice")
                seen_children.add(child)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)


@dataclass
class ClusterAssignment:
    k: int
    labels: dict  # subject label -> cluster index in [0, k)

    def __post_init__(self):
        used = set(self.labels.values())
        if used != set(range(self.k)):
            raise ValidationError("cluster indices must cover [0, k) with no empties")


def agglomerate(matrix: SimilarityMatrix, linkage: Linkage = Linkage.AVERAGE) -> Dendrogram:
    """Standard bottom-up agglomeration with Lance-Williams distance updates.

    Ties are broken by the lexicographically smallest (node_a, node_b) pair,
    so the tree is reproducible across platforms.
    """
    n = len(matrix.ids)
    if n < 2:
        raise TooFewSubjectsError("need at least 2 subjects to cluster")
    # active cluster state: node id -> (distance row key), sizes
    dist = {}
    active = list(range(n))
    sizes = {i: 1 for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(matrix.values[i, j])

    def d_of(a, b):
        return dist[(a, b) if a < b else (b, a)]

    merges = []
    next_id = n
    while len(active) > 1:
        best = None
        for ai in range(len(active)):
            for bi in range(ai + 1, len(active)):
                a, b = active[ai], active[bi]
                key = (a, b) if a < b else (b, a)
                cand = (dist[key], key[0], key[1])
                if best is None or cand < best:
                    best = cand
        height, a, b = best
        merged = next_id
        next_id += 1
        na, nb = sizes[a], sizes[b]
        for other in active:
            if other in (a, b):
                continue
            da, db = d_of(other, a), d_of(other, b)
            if linkage == Linkage.SINGLE:
                d_new = min(da, db)
            elif linkage == Linkage.COMPLETE:
                d_new = max(da, db)
            else:
                d_new = (na * da + nb * db) / (na + nb)
            dist[(other, merged) if other < merged else (merged, other)] = d_new
        active = [x for x in active if x not in (a, b)] + [merged]
        sizes[merged] = na + nb
        merges.append((a, b, height, merged))
    labels = [sid for sid, _pose in matrix.ids]
    return Dendrogram(leaves=labels, merges=merges, linkage=linkage)


def _members(tree: Dendrogram):
    """Leaf membership per node id."""
    members = {i: [i] for i in range(tree.n_leaves)}
    for a, b, _h, new in tree.merges:
        members[new] = members[a] + members[b]
    return members


def cut(tree: Dendrogram, k: int) -> ClusterAssignment:
    """Partition into k clusters by undoing the last k-1 merges.

    Clusters are numbered 0..k-1 in order of their smallest member label.
    """
    n = tree.n_leaves
    if not 1 <= k <= n:
        raise InvalidKError(f"k must be in [1, {n}]")
    members = _members(tree)
    roots = set(range(n))
    for a, b, _h, new in tree.merges[: n - k]:
        roots.discard(a)
        roots.discard(b)
        roots.add(new)
    groups = sorted((min(tree.leaves[i] for i in members[r]), r) for r in roots)
    labels = {}
    for idx, (_key, root) in enumerate(groups):
        for leaf in members[root]:
            labels[tree.leaves[leaf]] = idx
    return ClusterAssignment(k=k, labels=labels)


class DendrogramFormat(enum.Enum):
    JSON = "json"
    NEWICK = "newick"


def export_dendrogram(tree: Dendrogram, fmt: DendrogramFormat = DendrogramFormat.JSON) -> str:
    heights = {i: 0.0 for i in range(tree.n_leaves)}
    children = {}
    root = tree.n_leaves - 1 if not tree.merges else tree.merges[-1][3]
    for a, b, h, new in tree.merges:
        heights[new] = h
        children[new] = (a, b)

    if fmt == DendrogramFormat.JSON:
        def node(nid):
            obj = {"id": nid, "height": heights[nid]}
            if nid < tree.n_leaves:
                obj["name"] = tree.leaves[nid]
            else:
                obj["children"] = [node(c) for c in children[nid]]
            return obj
        return json.dumps(node(root), indent=1)

    def newick(nid, parent_h):
        length = parent_h - heights[nid]
        if nid < tree.n_leaves:
            return f"{tree.leaves[nid]}:{length:g}"
        a, b = children[nid]
        inner = f"({newick(a, heights[nid])},{newick(b, heights[nid])})"
        return inner if parent_h is None else f"{inner}:{length:g}"

    if not tree.merges:
        return f"{tree.leaves[0]};"
    a, b = children[root]
    return f"({newick(a, heights[root])},{newick(b, heights[root])});"


def parse_dendrogram_json(text: str, linkage: Linkage = Linkage.AVERAGE) -> Dendrogram:
    """Rebuild a Dendrogram from its JSON export (round-trip partner)."""
    root = json.loads(text)
    leaves = {}
    merges = []

    def walk(obj):
        if "children" in obj:
            kids = [walk(c) for c in obj["children"]]
            merges.append((kids[0], kids[1], obj["height"], obj["id"]))
            return obj["id"]
        leaves[obj["id"]] = obj["name"]
        return obj["id"]

    walk(root)
    labels = [leaves[i] for i in sorted(leaves)]
    merges.sort(key=lambda m: m[3])
    return Dendrogram(leaves=labels, merges=merges, linkage=linkage)
