"""Primitive intersection graph and connected components.

Vertices are primitives; an edge means the pair shares at least one sampled
interior point.  Pairwise tests are sampling-based with an analytic
bounding-box pre-check that can only prune provably disjoint pairs, never add
edges.  Every reported edge retains a witness point that re-verifies as
strictly inside both primitives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    MembershipLabel,
    Point,
    PrimitiveSet,
    SamplePlan,
    classify_points,
    sample_grid,
)


@dataclass
class IntersectionGraph:
    ids: tuple[str, ...]
    adjacency: np.ndarray  # symmetric bool matrix, empty diagonal
    witnesses: dict[tuple[int, int], Point] = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=bool)
        if a.shape != (len(self.ids), len(self.ids)):
            raise ValueError("adjacency shape does not match vertex count")
        if a.diagonal().any() or not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric with no self-loops")
        self.adjacency = a

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self.adjacency)) // 2

    def edges(self) -> list[tuple[str, str]]:
        n = len(self.ids)
        return [
            (self.ids[i], self.ids[j])
            for i in range(n)
            for j in range(i + 1, n)
            if self.adjacency[i, j]
        ]

    def to_dict(self) -> dict:
        return {"ids": list(self.ids), "edges": [list(e) for e in self.edges()]}


def _boxes_overlap(a, b) -> bool:
    if a is None or b is None:
        return True  # unbounded shapes never prune
    (alo, ahi), (blo, bhi) = a, b
    return all(alo[k] <= bhi[k] and blo[k] <= ahi[k] for k in range(3))


def build_graph(
    ps: PrimitiveSet,
    plan: SamplePlan,
    epsilon: float,
    seed: int = 0,
    extra_points: np.ndarray | None = None,
) -> IntersectionGraph:
    """Pairwise intersection graph over the plan's sample grid.

    ``extra_points`` are appended to the grid before testing; passing the
    witnesses of a coarser build guarantees its sound edges survive a
    resolution change.
    """
    pts = sample_grid(plan, seed)
    if extra_points is not None and len(extra_points):
        pts = np.vstack([pts, np.atleast_2d(np.asarray(extra_points, dtype=float))])
    inside = np.stack(
        [classify_points(p, pts, epsilon) == MembershipLabel.INSIDE for p in ps]
    )
    boxes = [p.bounding_box() for p in ps]
    n = len(ps)
    adj = np.zeros((n, n), dtype=bool)
    witnesses: dict[tuple[int, int], Point] = {}
    for i in range(n):
        for j in range(i + 1, n):
            if not _boxes_overlap(boxes[i], boxes[j]):
                continue
            both = inside[i] & inside[j]
            k = int(np.argmax(both))
            if both[k]:
                adj[i, j] = adj[j, i] = True
                witnesses[(i, j)] = tuple(float(c) for c in pts[k])
    return IntersectionGraph(ps.ids, adj, witnesses)


def connected_components(g: IntersectionGraph) -> list[list[str]]:
    """Vertex-id partition into connected parts, ordered by smallest vertex index."""
    n = len(g.ids)
    seen = [False] * n
    parts: list[list[str]] = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        members = []
        while stack:
            v = stack.pop()
            members.append(v)
            for w in np.flatnonzero(g.adjacency[v]):
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
        parts.append([g.ids[v] for v in sorted(members)])
    return parts


def nf_bounds(primitive_count: int, edge_info: str) -> int:
    """Extreme counts of non-empty fundamental products.

    ``disjoint`` primitives realize exactly ``|P|`` products; a fully
    connected graph admits up to ``2**|P| - 1``.  Actual counts in between
    depend on the geometry, not just the graph.
    """
    if primitive_count < 1:
        raise ValueError("primitive_count must be >= 1")
    if edge_info == "disjoint":
        return primitive_count
    if edge_info == "fully_connected":
        return 2**primitive_count - 1
    raise ValueError("edge_info must be 'disjoint' or 'fully_connected'")


def to_dot(g: IntersectionGraph) -> str:
    """Deterministic DOT rendering (vertices in set order, edges row-major)."""
    lines = ["graph intersection_graph {"]
    for pid in g.ids:
        lines.append(f"  {pid};")
    for a, b in g.edges():
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
