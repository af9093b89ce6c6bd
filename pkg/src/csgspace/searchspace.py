"""Exact counting and enumeration of candidate CSG trees.

A candidate tree with ``n`` inner nodes has ``n + 1`` leaves; there are
``C(n)`` shapes (Catalan), ``|O|**n`` operator labelings and ``|P|**(n+1)``
leaf labelings, so ``|P|**(n+1) * |O|**n * C(n)`` labeled trees per ``n`` and
a sum of those terms over an ``[n_min, n_max]`` range for the full space.
All counts are exact Python integers; the totals overflow 64-bit arithmetic
almost immediately.

The enumerator streams every labeled tree exactly once in a canonical order
(shapes by ascending left-subtree size, then operator tuples, then leaf
tuples) and doubles as the counting oracle and the exhaustive-search engine.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from .expr import BINARY_OPS, CsgExpr, Leaf, Node, evaluate_labels
from .geometry import PrimitiveSet, SamplePlan, sample_grid

DEFAULT_OPERATORS = BINARY_OPS
DEFAULT_ENUMERATION_CAP = 10**7


def catalan(n: int) -> int:
    """Number of binary tree shapes with ``n`` inner nodes, exactly."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return math.comb(2 * n, n) // (n + 1)


def count_trees(primitive_count: int, operator_count: int, n: int) -> int:
    """Labeled trees with ``n`` inner nodes over the given label alphabets."""
    if primitive_count < 1 or operator_count < 1:
        raise ValueError("primitive and operator counts must be >= 1")
    return primitive_count ** (n + 1) * operator_count**n * catalan(n)


@dataclass(frozen=True)
class NBounds:
    n_min: int
    h_max: float
    n_max: int


def n_bounds(primitive_count: int) -> NBounds:
    """Heuristic inner-node bounds for a primitive set of the given size.

    ``n_min = |P| - 1`` (every primitive appears at least once).  The height
    heuristic ``h_max = sqrt(pi/2 * |P| * (|P|-1))`` gives an upper bound via
    the fullest tree of height ``ceil(h_max)``: ``n_max = 2**ceil(h_max) - 1``.
    Callers may override ``n_max``; no tighter spatial heuristic is attempted.
    """
    if primitive_count < 1:
        raise ValueError("primitive_count must be >= 1")
    n_min = primitive_count - 1
    h_max = math.sqrt(math.pi / 2.0 * primitive_count * (primitive_count - 1))
    n_max = 2 ** math.ceil(h_max) - 1
    return NBounds(n_min, h_max, n_max)


@dataclass
class SearchSpaceReport:
    primitive_count: int
    operator_count: int
    n_min: int
    n_max: int
    per_n: dict[int, int]
    total: int
    h_max: float | None = None  # set when the range came from the heuristics

    def to_dict(self) -> dict:
        doc = {
            "primitive_count": self.primitive_count,
            "operator_count": self.operator_count,
            "n_min": self.n_min,
            "n_max": self.n_max,
            "per_n": {str(k): str(v) for k, v in self.per_n.items()},
            "total": str(self.total),
        }
        if self.h_max is not None:
            doc["h_max"] = self.h_max
        return doc


def count_trees_range(
    primitive_count: int,
    operator_count: int,
    n_min: int,
    n_max: int,
    h_max: float | None = None,
) -> SearchSpaceReport:
    """Per-``n`` counts and their exact sum over an inclusive range."""
    if n_min > n_max:
        raise ValueError("n_min must be <= n_max")
    per_n = {
        n: count_trees(primitive_count, operator_count, n)
        for n in range(n_min, n_max + 1)
    }
    return SearchSpaceReport(
        primitive_count=primitive_count,
        operator_count=operator_count,
        n_min=n_min,
        n_max=n_max,
        per_n=per_n,
        total=sum(per_n.values()),
        h_max=h_max,
    )


def count_trees_auto(primitive_count: int, operator_count: int) -> SearchSpaceReport:
    """Range count with the heuristic bounds, recorded in the report."""
    b = n_bounds(primitive_count)
    return count_trees_range(
        primitive_count, operator_count, b.n_min, b.n_max, h_max=b.h_max
    )


@lru_cache(maxsize=None)
def tree_shapes(n: int) -> tuple:
    """All binary tree shapes with ``n`` inner nodes, left-subtree size ascending.

    A shape is ``None`` for a leaf or a ``(left, right)`` pair for an inner
    node; there are exactly ``catalan(n)`` of them.
    """
    if n == 0:
        return (None,)
    shapes = []
    for k in range(n):
        for left in tree_shapes(k):
            for right in tree_shapes(n - 1 - k):
                shapes.append((left, right))
    return tuple(shapes)


class EnumerationCapExceeded(RuntimeError):
    """Raised instead of silently streaming an astronomically large space."""

    def __init__(self, requested: int, cap: int):
        super().__init__(
            f"enumeration of {requested} trees exceeds the cap of {cap}"
        )
        self.requested = requested
        self.cap = cap


def _validate_operators(operators) -> tuple[str, ...]:
    ops = tuple(operators)
    if not ops or any(op not in BINARY_OPS for op in ops) or len(set(ops)) != len(ops):
        raise ValueError(f"operators must be a nonempty subset of {BINARY_OPS}")
    return ops


def _instantiate(shape, ops: tuple[str, ...], leaves: tuple[str, ...]) -> CsgExpr:
    """Attach preorder operator/leaf labels to a shape template."""
    oi = iter(ops)
    li = iter(leaves)

    def build(s):
        if s is None:
            return Leaf(next(li))
        op = next(oi)
        return Node(op, (build(s[0]), build(s[1])))

    return build(shape)


def enumerate_trees(
    ps: PrimitiveSet,
    operators=DEFAULT_OPERATORS,
    n: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Iterator[CsgExpr]:
    """Stream every distinct labeled tree with ``n`` inner nodes exactly once.

    Order: shapes (ascending left-subtree size), then operator tuples in
    operator order, then leaf tuples in primitive order, rightmost slot
    varying fastest.  Refuses with the exact requested count when it exceeds
    ``cap``.
    """
    ops = _validate_operators(operators)
    total = count_trees(len(ps), len(ops), n)
    if total > cap:
        raise EnumerationCapExceeded(total, cap)
    ids = ps.ids

    def gen():
        for shape in tree_shapes(n):
            for op_combo in itertools.product(ops, repeat=n):
                for leaf_combo in itertools.product(ids, repeat=n + 1):
                    yield _instantiate(shape, op_combo, leaf_combo)

    return gen()


@dataclass
class SearchOutcome:
    expr: CsgExpr | None
    matched_n: int | None
    candidates_inspected: int


def exhaustive_search(
    ps: PrimitiveSet,
    operators,
    target,
    n_range: tuple[int, int],
    plan: SamplePlan,
    epsilon: float,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> SearchOutcome:
    """Scan candidate trees for one whose sampled membership matches ``target``.

    Levels are searched smallest ``n`` first; within a level every candidate
    is inspected (so the inspection count per level equals the level's exact
    tree count) and the first match in canonical order wins.  Points where
    either side is Surface are excluded from the comparison.
    """
    from .target import TargetSolid  # local import to avoid a cycle

    if not isinstance(target, TargetSolid):
        raise TypeError("target must be a TargetSolid")
    n_lo, n_hi = n_range
    if n_lo > n_hi:
        raise ValueError("empty n range")
    pts = sample_grid(plan, seed)
    want = target.labels_on(ps, pts, epsilon, plan=plan, seed=seed)
    want_clean = want != 0
    inspected = 0
    for n in range(n_lo, n_hi + 1):
        best: CsgExpr | None = None
        for tree in enumerate_trees(ps, operators, n, cap=cap):
            inspected += 1
            if best is not None:
                continue  # finish the level for a deterministic inspection count
            got = evaluate_labels(tree, ps, pts, epsilon)
            consider = want_clean & (got != 0)
            if np.array_equal(got[consider], want[consider]):
                best = tree
        if best is not None:
            return SearchOutcome(best, n, inspected)
    return SearchOutcome(None, None, inspected)
