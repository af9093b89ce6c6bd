"""Fundamental products, two-level (DNF) extraction, and prime implicants.

A fundamental product is one cell of the arrangement induced by the primitive
set: an intersection of every primitive or its complement, identified by a
bit signature (bit ``i`` set = primitive ``i`` taken positively).  Excluding
the all-complement cell there are ``2**|P| - 1`` candidates, but only cells
realized by at least one clean sample point are non-empty; a missing
intersection-graph edge already proves emptiness for any signature with two
positive literals on that pair, and the sampled signatures are automatically
consistent with the graph when both are built on the same grid.

The target is reproduced as a union of the cells inside it (the two-level
representation), and optionally compressed by classic two-phase minimization:
cube merging to the complete prime-implicant set (empty cells act as
don't-cares), then a minimum cover by exact search for small prime counts or
a greedy cover (flagged non-optimal) beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from functools import reduce

import numpy as np

from .expr import EMPTY, CsgExpr, Leaf, diff, inter, union
from .geometry import MembershipLabel, Point, PrimitiveSet, SamplePlan, label_matrix, sample_grid
from .graph import IntersectionGraph
from .target import TargetSolid


class ProductStatus(Enum):
    EMPTY = "empty"
    INSIDE_TARGET = "inside_target"
    OUTSIDE_TARGET = "outside_target"
    MIXED = "mixed"


@dataclass(frozen=True)
class FundamentalProduct:
    signature: int
    count: int
    witness: Point
    status: ProductStatus | None = None
    inside_count: int = 0
    outside_count: int = 0
    surface_count: int = 0

    def bitstring(self, width: int) -> str:
        return "".join("1" if self.signature >> i & 1 else "0" for i in range(width))


@dataclass
class ProductTable:
    """Non-empty products plus their alignment to the grid that produced them."""

    ids: tuple[str, ...]
    products: list[FundamentalProduct]
    point_signatures: np.ndarray  # per grid point; -1 where any primitive is Surface
    clean: np.ndarray  # points counted in the statistics
    plan: SamplePlan
    seed: int

    @property
    def width(self) -> int:
        return len(self.ids)

    @property
    def n_f(self) -> int:
        return len(self.products)

    def to_dict(self) -> dict:
        return {
            "ids": list(self.ids),
            "n_f": self.n_f,
            "products": [
                {
                    "signature": p.bitstring(self.width),
                    "count": p.count,
                    "witness": list(p.witness),
                    "status": p.status.value if p.status else None,
                    "inside": p.inside_count,
                    "outside": p.outside_count,
                    "surface": p.surface_count,
                }
                for p in self.products
            ],
        }


def point_signatures(
    ps: PrimitiveSet, pts: np.ndarray, epsilon: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-point product signature and the clean mask.

    A point is clean when no primitive labels it Surface; unclean points get
    signature -1 and are excluded from every statistic.
    """
    labels = label_matrix(ps, pts, epsilon)
    clean = (labels != MembershipLabel.SURFACE).all(axis=0)
    weights = (1 << np.arange(len(ps), dtype=np.int64))[:, None]
    sig = ((labels == MembershipLabel.INSIDE) * weights).sum(axis=0)
    sig[~clean] = -1
    return sig, clean


def enumerate_products(
    ps: PrimitiveSet,
    graph: IntersectionGraph | None,
    plan: SamplePlan,
    epsilon: float,
    seed: int = 0,
    active: np.ndarray | None = None,
) -> ProductTable:
    """Non-empty fundamental products of the scene, ascending by signature.

    The all-complement signature is excluded, matching the ``2**|P| - 1``
    candidate count.  ``graph`` is accepted for symmetry with the candidate
    pruning it enables; deriving signatures directly from the shared grid
    subsumes that filter (an unsampled pair never yields a sampled cell).
    ``active`` restricts the statistics to a point mask.
    """
    if graph is not None and graph.ids != ps.ids:
        raise ValueError("graph was built over a different primitive set")
    pts = sample_grid(plan, seed)
    sig, clean = point_signatures(ps, pts, epsilon)
    counted = clean if active is None else (clean & active)
    usable = counted & (sig > 0)
    values, counts = np.unique(sig[usable], return_counts=True)
    products = []
    for v, c in zip(values, counts):
        k = int(np.argmax(usable & (sig == v)))
        products.append(
            FundamentalProduct(int(v), int(c), tuple(float(x) for x in pts[k]))
        )
    return ProductTable(ps.ids, products, sig, counted, plan, seed)


class MixedProductsError(RuntimeError):
    """Some products straddle the target; extraction needs an explicit override."""

    def __init__(self, table: ProductTable):
        mixed = [
            (p.bitstring(table.width), p.inside_count, p.outside_count)
            for p in table.products
            if p.status is ProductStatus.MIXED
        ]
        detail = ", ".join(f"{s} ({i} in / {o} out)" for s, i, o in mixed)
        super().__init__(f"mixed fundamental products: {detail}")
        self.mixed = mixed


def classify_products(
    table: ProductTable,
    target: TargetSolid,
    ps: PrimitiveSet,
    epsilon: float,
    tau: float = 1.0,
) -> ProductTable:
    """Label each product against the target on the table's own grid.

    A product is inside (outside) the target when at least ``tau`` of its
    countable points are Inside (Outside); anything else is mixed.  Points
    where the target itself reads Surface are not counted.  A product with no
    countable point carries no evidence of material and is treated as outside.
    """
    pts = sample_grid(table.plan, table.seed)
    want = target.labels_on(ps, pts, epsilon, plan=table.plan, seed=table.seed)
    return grade_products(table, want, tau)


def grade_products(table: ProductTable, want: np.ndarray, tau: float = 1.0) -> ProductTable:
    """Classify products against an already-computed target label array."""
    if not 0.5 < tau <= 1.0:
        raise ValueError("tau must lie in (0.5, 1.0]")
    graded = []
    for p in table.products:
        sel = table.clean & (table.point_signatures == p.signature)
        labels = want[sel]
        inside = int(np.count_nonzero(labels == MembershipLabel.INSIDE))
        outside = int(np.count_nonzero(labels == MembershipLabel.OUTSIDE))
        surface = int(labels.shape[0]) - inside - outside
        decided = inside + outside
        if decided == 0 or outside >= tau * decided:
            status = ProductStatus.OUTSIDE_TARGET
        elif inside >= tau * decided:
            status = ProductStatus.INSIDE_TARGET
        else:
            status = ProductStatus.MIXED
        graded.append(
            replace(
                p,
                status=status,
                inside_count=inside,
                outside_count=outside,
                surface_count=surface,
            )
        )
    return replace_products(table, graded)


def replace_products(table: ProductTable, products) -> ProductTable:
    return ProductTable(
        table.ids, list(products), table.point_signatures, table.clean, table.plan, table.seed
    )


def _clause(signature: int, ids: tuple[str, ...]) -> CsgExpr:
    """Positive-literal intersection minus each complemented primitive, in id order."""
    positives = [i for i in range(len(ids)) if signature >> i & 1]
    negatives = [i for i in range(len(ids)) if not signature >> i & 1]
    if not positives:
        raise ValueError("a product clause needs at least one positive literal")
    e: CsgExpr = reduce(inter, (Leaf(ids[i]) for i in positives[1:]), Leaf(ids[positives[0]]))
    return reduce(diff, (Leaf(ids[i]) for i in negatives), e)


def build_dnf(table: ProductTable) -> CsgExpr:
    """Two-level representation: left-deep union of the inside products.

    Every clause intersects all ``|P|`` literals (complements realized as
    trailing differences).  An empty inclusion set yields the explicit
    empty-solid marker.
    """
    inside = [p for p in table.products if p.status is ProductStatus.INSIDE_TARGET]
    if not inside:
        return EMPTY
    clauses = [_clause(p.signature, table.ids) for p in inside]
    return reduce(union, clauses)


# --- prime implicants ------------------------------------------------------


@dataclass(frozen=True)
class Implicant:
    """A cube over the signature bits: bound positions must match ``value``."""

    value: int
    mask: int  # set bit = bound position
    width: int

    def covers(self, signature: int) -> bool:
        return (signature & self.mask) == self.value

    @property
    def covered(self) -> frozenset[int]:
        free = [i for i in range(self.width) if not self.mask >> i & 1]
        sigs = {self.value}
        for b in free:
            sigs |= {s | (1 << b) for s in sigs}
        return frozenset(sigs)

    def bitstring(self) -> str:
        return "".join(
            "-" if not self.mask >> i & 1 else ("1" if self.value >> i & 1 else "0")
            for i in range(self.width)
        )

    def sort_key(self) -> tuple[int, int]:
        return (self.value, self.mask)


@dataclass
class MinimizationResult:
    primes: list[Implicant]
    cover: list[Implicant]
    exact: bool  # False when the greedy fallback picked the cover


def prime_implicants(
    on,
    dont_care,
    width: int,
    exact_cover_limit: int = 20,
) -> MinimizationResult:
    """Two-phase minimization of the inside-signature set.

    Phase 1 merges cubes to fixpoint (Quine-McCluskey) over ``on`` plus
    ``dont_care`` and keeps the maximal cubes that touch at least one on-
    signature.  Phase 2 picks a minimum cover of ``on`` — exact while the
    prime count stays within ``exact_cover_limit``, greedy (and flagged)
    beyond that.
    """
    on = set(on)
    dc = set(dont_care)
    if on & dc:
        raise ValueError("on-set and don't-care set must be disjoint")
    if any(s < 0 or s >> width for s in on | dc):
        raise ValueError("signature out of range for width")
    full = (1 << width) - 1
    level = {(m, full) for m in on | dc}
    primes: set[tuple[int, int]] = set()
    while level:
        merged: set[tuple[int, int]] = set()
        nxt: set[tuple[int, int]] = set()
        by_mask: dict[int, list[int]] = {}
        for v, m in level:
            by_mask.setdefault(m, []).append(v)
        for m, values in by_mask.items():
            vals = set(values)
            for v in values:
                for b in range(width):
                    bit = 1 << b
                    if not m & bit or v & bit:
                        continue
                    if v | bit in vals:
                        merged.add((v, m))
                        merged.add((v | bit, m))
                        nxt.add((v, m & ~bit))
        primes |= level - merged
        level = nxt
    keep = [
        Implicant(v, m, width)
        for v, m in primes
        if any((s & m) == v for s in on)
    ]
    keep.sort(key=Implicant.sort_key)
    if not on:
        return MinimizationResult(keep, [], True)
    cover, exact = _min_cover(keep, sorted(on), exact_cover_limit)
    return MinimizationResult(keep, cover, exact)


def _min_cover(
    primes: list[Implicant], on: list[int], exact_limit: int
) -> tuple[list[Implicant], bool]:
    nbits = len(on)
    goal = (1 << nbits) - 1
    masks = []
    for p in primes:
        m = 0
        for j, s in enumerate(on):
            if p.covers(s):
                m |= 1 << j
        masks.append(m)

    # essential primes: sole cover of some on-signature
    chosen: set[int] = set()
    covered = 0
    for j in range(nbits):
        holders = [i for i, m in enumerate(masks) if m >> j & 1]
        if len(holders) == 1:
            chosen.add(holders[0])
    for i in chosen:
        covered |= masks[i]

    remaining = [i for i in range(len(primes)) if i not in chosen]
    if covered != goal and len(primes) > exact_limit:
        while covered != goal:  # greedy: largest new coverage, first index on ties
            best_i, best_gain = -1, 0
            for i in remaining:
                gain = bin(masks[i] & ~covered).count("1")
                if gain > best_gain:
                    best_i, best_gain = i, gain
            if best_i < 0:
                raise ValueError("on-set not coverable by the prime implicants")
            chosen.add(best_i)
            remaining.remove(best_i)
            covered |= masks[best_i]
        return [primes[i] for i in sorted(chosen)], False

    best: set[int] | None = None

    def search(cov: int, picked: set[int], budget: int) -> set[int] | None:
        if cov == goal:
            return picked
        if budget == 0:
            return None
        # branch on the uncovered on-signature with the fewest candidate primes
        j = min(
            (j for j in range(nbits) if not cov >> j & 1),
            key=lambda j: sum(1 for m in masks if m >> j & 1),
        )
        for i in range(len(primes)):
            if masks[i] >> j & 1 and i not in picked:
                got = search(cov | masks[i], picked | {i}, budget - 1)
                if got is not None:
                    return got
        return None

    if covered == goal:
        best = chosen
    else:
        for extra in range(1, len(primes) - len(chosen) + 1):
            best = search(covered, set(chosen), extra)
            if best is not None:
                break
    if best is None:
        raise ValueError("on-set not coverable by the prime implicants")
    return [primes[i] for i in sorted(best)], True


def implicant_clause(imp: Implicant, ids: tuple[str, ...]) -> CsgExpr:
    """Clause containing only the bound literals of the cube."""
    positives = [i for i in range(imp.width) if imp.mask >> i & 1 and imp.value >> i & 1]
    negatives = [i for i in range(imp.width) if imp.mask >> i & 1 and not imp.value >> i & 1]
    if not positives:
        raise ValueError("implicant has no positive literal; cannot form a clause")
    e: CsgExpr = reduce(inter, (Leaf(ids[i]) for i in positives[1:]), Leaf(ids[positives[0]]))
    return reduce(diff, (Leaf(ids[i]) for i in negatives), e)


def implicants_to_expr(cover: list[Implicant], ids: tuple[str, ...]) -> CsgExpr:
    if not cover:
        return EMPTY
    ordered = sorted(cover, key=Implicant.sort_key)
    return reduce(union, (implicant_clause(imp, ids) for imp in ordered))


def minimize_products(table: ProductTable) -> tuple[MinimizationResult, CsgExpr]:
    """Prime-implicant compression of a classified product table.

    Off-signatures are the products outside the target plus the
    all-complement cell (which must stay off for every clause to keep a
    positive base literal); every remaining unrealized signature is a
    don't-care — the practical payoff of discarding empty cells.
    """
    on = {p.signature for p in table.products if p.status is ProductStatus.INSIDE_TARGET}
    off = {p.signature for p in table.products if p.status is not ProductStatus.INSIDE_TARGET}
    off.add(0)
    dc = set(range(1 << table.width)) - on - off
    result = prime_implicants(on, dc, table.width)
    return result, implicants_to_expr(result.cover, table.ids)


class TargetCoverageError(RuntimeError):
    """The target has material outside every primitive; it cannot be expressed."""


def check_coverage(table: ProductTable, target: TargetSolid, ps: PrimitiveSet, epsilon: float) -> None:
    """Reject targets with Inside points in the all-complement cell."""
    pts = sample_grid(table.plan, table.seed)
    want = target.labels_on(ps, pts, epsilon, plan=table.plan, seed=table.seed)
    stray = table.clean & (table.point_signatures == 0) & (want == MembershipLabel.INSIDE)
    n = int(np.count_nonzero(stray))
    if n:
        raise TargetCoverageError(
            f"{n} sample points are inside the target but outside every primitive"
        )


def extract(
    ps: PrimitiveSet,
    target: TargetSolid,
    plan: SamplePlan,
    epsilon: float,
    seed: int = 0,
    minimize: bool = True,
    allow_mixed: bool = False,
    tau: float = 1.0,
    graph: IntersectionGraph | None = None,
) -> CsgExpr:
    """Full DNF pipeline: products -> classification -> (optionally minimized) union.

    With ``allow_mixed`` a mixed product is included when the majority of its
    countable points are inside the target; otherwise mixed products raise.
    """
    table = enumerate_products(ps, graph, plan, epsilon, seed=seed)
    table = classify_products(table, target, ps, epsilon, tau=tau)
    check_coverage(table, target, ps, epsilon)
    table = resolve_mixed(table, allow_mixed)
    if not minimize:
        return build_dnf(table)
    _, expr = minimize_products(table)
    return expr


def resolve_mixed(table: ProductTable, allow_mixed: bool) -> ProductTable:
    """Raise on mixed products, or with the override include the majority-inside ones."""
    if not any(p.status is ProductStatus.MIXED for p in table.products):
        return table
    if not allow_mixed:
        raise MixedProductsError(table)
    graded = [
        replace(p, status=ProductStatus.INSIDE_TARGET)
        if p.status is ProductStatus.MIXED and p.inside_count > p.outside_count
        else p
        for p in table.products
    ]
    return replace_products(table, graded)
