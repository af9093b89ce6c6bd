"""Dominant-halfspace detection and recursive solid decomposition.

A primitive dominates the target when its sampled interior lies fully inside
it, and dominates the complement when fully outside.  Dominant primitives can
be factored out — union steps for the former, difference steps for the latter
— leaving a remainder restricted to the still-unexplained region.  Removal is
iterated to a fixpoint (newly exposed dominants are picked up batch by
batch), the remainder splits along the intersection-graph components of the
surviving primitives, and components without any dominant structure fall back
to two-level extraction with prime-implicant minimization.

The remainder is realized on the membership table by masking: every point
strictly inside a removed primitive stops constraining later stages, because
the step folded around the remainder decides that point regardless.  For the
same reason steps found earlier wrap *outside* steps found later — a verdict
reached against a masked remainder is only valid underneath the masking
steps.

Each primitive judged dominant appears exactly once in the output, and the
total number of dominance visits is bounded by ``(|P|**2 + |P|) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import reduce

import numpy as np

from .dnf import (
    enumerate_products,
    grade_products,
    minimize_products,
    resolve_mixed,
    TargetCoverageError,
)
from .expr import EMPTY, OP_DIFF, OP_UNION, CsgExpr, Empty, Leaf, Node, serialize, union
from .geometry import (
    MembershipLabel,
    PrimitiveSet,
    SamplePlan,
    classify_points,
    sample_grid,
)
from .target import TargetSolid


class DominanceKind(Enum):
    DOMINATES_TARGET = "dominates_target"
    DOMINATES_COMPLEMENT = "dominates_complement"
    NON_DOMINANT = "non_dominant"


@dataclass(frozen=True)
class DominanceVerdict:
    primitive_id: str
    kind: DominanceKind
    inside_count: int
    outside_count: int
    surface_count: int

    def to_dict(self) -> dict:
        return {
            "id": self.primitive_id,
            "kind": self.kind.value,
            "inside": self.inside_count,
            "outside": self.outside_count,
            "surface": self.surface_count,
        }


class DegeneratePrimitiveError(RuntimeError):
    """A primitive has no interior sample at the plan resolution."""

    def __init__(self, primitive_id: str):
        super().__init__(
            f"primitive {primitive_id!r} has no interior samples at this resolution"
        )
        self.primitive_id = primitive_id


@dataclass
class Decomposition:
    steps: list[tuple[str, str]]  # (primitive id, op); op is union or diff
    remaining_ids: list[str]
    remainder_labels: np.ndarray
    remainder_active: np.ndarray
    visit_count: int
    iterations: list[list[DominanceVerdict]]

    @property
    def remainder_obligations(self) -> int:
        """Active points the remainder must still cover."""
        return int(
            np.count_nonzero(
                self.remainder_active
                & (self.remainder_labels == MembershipLabel.INSIDE)
            )
        )


def _interiors(ps: PrimitiveSet, pts: np.ndarray, epsilon: float) -> np.ndarray:
    return np.stack(
        [classify_points(p, pts, epsilon) == MembershipLabel.INSIDE for p in ps]
    )


def _verdict(
    pid: str, interior_row: np.ndarray, want: np.ndarray, active: np.ndarray
) -> DominanceVerdict:
    sel = interior_row & active
    labels = want[sel]
    inside = int(np.count_nonzero(labels == MembershipLabel.INSIDE))
    outside = int(np.count_nonzero(labels == MembershipLabel.OUTSIDE))
    surface = int(labels.shape[0]) - inside - outside
    if inside > 0 and outside == 0:
        kind = DominanceKind.DOMINATES_TARGET
    elif outside > 0 and inside == 0:
        kind = DominanceKind.DOMINATES_COMPLEMENT
    else:
        kind = DominanceKind.NON_DOMINANT
    return DominanceVerdict(pid, kind, inside, outside, surface)


def find_dominant(
    ps: PrimitiveSet,
    target: TargetSolid,
    plan: SamplePlan,
    epsilon: float,
    seed: int = 0,
) -> list[DominanceVerdict]:
    """One dominance verdict per primitive, in set order."""
    pts = sample_grid(plan, seed)
    want = target.labels_on(ps, pts, epsilon, plan=plan, seed=seed)
    interior = _interiors(ps, pts, epsilon)
    for i, p in enumerate(ps):
        if not interior[i].any():
            raise DegeneratePrimitiveError(p.id)
    active = np.ones(pts.shape[0], dtype=bool)
    return [_verdict(p.id, interior[i], want, active) for i, p in enumerate(ps)]


def _decompose_arrays(
    ids: tuple[str, ...],
    interior: np.ndarray,
    want: np.ndarray,
    active: np.ndarray,
    indices: list[int],
) -> Decomposition:
    active = active.copy()
    remaining = list(indices)
    steps: list[tuple[str, str]] = []
    iterations: list[list[DominanceVerdict]] = []
    visits = 0
    inside = want == MembershipLabel.INSIDE
    # stop as soon as nothing remains to explain: with no obligations every
    # surviving primitive would vacuously dominate the complement and then
    # simplify out of the fold again
    while remaining and (active & inside).any():
        visits += len(remaining)
        verdicts = [_verdict(ids[i], interior[i], want, active) for i in remaining]
        iterations.append(verdicts)
        found = [
            (i, v)
            for i, v in zip(remaining, verdicts)
            if v.kind is not DominanceKind.NON_DOMINANT
        ]
        if not found:
            break
        for i, v in found:
            op = OP_UNION if v.kind is DominanceKind.DOMINATES_TARGET else OP_DIFF
            steps.append((ids[i], op))
        for i, _ in found:  # batch removal: mask after recording the whole sweep
            active &= ~interior[i]
        dominated = {i for i, _ in found}
        remaining = [i for i in remaining if i not in dominated]
    return Decomposition(
        steps=steps,
        remaining_ids=[ids[i] for i in remaining],
        remainder_labels=want,
        remainder_active=active,
        visit_count=visits,
        iterations=iterations,
    )


def decompose(
    ps: PrimitiveSet,
    target: TargetSolid,
    plan: SamplePlan,
    epsilon: float,
    seed: int = 0,
) -> Decomposition:
    """Iterated dominant-primitive removal until no new dominant appears."""
    pts = sample_grid(plan, seed)
    want = target.labels_on(ps, pts, epsilon, plan=plan, seed=seed)
    interior = _interiors(ps, pts, epsilon)
    for i, p in enumerate(ps):
        if not interior[i].any():
            raise DegeneratePrimitiveError(p.id)
    active = np.ones(pts.shape[0], dtype=bool)
    return _decompose_arrays(ps.ids, interior, want, active, list(range(len(ps))))


def _fold_step(expr: CsgExpr, pid: str, op: str) -> CsgExpr:
    if isinstance(expr, Empty):
        return Leaf(pid) if op == OP_UNION else EMPTY
    return Node(op, (expr, Leaf(pid)))


def _index_components(interior: np.ndarray, indices: list[int]) -> list[list[int]]:
    """Connected components of the sampled intersection graph over ``indices``."""
    adj = {
        i: [
            j
            for j in indices
            if j != i and bool(np.any(interior[i] & interior[j]))
        ]
        for i in indices
    }
    seen: set[int] = set()
    comps: list[list[int]] = []
    for start in indices:
        if start in seen:
            continue
        stack, members = [start], []
        seen.add(start)
        while stack:
            v = stack.pop()
            members.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(members))
    return comps


@dataclass
class ReconstructionResult:
    expr: CsgExpr
    decomposition: Decomposition
    trace: dict


def reconstruct_detailed(
    ps: PrimitiveSet,
    target: TargetSolid,
    plan: SamplePlan,
    epsilon: float,
    seed: int = 0,
    allow_mixed: bool = False,
    tau: float = 1.0,
) -> ReconstructionResult:
    """Decomposition pipeline with the full trace (steps, evidence, sub-expressions)."""
    pts = sample_grid(plan, seed)
    want = target.labels_on(ps, pts, epsilon, plan=plan, seed=seed)
    interior = _interiors(ps, pts, epsilon)
    for i, p in enumerate(ps):
        if not interior[i].any():
            raise DegeneratePrimitiveError(p.id)
    active = np.ones(pts.shape[0], dtype=bool)
    top: list[Decomposition] = []

    def extract(indices: list[int], labels: np.ndarray, act: np.ndarray, depth: int):
        if depth > len(ps):
            raise RuntimeError("decomposition recursion exceeded the primitive count")
        d = _decompose_arrays(ps.ids, interior, labels, act, indices)
        if depth == 0:
            top.append(d)
        trace: dict = {
            "steps": [list(s) for s in d.steps],
            "visits": d.visit_count,
            "iterations": [
                [v.to_dict() for v in iteration] for iteration in d.iterations
            ],
            "components": [],
        }
        obligations = d.remainder_active & (labels == MembershipLabel.INSIDE)
        if not obligations.any():
            rem_expr: CsgExpr = EMPTY
        else:
            rem_idx = [ps.index_of(pid) for pid in d.remaining_ids]
            if not rem_idx:
                raise TargetCoverageError(
                    "remainder has material but no primitives are left to explain it"
                )
            covered = np.zeros_like(obligations)
            for i in rem_idx:
                covered |= interior[i]
            stray = int(np.count_nonzero(obligations & ~covered))
            if stray:
                raise TargetCoverageError(
                    f"{stray} remainder points lie outside every remaining primitive"
                )
            comps = _index_components(interior, rem_idx)
            sub_exprs: list[CsgExpr] = []
            for comp in comps:
                comp_covered = np.zeros_like(obligations)
                for i in comp:
                    comp_covered |= interior[i]
                if not (obligations & comp_covered).any():
                    continue  # component carries no material of its own
                comp_trace: dict = {"ids": [ps.ids[i] for i in comp]}
                if len(comps) == 1 and not d.steps:
                    sub = _dnf_component(
                        comp, labels, d.remainder_active, allow_mixed, tau
                    )
                    comp_trace["method"] = "dnf-min"
                else:
                    masked = labels.copy()
                    masked[(labels == MembershipLabel.INSIDE) & ~comp_covered] = (
                        MembershipLabel.OUTSIDE
                    )
                    sub, sub_trace = extract(comp, masked, d.remainder_active, depth + 1)
                    comp_trace["method"] = "decompose"
                    comp_trace["detail"] = sub_trace
                comp_trace["expr"] = serialize(sub)
                trace["components"].append(comp_trace)
                sub_exprs.append(sub)
            rem_expr = reduce(union, sub_exprs) if sub_exprs else EMPTY
        expr = rem_expr
        for pid, op in reversed(d.steps):  # earliest-found step ends up outermost
            expr = _fold_step(expr, pid, op)
        return expr, trace

    def _dnf_component(
        comp: list[int], labels: np.ndarray, act: np.ndarray, allow: bool, t: float
    ) -> CsgExpr:
        sub_ps = PrimitiveSet(tuple(ps[i] for i in comp))
        table = enumerate_products(sub_ps, None, plan, epsilon, seed=seed, active=act)
        table = grade_products(table, labels, tau=t)
        table = resolve_mixed(table, allow)
        _, expr = minimize_products(table)
        return expr

    expr, trace = extract(list(range(len(ps))), want, active, 0)
    return ReconstructionResult(expr=expr, decomposition=top[0], trace=trace)


def reconstruct(
    ps: PrimitiveSet,
    target: TargetSolid,
    plan: SamplePlan,
    epsilon: float,
    seed: int = 0,
    allow_mixed: bool = False,
    tau: float = 1.0,
) -> CsgExpr:
    """Full extraction: decompose, split the remainder, merge, fold the steps."""
    return reconstruct_detailed(
        ps, target, plan, epsilon, seed=seed, allow_mixed=allow_mixed, tau=tau
    ).expr
