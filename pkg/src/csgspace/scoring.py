"""Label-agreement scoring between an extracted expression and a target.

Points where either side lies in the Surface band are excluded from the
match statistics; a perfect extraction therefore scores a match fraction of
exactly 1.0 even though boundary cells are ambiguous under sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import CsgExpr, MembershipLabel, evaluate_labels, size_metrics
from .geometry import PrimitiveSet, SamplePlan, sample_grid
from .target import TargetSolid


@dataclass
class ScoreReport:
    total: int
    matched: int
    mismatched: int
    surface_excluded: int
    match_fraction: float
    inner_count: int
    leaf_count: int
    height: int

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "matched": self.matched,
            "mismatched": self.mismatched,
            "surface_excluded": self.surface_excluded,
            "match_fraction": self.match_fraction,
            "inner_count": self.inner_count,
            "leaf_count": self.leaf_count,
            "height": self.height,
        }


def compare_labels(got: np.ndarray, want: np.ndarray, expr: CsgExpr) -> ScoreReport:
    considered = (got != 0) & (want != 0)
    matched = int(np.count_nonzero(considered & (got == want)))
    mismatched = int(np.count_nonzero(considered & (got != want)))
    total = int(got.shape[0])
    decided = matched + mismatched
    m = size_metrics(expr)
    return ScoreReport(
        total=total,
        matched=matched,
        mismatched=mismatched,
        surface_excluded=total - decided,
        match_fraction=(matched / decided) if decided else 1.0,
        inner_count=m.inner_count,
        leaf_count=m.leaf_count,
        height=m.height,
    )


def score_expression(
    expr: CsgExpr,
    ps: PrimitiveSet,
    target: TargetSolid,
    plan: SamplePlan,
    epsilon: float,
    seed: int,
) -> ScoreReport:
    """Score ``expr`` against the target on the ``(plan, seed)`` grid."""
    pts = sample_grid(plan, seed)
    got = evaluate_labels(expr, ps, pts, epsilon)
    want = target.labels_on(ps, pts, epsilon, plan=plan, seed=seed)
    return compare_labels(got, want, expr)


def grid_equivalent(
    expr: CsgExpr,
    ps: PrimitiveSet,
    target: TargetSolid,
    plan: SamplePlan,
    epsilon: float,
    seed: int,
) -> bool:
    """True when no non-Surface grid point disagrees."""
    return score_expression(expr, ps, target, plan, epsilon, seed).mismatched == 0


def score_against_cloud(
    expr: CsgExpr, ps: PrimitiveSet, cloud: np.ndarray, epsilon: float
) -> ScoreReport:
    """Fraction of cloud points lying on the expression's sampled boundary.

    A cloud point counts as matched when the expression's label there is
    Surface, i.e. the point sits within epsilon of whichever primitive
    boundary decides the expression locally.
    """
    got = evaluate_labels(expr, ps, cloud, epsilon)
    matched = int(np.count_nonzero(got == MembershipLabel.SURFACE))
    total = int(got.shape[0])
    m = size_metrics(expr)
    return ScoreReport(
        total=total,
        matched=matched,
        mismatched=total - matched,
        surface_excluded=0,
        match_fraction=(matched / total) if total else 1.0,
        inner_count=m.inner_count,
        leaf_count=m.leaf_count,
        height=m.height,
    )
