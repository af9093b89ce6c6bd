"""Target solids: the thing extraction pipelines must reproduce.

A target is backed either by an oracle expression (labels computed on demand
at any point set) or by a precomputed membership table bound to one specific
``(plan, seed)`` grid.  Tables additionally carry an ``active`` mask: inactive
points impose no obligation, which is how the decomposition pipeline restricts
the remainder without constructing new geometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import CsgExpr, evaluate_labels
from .geometry import PrimitiveSet, SamplePlan, sample_grid


@dataclass(frozen=True)
class TargetSolid:
    expr: CsgExpr | None = None
    table: np.ndarray | None = None
    plan: SamplePlan | None = None
    seed: int | None = None

    @classmethod
    def from_expr(cls, expr: CsgExpr) -> "TargetSolid":
        return cls(expr=expr)

    @classmethod
    def from_table(
        cls, labels: np.ndarray, plan: SamplePlan, seed: int
    ) -> "TargetSolid":
        labels = np.asarray(labels, dtype=np.int8)
        if labels.shape != (plan.point_count,):
            raise ValueError(
                f"table must cover the plan grid completely "
                f"({plan.point_count} points, got {labels.shape})"
            )
        return cls(table=labels, plan=plan, seed=seed)

    def labels_on(
        self,
        ps: PrimitiveSet,
        pts: np.ndarray,
        epsilon: float,
        plan: SamplePlan | None = None,
        seed: int | None = None,
    ) -> np.ndarray:
        """Membership labels at ``pts`` (int8).

        Table-backed targets only answer for their own grid, so callers must
        pass the ``(plan, seed)`` the points came from.
        """
        if self.expr is not None:
            return evaluate_labels(self.expr, ps, pts, epsilon)
        if plan != self.plan or seed != self.seed:
            raise ValueError(
                "table-backed target queried with a different grid than it was built on"
            )
        return self.table

    def labels_for_plan(
        self, ps: PrimitiveSet, plan: SamplePlan, epsilon: float, seed: int
    ) -> np.ndarray:
        if self.expr is not None:
            return evaluate_labels(self.expr, ps, sample_grid(plan, seed), epsilon)
        return self.labels_on(ps, None, epsilon, plan=plan, seed=seed)

    @property
    def has_oracle(self) -> bool:
        return self.expr is not None
