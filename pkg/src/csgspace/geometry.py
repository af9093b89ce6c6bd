"""Implicit solid primitives, point membership, and deterministic sample grids.

Every primitive exposes an exact signed valuation: negative strictly inside,
positive strictly outside, zero on the boundary.  Membership queries discretize
that value with an epsilon band (``|value| <= epsilon`` -> Surface), and all
downstream emptiness / dominance / equivalence machinery works on labels
sampled over a jittered grid produced by :func:`sample_grid`.

Labels use a fixed integer encoding (Inside = -1, Surface = 0, Outside = +1)
so that Boolean combinations reduce to elementwise ``min`` / ``max`` / negation
on int8 arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

Point = tuple[float, float, float]

_UNIT_TOL = 1e-9
_ID_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_RESERVED_IDS = frozenset({"union", "inter", "diff", "compl", "empty"})


class MembershipLabel(IntEnum):
    """Three-valued point membership; values match the vectorized int8 encoding."""

    INSIDE = -1
    SURFACE = 0
    OUTSIDE = 1


def _as_point(value) -> Point:
    p = tuple(float(c) for c in value)
    if len(p) != 3 or not all(math.isfinite(c) for c in p):
        raise ValueError(f"expected a finite 3d point, got {value!r}")
    return p


def _as_unit(value) -> Point:
    v = _as_point(value)
    norm = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ValueError(f"vector {value!r} is not unit length (|v| = {norm!r})")
    return v


@dataclass(frozen=True)
class Sphere:
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        if not self.radius > 0:
            raise ValueError("sphere radius must be > 0")

    def signed_values(self, pts: np.ndarray) -> np.ndarray:
        return np.linalg.norm(pts - np.asarray(self.center), axis=1) - self.radius

    def bounding_box(self) -> tuple[Point, Point]:
        c, r = np.asarray(self.center), self.radius
        return tuple(c - r), tuple(c + r)


@dataclass(frozen=True)
class Box:
    min_corner: Point
    max_corner: Point

    def __post_init__(self):
        object.__setattr__(self, "min_corner", _as_point(self.min_corner))
        object.__setattr__(self, "max_corner", _as_point(self.max_corner))
        if not all(a < b for a, b in zip(self.min_corner, self.max_corner)):
            raise ValueError("box min corner must be strictly below max corner")

    def signed_values(self, pts: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.min_corner)
        hi = np.asarray(self.max_corner)
        center = (lo + hi) / 2.0
        half = (hi - lo) / 2.0
        q = np.abs(pts - center) - half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = np.minimum(q.max(axis=1), 0.0)
        return outside + inside

    def bounding_box(self) -> tuple[Point, Point]:
        return self.min_corner, self.max_corner


@dataclass(frozen=True)
class Cylinder:
    """Capped cylinder from ``base`` extending ``height`` along the unit ``axis``."""

    base: Point
    axis: Point
    radius: float
    height: float

    def __post_init__(self):
        object.__setattr__(self, "base", _as_point(self.base))
        object.__setattr__(self, "axis", _as_unit(self.axis))
        if not self.radius > 0:
            raise ValueError("cylinder radius must be > 0")
        if not self.height > 0:
            raise ValueError("cylinder height must be > 0")

    def signed_values(self, pts: np.ndarray) -> np.ndarray:
        a = np.asarray(self.axis)
        rel = pts - np.asarray(self.base)
        y = rel @ a
        radial = np.linalg.norm(rel - y[:, None] * a, axis=1)
        dx = radial - self.radius
        dy = np.abs(y - self.height / 2.0) - self.height / 2.0
        outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
        inside = np.minimum(np.maximum(dx, dy), 0.0)
        return outside + inside

    def bounding_box(self) -> tuple[Point, Point]:
        a = np.asarray(self.axis)
        b = np.asarray(self.base)
        top = b + self.height * a
        # radial reach per coordinate axis shrinks with the axis component
        reach = self.radius * np.sqrt(np.maximum(1.0 - a * a, 0.0))
        lo = np.minimum(b, top) - reach
        hi = np.maximum(b, top) + reach
        return tuple(lo), tuple(hi)


@dataclass(frozen=True)
class Halfspace:
    """Points on the side opposite ``normal`` (outward) are inside."""

    point: Point
    normal: Point

    def __post_init__(self):
        object.__setattr__(self, "point", _as_point(self.point))
        object.__setattr__(self, "normal", _as_unit(self.normal))

    def signed_values(self, pts: np.ndarray) -> np.ndarray:
        return (pts - np.asarray(self.point)) @ np.asarray(self.normal)

    def bounding_box(self) -> None:
        return None  # unbounded


Shape = Sphere | Box | Cylinder | Halfspace


@dataclass(frozen=True)
class Primitive:
    id: str
    shape: Shape

    def __post_init__(self):
        if not _ID_RE.match(self.id) or self.id in _RESERVED_IDS:
            raise ValueError(f"invalid primitive id {self.id!r}")

    def signed_values(self, pts: np.ndarray) -> np.ndarray:
        return self.shape.signed_values(np.atleast_2d(np.asarray(pts, dtype=float)))

    def bounding_box(self):
        return self.shape.bounding_box()


@dataclass(frozen=True)
class PrimitiveSet:
    """Ordered primitives; the ordering fixes bit positions for product signatures."""

    primitives: tuple[Primitive, ...]

    def __post_init__(self):
        prims = tuple(self.primitives)
        object.__setattr__(self, "primitives", prims)
        if not prims:
            raise ValueError("primitive set must be nonempty")
        ids = [p.id for p in prims]
        if len(set(ids)) != len(ids):
            raise ValueError("primitive ids must be unique")

    def __len__(self) -> int:
        return len(self.primitives)

    def __iter__(self):
        return iter(self.primitives)

    def __getitem__(self, i: int) -> Primitive:
        return self.primitives[i]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.primitives)

    def index_of(self, primitive_id: str) -> int:
        for i, p in enumerate(self.primitives):
            if p.id == primitive_id:
                return i
        raise KeyError(f"unknown primitive id {primitive_id!r}")

    def get(self, primitive_id: str) -> Primitive:
        return self.primitives[self.index_of(primitive_id)]


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic jittered lattice over an axis-aligned region.

    ``dim`` selects how many axes are sampled: 3 for volumetric scenes, 2 for
    planar scenes (the z coordinate is then pinned to the middle of the z
    bounds).  ``jitter`` is the per-axis offset bound as a fraction of the cell
    size, so every sample stays within its own cell.
    """

    lo: Point
    hi: Point
    resolution: int
    jitter: float = 0.0
    dim: int = 3

    def __post_init__(self):
        object.__setattr__(self, "lo", _as_point(self.lo))
        object.__setattr__(self, "hi", _as_point(self.hi))
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("plan bounds must satisfy lo < hi componentwise")
        if self.resolution < 2:
            raise ValueError("plan resolution must be >= 2")
        if not 0.0 <= self.jitter <= 0.5:
            raise ValueError("jitter must lie in [0, 0.5]")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(np.asarray(self.hi) - np.asarray(self.lo)))

    @property
    def point_count(self) -> int:
        return self.resolution**self.dim

    def cell_size(self) -> np.ndarray:
        lo = np.asarray(self.lo)[: self.dim]
        hi = np.asarray(self.hi)[: self.dim]
        return (hi - lo) / self.resolution


def default_epsilon(plan: SamplePlan) -> float:
    """Surface band half-width: 1e-4 of the bounds diagonal."""
    return 1e-4 * plan.diagonal


def sample_grid(plan: SamplePlan, seed: int) -> np.ndarray:
    """Return ``resolution**dim`` sample points, jittered within their cells.

    Output is an ``(N, 3)`` float array, bit-identical for identical
    ``(plan, seed)`` inputs.
    """
    lo = np.asarray(plan.lo)
    hi = np.asarray(plan.hi)
    cell = plan.cell_size()
    axes = [
        lo[a] + (np.arange(plan.resolution) + 0.5) * cell[a] for a in range(plan.dim)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
    if plan.jitter > 0.0:
        rng = np.random.default_rng(seed)
        pts = pts + rng.uniform(-plan.jitter, plan.jitter, pts.shape) * cell
    if plan.dim == 2:
        z = np.full((pts.shape[0], 1), (lo[2] + hi[2]) / 2.0)
        pts = np.hstack([pts, z])
    return pts


def signed_value(primitive: Primitive, x) -> float:
    """Exact signed valuation of ``x`` against one primitive (total function)."""
    return float(primitive.signed_values(np.asarray(x, dtype=float))[0])


def classify_points(primitive: Primitive, pts: np.ndarray, epsilon: float) -> np.ndarray:
    """Vectorized membership labels (int8: -1 inside, 0 surface, +1 outside)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    v = primitive.signed_values(pts)
    out = np.zeros(v.shape, dtype=np.int8)
    out[v < -epsilon] = MembershipLabel.INSIDE
    out[v > epsilon] = MembershipLabel.OUTSIDE
    return out


def classify(primitive: Primitive, x, epsilon: float) -> MembershipLabel:
    return MembershipLabel(int(classify_points(primitive, np.asarray(x, dtype=float), epsilon)[0]))


def label_matrix(ps: PrimitiveSet, pts: np.ndarray, epsilon: float) -> np.ndarray:
    """Stack per-primitive labels into a ``(|P|, N)`` int8 matrix."""
    return np.stack([classify_points(p, pts, epsilon) for p in ps])


def validate_plan_covers(plan: SamplePlan, ps: PrimitiveSet, epsilon: float) -> None:
    """Check that plan bounds strictly contain every bounded primitive's box
    inflated by epsilon (sampled axes only; halfspaces are exempt)."""
    lo = np.asarray(plan.lo)
    hi = np.asarray(plan.hi)
    for p in ps:
        bb = p.bounding_box()
        if bb is None:
            continue
        blo = np.asarray(bb[0]) - epsilon
        bhi = np.asarray(bb[1]) + epsilon
        for a in range(plan.dim):
            if not (lo[a] < blo[a] and bhi[a] < hi[a]):
                raise ValueError(
                    f"primitive {p.id!r} (inflated by epsilon) exceeds plan bounds on axis {a}"
                )
