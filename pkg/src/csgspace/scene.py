"""Scene files, canned layouts, and point-cloud backends.

A scene bundles a dimension (2 = planar sampling, 3 = volumetric), axis-
aligned bounds, and a primitive set.  Scenes serialize to a JSON document;
parsers reject unknown shape kinds.  Layout generators produce deterministic
test scenes together with their ground-truth expressions; clouds are sampled
on the ground-truth surface by bisection between grid-adjacent sign changes
of the expression's scalar proxy field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .expr import CsgExpr, Leaf, diff, evaluate_field, union
from .geometry import (
    Box,
    Cylinder,
    Halfspace,
    MembershipLabel,
    Primitive,
    PrimitiveSet,
    SamplePlan,
    Sphere,
    default_epsilon,
    sample_grid,
    validate_plan_covers,
)
from .searchspace import tree_shapes


class SceneFormatError(ValueError):
    """Malformed scene document (unknown shape kind, bad field, ...)."""


@dataclass(frozen=True)
class Scene:
    dimension: int
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    primitives: PrimitiveSet

    def plan(self, resolution: int, jitter: float = 0.0, validate: bool = True) -> SamplePlan:
        plan = SamplePlan(self.lo, self.hi, resolution, jitter, dim=self.dimension)
        if validate:
            validate_plan_covers(plan, self.primitives, default_epsilon(plan))
        return plan


def _shape_to_dict(shape) -> dict:
    if isinstance(shape, Sphere):
        return {"kind": "sphere", "center": list(shape.center), "radius": shape.radius}
    if isinstance(shape, Box):
        return {"kind": "box", "min": list(shape.min_corner), "max": list(shape.max_corner)}
    if isinstance(shape, Cylinder):
        return {
            "kind": "cylinder",
            "base": list(shape.base),
            "axis": list(shape.axis),
            "radius": shape.radius,
            "height": shape.height,
        }
    if isinstance(shape, Halfspace):
        return {"kind": "halfspace", "point": list(shape.point), "normal": list(shape.normal)}
    raise SceneFormatError(f"unsupported shape type {type(shape).__name__}")


def _shape_from_dict(doc: dict):
    kind = doc.get("kind")
    try:
        if kind == "sphere":
            return Sphere(tuple(doc["center"]), float(doc["radius"]))
        if kind == "box":
            return Box(tuple(doc["min"]), tuple(doc["max"]))
        if kind == "cylinder":
            return Cylinder(
                tuple(doc["base"]), tuple(doc["axis"]), float(doc["radius"]), float(doc["height"])
            )
        if kind == "halfspace":
            return Halfspace(tuple(doc["point"]), tuple(doc["normal"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"bad {kind!r} shape: {exc}") from exc
    raise SceneFormatError(f"unknown shape kind {kind!r}")


def scene_to_dict(scene: Scene) -> dict:
    return {
        "dimension": scene.dimension,
        "bounds": {"min": list(scene.lo), "max": list(scene.hi)},
        "primitives": [
            {"id": p.id, **_shape_to_dict(p.shape)} for p in scene.primitives
        ],
    }


def scene_from_dict(doc: dict) -> Scene:
    try:
        dimension = int(doc["dimension"])
        lo = tuple(float(c) for c in doc["bounds"]["min"])
        hi = tuple(float(c) for c in doc["bounds"]["max"])
        prims = tuple(
            Primitive(entry["id"], _shape_from_dict(entry)) for entry in doc["primitives"]
        )
        return Scene(dimension, lo, hi, PrimitiveSet(prims))
    except SceneFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"malformed scene document: {exc}") from exc


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2, sort_keys=True) + "\n")


def load_scene(path) -> Scene:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"not valid JSON: {exc}") from exc
    return scene_from_dict(doc)


# --- point clouds -----------------------------------------------------------


def load_xyz(path) -> np.ndarray:
    """ASCII XYZ: one ``x y z`` per line; extra columns (normals) are ignored."""
    pts = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 3:
            raise SceneFormatError(f"line {lineno}: expected at least 3 columns")
        try:
            pts.append([float(fields[0]), float(fields[1]), float(fields[2])])
        except ValueError as exc:
            raise SceneFormatError(f"line {lineno}: {exc}") from exc
    if not pts:
        raise SceneFormatError("point cloud is empty")
    return np.asarray(pts, dtype=float)


def load_ply(path) -> np.ndarray:
    """ASCII PLY vertices; per-vertex extras (normals, colors) are ignored."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise SceneFormatError("not a PLY file")
    vertex_count = None
    props: list[str] = []
    in_vertex_element = False
    body_at = None
    for i, raw in enumerate(lines[1:], start=1):
        line = raw.strip()
        if line.startswith("format"):
            if "ascii" not in line:
                raise SceneFormatError("only ASCII PLY is supported")
        elif line.startswith("element"):
            parts = line.split()
            in_vertex_element = parts[1] == "vertex"
            if in_vertex_element:
                vertex_count = int(parts[2])
        elif line.startswith("property") and in_vertex_element:
            props.append(line.split()[-1])
        elif line == "end_header":
            body_at = i + 1
            break
    if vertex_count is None or body_at is None:
        raise SceneFormatError("PLY header missing vertex element")
    try:
        ix, iy, iz = props.index("x"), props.index("y"), props.index("z")
    except ValueError as exc:
        raise SceneFormatError("PLY vertex element lacks x/y/z properties") from exc
    pts = []
    for line in lines[body_at : body_at + vertex_count]:
        fields = line.split()
        pts.append([float(fields[ix]), float(fields[iy]), float(fields[iz])])
    if len(pts) != vertex_count:
        raise SceneFormatError("PLY body shorter than declared vertex count")
    return np.asarray(pts, dtype=float)


def load_cloud(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".ply":
        return load_ply(path)
    return load_xyz(path)


def save_xyz(points: np.ndarray, path) -> None:
    lines = ["%.10g %.10g %.10g" % (x, y, z) for x, y, z in np.asarray(points)]
    Path(path).write_text("\n".join(lines) + "\n")


def surface_cloud(expr: CsgExpr, ps: PrimitiveSet, plan: SamplePlan, epsilon: float) -> np.ndarray:
    """Boundary samples of an expression: bisection between grid-adjacent
    cells where the scalar proxy field changes sign."""
    pts = sample_grid(plan, 0)
    phi = evaluate_field(expr, ps, pts)
    res, dim = plan.resolution, plan.dim
    grid_pts = pts.reshape((res,) * dim + (3,))
    grid_phi = phi.reshape((res,) * dim)
    lo_list, hi_list = [], []
    for axis in range(dim):
        a = [slice(None)] * dim
        b = [slice(None)] * dim
        a[axis] = slice(0, res - 1)
        b[axis] = slice(1, res)
        pa, pb = grid_phi[tuple(a)], grid_phi[tuple(b)]
        crossing = (pa * pb) < 0
        lo_list.append(grid_pts[tuple(a)][crossing])
        hi_list.append(grid_pts[tuple(b)][crossing])
    if not any(len(x) for x in lo_list):
        return np.empty((0, 3))
    lo = np.vstack([x for x in lo_list if len(x)])
    hi = np.vstack([x for x in hi_list if len(x)])
    phi_lo = evaluate_field(expr, ps, lo)
    for _ in range(40):
        mid = (lo + hi) / 2.0
        phi_mid = evaluate_field(expr, ps, mid)
        take_lo = (phi_lo * phi_mid) > 0
        lo = np.where(take_lo[:, None], mid, lo)
        phi_lo = np.where(take_lo, phi_mid, phi_lo)
        hi = np.where(take_lo[:, None], hi, mid)
    return (lo + hi) / 2.0


def labels_from_cloud(cloud: np.ndarray, plan: SamplePlan) -> np.ndarray:
    """Membership table from boundary samples alone.

    Cells containing a cloud point form the Surface shell; enclosed cells are
    filled as Inside, the rest is Outside.  Requires the cloud to be dense
    enough to close the shell at the plan resolution.
    """
    lo = np.asarray(plan.lo)[: plan.dim]
    cell = plan.cell_size()
    rel = (np.asarray(cloud, dtype=float)[:, : plan.dim] - lo) / cell
    idx = np.floor(rel).astype(int)
    ok = ((idx >= 0) & (idx < plan.resolution)).all(axis=1)
    idx = idx[ok]
    occupied = np.zeros((plan.resolution,) * plan.dim, dtype=bool)
    occupied[tuple(idx.T)] = True
    filled = ndimage.binary_fill_holes(occupied)
    labels = np.full(occupied.shape, MembershipLabel.OUTSIDE, dtype=np.int8)
    labels[filled] = MembershipLabel.INSIDE
    labels[occupied] = MembershipLabel.SURFACE
    return labels.reshape(-1)


# --- layouts ----------------------------------------------------------------


def _disk(pid: str, x: float, y: float, r: float) -> Primitive:
    return Primitive(pid, Sphere((x, y, 0.0), r))


def _rect(pid: str, x0: float, y0: float, x1: float, y1: float) -> Primitive:
    return Primitive(pid, Box((x0, y0, -0.5), (x1, y1, 0.5)))


def layout_fig2() -> tuple[Scene, CsgExpr]:
    """Planar six-primitive scene with a rich cell structure.

    The solid is the plate ``B`` with bump ``A`` attached and hole ``F``
    removed; ``C``, ``D``, ``E`` are fitted but unused primitives.  The
    arrangement realizes exactly 15 non-empty fundamental products, and
    ``A`` / ``F`` (plus the stray island ``E``) are dominant.
    """
    prims = (
        _disk("A", 2.0, 5.0, 1.2),
        _rect("B", 1.0, 1.0, 7.0, 5.0),
        _disk("C", 4.3, 5.0, 1.3),
        _disk("D", 6.5, 4.0, 1.5),
        _rect("E", 7.6, 3.2, 9.0, 4.6),
        _disk("F", 3.0, 1.0, 0.9),
    )
    scene = Scene(2, (0.0, 0.0, -2.0), (10.0, 8.0, 2.0), PrimitiveSet(prims))
    truth = diff(union(Leaf("B"), Leaf("A")), Leaf("F"))
    return scene, truth


def layout_disjoint6() -> tuple[Scene, CsgExpr]:
    """Six unit spheres, pairwise far apart: the minimal product count |P|."""
    centers = [(2, 2, 6), (6, 2, 6), (10, 2, 6), (2, 6, 6), (6, 6, 6), (10, 6, 6)]
    ids = "ABCDEF"
    prims = tuple(
        Primitive(ids[i], Sphere(tuple(float(x) for x in c), 1.0))
        for i, c in enumerate(centers)
    )
    scene = Scene(3, (0.0, 0.0, 0.0), (12.0, 12.0, 12.0), PrimitiveSet(prims))
    truth: CsgExpr = Leaf("A")
    for pid in ids[1:]:
        truth = union(truth, Leaf(pid))
    return scene, truth


def layout_overlap3() -> tuple[Scene, CsgExpr]:
    """Three deeply overlapping spheres: all 2**3 - 1 products realized."""
    prims = (
        Primitive("A", Sphere((5.0, 5.0, 5.0), 2.0)),
        Primitive("B", Sphere((7.0, 5.0, 5.0), 2.0)),
        Primitive("C", Sphere((6.0, 6.7, 5.0), 2.0)),
    )
    scene = Scene(3, (0.0, 0.0, 0.0), (12.0, 12.0, 12.0), PrimitiveSet(prims))
    truth = diff(union(Leaf("A"), Leaf("B")), Leaf("C"))
    return scene, truth


def layout_chain(count: int = 5) -> tuple[Scene, CsgExpr]:
    """Concentric disks whose alternating annuli shed exactly one dominant
    primitive per decomposition iteration (the quadratic worst case)."""
    if not 2 <= count <= 5:
        raise ValueError("chain layout supports 2..5 primitives")
    ids = "ABCDE"[:count]
    prims = tuple(
        _disk(ids[i], 5.0, 4.0, 0.75 * (count - i)) for i in range(count)
    )
    scene = Scene(2, (0.0, 0.0, -4.5), (10.0, 8.0, 4.5), PrimitiveSet(prims))
    truth: CsgExpr = Leaf(ids[-1])
    for pid in reversed(ids[:-1]):
        truth = diff(Leaf(pid), truth)
    return scene, truth


def layout_ring() -> tuple[Scene, CsgExpr]:
    """Outer disk minus a strictly interior one; the hole is the only
    initially dominant primitive."""
    prims = (_disk("A", 5.0, 4.0, 1.0), _disk("B", 5.0, 4.0, 2.5))
    scene = Scene(2, (0.0, 0.0, -3.0), (10.0, 8.0, 3.0), PrimitiveSet(prims))
    return scene, diff(Leaf("B"), Leaf("A"))


def layout_random(count: int, seed: int) -> tuple[Scene, CsgExpr]:
    """Seeded scene of 2..6 mixed primitives with a random ground truth
    using every primitive exactly once."""
    if not 2 <= count <= 6:
        raise ValueError("random layout supports 2..6 primitives")
    rng = np.random.default_rng(seed)
    ids = "ABCDEF"[:count]
    prims = []
    for pid in ids:
        center = rng.uniform(3.0, 7.0, 3)
        kind = rng.integers(0, 3)
        if kind == 0:
            shape = Sphere(tuple(center), float(rng.uniform(0.9, 2.2)))
        elif kind == 1:
            half = rng.uniform(0.8, 1.8, 3)
            shape = Box(tuple(center - half), tuple(center + half))
        else:
            axis = np.zeros(3)
            axis[rng.integers(0, 3)] = 1.0
            height = float(rng.uniform(1.8, 3.6))
            shape = Cylinder(
                tuple(center - axis * height / 2.0),
                tuple(axis),
                float(rng.uniform(0.8, 1.6)),
                height,
            )
        prims.append(Primitive(pid, shape))
    scene = Scene(3, (0.0, 0.0, 0.0), (10.0, 10.0, 10.0), PrimitiveSet(tuple(prims)))
    n = count - 1
    shapes = tree_shapes(n)
    shape = shapes[int(rng.integers(0, len(shapes)))]
    ops = [("union", "inter", "diff")[int(rng.integers(0, 3))] for _ in range(n)]
    leaves = [ids[i] for i in rng.permutation(count)]
    from .searchspace import _instantiate

    truth = _instantiate(shape, tuple(ops), tuple(leaves))
    return scene, truth


LAYOUTS = ("fig2", "disjoint6", "overlap3", "chain", "ring", "random")


def make_layout(name: str, count: int | None = None, seed: int = 0) -> tuple[Scene, CsgExpr]:
    if name == "fig2":
        return layout_fig2()
    if name == "disjoint6":
        return layout_disjoint6()
    if name == "overlap3":
        return layout_overlap3()
    if name == "chain":
        return layout_chain(count if count is not None else 5)
    if name == "ring":
        return layout_ring()
    if name == "random":
        if count is None:
            raise ValueError("random layout needs a primitive count")
        return layout_random(count, seed)
    raise ValueError(f"unknown layout {name!r}; choose from {LAYOUTS}")
