"""Command-line surface: counting reports, scene generation, graph export,
expression extraction, and scoring.

Exit codes are a stable contract: 0 success, 1 extraction failure
(mixed products / unsatisfiable target), 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .decompose import DegeneratePrimitiveError, reconstruct_detailed
from .dnf import (
    MixedProductsError,
    TargetCoverageError,
    classify_products,
    enumerate_products,
    extract as dnf_extract,
)
from .expr import parse_expr, serialize, size_metrics
from .geometry import default_epsilon
from .graph import build_graph, connected_components, to_dot
from .scene import (
    LAYOUTS,
    SceneFormatError,
    labels_from_cloud,
    load_cloud,
    load_scene,
    make_layout,
    save_scene,
    save_xyz,
    surface_cloud,
)
from .scoring import score_against_cloud, score_expression
from .searchspace import count_trees_auto, count_trees_range, n_bounds
from .target import TargetSolid

# scoring never reuses the extraction grid; any fixed nonzero offset works
SCORE_SEED_OFFSET = 1


def _write_json(path: str | None, doc: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


@click.group()
@click.version_option(__version__)
def main():
    """Quantify the CSG-tree search space and extract expressions for a target solid."""


@main.command("count")
@click.option("--primitives", "-p", type=int, required=True, help="|P|, number of primitives.")
@click.option("--ops", "-o", type=int, default=3, show_default=True, help="|O|, number of operators.")
@click.option("--n", type=int, default=None, help="Exact inner-node count to report.")
@click.option("--n-min", type=int, default=None, help="Range start (with --n-max).")
@click.option("--n-max", type=int, default=None, help="Range end (with --n-min).")
@click.option("--auto", is_flag=True, help="Use the n_min/h_max heuristics for the range.")
@click.option("--json", "json_out", type=click.Path(), default=None, help="Also write a JSON report.")
def cmd_count(primitives, ops, n, n_min, n_max, auto, json_out):
    """Count candidate CSG trees for a primitive/operator alphabet."""
    if primitives < 1 or ops < 1:
        raise click.UsageError("--primitives and --ops must be >= 1")
    modes = sum([n is not None, auto, n_min is not None or n_max is not None])
    if modes != 1:
        raise click.UsageError("choose exactly one of --n, --auto, or --n-min/--n-max")
    if auto:
        report = count_trees_auto(primitives, ops)
        bounds = n_bounds(primitives)
        click.echo(f"n_min = {bounds.n_min}  (|P| - 1)")
        click.echo(f"h_max = {bounds.h_max:.4f}")
        click.echo(f"n_max = {bounds.n_max}  (2^ceil(h_max) - 1)")
    elif n is not None:
        report = count_trees_range(primitives, ops, n, n)
    else:
        if n_min is None or n_max is None or n_min > n_max:
            raise click.UsageError("--n-min and --n-max must both be given with n_min <= n_max")
        report = count_trees_range(primitives, ops, n_min, n_max)
    for k, v in report.per_n.items():
        click.echo(f"n = {k}: {v}")
    click.echo(f"total: {report.total}")
    _write_json(json_out, report.to_dict())


@main.command("gen-scene")
@click.option("--layout", type=click.Choice(LAYOUTS), default="random", show_default=True)
@click.option("--primitives", "-p", type=int, default=None, help="Primitive count (layouts that take one).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--resolution", type=int, default=None, help="Cloud sampling resolution (default 96 planar / 48 volumetric).")
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
def cmd_gen_scene(layout, primitives, seed, resolution, out):
    """Write scene.json, truth.txt, and cloud.xyz for a layout (deterministic per seed)."""
    try:
        scene, truth = make_layout(layout, count=primitives, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    save_scene(scene, outdir / "scene.json")
    (outdir / "truth.txt").write_text(serialize(truth) + "\n")
    if resolution is None:
        resolution = 96 if scene.dimension == 2 else 48
    plan = scene.plan(resolution)
    cloud = surface_cloud(truth, scene.primitives, plan, default_epsilon(plan))
    save_xyz(cloud, outdir / "cloud.xyz")
    click.echo(f"scene: {len(scene.primitives)} primitives, dimension {scene.dimension}")
    click.echo(f"truth: {serialize(truth)}")
    click.echo(f"cloud: {len(cloud)} surface points")


def _load_bundle(scene_path, truth_path, cloud_path, resolution, seed, epsilon):
    """Common extraction inputs: scene, plan, epsilon, and the target backend."""
    try:
        scene = load_scene(scene_path)
    except SceneFormatError as exc:
        raise click.UsageError(f"bad scene file: {exc}")
    plan = scene.plan(resolution)
    eps = epsilon if epsilon is not None else default_epsilon(plan)
    if truth_path:
        truth = parse_expr(Path(truth_path).read_text())
        return scene, plan, eps, TargetSolid.from_expr(truth), None
    if cloud_path:
        cloud = load_cloud(cloud_path)
        labels = labels_from_cloud(cloud, plan)
        return scene, plan, eps, TargetSolid.from_table(labels, plan, seed), cloud
    raise click.UsageError("extraction needs --truth or --cloud")


@main.command("graph")
@click.option("--scene", "scene_path", type=click.Path(exists=True), required=True)
@click.option("--resolution", type=int, default=64, show_default=True)
@click.option("--epsilon", type=float, default=None, help="Surface band (default 1e-4 x diagonal).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--dot", "dot_out", type=click.Path(), default=None, help="Write DOT to a file.")
@click.option("--json", "json_out", type=click.Path(), default=None, help="Write adjacency JSON.")
def cmd_graph(scene_path, resolution, epsilon, seed, dot_out, json_out):
    """Build the primitive intersection graph and list its components."""
    try:
        scene = load_scene(scene_path)
    except SceneFormatError as exc:
        raise click.UsageError(f"bad scene file: {exc}")
    plan = scene.plan(resolution)
    eps = epsilon if epsilon is not None else default_epsilon(plan)
    g = build_graph(scene.primitives, plan, eps, seed=seed)
    dot = to_dot(g)
    click.echo(dot, nl=False)
    for i, part in enumerate(connected_components(g)):
        click.echo(f"component {i}: {' '.join(part)}")
    if dot_out:
        Path(dot_out).write_text(dot)
    _write_json(json_out, g.to_dict())


@main.command("extract")
@click.option("--scene", "scene_path", type=click.Path(exists=True), required=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True), default=None, help="Ground-truth expression file.")
@click.option("--cloud", "cloud_path", type=click.Path(exists=True), default=None, help="Surface point cloud (XYZ or PLY).")
@click.option("--strategy", type=click.Choice(["dnf", "dnf-min", "decompose"]), default="decompose", show_default=True)
@click.option("--resolution", type=int, default=64, show_default=True)
@click.option("--epsilon", type=float, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tau", type=float, default=1.0, show_default=True, help="Inclusion threshold for product classification.")
@click.option("--allow-mixed", is_flag=True, help="Proceed on mixed products (majority vote).")
@click.option("--out", "expr_out", type=click.Path(), default=None, help="Write the expression to a file.")
@click.option("--report", "report_out", type=click.Path(), default=None, help="Write a JSON report.")
def cmd_extract(scene_path, truth_path, cloud_path, strategy, resolution, epsilon, seed,
                tau, allow_mixed, expr_out, report_out):
    """Extract a CSG expression for the target and score it."""
    scene, plan, eps, target, cloud = _load_bundle(
        scene_path, truth_path, cloud_path, resolution, seed, epsilon
    )
    ps = scene.primitives
    trace = None
    try:
        if strategy == "decompose":
            result = reconstruct_detailed(
                ps, target, plan, eps, seed=seed, allow_mixed=allow_mixed, tau=tau
            )
            expr = result.expr
            trace = result.trace
        else:
            expr = dnf_extract(
                ps, target, plan, eps, seed=seed,
                minimize=(strategy == "dnf-min"), allow_mixed=allow_mixed, tau=tau,
            )
    except (MixedProductsError, TargetCoverageError, DegeneratePrimitiveError) as exc:
        click.echo(f"extraction failed: {exc}", err=True)
        sys.exit(1)
    text = serialize(expr)
    click.echo(text)
    if target.has_oracle:
        score = score_expression(expr, ps, target, plan, eps, seed + SCORE_SEED_OFFSET)
    else:
        score = score_against_cloud(expr, ps, cloud, eps)
    click.echo(
        f"match fraction: {score.match_fraction:.6f} "
        f"({score.matched}/{score.matched + score.mismatched} decided, "
        f"{score.surface_excluded} surface-excluded)"
    )
    m = size_metrics(expr)
    click.echo(f"size: {m.inner_count} inner, {m.leaf_count} leaves, height {m.height}")
    if expr_out:
        Path(expr_out).write_text(text + "\n")
    doc = {
        "strategy": strategy,
        "representation": "two-level" if strategy in ("dnf", "dnf-min") else "decomposition",
        "expression": text,
        "score": score.to_dict(),
    }
    if trace is not None:
        doc["trace"] = trace
    _write_json(report_out, doc)


@main.command("score")
@click.option("--scene", "scene_path", type=click.Path(exists=True), required=True)
@click.option("--expr", "expr_path", type=click.Path(exists=True), required=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True), default=None)
@click.option("--cloud", "cloud_path", type=click.Path(exists=True), default=None)
@click.option("--resolution", type=int, default=64, show_default=True)
@click.option("--epsilon", type=float, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--report", "report_out", type=click.Path(), default=None)
def cmd_score(scene_path, expr_path, truth_path, cloud_path, resolution, epsilon, seed, report_out):
    """Score an existing expression file against a truth expression or a cloud."""
    scene, plan, eps, target, cloud = _load_bundle(
        scene_path, truth_path, cloud_path, resolution, seed, epsilon
    )
    expr = parse_expr(Path(expr_path).read_text())
    if target.has_oracle:
        score = score_expression(expr, scene.primitives, target, plan, eps, seed + SCORE_SEED_OFFSET)
    else:
        score = score_against_cloud(expr, scene.primitives, cloud, eps)
    click.echo(f"match fraction: {score.match_fraction:.6f}")
    click.echo(
        f"matched {score.matched} / mismatched {score.mismatched} "
        f"/ surface-excluded {score.surface_excluded} of {score.total}"
    )
    _write_json(report_out, score.to_dict())


if __name__ == "__main__":
    main()
