"""csgspace: CSG-tree search-space counting and expression extraction.

The library quantifies how many candidate CSG trees exist for a primitive
set (exact Catalan-based counts plus inner-node bound heuristics) and
extracts expressions for a target solid by two complementary routes:
two-level fundamental-product construction with prime-implicant
minimization, and recursive dominant-halfspace decomposition with
connected-component splitting.
"""

from .decompose import (
    Decomposition,
    DegeneratePrimitiveError,
    DominanceKind,
    DominanceVerdict,
    decompose,
    find_dominant,
    reconstruct,
    reconstruct_detailed,
)
from .dnf import (
    FundamentalProduct,
    Implicant,
    MinimizationResult,
    MixedProductsError,
    ProductStatus,
    ProductTable,
    TargetCoverageError,
    build_dnf,
    classify_products,
    enumerate_products,
    extract,
    implicants_to_expr,
    minimize_products,
    prime_implicants,
)
from .expr import (
    EMPTY,
    CsgExpr,
    Empty,
    ExprParseError,
    Leaf,
    Node,
    UnknownPrimitiveError,
    compl,
    diff,
    evaluate,
    evaluate_field,
    evaluate_labels,
    expr_from_dict,
    expr_to_dict,
    inter,
    leaf_ids,
    parse_expr,
    serialize,
    size_metrics,
    union,
)
from .geometry import (
    Box,
    Cylinder,
    Halfspace,
    MembershipLabel,
    Primitive,
    PrimitiveSet,
    SamplePlan,
    Sphere,
    classify,
    classify_points,
    default_epsilon,
    sample_grid,
    signed_value,
    validate_plan_covers,
)
from .graph import (
    IntersectionGraph,
    build_graph,
    connected_components,
    nf_bounds,
    to_dot,
)
from .scene import (
    LAYOUTS,
    Scene,
    SceneFormatError,
    labels_from_cloud,
    load_cloud,
    load_scene,
    make_layout,
    save_scene,
    save_xyz,
    surface_cloud,
)
from .scoring import ScoreReport, grid_equivalent, score_against_cloud, score_expression
from .searchspace import (
    EnumerationCapExceeded,
    NBounds,
    SearchOutcome,
    SearchSpaceReport,
    catalan,
    count_trees,
    count_trees_auto,
    count_trees_range,
    enumerate_trees,
    exhaustive_search,
    n_bounds,
    tree_shapes,
)
from .target import TargetSolid

__version__ = "0.1.0"
