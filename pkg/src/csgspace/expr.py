"""CSG expression trees: construction, evaluation, metrics, serialization.

Trees are immutable.  Inner nodes carry one of four regularized set
operations; leaves name primitives from an accompanying
:class:`~csgspace.geometry.PrimitiveSet`.  :class:`Empty` is an explicit
empty-solid marker used by the extraction pipelines so that "no material"
never silently degenerates into a malformed union.

Evaluation is three-valued.  On the int8 label encoding (Inside = -1,
Surface = 0, Outside = +1) the operators reduce to::

    union        -> elementwise min
    intersection -> elementwise max
    complement   -> negation
    difference   -> max(a, -b)

which makes Surface propagate exactly when the other operand does not decide
the result on its own.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .geometry import MembershipLabel, PrimitiveSet, classify_points

OP_UNION = "union"
OP_INTER = "inter"
OP_DIFF = "diff"
OP_COMPL = "compl"

BINARY_OPS = (OP_UNION, OP_INTER, OP_DIFF)
ALL_OPS = BINARY_OPS + (OP_COMPL,)

_ARITY = {OP_UNION: 2, OP_INTER: 2, OP_DIFF: 2, OP_COMPL: 1}


@dataclass(frozen=True)
class Leaf:
    primitive_id: str


@dataclass(frozen=True)
class Node:
    op: str
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.op not in _ARITY:
            raise ValueError(f"unknown operator {self.op!r}")
        if len(self.children) != _ARITY[self.op]:
            raise ValueError(
                f"operator {self.op!r} takes {_ARITY[self.op]} children, "
                f"got {len(self.children)}"
            )


@dataclass(frozen=True)
class Empty:
    """Explicit empty-solid marker (Outside everywhere)."""


CsgExpr = Leaf | Node | Empty

EMPTY = Empty()


def union(a: CsgExpr, b: CsgExpr) -> Node:
    return Node(OP_UNION, (a, b))


def inter(a: CsgExpr, b: CsgExpr) -> Node:
    return Node(OP_INTER, (a, b))


def diff(a: CsgExpr, b: CsgExpr) -> Node:
    return Node(OP_DIFF, (a, b))


def compl(a: CsgExpr) -> Node:
    return Node(OP_COMPL, (a,))


class UnknownPrimitiveError(KeyError):
    """A leaf id does not resolve in the primitive set."""


def evaluate_labels(
    expr: CsgExpr, ps: PrimitiveSet, pts: np.ndarray, epsilon: float
) -> np.ndarray:
    """Three-valued labels of ``expr`` at every point (int8 array)."""
    cache: dict[str, np.ndarray] = {}
    n = np.atleast_2d(np.asarray(pts, dtype=float)).shape[0]

    def leaf_labels(pid: str) -> np.ndarray:
        if pid not in cache:
            try:
                prim = ps.get(pid)
            except KeyError as exc:
                raise UnknownPrimitiveError(pid) from exc
            cache[pid] = classify_points(prim, pts, epsilon)
        return cache[pid]

    def walk(e: CsgExpr) -> np.ndarray:
        if isinstance(e, Leaf):
            return leaf_labels(e.primitive_id)
        if isinstance(e, Empty):
            return np.ones(n, dtype=np.int8)
        a = walk(e.children[0])
        if e.op == OP_COMPL:
            return -a
        b = walk(e.children[1])
        if e.op == OP_UNION:
            return np.minimum(a, b)
        if e.op == OP_INTER:
            return np.maximum(a, b)
        return np.maximum(a, -b)  # difference

    return walk(expr)


def evaluate(expr: CsgExpr, ps: PrimitiveSet, x, epsilon: float) -> MembershipLabel:
    """Membership label of a single point under ``expr``."""
    return MembershipLabel(int(evaluate_labels(expr, ps, np.asarray(x, dtype=float), epsilon)[0]))


def evaluate_field(expr: CsgExpr, ps: PrimitiveSet, pts: np.ndarray) -> np.ndarray:
    """Scalar min/max proxy field for ``expr`` (sign-correct, not a true distance).

    Used to locate boundary points by bisection; Empty has no boundary and is
    rejected.
    """
    if isinstance(expr, Empty):
        raise ValueError("empty solid has no scalar field")

    def walk(e: CsgExpr) -> np.ndarray:
        if isinstance(e, Leaf):
            try:
                prim = ps.get(e.primitive_id)
            except KeyError as exc:
                raise UnknownPrimitiveError(e.primitive_id) from exc
            return prim.signed_values(pts)
        a = walk(e.children[0])
        if e.op == OP_COMPL:
            return -a
        b = walk(e.children[1])
        if e.op == OP_UNION:
            return np.minimum(a, b)
        if e.op == OP_INTER:
            return np.maximum(a, b)
        return np.maximum(a, -b)

    return walk(expr)


SizeMetrics = namedtuple("SizeMetrics", ["inner_count", "leaf_count", "height"])


def size_metrics(expr: CsgExpr) -> SizeMetrics:
    """(inner nodes, leaves, height); a lone leaf has height 0, Empty is (0, 0, 0)."""
    if isinstance(expr, Empty):
        return SizeMetrics(0, 0, 0)
    if isinstance(expr, Leaf):
        return SizeMetrics(0, 1, 0)
    parts = [size_metrics(c) for c in expr.children]
    return SizeMetrics(
        1 + sum(p.inner_count for p in parts),
        sum(p.leaf_count for p in parts),
        1 + max(p.height for p in parts),
    )


def leaf_ids(expr: CsgExpr) -> list[str]:
    """Leaf ids in left-to-right order, with repeats."""
    if isinstance(expr, Empty):
        return []
    if isinstance(expr, Leaf):
        return [expr.primitive_id]
    out: list[str] = []
    for c in expr.children:
        out.extend(leaf_ids(c))
    return out


def serialize(expr: CsgExpr) -> str:
    """Prefix s-expression form, e.g. ``(union A (diff B C))``."""
    if isinstance(expr, Empty):
        return "(empty)"
    if isinstance(expr, Leaf):
        return expr.primitive_id
    inner = " ".join(serialize(c) for c in expr.children)
    return f"({expr.op} {inner})"


class ExprParseError(ValueError):
    """Syntax error with the character position of the first offending token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append((ch, i))
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append((text[i:j], i))
            i = j
    return tokens


def parse_expr(text: str) -> CsgExpr:
    """Parse the serialized prefix form back into a tree.

    ``parse_expr(serialize(e))`` is structurally equal to ``e``.
    """
    tokens = _tokenize(text)
    pos = 0

    def parse_one() -> CsgExpr:
        nonlocal pos
        if pos >= len(tokens):
            raise ExprParseError("unexpected end of input", len(text))
        tok, at = tokens[pos]
        if tok == ")":
            raise ExprParseError("unexpected ')'", at)
        if tok != "(":
            pos += 1
            return Leaf(tok)
        pos += 1
        if pos >= len(tokens):
            raise ExprParseError("unexpected end of input after '('", len(text))
        op, op_at = tokens[pos]
        pos += 1
        if op == "empty":
            if pos >= len(tokens) or tokens[pos][0] != ")":
                raise ExprParseError("'(empty' must close immediately", op_at)
            pos += 1
            return EMPTY
        if op not in _ARITY:
            raise ExprParseError(f"unknown operator {op!r}", op_at)
        children = []
        for _ in range(_ARITY[op]):
            children.append(parse_one())
        if pos >= len(tokens) or tokens[pos][0] != ")":
            at = tokens[pos][1] if pos < len(tokens) else len(text)
            raise ExprParseError(f"expected ')' closing {op!r}", at)
        pos += 1
        return Node(op, tuple(children))

    result = parse_one()
    if pos != len(tokens):
        raise ExprParseError("trailing input after expression", tokens[pos][1])
    if isinstance(result, Leaf) and not _leaf_id_ok(result.primitive_id):
        raise ExprParseError(f"invalid primitive id {result.primitive_id!r}", 0)
    return result


def _leaf_id_ok(pid: str) -> bool:
    from .geometry import _ID_RE, _RESERVED_IDS

    return bool(_ID_RE.match(pid)) and pid not in _RESERVED_IDS


def expr_to_dict(expr: CsgExpr) -> dict:
    """Structured-document form of a tree (for machine consumption)."""
    if isinstance(expr, Empty):
        return {"empty": True}
    if isinstance(expr, Leaf):
        return {"leaf": expr.primitive_id}
    return {"op": expr.op, "children": [expr_to_dict(c) for c in expr.children]}


def expr_from_dict(doc: dict) -> CsgExpr:
    if doc.get("empty"):
        return EMPTY
    if "leaf" in doc:
        return Leaf(doc["leaf"])
    return Node(doc["op"], tuple(expr_from_dict(c) for c in doc["children"]))
