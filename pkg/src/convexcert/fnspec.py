"""Parser for the function-spec mini-language used on the command line.

    SPEC := NAME | NAME '(' REAL {',' REAL} ')'
          | 'scale' '(' REAL ',' SPEC ')'
          | 'sum' '(' SPEC ',' SPEC ')'
          | 'compose' '(' SPEC1D ',' SPEC ')'

Whitespace is ignored. The dimension comes from ``--dim`` or, when that is
absent, from the spec itself (``diagq(1,5)`` is 2-D, ``square`` is 1-D).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional, Union

from . import funcs
from .errors import RangeError, SpecError
from .funcs import FunctionHandle

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<punct>[(),]))"
)


@dataclass(frozen=True)
class Leaf:
    name: str
    args: tuple[float, ...]
    pos: int


@dataclass(frozen=True)
class Scale:
    a: float
    child: "Node"
    pos: int
    a_pos: int


@dataclass(frozen=True)
class Sum:
    left: "Node"
    right: "Node"
    pos: int


@dataclass(frozen=True)
class Compose:
    outer: "Node"
    inner: "Node"
    pos: int


Node = Union[Leaf, Scale, Sum, Compose]


@dataclass(frozen=True)
class _Entry:
    canonical: str
    fixed_dim: Optional[int]
    arity: Callable[[int, Optional[int]], bool]  # (n_args, dim) -> ok
    arity_text: str
    build: Callable[[int, tuple], FunctionHandle]


def _build_affine(dim, args):
    if not args:
        return funcs.affine([1.0] * dim, 0.0)
    return funcs.affine(args[:-1], args[-1])


CATALOG: dict[str, _Entry] = {
    "square": _Entry("square", 1, lambda n, d: n == 0, "no arguments",
                     lambda dim, a: funcs.square()),
    "sqpos": _Entry("sqpos", 1, lambda n, d: n == 0, "no arguments",
                    lambda dim, a: funcs.square_pos()),
    "quartic": _Entry("quartic", 1, lambda n, d: n == 0, "no arguments",
                      lambda dim, a: funcs.quartic1d()),
    "norm": _Entry("norm", None, lambda n, d: n == 0, "no arguments",
                   lambda dim, a: funcs.eu_norm_fn(dim)),
    "norm2": _Entry("norm2", None, lambda n, d: n == 0, "no arguments",
                    lambda dim, a: funcs.norm_sq_fn(dim)),
    "neg_norm2": _Entry("neg_norm2", None, lambda n, d: n == 0, "no arguments",
                        lambda dim, a: funcs.neg_norm_sq(dim)),
    "const": _Entry("const", None, lambda n, d: n <= 1, "zero or one argument (the constant)",
                    lambda dim, a: funcs.const_c(dim, *a)),
    "affine": _Entry("affine", None, lambda n, d: n == 0 or d is None or n == d + 1,
                     "none, or dim+1 arguments (g1, ..., gn, b)", _build_affine),
    "diagq": _Entry("diagq", None, lambda n, d: n == 0 or d is None or n == d,
                    "none, or one nonnegative weight per coordinate",
                    lambda dim, a: funcs.diag_quadratic(a or [1.0] * dim)),
}

ALIASES = {
    "square_pos": "sqpos",
    "quartic1d": "quartic",
    "eu_norm": "norm",
    "eu_norm_fn": "norm",
    "norm_sq": "norm2",
    "norm_sq_fn": "norm2",
    "neg_norm_sq": "neg_norm2",
    "const_c": "const",
    "diag_quadratic": "diagq",
}

COMBINATORS = ("scale", "sum", "compose")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if m is None or m.end() == pos:
                bad = pos + (len(stripped[pos:]) - len(stripped[pos:].lstrip()))
                raise SpecError(f"unexpected character {stripped[bad]!r}", text, bad)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def error(self, msg, pos=None):
        if pos is None:
            pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        return SpecError(msg, self.text, pos)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self, kind, value=None, what=None):
        k, v, p = self.peek()
        if k != kind or (value is not None and v != value):
            raise self.error(f"expected {what or value or kind}, found {v!r}" if v else
                             f"expected {what or value or kind}, found end of input")
        self.i += 1
        return v, p

    def number(self):
        v, p = self.take("num", what="a number")
        return float(v), p

    def spec(self) -> Node:
        name, pos = self.take("name", what="a function name")
        key = name.lower()
        if key == "scale":
            self.take("punct", "(")
            a, a_pos = self.number()
            if a < 0:
                raise self.error(
                    f"negative scale factor {a!r}: scaling preserves convexity only for a >= 0",
                    a_pos,
                )
            self.take("punct", ",")
            child = self.spec()
            self.take("punct", ")")
            return Scale(a, child, pos, a_pos)
        if key in ("sum", "compose"):
            self.take("punct", "(")
            left = self.spec()
            self.take("punct", ",")
            right = self.spec()
            self.take("punct", ")")
            return Sum(left, right, pos) if key == "sum" else Compose(left, right, pos)
        key = ALIASES.get(key, key)
        if key not in CATALOG:
            known = ", ".join(sorted(CATALOG) + list(COMBINATORS))
            raise self.error(f"unknown function {name!r} (known: {known})", pos)
        args = []
        if self.peek()[1] == "(":
            self.i += 1
            if self.peek()[1] != ")":
                args.append(self.number()[0])
                while self.peek()[1] == ",":
                    self.i += 1
                    args.append(self.number()[0])
            self.take("punct", ")")
        return Leaf(key, tuple(args), pos)

    def parse(self) -> Node:
        if not self.tokens:
            raise SpecError("empty function spec", self.text, 0)
        node = self.spec()
        if self.i != len(self.tokens):
            raise self.error(f"unexpected trailing input {self.peek()[1]!r}")
        return node


def parse_tree(text: str) -> Node:
    return _Parser(text).parse()


def compose_nodes(node: Node) -> list[Compose]:
    """Every ``compose`` node in the tree, outermost first."""
    if isinstance(node, Leaf):
        return []
    if isinstance(node, Scale):
        return compose_nodes(node.child)
    if isinstance(node, Sum):
        return compose_nodes(node.left) + compose_nodes(node.right)
    return [node] + compose_nodes(node.outer) + compose_nodes(node.inner)


def _leaf_dim(leaf: Leaf) -> Optional[int]:
    entry = CATALOG[leaf.name]
    if entry.fixed_dim is not None:
        return entry.fixed_dim
    if leaf.args and leaf.name == "diagq":
        return len(leaf.args)
    if leaf.args and leaf.name == "affine":
        return len(leaf.args) - 1 if len(leaf.args) > 1 else None
    return None


def infer_dim(node: Node, text: str = "") -> Optional[int]:
    """The dimension forced by the spec, or None when any dimension works."""
    if isinstance(node, Leaf):
        return _leaf_dim(node)
    if isinstance(node, Scale):
        return infer_dim(node.child, text)
    if isinstance(node, Compose):
        outer = infer_dim(node.outer, text)
        if outer not in (None, 1):
            raise SpecError(f"compose needs a 1-D outer function, got dimension {outer}",
                            text, node.outer.pos)
        return infer_dim(node.inner, text)
    left, right = infer_dim(node.left, text), infer_dim(node.right, text)
    if left is not None and right is not None and left != right:
        raise SpecError(f"dim conflict in sum: {left} vs {right}", text, node.pos)
    return left if left is not None else right


def build_node(node: Node, dim: int, text: str) -> FunctionHandle:
    if isinstance(node, Leaf):
        entry = CATALOG[node.name]
        forced = _leaf_dim(node)
        if forced is not None and forced != dim:
            raise SpecError(f"dim conflict: {node.name} has dimension {forced}, requested {dim}",
                            text, node.pos)
        if not entry.arity(len(node.args), dim):
            raise SpecError(f"arity mismatch: {node.name} takes {entry.arity_text}, "
                            f"got {len(node.args)}", text, node.pos)
        try:
            return entry.build(dim, node.args)
        except (RangeError, ValueError) as exc:
            raise SpecError(str(exc), text, node.pos) from None
    if isinstance(node, Scale):
        return funcs.scale(node.a, build_node(node.child, dim, text))
    if isinstance(node, Sum):
        return funcs.fn_sum(build_node(node.left, dim, text), build_node(node.right, dim, text))
    return funcs.compose_mono(build_node(node.outer, 1, text), build_node(node.inner, dim, text))


def parse_fn_spec(text: str, dim: Optional[int] = None) -> FunctionHandle:
    """Build a :class:`FunctionHandle` from a spec string.

    >>> parse_fn_spec("scale(2, sum(norm2, diagq(1,5)))").claims_L_smooth
    24.0
    """
    if not text or not text.strip():
        raise SpecError("empty function spec", text or "", 0)
    tree = parse_tree(text)
    inferred = infer_dim(tree, text)
    if dim is None:
        if inferred is None:
            raise SpecError("cannot infer the dimension of this spec; pass --dim", text, 0)
        dim = inferred
    elif dim < 1:
        raise SpecError(f"dimension must be positive, got {dim}", text, 0)
    return build_node(tree, dim, text)
