"""
Noncommutative continuous functions as expression DAGs.

Nodes are immutable and compared by identity, so a subexpression reused in
several places is evaluated once. Python operators build nodes:
``x * y`` is a product, ``2 * x`` a scalar multiple, ``x.H`` the adjoint.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Union

from numpy.polynomial import chebyshev

from errors import ArityError, SchemaError, ShapeError
from matcore import Mat, ScalarFn, adjoint, herm_calculus, identity, same_dim

logger = logging.getLogger(__name__)

class NcExpr:
    """Base class for expression nodes."""

    # numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    def children(self) -> tuple["NcExpr", ...]:
        return ()

    def __add__(self, other: Any) -> "NcExpr":
        return Sum((self, _lift(other)))

    def __radd__(self, other: Any) -> "NcExpr":
        return Sum((_lift(other), self))

    def __sub__(self, other: Any) -> "NcExpr":
        return Sum((self, Scale(-1.0, _lift(other))))

    def __rsub__(self, other: Any) -> "NcExpr":
        return Sum((_lift(other), Scale(-1.0, self)))

    def __neg__(self) -> "NcExpr":
        return Scale(-1.0, self)

    def __mul__(self, other: Any) -> "NcExpr":
        if isinstance(other, NcExpr):
            return Product((self, other))
        return Scale(complex(other), self)

    def __rmul__(self, other: Any) -> "NcExpr":
        return Scale(complex(other), self)

    @property
    def H(self) -> "NcExpr":
        return Adjoint(self)

    @property
    def arity(self) -> int:
        """One more than the largest variable index used (0 for constants)."""
        return max_var(self) + 1


def _lift(value: Any) -> NcExpr:
    if isinstance(value, NcExpr):
        return value
    return Scale(complex(value), Unit())


@dataclass(frozen=True, eq=False)
class Var(NcExpr):
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ArityError("variable index must be non-negative", index=self.index)


@dataclass(frozen=True, eq=False)
class Unit(NcExpr):
    pass


@dataclass(frozen=True, eq=False)
class Adjoint(NcExpr):
    arg: NcExpr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=False)
class Sum(NcExpr):
    terms: tuple[NcExpr, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.terms:
            raise ArityError("a sum needs at least one term")
        if self.labels and len(self.labels) != len(self.terms):
            raise ArityError("one label per summand is required")

    def children(self):
        return self.terms


@dataclass(frozen=True, eq=False)
class Product(NcExpr):
    factors: tuple[NcExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ArityError("a product needs at least one factor")

    def children(self):
        return self.factors


@dataclass(frozen=True, eq=False)
class Scale(NcExpr):
    coef: complex
    arg: NcExpr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=False)
class Calc(NcExpr):
    """Hermitian functional calculus fn(arg); arg must evaluate to a Hermitian matrix."""
    fn: ScalarFn
    arg: NcExpr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Relation:
    """A named expression with a declared arity."""
    name: str
    expr: NcExpr
    arity: int

    def __post_init__(self):
        if self.arity < 0:
            raise ArityError("arity must be non-negative", arity=self.arity)
        used = self.expr.arity
        if used > self.arity:
            raise ArityError(
                f"relation '{self.name}' uses variable x{used - 1} beyond its arity {self.arity}",
                arity=self.arity,
            )

    def __call__(self, *args: Mat) -> Mat:
        return evaluate(self, args)


def variables(n: int, offset: int = 0) -> list[Var]:
    return [Var(offset + j) for j in range(n)]


# ============================================================================
# Traversal
# ============================================================================

def max_var(e: NcExpr) -> int:
    seen: dict[int, int] = {}

    def go(node: NcExpr) -> int:
        key = id(node)
        if key not in seen:
            own = node.index if isinstance(node, Var) else -1
            seen[key] = max([own] + [go(c) for c in node.children()])
        return seen[key]

    return go(e)


def transform(e: NcExpr, leaf: Callable[[NcExpr], Optional[NcExpr]]) -> NcExpr:
    """
    Rebuild e bottom-up, replacing nodes for which leaf returns a value.

    Shared subexpressions stay shared in the result.
    """
    memo: dict[int, NcExpr] = {}

    def go(node: NcExpr) -> NcExpr:
        key = id(node)
        if key in memo:
            return memo[key]
        replaced = leaf(node)
        if replaced is not None:
            out = replaced
        elif isinstance(node, (Var, Unit)):
            out = node
        elif isinstance(node, Adjoint):
            out = Adjoint(go(node.arg))
        elif isinstance(node, Sum):
            out = Sum(tuple(go(t) for t in node.terms), node.labels)
        elif isinstance(node, Product):
            out = Product(tuple(go(f) for f in node.factors))
        elif isinstance(node, Scale):
            out = Scale(node.coef, go(node.arg))
        elif isinstance(node, Calc):
            out = Calc(node.fn, go(node.arg))
        else:
            raise SchemaError(f"unknown expression node {type(node).__name__}")
        memo[key] = out
        return out

    return go(e)


def compose(e: NcExpr, subs: Sequence[NcExpr]) -> NcExpr:
    """Substitute subs[j] for every variable x_j."""
    subs = list(subs)
    if e.arity > len(subs):
        raise ArityError("not enough substitutions for the expression's variables", arity=e.arity, given=len(subs))
    return transform(e, lambda node: subs[node.index] if isinstance(node, Var) else None)


def shift(e: NcExpr, offset: int) -> NcExpr:
    """Relabel x_j as x_{j + offset}."""
    return transform(e, lambda node: Var(node.index + offset) if isinstance(node, Var) else None)


# ============================================================================
# Evaluation
# ============================================================================

class Evaluator:
    """Evaluates nodes on one argument tuple, caching every node value."""

    def __init__(self, args: Sequence[Any]):
        self.args = same_dim(args)
        if not self.args:
            raise ShapeError("evaluation needs at least one argument")
        self.dim = self.args[0].shape[0]
        self._cache: dict[int, Mat] = {}
        self._unit = identity(self.dim)

    def __call__(self, node: NcExpr) -> Mat:
        key = id(node)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        value = self._compute(node)
        self._cache[key] = value
        return value

    def _compute(self, node: NcExpr) -> Mat:
        if isinstance(node, Var):
            if node.index >= len(self.args):
                raise ShapeError(f"variable x{node.index} has no argument", given=len(self.args))
            return self.args[node.index]
        if isinstance(node, Unit):
            return self._unit
        if isinstance(node, Adjoint):
            return adjoint(self(node.arg))
        if isinstance(node, Sum):
            total = self(node.terms[0]).copy()
            for term in node.terms[1:]:
                total += self(term)
            return total
        if isinstance(node, Product):
            value = self(node.factors[0])
            for factor in node.factors[1:]:
                value = value @ self(factor)
            return value
        if isinstance(node, Scale):
            return node.coef * self(node.arg)
        if isinstance(node, Calc):
            return herm_calculus(self(node.arg), node.fn, name=f"argument of {node.fn.name or 'calculus node'}")
        raise SchemaError(f"unknown expression node {type(node).__name__}")


def evaluate(e: Union[NcExpr, Relation], args: Sequence[Any]) -> Mat:
    """
    Evaluate an expression or relation on a tuple of same-size matrices.

    Raises:
        ShapeError: Dimension or arity mismatch
        SymmetryError, DomainError: From functional-calculus nodes
    """
    if isinstance(e, Relation):
        if len(args) != e.arity:
            raise ShapeError(f"relation '{e.name}' expects {e.arity} arguments", given=len(args))
        e = e.expr
    return Evaluator(args)(e)


# ============================================================================
# Polynomial approximants
# ============================================================================

def chebyshev_approximant(e: NcExpr, degree: int, interval: tuple[float, float] = (-1.0, 2.0)) -> NcExpr:
    """
    Replace every functional-calculus node by its degree-k Chebyshev interpolant on interval.

    The result is a *-polynomial DAG. It converges to e on tuples whose calculus
    arguments have spectrum inside interval as degree grows.
    """
    lo, hi = interval
    scale, offset = 2.0 / (hi - lo), -(hi + lo) / (hi - lo)

    def leaf(node: NcExpr) -> Optional[NcExpr]:
        if not isinstance(node, Calc):
            return None
        inner = chebyshev_approximant(node.arg, degree, interval)
        herm = 0.5 * (inner + inner.H)
        coeffs = chebyshev.Chebyshev.interpolate(node.fn, degree, domain=[lo, hi]).coef
        y = scale * herm + offset * Unit()
        prev, cur = Unit(), y
        terms: list[NcExpr] = [coeffs[0] * prev]
        if len(coeffs) > 1:
            terms.append(coeffs[1] * cur)
        for c in coeffs[2:]:
            prev, cur = cur, 2.0 * (y * cur) - prev
            terms.append(c * cur)
        return Sum(tuple(terms))

    return transform(e, leaf)


# ============================================================================
# Serialization
# ============================================================================

def expr_to_dict(e: NcExpr) -> dict[str, Any]:
    """Convert to a tagged JSON tree (shared nodes are written out again)."""
    if isinstance(e, Var):
        return {"kind": "var", "index": e.index}
    if isinstance(e, Unit):
        return {"kind": "unit"}
    if isinstance(e, Adjoint):
        return {"kind": "adjoint", "arg": expr_to_dict(e.arg)}
    if isinstance(e, Sum):
        data: dict[str, Any] = {"kind": "sum", "terms": [expr_to_dict(t) for t in e.terms]}
        if e.labels:
            data["labels"] = list(e.labels)
        return data
    if isinstance(e, Product):
        return {"kind": "product", "factors": [expr_to_dict(f) for f in e.factors]}
    if isinstance(e, Scale):
        return {"kind": "scale", "coef": [e.coef.real, e.coef.imag], "arg": expr_to_dict(e.arg)}
    if isinstance(e, Calc):
        return {"kind": "calc", "fn": e.fn.to_dict(), "arg": expr_to_dict(e.arg)}
    raise SchemaError(f"unknown expression node {type(e).__name__}")


def expr_from_dict(data: dict[str, Any]) -> NcExpr:
    """Reconstruct from a tagged JSON tree."""
    try:
        kind = data["kind"]
        if kind == "var":
            return Var(int(data["index"]))
        if kind == "unit":
            return Unit()
        if kind == "adjoint":
            return Adjoint(expr_from_dict(data["arg"]))
        if kind == "sum":
            return Sum(tuple(expr_from_dict(t) for t in data["terms"]), tuple(data.get("labels", ())))
        if kind == "product":
            return Product(tuple(expr_from_dict(f) for f in data["factors"]))
        if kind == "scale":
            re, im = data["coef"]
            return Scale(complex(re, im), expr_from_dict(data["arg"]))
        if kind == "calc":
            return Calc(ScalarFn.from_dict(data["fn"]), expr_from_dict(data["arg"]))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed expression node: {e}", field="expr")
    raise SchemaError(f"unknown expression kind '{kind}'", field="expr")


def relation_to_dict(rel: Relation) -> dict[str, Any]:
    return {"name": rel.name, "arity": rel.arity, "expr": expr_to_dict(rel.expr)}


def relation_from_dict(data: dict[str, Any]) -> Relation:
    if not isinstance(data, dict) or "expr" not in data:
        raise SchemaError("relation: expected an object with 'expr'", field="relation")
    expr = expr_from_dict(data["expr"])
    return Relation(data.get("name", "custom"), expr, int(data.get("arity", expr.arity)))
