"""
Builders for the universal relations.

Each builder returns a Relation whose zero set is the set of exact solutions.
Composite relations are sums of positive terms t*t, labeled per summand.
"""

from typing import Sequence

from errors import ArityError
from matcore import plateau
from .expr import Calc, NcExpr, Relation, Sum, Unit, Var, compose, shift, variables


def _square(t: NcExpr) -> NcExpr:
    return t.H * t


def _labeled(terms: list[tuple[str, NcExpr]]) -> Sum:
    return Sum(tuple(t for _, t in terms), tuple(label for label, _ in terms))


def projection_terms(x: NcExpr) -> list[tuple[str, NcExpr]]:
    """(x - x*)^2 and (x - x^2)*(x - x^2)."""
    skew = x - x.H
    idem = x - x * x
    return [("self_adjoint", skew * skew), ("idempotent", _square(idem))]


def rel_projection() -> Relation:
    return Relation("projection", _labeled(projection_terms(Var(0))), 1)


def rel_projections(n: int) -> Relation:
    """n independent projections."""
    terms = []
    for j, x in enumerate(variables(n)):
        terms += [(f"{label}_{j}", t) for label, t in projection_terms(x)]
    return Relation(f"projections({n})", _labeled(terms), n)


def rel_unitary() -> Relation:
    x = Var(0)
    return Relation("unitary", _labeled([
        ("isometry", _square(x.H * x - Unit())),
        ("co_isometry", _square(x * x.H - Unit())),
    ]), 1)


def rel_unitaries(n: int) -> Relation:
    terms = []
    for j, x in enumerate(variables(n)):
        terms += [
            (f"isometry_{j}", _square(x.H * x - Unit())),
            (f"co_isometry_{j}", _square(x * x.H - Unit())),
        ]
    return Relation(f"unitaries({n})", _labeled(terms), n)


def rel_partial_isometry() -> Relation:
    """Over (P, Q, V): V*V = P and VV* = Q."""
    p, q, v = variables(3)
    return Relation("partial_isometry", _labeled([
        ("source", _square(v.H * v - p)),
        ("range", _square(v * v.H - q)),
    ]), 3)


def rel_commutator() -> Relation:
    """The plain commutator x0 x1 - x1 x0."""
    x, y = variables(2)
    return Relation("commutator", x * y - y * x, 2)


def rel_commuting_normals(n: int) -> Relation:
    xs = variables(n)
    terms = [(f"normal_{j}", _square(x * x.H - x.H * x)) for j, x in enumerate(xs)]
    for j in range(n):
        for k in range(j + 1, n):
            terms.append((f"commute_{j}_{k}", _square(xs[j] * xs[k] - xs[k] * xs[j])))
    return Relation(f"commuting_normals({n})", _labeled(terms), n)


def rel_two_projections(c: float) -> Relation:
    """Projections x0, x1 with x0 x1 x0 = c x0 and x1 x0 x1 = c x1."""
    p, q = variables(2)
    terms = [(f"{label}_0", t) for label, t in projection_terms(p)]
    terms += [(f"{label}_1", t) for label, t in projection_terms(q)]
    terms += [
        ("angle_0", _square(p * q * p - c * p)),
        ("angle_1", _square(q * p * q - c * q)),
    ]
    return Relation(f"two_projections({c:g})", _labeled(terms), 2)


def rel_resolution(n: int) -> Relation:
    """Pairwise orthogonal projections summing to 1."""
    xs = variables(n)
    terms = []
    for j, x in enumerate(xs):
        terms += [(f"{label}_{j}", t) for label, t in projection_terms(x)]
    total = Sum(tuple(xs)) - Unit()
    terms.append(("partition", _square(total)))
    for j in range(n):
        for k in range(j + 1, n):
            terms.append((f"orthogonal_{j}_{k}", _square(xs[j] * xs[k])))
    return Relation(f"resolution({n})", _labeled(terms), n)


def rel_matrix_generator(n: int) -> Relation:
    """
    Single-generator relation for a unital copy of M_n.

    Exact solutions are y = sum_k k e_kk + sum_k (e_{k+1,k} - e_{k,k+1}) for a
    system of n x n matrix units: the Hermitian part carries the diagonal units
    as spectral projections at 1..n, the skew part carries the subdiagonal units.
    """
    y = Var(0)
    re = 0.5 * (y + y.H)
    im = 0.5 * (y - y.H)
    diag = [Calc(plateau(float(k + 1)), re) for k in range(n)]
    steps = [diag[k + 1] * im * diag[k] for k in range(n - 1)]
    levels = Sum(tuple((k + 1) * e for k, e in enumerate(diag)))
    terms = [("spectrum", _square(re - levels))]
    for k, f in enumerate(steps):
        terms.append((f"source_{k}", _square(f.H * f - diag[k])))
        terms.append((f"range_{k}", _square(f * f.H - diag[k + 1])))
    if steps:
        skew = Sum(tuple(f - f.H for f in steps))
        terms.append(("skew", _square(im - skew)))
    else:
        terms.append(("skew", _square(im)))
    return Relation(f"matrix_generator({n})", _labeled(terms), 1)


def rel_combined(arity: int, parts: Sequence[tuple[Relation, Sequence[int]]], name: str = "combined") -> Relation:
    """Sum of relations, each applied to the listed variable indices."""
    terms = []
    for rel, indices in parts:
        if len(indices) != rel.arity:
            raise ArityError(f"relation '{rel.name}' needs {rel.arity} indices", given=len(indices))
        if any(i < 0 or i >= arity for i in indices):
            raise ArityError("part index outside the combined arity", indices=list(indices), arity=arity)
        terms.append((f"{rel.name}@{','.join(map(str, indices))}", compose(rel.expr, [Var(i) for i in indices])))
    return Relation(name, _labeled(terms), arity)


def rel_glue(phi: Relation, psi: Relation, n: int) -> Relation:
    """
    phi(V*V tuple)* phi(V*V tuple) + psi(VV* tuple)* psi(VV* tuple).

    Raises:
        ArityError: If phi or psi does not have arity n
    """
    if phi.arity != n or psi.arity != n:
        raise ArityError("glued relations must both have arity n", n=n, phi=phi.arity, psi=psi.arity)
    vs = variables(n)
    sources = compose(phi.expr, [v.H * v for v in vs])
    ranges = compose(psi.expr, [v * v.H for v in vs])
    return Relation(
        f"glue({phi.name},{psi.name})",
        _labeled([("source", _square(sources)), ("range", _square(ranges))]),
        n,
    )


def rel_glue_joint(phi: Relation, n: int) -> Relation:
    """Joint form: phi(V1*V1, ..., Vn*Vn, V1V1*, ..., VnVn*) squared, phi of arity 2n."""
    if phi.arity != 2 * n:
        raise ArityError("joint glue relation needs arity 2n", n=n, phi=phi.arity)
    vs = variables(n)
    joint = compose(phi.expr, [v.H * v for v in vs] + [v * v.H for v in vs])
    return Relation(f"glue_joint({phi.name})", _labeled([("joint", _square(joint))]), n)


def rel_tensor(phi: Relation, rho: Relation) -> Relation:
    """
    Relation for A tensor M_n over (x_1..x_m, y).

    Terms: commutators of each x_i with y and y*, phi on the x's, rho on y.
    """
    if rho.arity != 1:
        raise ArityError("the generator relation must have arity 1", rho=rho.arity)
    m = phi.arity
    xs = variables(m)
    y = Var(m)
    terms = [(f"commute_{i}", _square(x * y - y * x)) for i, x in enumerate(xs)]
    terms += [(f"commute_adj_{i}", _square(x * y.H - y.H * x)) for i, x in enumerate(xs)]
    terms.append(("phi", _square(phi.expr)))
    terms.append(("rho", _square(compose(rho.expr, [y]))))
    return Relation(f"tensor({phi.name},{rho.name})", _labeled(terms), m + 1)


def rel_direct_sum(phi: Relation, psi: Relation) -> Relation:
    """
    Relation for A + B over (x_1..x_m, y_1..y_k, p) with p the central projection.
    """
    m, k = phi.arity, psi.arity
    xs = variables(m)
    ys = variables(k, offset=m)
    p = Var(m + k)
    terms = [
        ("phi", _square(phi.expr)),
        ("psi", _square(shift(psi.expr, m))),
        ("central_self_adjoint", _square(p - p.H)),
        ("central_idempotent", _square(p - p * p)),
    ]
    terms += [(f"commute_x_{j}", _square(p * x - x * p)) for j, x in enumerate(xs)]
    terms += [(f"support_x_{j}", _square(p * x - x)) for j, x in enumerate(xs)]
    terms += [(f"commute_y_{j}", _square(p * y - y * p)) for j, y in enumerate(ys)]
    return Relation(f"direct_sum({phi.name},{psi.name})", _labeled(terms), m + k + 1)


RELATION_BUILDERS = {
    "projection": rel_projection,
    "unitary": rel_unitary,
    "partial_isometry": rel_partial_isometry,
    "commutator": rel_commutator,
}
