"""
Corrector families and gluing.

A CorrectorFamily pairs a relation with a function mapping approximate
solutions (defect below delta) to exact ones.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from errors import ArityError, DeltaTooLargeError, InvalidParameterError, LiftkitError
from matcore import Mat, adjoint, same_dim
from ncfun import (
    Relation,
    defect,
    rel_combined,
    rel_glue,
    rel_glue_joint,
    rel_projection,
    rel_projections,
    rel_resolution,
    rel_two_projections,
    rel_unitaries,
    rel_unitary,
)
from .isometries import correct_partial_isometry, correct_unitary
from .projections import correct_projection, correct_resolution, correct_two_projections

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorrectorFamily:
    """A relation together with its corrector."""
    name: str
    relation: Relation
    corrector: Callable[[list[Mat]], list[Mat]]
    delta: float
    fixed_point: bool = True

    @property
    def arity(self) -> int:
        return self.relation.arity

    def __call__(self, args: Sequence[Any]) -> list[Mat]:
        if len(args) != self.arity:
            raise ArityError(f"family '{self.name}' expects {self.arity} arguments", given=len(args))
        return list(self.corrector(same_dim(args, self.name)))

    def input_defect(self, args: Sequence[Any]) -> float:
        return defect(self.relation, args).op

    def check_admissible(self, args: Sequence[Any], role: str = "input") -> None:
        """
        Raises:
            DeltaTooLargeError: If the relation defect on args is not below delta
        """
        d = self.input_defect(args)
        if d >= self.delta:
            raise DeltaTooLargeError(
                f"{role} defect {d:.3g} for '{self.name}' is not below {self.delta:g}",
                defect=d,
                delta=self.delta,
            )


def _each(fn: Callable[[Mat], Mat]) -> Callable[[list[Mat]], list[Mat]]:
    def run(args: list[Mat]) -> list[Mat]:
        out = []
        for i, a in enumerate(args):
            try:
                out.append(fn(a))
            except LiftkitError as e:
                raise e.at(index=i)
        return out
    return run


def projection_family(n: int = 1) -> CorrectorFamily:
    relation = rel_projection() if n == 1 else rel_projections(n)
    return CorrectorFamily(f"projection({n})", relation, _each(correct_projection), delta=0.01)


def unitary_family(n: int = 1) -> CorrectorFamily:
    relation = rel_unitary() if n == 1 else rel_unitaries(n)
    return CorrectorFamily(f"unitary({n})", relation, _each(correct_unitary), delta=0.25)


def two_projection_family(c: float) -> CorrectorFamily:
    if not 0.0 < c < 1.0:
        raise InvalidParameterError("angle parameter c must lie in (0, 1)", c=c)
    return CorrectorFamily(
        f"two_projections({c:g})",
        rel_two_projections(c),
        lambda args: list(correct_two_projections(args[0], args[1], c)),
        delta=0.01,
    )


def resolution_family(n: int) -> CorrectorFamily:
    return CorrectorFamily(f"resolution({n})", rel_resolution(n), correct_resolution, delta=0.01)


def combine_families(arity: int, parts: Sequence[tuple[CorrectorFamily, Sequence[int]]]) -> CorrectorFamily:
    """
    Families acting on disjoint index groups of one tuple; unlisted indices pass through.

    Raises:
        ArityError: If index groups overlap or leave the tuple
    """
    used: list[int] = []
    for family, indices in parts:
        if len(indices) != family.arity:
            raise ArityError(f"family '{family.name}' needs {family.arity} indices", given=len(indices))
        used += list(indices)
    if len(set(used)) != len(used):
        raise ArityError("combined families must act on disjoint indices", indices=used)

    def run(args: list[Mat]) -> list[Mat]:
        out = list(args)
        for family, indices in parts:
            try:
                corrected = family([args[i] for i in indices])
            except LiftkitError as e:
                inner = e.details.pop("index", None)
                raise e.at(index=indices[inner] if inner is not None else list(indices))
            for i, m in zip(indices, corrected):
                out[i] = m
        return out

    name = "+".join(f"{f.name}@{','.join(map(str, idx))}" for f, idx in parts)
    return CorrectorFamily(
        name,
        rel_combined(arity, [(f.relation, idx) for f, idx in parts], name=name),
        run,
        delta=min(f.delta for f, _ in parts),
        fixed_point=all(f.fixed_point for f, _ in parts),
    )


# ============================================================================
# Gluing
# ============================================================================

def _isometries(sources: list[Mat], ranges: list[Mat], vs: list[Mat]) -> list[Mat]:
    out = []
    for i, (p, q, v) in enumerate(zip(sources, ranges, vs)):
        try:
            out.append(correct_partial_isometry(p, q, v))
        except LiftkitError as e:
            raise e.at(index=i)
    return out


def glue(corr_p: CorrectorFamily, corr_q: CorrectorFamily, vs: Sequence[Any]) -> list[Mat]:
    """
    Glue source and range correctors into a corrector for partial isometries.

    W_i = correct_partial_isometry(corr_p(V*V tuple)_i, corr_q(VV* tuple)_i, V_i).

    Raises:
        ArityError: If a family's arity differs from len(vs)
        DeltaTooLargeError: If V*V or VV* is not admissible for its family
        LiftkitError: Constituent errors with the index attached
    """
    vs = same_dim(vs, "partial isometries")
    n = len(vs)
    if corr_p.arity != n or corr_q.arity != n:
        raise ArityError("glued families must have arity len(Vs)", n=n, p=corr_p.arity, q=corr_q.arity)
    sources = [adjoint(v) @ v for v in vs]
    ranges = [v @ adjoint(v) for v in vs]
    corr_p.check_admissible(sources, "source")
    corr_q.check_admissible(ranges, "range")
    out = _isometries(corr_p(sources), corr_q(ranges), vs)
    logger.info(f"Glued {n} partial isometries with {corr_p.name} / {corr_q.name}")
    return out


def glue_joint(corr: CorrectorFamily, vs: Sequence[Any]) -> list[Mat]:
    """
    Glue with one family acting jointly on (V1*V1, ..., Vn*Vn, V1V1*, ..., VnVn*).
    """
    vs = same_dim(vs, "partial isometries")
    n = len(vs)
    if corr.arity != 2 * n:
        raise ArityError("joint family must have arity 2 len(Vs)", n=n, arity=corr.arity)
    pairs = [adjoint(v) @ v for v in vs] + [v @ adjoint(v) for v in vs]
    corr.check_admissible(pairs, "joint")
    corrected = corr(pairs)
    return _isometries(corrected[:n], corrected[n:], vs)


def glue_family(corr_p: CorrectorFamily, corr_q: CorrectorFamily) -> CorrectorFamily:
    """The glued relation with glue as its corrector."""
    n = corr_p.arity
    return CorrectorFamily(
        f"glue({corr_p.name},{corr_q.name})",
        rel_glue(corr_p.relation, corr_q.relation, n),
        lambda vs: glue(corr_p, corr_q, vs),
        # constituent defects are at most the square root of the glued defect
        delta=min(corr_p.delta, corr_q.delta) ** 2,
        fixed_point=corr_p.fixed_point and corr_q.fixed_point,
    )


def glue_joint_family(corr: CorrectorFamily) -> CorrectorFamily:
    n = corr.arity // 2
    return CorrectorFamily(
        f"glue_joint({corr.name})",
        rel_glue_joint(corr.relation, n),
        lambda vs: glue_joint(corr, vs),
        delta=corr.delta ** 2,
        fixed_point=corr.fixed_point,
    )
