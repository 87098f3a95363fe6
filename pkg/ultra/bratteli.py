"""
Extending matrix units along inclusions of finite-dimensional algebras.

Inclusion data A = M_{a_1} + ... into B = M_{b_1} + ... is a multiplicity
matrix mult[b][a]: B-block b holds mult[b][a] copies of A-block a, laid out
in the standard way (A-blocks in order, copies consecutive).
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Callable, Optional, Sequence

import numpy as np

from config import config
from errors import BratteliError, ExactnessError, InvalidParameterError, LiftkitError, ResolutionError, SchemaError
from matcore import Mat, adjoint, identity, mat_from_dict, mat_to_dict, op_norm, projection_rank, range_basis
from correct import MatrixUnitSystem
from workers import parallel_map
from .lifting import lift_partial_isometry, lift_projection_between
from .sequence import RepSequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InclusionData:
    """Bratteli edge data with B's minimal-projection traces b_weights."""
    a_blocks: tuple[int, ...]
    b_blocks: tuple[int, ...]
    mult: tuple[tuple[int, ...], ...]
    b_weights: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        a = tuple(int(n) for n in self.a_blocks)
        b = tuple(int(n) for n in self.b_blocks)
        mult = tuple(tuple(int(m) for m in row) for row in self.mult)
        object.__setattr__(self, "a_blocks", a)
        object.__setattr__(self, "b_blocks", b)
        object.__setattr__(self, "mult", mult)
        if len(mult) != len(b) or any(len(row) != len(a) for row in mult):
            raise BratteliError("multiplicity matrix must be len(B) x len(A)", a_blocks=list(a), b_blocks=list(b))
        if any(m < 0 for row in mult for m in row):
            raise BratteliError("multiplicities must be non-negative")
        for j, row in enumerate(mult):
            total = sum(m * n for m, n in zip(row, a))
            if total != b[j]:
                raise BratteliError(
                    f"B-block {j} has dim {b[j]} but multiplicities give {total}",
                    block=j,
                    expected=b[j],
                    got=total,
                )
        for k in range(len(a)):
            if not any(row[k] for row in mult):
                raise BratteliError(f"A-block {k} does not embed unitally", block=k)
        if self.b_weights is not None:
            weights = tuple(float(w) for w in self.b_weights)
            object.__setattr__(self, "b_weights", weights)
            if len(weights) != len(b) or any(w <= 0 for w in weights):
                raise InvalidParameterError("one positive weight per B-block is required", weights=list(weights))
            total = sum(w * n for w, n in zip(weights, b))
            if abs(total - 1.0) > 1e-12:
                raise InvalidParameterError("B weights must give tau(1) = 1", total=total)

    @property
    def weights(self) -> tuple[float, ...]:
        """Traces of minimal projections of B (uniform by default)."""
        if self.b_weights is not None:
            return self.b_weights
        return tuple(1.0 / sum(self.b_blocks) for _ in self.b_blocks)

    def a_weights(self) -> tuple[float, ...]:
        """Pulled-back traces of minimal projections of A."""
        return tuple(
            sum(row[k] * w for row, w in zip(self.mult, self.weights))
            for k in range(len(self.a_blocks))
        )

    def segments(self, b: int) -> list[tuple[int, int, int]]:
        """(A-block, copy, offset) for every copy inside B-block b."""
        out, offset = [], 0
        for a, (m, n) in enumerate(zip(self.mult[b], self.a_blocks)):
            for c in range(m):
                out.append((a, c, offset))
                offset += n
        return out

    def is_identity(self) -> bool:
        return self.a_blocks == self.b_blocks and all(
            row[k] == (1 if j == k else 0) for j, row in enumerate(self.mult) for k in range(len(row))
        )

    def standard_embedding(self, multiplicity: int = 1) -> MatrixUnitSystem:
        """A's units inside the standard units of B acting on C^{sum b} tensor C^{multiplicity}."""
        return restrict_units(self, standard_units(self.b_blocks, multiplicity))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "a_blocks": list(self.a_blocks),
            "b_blocks": list(self.b_blocks),
            "mult": [list(row) for row in self.mult],
        }
        if self.b_weights is not None:
            out["b_weights"] = list(self.b_weights)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "InclusionData":
        try:
            weights = data.get("b_weights")
            return cls(
                tuple(data["a_blocks"]),
                tuple(data["b_blocks"]),
                tuple(tuple(row) for row in data["mult"]),
                tuple(weights) if weights is not None else None,
            )
        except (KeyError, TypeError) as e:
            raise SchemaError(f"inclusion: missing or malformed field {e}", field="inclusion")


def standard_units(blocks: Sequence[int], multiplicity: int = 1) -> MatrixUnitSystem:
    return MatrixUnitSystem.standard(blocks, multiplicity)


def restrict_units(inc: InclusionData, rho: MatrixUnitSystem) -> MatrixUnitSystem:
    """pi(e^(a)_st) = sum over copies of a of rho(E^(b)_{o+s, o+t})."""
    if tuple(rho.structure) != inc.b_blocks:
        raise BratteliError("system does not match the B-blocks", structure=list(rho.structure))
    units: dict[tuple[int, int, int], Mat] = {}
    for a, n in enumerate(inc.a_blocks):
        for s in range(n):
            for t in range(n):
                total = np.zeros((rho.dim, rho.dim), dtype=np.complex128)
                for b in range(len(inc.b_blocks)):
                    for seg_a, _, offset in inc.segments(b):
                        if seg_a == a:
                            total = total + rho[(b, offset + s, offset + t)]
                units[(a, s, t)] = total
    return MatrixUnitSystem(inc.a_blocks, units)


def propagate_weights(chain: Sequence[InclusionData]) -> list[InclusionData]:
    """
    Fill b_weights top-down so consecutive levels agree on traces.

    The last level keeps its weights (uniform if unset); each earlier level
    takes the pull-back of the level above.
    """
    out = list(chain)
    for level in range(len(out) - 2, -1, -1):
        pulled = out[level + 1].a_weights()
        out[level] = replace(out[level], b_weights=pulled)
    return out


def check_chain(chain: Sequence[InclusionData]) -> None:
    """
    Raises:
        BratteliError: If consecutive levels do not compose
    """
    for level in range(len(chain) - 1):
        if chain[level].b_blocks != chain[level + 1].a_blocks:
            raise BratteliError(
                f"level {level + 1} ends in {list(chain[level].b_blocks)} "
                f"but level {level + 2} starts from {list(chain[level + 1].a_blocks)}",
                level=level + 1,
            )


def _piece_ranks(inc: InclusionData, dim: int) -> list[int]:
    ranks = []
    for b, w in enumerate(inc.weights):
        exact = w * dim
        r = int(np.floor(exact + 0.5))
        if r < 1:
            raise ResolutionError(
                f"trace atom {w:.6g} is below 1/{dim}; use a larger ambient dimension",
                block=b,
                atom=w,
                dim=dim,
            )
        ranks.append(r)
    return ranks


def _owners(inc: InclusionData, a: int) -> list[tuple[int, int, int]]:
    """(B-block, segment, offset) for every copy of A-block a, B-blocks in order."""
    return [
        (b, k, offset)
        for b in range(len(inc.b_blocks))
        for k, (seg_a, _, offset) in enumerate(inc.segments(b))
        if seg_a == a
    ]


@dataclass(frozen=True)
class GluedGenerators:
    """
    Images of the generators gluing A's copies into B, at one index.

    link is sum over B-blocks b and segments k >= 1 of rho(E^(b)_{0, o_k}): it
    joins the first row of every later copy to the first row of its B-block.
    diagonal is a Hermitian equal to (m - j) / m on the j-th of the m copies
    of A-block a inside pi(e^(a)_00); it tells the copies apart.
    """
    link: Optional[Mat] = None
    diagonal: Optional[Mat] = None

    @classmethod
    def of(cls, inc: InclusionData, rho: MatrixUnitSystem) -> "GluedGenerators":
        """Exact generators of an exact system rho for B."""
        if tuple(rho.structure) != inc.b_blocks:
            raise BratteliError("system does not match the B-blocks", structure=list(rho.structure))
        link = np.zeros((rho.dim, rho.dim), dtype=np.complex128)
        for b in range(len(inc.b_blocks)):
            for _, _, offset in inc.segments(b)[1:]:
                link = link + rho[(b, 0, offset)]
        diagonal = np.zeros_like(link)
        for a in range(len(inc.a_blocks)):
            owners = _owners(inc, a)
            for j, (b, _, offset) in enumerate(owners):
                diagonal = diagonal + (len(owners) - j) / len(owners) * rho[(b, offset, offset)]
        return cls(link, diagonal)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.link is not None:
            out["link"] = mat_to_dict(self.link)
        if self.diagonal is not None:
            out["diagonal"] = mat_to_dict(self.diagonal)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GluedGenerators":
        if not isinstance(data, dict):
            raise SchemaError("glued generators: expected an object with link and/or diagonal", field="targets")
        link, diagonal = data.get("link"), data.get("diagonal")
        return cls(
            mat_from_dict(link, "link") if link is not None else None,
            mat_from_dict(diagonal, "diagonal") if diagonal is not None else None,
        )


def _check_pi(inc: InclusionData, pi: MatrixUnitSystem) -> None:
    if tuple(pi.structure) != inc.a_blocks or not pi.is_complete:
        raise BratteliError("pi is not a complete system for the A-blocks", structure=list(pi.structure))
    if not pi.is_exact():
        raise BratteliError("pi is not an exact system of matrix units", defects=pi.defects())


def _corner_pieces(inc: InclusionData, pi: MatrixUnitSystem, target: Optional[GluedGenerators]) -> dict[tuple[int, int], Mat]:
    """
    Projection g_(b, k) inside pi(e^(a)_00) for the k-th segment of B-block b.

    Pieces come from a nested chain 0 < E_1 < ... < pi(e^(a)_00) of corner
    lifts with ranks summing the B-atoms of the owners.
    """
    _check_pi(inc, pi)
    ranks = _piece_ranks(inc, pi.dim)
    hint = target.diagonal if target is not None else None
    pieces: dict[tuple[int, int], Mat] = {}
    for a in range(len(inc.a_blocks)):
        owners = _owners(inc, a)
        corner = pi[(a, 0, 0)]
        need = sum(ranks[b] for b, _, _ in owners)
        have = projection_rank(corner)
        if need != have:
            raise ResolutionError(
                f"A-block {a} has rank {have} but B-block atoms need {need}; "
                f"check trace weights or use a larger ambient dimension",
                block=a,
                rank=have,
                needed=need,
            )
        below = np.zeros_like(corner)
        reached = 0
        for b, k, _ in owners:
            reached += ranks[b]
            above = lift_projection_between(below, corner, reached, hint)
            pieces[(b, k)] = above - below
            below = above
    return pieces


def _link_guess(anchor: Mat, piece: Mat, target: Optional[GluedGenerators]) -> Mat:
    """rho(E_{0,o}) ~ rho(E_00) link rho(E_oo), or any isometry between the pieces."""
    if target is not None and target.link is not None:
        return anchor @ target.link @ piece
    return range_basis(anchor)[0] @ adjoint(range_basis(piece)[0])


def _assemble(
    inc: InclusionData,
    pi: MatrixUnitSystem,
    pieces: dict[tuple[int, int], Mat],
    links: dict[tuple[int, int], Mat],
) -> MatrixUnitSystem:
    units: dict[tuple[int, int, int], Mat] = {}
    for b, n in enumerate(inc.b_blocks):
        row: dict[int, Mat] = {}
        for k, (a, _, offset) in enumerate(inc.segments(b)):
            link = pieces[(b, 0)] if k == 0 else links[(b, k)]
            for s in range(inc.a_blocks[a]):
                row[offset + s] = link @ pieces[(b, k)] @ pi[(a, 0, s)]
        for j in range(n):
            for k in range(n):
                units[(b, j, k)] = adjoint(row[j]) @ row[k]

    rho = MatrixUnitSystem(inc.b_blocks, units)
    back = restrict_units(inc, rho)
    miss = max(op_norm(back[key] - pi[key]) for key in pi.keys())
    if miss > config.exact_tol(pi.dim):
        raise ExactnessError("extension does not restrict to pi", defect=miss)
    return rho


def _per_index(fn: Callable[..., Any], *columns: Sequence[Any]) -> list[Any]:
    def run(item: tuple[Any, ...]) -> Any:
        i, *args = item
        try:
            return fn(*args)
        except LiftkitError as e:
            raise e.at(index=i)

    return parallel_map(run, list(zip(range(1, len(columns[0]) + 1), *columns)))


def extend_matrix_units(
    inc: InclusionData,
    pi: Sequence[MatrixUnitSystem],
    targets: Optional[Sequence[Optional[GluedGenerators]]] = None,
) -> list[MatrixUnitSystem]:
    """
    Per index, an exact system rho for B with rho restricted to A equal to pi.

    Each corner pi(e^(a)_00) is refined into pieces of rank beta_b * dim, one
    per copy of a inside B-block b, by successive corner lifts (ordered by the
    diagonal generator of targets when given). The first-row units come from
    the product formula rho(E_{0,o}) = rho(E_00) link rho(E_oo), made exact by
    lift_partial_isometry over all indices; then rho(E_jk) = rho(E_0j)* rho(E_0k).

    Args:
        inc: The inclusion A into B
        pi: Exact systems for A, one per index
        targets: Approximate glued generators of B, one per index (or None)

    Raises:
        BratteliError: On inconsistent inclusion data or a non-exact pi
        ResolutionError: If the ambient ranks cannot carry B's trace atoms
        LiftkitError: Lifting errors with the index (1-based) attached
    """
    pi = list(pi)
    hints = list(targets) if targets is not None else [None] * len(pi)
    if len(hints) != len(pi):
        raise InvalidParameterError("one target per index is required", pi=len(pi), targets=len(hints))
    if not pi:
        return []
    if inc.is_identity():
        _per_index(_check_pi, [inc] * len(pi), pi)
        return pi

    pieces = _per_index(_corner_pieces, [inc] * len(pi), pi, hints)

    links: list[dict[tuple[int, int], Mat]] = [{} for _ in pi]
    for b in range(len(inc.b_blocks)):
        for k, (_, _, offset) in enumerate(inc.segments(b)[1:], start=1):
            sources = RepSequence.of_matrices([p[(b, k)] for p in pieces])
            anchors = RepSequence.of_matrices([p[(b, 0)] for p in pieces])
            guesses = RepSequence.of_matrices([
                _link_guess(p[(b, 0)], p[(b, k)], hint) for p, hint in zip(pieces, hints)
            ])
            try:
                lifted = lift_partial_isometry(sources, anchors, guesses)
            except LiftkitError as e:
                raise e.at(unit=(b, 0, offset))
            for i, found in enumerate(lifted.reps):
                links[i][(b, k)] = found

    out = _per_index(_assemble, [inc] * len(pi), pi, pieces, links)
    logger.info(f"Extended matrix units {list(inc.a_blocks)} -> {list(inc.b_blocks)} over {len(pi)} indices")
    return out


def bratteli_lift(chain: Sequence[InclusionData], depth: int, dims: Sequence[int]) -> list[list[MatrixUnitSystem]]:
    """
    Tower of nested exact systems pi^(1) < ... < pi^(depth) per index, starting from C 1.

    Returns:
        levels[l][i]: the system for the l-th algebra of the chain at index i+1

    Raises:
        InvalidParameterError: If depth exceeds the chain
        BratteliError: If the chain does not start at C or does not compose
        ResolutionError: If an atom is smaller than 1/dim at some index
    """
    if not 1 <= depth <= len(chain):
        raise InvalidParameterError(f"depth must lie in 1..{len(chain)}", depth=depth)
    chain = list(chain[:depth])
    if chain[0].a_blocks != (1,):
        raise BratteliError("the chain must start from the scalars C 1", a_blocks=list(chain[0].a_blocks))
    check_chain(chain)
    chain = propagate_weights(chain)

    for i, d in enumerate(dims, start=1):
        for level, inc in enumerate(chain, start=1):
            atom = min(inc.weights)
            if atom < 1.0 / d:
                raise ResolutionError(
                    f"level {level} needs trace atoms {atom:.6g} below 1/{d}; use a larger ambient dimension",
                    index=i,
                    level=level,
                    atom=atom,
                    dim=d,
                )

    current = [MatrixUnitSystem((1,), {(0, 0, 0): identity(d)}) for d in dims]
    tower = []
    for level, inc in enumerate(chain, start=1):
        try:
            current = extend_matrix_units(inc, current)
        except LiftkitError as e:
            raise e.at(level=level)
        tower.append(current)
        logger.debug(f"Bratteli level {level}: blocks {list(inc.b_blocks)}")
    return tower
