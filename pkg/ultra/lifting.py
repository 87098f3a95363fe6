"""
Lifting projections, spectral chains and partial isometries index by index.

Targets are single factors M_{d_i}; traces quantize in atoms of 1/d_i and
every trace-matching result is correct up to half an atom.
"""

import logging
from typing import Any, Optional, Sequence

import numpy as np

from config import config
from errors import DomainError, ExactnessError, InvalidParameterError, ShapeError
from matcore import BlockAlgebra, Mat, adjoint, hermitian_eigh, projection_rank, projector, range_basis, same_dim
from correct import check_projection, polar_partial_isometry
from .sequence import RepSequence, SpectralChain

logger = logging.getLogger(__name__)


def _factor(alg: BlockAlgebra, i: int) -> int:
    if not alg.is_factor:
        raise ShapeError(f"index {i} is not a single factor", index=i, blocks=list(alg.block_dims))
    return alg.dim


def target_rank(t: float, dim: int) -> int:
    """Rank whose normalized trace is closest to t (half-atoms round up)."""
    return int(min(max(np.floor(t * dim + 0.5), 0), dim))


def lift_projection_between(p: Any, q: Any, rank: int, hint: Optional[Mat] = None) -> Mat:
    """
    Projection E with P <= E <= Q and rank(E) = rank.

    Vectors are added from ran(Q - P); with a Hermitian hint, the ones where
    the compressed hint is largest come first.

    Raises:
        ProjectionError: If P or Q is not a projection
        InvalidParameterError: If rank is outside [rank P, rank Q]
    """
    p, q = same_dim([p, q], "projection pair")
    check_projection(p, "P")
    check_projection(q, "Q")
    low, high = projection_rank(p), projection_rank(q)
    if not low <= rank <= high:
        raise InvalidParameterError(f"rank {rank} outside [{low}, {high}]", rank=rank)
    if rank == low:
        return p
    gap, _ = range_basis(q - p)
    if hint is not None:
        h = adjoint(gap) @ hint @ gap
        _, vecs = np.linalg.eigh(0.5 * (h + adjoint(h)))
        gap = gap @ vecs[:, ::-1]
    return p + projector(gap[:, :rank - low])


def _lift_one(a: Mat, dim: int, t: float) -> Mat:
    check_projection(a, "A")
    rank = projection_rank(a)
    want = target_rank(t, dim)
    if want == rank:
        return a
    if want > rank:
        out = lift_projection_between(a, np.eye(dim, dtype=np.complex128), want)
    else:
        keep, _ = range_basis(a)
        out = a - projector(keep[:, want:])
    gap = np.sqrt(abs(want - rank) / dim)
    dist = BlockAlgebra.matrix(dim).two_norm(a - out)
    if abs(dist - gap) > config.EXACTNESS_TOL:
        raise ExactnessError("comparable projections violate the trace identity", distance=dist, expected=gap)
    return out


def lift_projection_trace(a: RepSequence, t: float) -> RepSequence:
    """
    Per index, a projection P_i comparable to A_i with tau(P_i) closest to t.

    ||A_i - P_i||_2 = sqrt|tau(P_i) - tau(A_i)| holds per index.

    Raises:
        InvalidParameterError: If t is outside [0, 1]
        ProjectionError: If some A_i is not a projection (index attached)
        ShapeError: If some algebra is not a factor
    """
    if not 0.0 <= t <= 1.0:
        raise InvalidParameterError("trace target must lie in [0, 1]", t=t)
    lifted = a.map_indexed(lambda i, alg, rep: _lift_one(rep, _factor(alg, i), t))
    logger.info(f"Lifted {len(a)} projections to trace {t:g}")
    return a.with_reps(lifted, bound=1.0 if any(np.any(p) for p in lifted) else 0.0)


def default_grid() -> list[float]:
    steps = 2 ** config.DYADIC_RESOLUTION
    return [k / steps for k in range(steps + 1)]


def _chain_one(t: Mat, dim: int, grid: Sequence[float]) -> SpectralChain:
    vals, vecs = hermitian_eigh(t, "T")
    slack = config.HERMITIAN_TOL
    if vals[0] < -slack or vals[-1] > 1.0 + slack:
        bad = vals[0] if vals[0] < -slack else vals[-1]
        raise DomainError(f"spectrum of T leaves [0, 1] at {bad:.6g}", eigenvalue=float(bad))
    projections, traces = [], []
    for s in grid:
        k = target_rank(s, dim)
        projections.append(projector(vecs[:, :k]))
        traces.append(k / dim)
    return SpectralChain(list(grid), projections, traces)


def lift_chain(t: RepSequence, grid: Optional[Sequence[float]] = None) -> list[SpectralChain]:
    """
    Per index, a nested chain P_i(s) of spectral projections of T_i with tau(P_i(s)) ~ s.

    P_i(s) spans the rank(s) eigenvectors of T_i with the smallest eigenvalues,
    so the chain is exactly monotone and follows chi_[0, x)(T_i).

    Raises:
        InvalidParameterError: If the grid is not increasing in [0, 1]
        DomainError: If a spectrum leaves [0, 1]
    """
    grid = list(default_grid() if grid is None else grid)
    if not grid or any(s < 0.0 or s > 1.0 for s in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError("grid must be increasing inside [0, 1]", grid=grid)
    chains = t.map_indexed(lambda i, alg, rep: _chain_one(rep, _factor(alg, i), grid))
    logger.info(f"Lifted spectral chains with {len(grid)} points over {len(t)} indices")
    return chains


def lift_partial_isometry(e: RepSequence, f: RepSequence, w: RepSequence) -> RepSequence:
    """
    V_i = polar factor of F_i W_i E_i, a partial isometry from E_i to F_i.

    Raises:
        ShapeError: If the sequences have different lengths
        RankMismatchError: If rank(E_i) != rank(F_i) (index attached)
        DegenerateCompressionError: If F_i W_i E_i loses rank (index attached)
    """
    if not len(e) == len(f) == len(w):
        raise ShapeError("E, F and W must have the same length", lengths=[len(e), len(f), len(w)])

    def lift(i: int, alg: BlockAlgebra, rep: Mat) -> Mat:
        _factor(alg, i)
        return polar_partial_isometry(e.at(i), f.at(i), rep)

    lifted = w.map_indexed(lift)
    out = w.with_reps(lifted, bound=1.0 if any(np.any(v) for v in lifted) else 0.0)
    profile = partial_isometry_profile(e, f, w, out)
    logger.info(f"Lifted {len(w)} partial isometries, tail distance {profile[-1]['distance']:.3g}")
    return out


def partial_isometry_profile(e: RepSequence, f: RepSequence, w: RepSequence, v: RepSequence) -> list[dict[str, Any]]:
    """Per index: input source/range defects and ||V_i - W_i||_2."""
    profile = []
    for i in range(1, len(w) + 1):
        alg = w.algebras[i - 1]
        wi = w.at(i)
        profile.append({
            "index": i,
            "source_defect": alg.two_norm(wi.conj().T @ wi - e.at(i)),
            "range_defect": alg.two_norm(wi @ wi.conj().T - f.at(i)),
            "distance": alg.two_norm(v.at(i) - wi),
        })
    return profile

