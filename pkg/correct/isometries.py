"""
Unitary and partial-isometry correctors.
"""

import logging
from typing import Any

import numpy as np
import scipy.linalg

from config import config
from errors import (
    DegenerateCompressionError,
    DeltaTooLargeError,
    ProjectionError,
    RankDeficiencyError,
    RankMismatchError,
    SpectralGapError,
)
from matcore import (
    Mat,
    adjoint,
    as_mat,
    herm_calculus,
    is_unitary,
    isometry_weight,
    op_norm,
    partial_isometry_defect,
    projection_defect,
    projection_rank,
    range_basis,
    same_dim,
)

logger = logging.getLogger(__name__)


def correct_unitary(a: Any) -> Mat:
    """
    Polar factor A (A*A)^{-1/2}; unitary inputs are returned unchanged.

    Raises:
        RankDeficiencyError: If A is singular
    """
    a = as_mat(a, "A")
    sv = scipy.linalg.svdvals(a)
    if sv[-1] <= config.SVD_CUTOFF * max(1.0, sv[0]):
        raise RankDeficiencyError("A is singular", smallest_singular_value=float(sv[-1]))
    if is_unitary(a):
        return a
    u, _ = scipy.linalg.polar(a)
    logger.debug(f"Polar correction distance {np.max(np.abs(sv - 1.0)):.3g}")
    return u


def check_projection(p: Mat, name: str) -> None:
    d = projection_defect(p)
    if d > config.exact_tol(p.shape[0]):
        raise ProjectionError(f"{name} is not a projection", defect=d)


def correct_partial_isometry(p: Any, q: Any, a: Any) -> Mat:
    """
    Correct A to a partial isometry with source P and range Q.

    Computes V = f(QAPA*Q) QAP with f = 1/sqrt(t) near 1 and 0 near 0.

    Args:
        p: Exact source projection
        q: Exact range projection of the same rank
        a: Approximate partial isometry from P to Q

    Returns:
        V with V*V = P and VV* = Q

    Raises:
        ProjectionError: If P or Q is not a projection
        RankMismatchError: If rank(P) != rank(Q)
        SpectralGapError: If QAPA*Q has spectrum in (1/4, 3/4) on ran Q
        DeltaTooLargeError: If the result misses P or Q
    """
    p, q, a = same_dim([p, q, a], "partial isometry data")
    n = a.shape[0]
    check_projection(p, "P")
    check_projection(q, "Q")
    rank_p, rank_q = projection_rank(p), projection_rank(q)
    if rank_p != rank_q:
        raise RankMismatchError(f"rank(P)={rank_p} differs from rank(Q)={rank_q}", rank_p=rank_p, rank_q=rank_q)
    if partial_isometry_defect(a, p, q) <= config.exact_tol(n):
        return a

    source_defect = op_norm(adjoint(a) @ a - p)
    range_defect = op_norm(a @ adjoint(a) - q)
    if max(source_defect, range_defect) >= config.DELTA_PI:
        logger.warning(
            f"Partial isometry defects {source_defect:.3g}/{range_defect:.3g} exceed {config.DELTA_PI}, "
            f"relying on the spectral gap check"
        )

    qap = q @ a @ p
    x = qap @ adjoint(qap)
    basis, _ = range_basis(q)
    if basis.shape[1]:
        spectrum = np.linalg.eigvalsh(adjoint(basis) @ x @ basis)
        gap = spectrum[(spectrum > 0.25) & (spectrum < 0.75)]
        if gap.size:
            raise SpectralGapError(
                f"QAPA*Q has eigenvalue {gap[0]:.6g} in (1/4, 3/4) on the range of Q",
                eigenvalue=float(gap[0]),
            )

    v = herm_calculus(x, isometry_weight(), name="QAPA*Q") @ qap
    miss = partial_isometry_defect(v, p, q)
    if miss > config.exact_tol(n):
        raise DeltaTooLargeError("corrected partial isometry misses its source or range", defect=miss)
    return v


def polar_partial_isometry(e: Any, f: Any, w: Any) -> Mat:
    """
    Partial isometry from E to F nearest to W: the polar factor of F W E.

    Singular values of F W E below SVD_CUTOFF are zeroed; exactly rank(E)
    singular directions are kept.

    Raises:
        ProjectionError: If E or F is not a projection
        RankMismatchError: If rank(E) != rank(F)
        DegenerateCompressionError: If F W E has rank below rank(E)
    """
    e, f, w = same_dim([e, f, w], "partial isometry data")
    check_projection(e, "E")
    check_projection(f, "F")
    rank_e, rank_f = projection_rank(e), projection_rank(f)
    if rank_e != rank_f:
        raise RankMismatchError(f"rank(E)={rank_e} differs from rank(F)={rank_f}", rank_e=rank_e, rank_f=rank_f)
    if rank_e == 0:
        return np.zeros_like(w)
    left, sv, right = scipy.linalg.svd(f @ w @ e)
    kept = int(np.sum(sv > config.SVD_CUTOFF))
    if kept < rank_e:
        raise DegenerateCompressionError(
            f"F W E has numerical rank {kept}, expected {rank_e}",
            rank=kept,
            expected=rank_e,
        )
    return left[:, :rank_e] @ right[:rank_e, :]
