"""
Projection correctors: single projections, resolutions of the identity, and
pairs of projections at a fixed angle.
"""

import logging
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from config import config
from errors import InvalidParameterError, LiftkitError, SpectralGapError
from matcore import (
    Mat,
    adjoint,
    as_mat,
    from_spectrum,
    hermitian_eigh,
    hermitian_part,
    identity,
    is_projection,
    op_norm,
    projection_rank,
    projector,
    range_basis,
    retraction,
    same_dim,
)

logger = logging.getLogger(__name__)

GAP_LO = 1 / 3
GAP_HI = 2 / 3


def correct_projection(a: Any) -> Mat:
    """
    Round an approximate projection to h((A + A*)/2).

    Exact projections are returned unchanged.

    Raises:
        SpectralGapError: If (A + A*)/2 has an eigenvalue in [1/3, 2/3]
    """
    a = as_mat(a, "A")
    if is_projection(a):
        return a
    vals, vecs = hermitian_eigh(hermitian_part(a))
    inside = vals[(vals >= GAP_LO) & (vals <= GAP_HI)]
    if inside.size:
        raise SpectralGapError(
            f"eigenvalue {inside[0]:.6g} of (A+A*)/2 lies in [1/3, 2/3]",
            eigenvalue=float(inside[0]),
        )
    rounded = retraction()(vals)
    logger.debug(f"Projection rounding moved the spectrum by {np.max(np.abs(vals - rounded)):.3g}")
    return from_spectrum(rounded, vecs)


def _is_resolution(ps: Sequence[Mat]) -> bool:
    n = ps[0].shape[0]
    if not all(is_projection(p) for p in ps):
        return False
    if op_norm(sum(ps) - identity(n)) > config.exact_tol(n):
        return False
    return all(
        op_norm(ps[j] @ ps[k]) <= config.exact_tol(n)
        for j in range(len(ps)) for k in range(j + 1, len(ps))
    )


def correct_resolution(mats: Sequence[Any]) -> list[Mat]:
    """
    Correct approximate projections summing to about 1 into an exact resolution of the identity.

    Each input is rounded with correct_projection, then the rounded family is
    symmetrically orthogonalized: Q_j = S^{-1/2} P_j S^{-1/2} with S = sum P_j,
    computed as the polar factor of the stacked range bases.

    Raises:
        SpectralGapError: If a rounding fails or S is too far from 1
    """
    mats = same_dim(mats, "resolution")
    if _is_resolution(mats):
        return list(mats)

    rounded = []
    for j, a in enumerate(mats):
        try:
            rounded.append(correct_projection(a))
        except LiftkitError as e:
            raise e.at(index=j)

    n = rounded[0].shape[0]
    ranks = [projection_rank(p) for p in rounded]
    if sum(ranks) != n:
        raise SpectralGapError(
            f"rounded projections have total rank {sum(ranks)} in dimension {n}",
            ranks=ranks,
        )
    gram = np.linalg.eigvalsh(hermitian_part(sum(rounded)))
    if gram[0] <= 0.5 or gram[-1] >= 1.5:
        raise SpectralGapError(
            "sum of rounded projections is too far from the identity",
            smallest=float(gram[0]),
            largest=float(gram[-1]),
        )

    bases = [range_basis(p)[0] for p in rounded]
    frame = np.hstack(bases)
    unitary, _ = scipy.linalg.polar(frame)
    out, start = [], 0
    for r in ranks:
        block = unitary[:, start:start + r]
        out.append(hermitian_part(projector(block)))
        start += r
    return out


def correct_two_projections(a1: Any, a2: Any, c: float) -> tuple[Mat, Mat]:
    """
    Correct a pair of approximate projections to an exact pair at angle c.

    Both inputs are rounded, then the compression P1 P2 P1 on ran(P1) is
    diagonalized. Its eigenvalues must cluster near c or near 0; the
    two-dimensional Halmos blocks belonging to the c cluster are snapped to
    cosine^2 exactly c and the 0 cluster to exact orthogonality.

    Returns:
        (P1, P2) with P1 P2 P1 = c * (projection onto the generic part of ran P1)

    Raises:
        InvalidParameterError: If c is not in (0, 1)
        SpectralGapError: If the angle spectrum is not clustered
    """
    if not 0.0 < c < 1.0:
        raise InvalidParameterError("angle parameter c must lie in (0, 1)", c=c)
    a1, a2 = same_dim([a1, a2], "projection pair")
    p1 = correct_projection(a1)
    try:
        p2 = correct_projection(a2)
    except LiftkitError as e:
        raise e.at(index=1)
    n = p1.shape[0]

    b1, _ = range_basis(p1)
    vals, vecs = np.linalg.eigh(hermitian_part(adjoint(b1) @ p2 @ b1))
    radius = min(c, 1.0 - c) / 2.0
    near_c = np.abs(vals - c) < radius
    near_0 = np.abs(vals) < radius
    stray = vals[~(near_c | near_0)]
    if stray.size:
        raise SpectralGapError(
            f"angle eigenvalue {stray[0]:.6g} is not clustered near 0 or {c:g}",
            eigenvalue=float(stray[0]),
        )

    u = b1 @ vecs[:, near_c]
    complement = identity(n) - p1
    if u.shape[1]:
        v, _ = scipy.linalg.polar(complement @ p2 @ u)
        w = np.sqrt(c) * u + np.sqrt(1.0 - c) * v
        generic = projector(w)
        rest = complement - projector(v)
    else:
        generic = np.zeros((n, n), dtype=np.complex128)
        rest = complement

    # remaining part of P2 lives in ker P1, orthogonal to the Halmos blocks
    residual = rest @ p2 @ rest
    if op_norm(residual) > config.exact_tol(n):
        try:
            residual = rest @ correct_projection(residual) @ rest
        except LiftkitError as e:
            raise e.at(index=1)
    else:
        residual = np.zeros((n, n), dtype=np.complex128)

    p2_hat = hermitian_part(generic + residual)
    logger.debug(f"Snapped {int(near_c.sum())} angle(s) to {c:g}, {int(near_0.sum())} to 0")
    return p1, p2_hat
