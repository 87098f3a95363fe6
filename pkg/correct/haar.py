"""
Finite Haar unitaries: unitaries whose eigenvalue phases are equally spaced
in every block, so tau(V^k) = 0 below the block size.
"""

import logging
from typing import Any, Optional

import numpy as np
import scipy.linalg

from config import config
from matcore import BlockAlgebra, Mat, adjoint, as_mat
from .isometries import correct_unitary

logger = logging.getLogger(__name__)


def haar_moments(v: Any, alg: Optional[BlockAlgebra] = None, n: Optional[int] = None) -> list[float]:
    """|tau(V^k)| for k = 1..n (default: the smallest block size minus one)."""
    v = as_mat(v, "V")
    alg = alg or BlockAlgebra.matrix(v.shape[0])
    if n is None:
        n = min(alg.block_dims) - 1
    out, power = [], np.eye(v.shape[0], dtype=np.complex128)
    for _ in range(n):
        power = power @ v
        out.append(abs(alg.trace(power)))
    return out


def _snap_block(block: Mat) -> Mat:
    n = block.shape[0]
    t, z = scipy.linalg.schur(block, output="complex")
    phases = np.mod(np.angle(np.diag(t)), 2 * np.pi)
    order = np.argsort(phases, kind="stable")
    k = np.arange(n)
    theta = np.angle(np.sum(np.exp(1j * (phases[order] - 2 * np.pi * k / n))))
    targets = np.empty(n, dtype=np.complex128)
    targets[order] = np.exp(1j * (theta + 2 * np.pi * k / n))
    return (z * targets) @ adjoint(z)


def correct_haar(u: Any, alg: Optional[BlockAlgebra] = None) -> Mat:
    """
    Nearest finite Haar unitary.

    U is polar-corrected, then in each block the eigenvalue phases are replaced
    by e^{i theta} times the n-th roots of unity, matched in sorted phase order
    with theta minimizing sum |lambda_j - mu_j|^2.

    Raises:
        RankDeficiencyError: If U is singular
        ShapeError: If U is not block-diagonal for alg
    """
    u = as_mat(u, "U")
    alg = alg or BlockAlgebra.matrix(u.shape[0])
    u = alg.check(u, "U")
    v = correct_unitary(u)
    if max(haar_moments(v, alg), default=0.0) <= config.exact_tol(v.shape[0]):
        return v

    out = np.zeros_like(v)
    for s in alg.slices():
        out[s, s] = _snap_block(v[s, s])
    logger.debug(f"Haar snap moved V by {np.linalg.norm(out - v, 2):.3g}")
    return out
