"""
Almost commuting normal matrices.

Joint approximate diagonalization by complex Jacobi rotations (closed-form
Givens angles for Hermitian families), exact commuting normal replacements,
and the single Hermitian generator of a commuting normal family.
"""

import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from config import config
from errors import CommutationError, ConvergenceError
from matcore import BlockAlgebra, Mat, adjoint, from_spectrum, hermitian_eigh, op_norm, same_dim

logger = logging.getLogger(__name__)

# Joint eigenvalues closer than this are one cluster
CLUSTER_TOL = 1e-7

_ANGLE_BASIS = np.array([[1, 0, 0], [0, 1, 1], [0, -1j, 1j]])


@dataclass
class JacobiResult:
    """Unitary W with W* A_j W as diagonal as the sweeps could make it."""
    unitary: Mat
    sweeps: int
    off_mass: float
    converged: bool

    def to_dict(self) -> dict[str, Any]:
        return {"sweeps": self.sweeps, "off_mass": self.off_mass, "converged": self.converged}


def _off_mass(stack: np.ndarray) -> float:
    diag = np.einsum("kii->ki", stack)
    return float(np.sum(np.abs(stack) ** 2) - np.sum(np.abs(diag) ** 2))


def _hermitian_family(mats: Sequence[Mat]) -> np.ndarray:
    # off-diagonal mass of A equals that of Re A plus that of Im A
    out = []
    for a in mats:
        out.append(0.5 * (a + adjoint(a)))
        out.append(-0.5j * (a - adjoint(a)))
    return np.array(out)


def joint_diagonalize(mats: Sequence[Any], strict: bool = False) -> JacobiResult:
    """
    Find a unitary W minimizing the off-diagonal mass of all W* A_j W.

    Row-cyclic Jacobi sweeps over pivot pairs (p, q); stops when the mass
    drops below JACOBI_TOL * dim, when a sweep makes no rotation, or after
    JACOBI_MAX_SWEEPS sweeps.

    Raises:
        ConvergenceError: With strict set, if the mass is still above the
            tolerance when the sweeps stop
    """
    mats = same_dim(mats, "family")
    dim = mats[0].shape[0]
    stack = _hermitian_family(mats)
    w = np.eye(dim, dtype=np.complex128)
    tol = config.JACOBI_TOL * dim

    sweeps = 0
    off = _off_mass(stack)
    while off > tol and sweeps < config.JACOBI_MAX_SWEEPS:
        sweeps += 1
        rotated = False
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                g = np.vstack((stack[:, p, p] - stack[:, q, q], stack[:, p, q], stack[:, q, p]))
                gram = np.real(_ANGLE_BASIS @ (g @ g.conj().T) @ _ANGLE_BASIS.conj().T)
                _, vecs = np.linalg.eigh(gram)
                angles = vecs[:, -1]
                if angles[0] < 0:
                    angles = -angles
                c = np.sqrt(0.5 + angles[0] / 2)
                s = 0.5 * (angles[1] - 1j * angles[2]) / c
                if abs(s) <= config.JACOBI_TOL:
                    continue
                rotated = True
                giv = np.array([[c, -np.conj(s)], [s, c]])
                pair = [p, q]
                stack[:, pair, :] = np.einsum("ij,kjn->kin", adjoint(giv), stack[:, pair, :])
                stack[:, :, pair] = stack[:, :, pair] @ giv
                w[:, pair] = w[:, pair] @ giv
        off = _off_mass(stack)
        logger.debug(f"Jacobi sweep {sweeps}: off-diagonal mass {off:.3e}")
        if not rotated:
            break

    w, _ = scipy.linalg.polar(w)
    converged = off <= tol
    if not converged and strict:
        raise ConvergenceError(
            f"Jacobi stopped after {sweeps} sweeps with off-diagonal mass {off:.3e}",
            sweeps=sweeps,
            off_mass=off,
        )
    if not converged:
        logger.warning(f"Jacobi stopped after {sweeps} sweeps with off-diagonal mass {off:.3e}")
    return JacobiResult(unitary=w, sweeps=sweeps, off_mass=off, converged=converged)


def correct_commuting_normals(mats: Sequence[Any], p: float = 2.0) -> list[Mat]:
    """
    Replace almost commuting matrices by exactly commuting normal ones.

    B_j = W diag(W* A_j W) W* for the Jacobi unitary W, so ||B_j|| <= ||A_j||.
    The summed p-norm distance is logged; no bound on it is claimed.
    """
    mats = same_dim(mats, "family")
    big = [j for j, a in enumerate(mats) if op_norm(a) > 1.0 + config.exact_tol(a.shape[0])]
    if big:
        logger.warning(f"Inputs {big} have operator norm above 1")

    result = joint_diagonalize(mats)
    w = result.unitary
    out = [from_spectrum(np.diag(adjoint(w) @ a @ w), w) for a in mats]

    alg = BlockAlgebra.matrix(mats[0].shape[0])
    distance = sum(alg.p_norm(a - b, p) for a, b in zip(mats, out))
    logger.info(
        f"Commuting normals: {len(mats)} matrices, {result.sweeps} sweeps, "
        f"sum of {p:g}-norm distances {distance:.4g}"
    )
    return out


# ============================================================================
# Single generator
# ============================================================================

@dataclass(frozen=True)
class Interpolant:
    """Piecewise linear complex function through (nodes[i], values[i])."""
    nodes: tuple[float, ...]
    values: tuple[complex, ...]

    def __call__(self, t: Any) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        xs = np.asarray(self.nodes)
        ys = np.asarray(self.values, dtype=np.complex128)
        return np.interp(t, xs, ys.real) + 1j * np.interp(t, xs, ys.imag)

    def apply(self, c: Any) -> Mat:
        """f(C) for Hermitian C."""
        vals, vecs = hermitian_eigh(c, "C")
        return from_spectrum(self(vals), vecs)

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": list(self.nodes),
            "values": [[v.real, v.imag] for v in self.values],
        }


def _split(basis: Mat, x: Mat) -> list[tuple[Mat, float]]:
    """Split span(basis) into eigenspaces of the compression of Hermitian x."""
    vals, vecs = np.linalg.eigh(adjoint(basis) @ x @ basis)
    out, start = [], 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > CLUSTER_TOL:
            out.append((basis @ vecs[:, start:i], float(np.mean(vals[start:i]))))
            start = i
    return out


def single_generator(mats: Sequence[Any]) -> tuple[Mat, list[Interpolant]]:
    """
    Hermitian C with B_j = f_j(C) for an exactly commuting normal family.

    C takes the values 1..m on the m joint eigenspaces, ordered
    lexicographically by the joint eigenvalues (real part, then imaginary).

    Raises:
        CommutationError: If an input is not normal or two inputs do not commute
    """
    mats = same_dim(mats, "family")
    dim = mats[0].shape[0]
    tol = config.exact_tol(dim)
    for j, b in enumerate(mats):
        d = op_norm(b @ adjoint(b) - adjoint(b) @ b)
        if d > tol:
            raise CommutationError(f"input {j} is not normal", index=j, defect=d)
    for j in range(len(mats)):
        for k in range(j + 1, len(mats)):
            d = op_norm(mats[j] @ mats[k] - mats[k] @ mats[j])
            if d > tol:
                raise CommutationError(f"inputs {j} and {k} do not commute", pair=[j, k], defect=d)

    clusters: list[tuple[Mat, tuple[float, ...]]] = [(np.eye(dim, dtype=np.complex128), ())]
    for b in mats:
        for part in (0.5 * (b + adjoint(b)), -0.5j * (b - adjoint(b))):
            clusters = [
                (sub, key + (value,))
                for basis, key in clusters
                for sub, value in _split(basis, part)
            ]
    clusters.sort(key=lambda item: item[1])

    c = sum((label + 1) * (q @ adjoint(q)) for label, (q, _) in enumerate(clusters))
    c = 0.5 * (c + adjoint(c))
    nodes = tuple(float(label + 1) for label in range(len(clusters)))
    fns = [
        Interpolant(nodes, tuple(complex(key[2 * j], key[2 * j + 1]) for _, key in clusters))
        for j in range(len(mats))
    ]
    logger.debug(f"Single generator with {len(clusters)} joint eigenspaces")
    return c, fns
