"""
Correctors for composite relations: tensor with M_n, direct sums, and
blockwise (m x m block matrix) constructions.
"""

import logging
from typing import Any, Optional, Sequence

import numpy as np

from errors import LiftkitError, ShapeError, SpectralGapError
from matcore import (
    Mat,
    adjoint,
    as_mat,
    basis_of,
    central_cutoff,
    hermitian_eigh,
    herm_calculus,
    identity,
    op_norm,
    plateau,
    same_dim,
)
from .families import CorrectorFamily
from .units import MatrixUnitSystem, correct_matrix_units

logger = logging.getLogger(__name__)


# ============================================================================
# Tensor with M_n
# ============================================================================

def generator_units(s: Any, n: int) -> MatrixUnitSystem:
    """
    Approximate matrix units read off an approximate M_n generator S.

    Diagonal units are the spectral projections of Re S at 1..n, the step
    f_k = e_{k+1,k+1} (S - S*)/2 e_kk approximates e_{k+1,k}, and
    e_{0t} = f_0* f_1* ... f_{t-1}*.

    Raises:
        SpectralGapError: If Re S has an eigenvalue farther than 1/4 from {1, ..., n}
    """
    s = as_mat(s, "S")
    if n < 1:
        raise ShapeError("block size must be positive", n=n)
    re = 0.5 * (s + adjoint(s))
    skew = 0.5 * (s - adjoint(s))
    vals, _ = hermitian_eigh(re, "Re S")
    levels = np.arange(1, n + 1)
    distance = np.min(np.abs(vals[:, None] - levels[None, :]), axis=1)
    far = vals[distance > 0.25]
    if far.size:
        raise SpectralGapError(
            f"eigenvalue {far[0]:.6g} of Re S is not within 1/4 of 1..{n}",
            eigenvalue=float(far[0]),
        )

    diag = [herm_calculus(re, plateau(float(k + 1)), name="Re S") for k in range(n)]
    units: dict[tuple[int, int, int], Mat] = {(0, k, k): d for k, d in enumerate(diag)}
    row = diag[0]
    for t in range(1, n):
        step = diag[t] @ skew @ diag[t - 1]
        row = row @ adjoint(step)
        units[(0, 0, t)] = row
    return MatrixUnitSystem((n,), units)


def generator_from_units(units: MatrixUnitSystem) -> Mat:
    """y = sum_k (k+1) e_kk + sum_k (e_{k+1,k} - e_{k,k+1}) for a single-block system."""
    if len(units.structure) != 1:
        raise ShapeError("a generator needs a single-block system", structure=list(units.structure))
    n = units.structure[0]
    y = sum((k + 1) * units[(0, k, k)] for k in range(n))
    for k in range(n - 1):
        y = y + units[(0, k + 1, k)] - units[(0, k, k + 1)]
    return y


def commutator_estimate(ts: Sequence[Any], units: MatrixUnitSystem) -> list[float]:
    """sum_j ||e_0j T - T e_0j|| for every T, the bound on ||T - T_hat||."""
    n = units.structure[0]
    return [
        float(sum(op_norm(units[(0, 0, j)] @ t - t @ units[(0, 0, j)]) for j in range(n)))
        for t in ts
    ]


def correct_tensor(
    ts: Sequence[Any],
    s: Any,
    n: int,
    base: Optional[CorrectorFamily] = None,
) -> tuple[list[Mat], Mat]:
    """
    Correct (T_1, ..., T_m, S) to an exact copy of A tensor M_n.

    S is corrected to an exact generator of M_n through its matrix units; each
    T_k is replaced by sum_j e_j0 T_k e_0j, which commutes with every unit.
    With a base family, the corner tuple e_00 T e_00 is corrected first.

    Args:
        ts: Approximate generators of A
        s: Approximate generator of M_n
        n: Block size
        base: Optional corrector for the relation of A

    Returns:
        (T_hat list, S_hat)

    Raises:
        SpectralGapError: If S is far from any generator
        ShapeError: If n does not divide the dimension
        LiftkitError: Constituent corrector errors
    """
    mats = same_dim([*ts, s], "tensor data")
    ts, s = mats[:-1], mats[-1]
    dim = s.shape[0]
    if n < 1 or dim % n:
        raise ShapeError(f"block size {n} does not divide dimension {dim}", n=n, dim=dim)

    units = correct_matrix_units(generator_units(s, n))
    s_hat = generator_from_units(units)

    corner = [units[(0, 0, 0)] @ t @ units[(0, 0, 0)] for t in ts]
    if base is not None and ts:
        w = basis_of(units[(0, 0, 0)])
        fixed = base([adjoint(w) @ c @ w for c in corner])
        corner = [w @ c @ adjoint(w) for c in fixed]

    t_hat = []
    for c in corner:
        t_hat.append(sum(units[(0, j, 0)] @ c @ units[(0, 0, j)] for j in range(n)))
    if ts:
        logger.debug(f"Tensor correction distances {[round(op_norm(a - b), 6) for a, b in zip(ts, t_hat)]}")
    return t_hat, s_hat


# ============================================================================
# Direct sums
# ============================================================================

def _corner(mats: list[Mat], e: Mat, family: Optional[CorrectorFamily], offset: int) -> list[Mat]:
    w = basis_of(e)
    compressed = [adjoint(w) @ m @ w for m in mats]
    if family is not None and compressed and w.shape[1]:
        try:
            compressed = family(compressed)
        except LiftkitError as err:
            index = err.details.pop("index", None)
            raise err.at(index=offset + index if index is not None else offset)
    return [w @ c @ adjoint(w) for c in compressed]


def correct_direct_sum(
    ss: Sequence[Any],
    ts: Sequence[Any],
    qc: Any,
    corr_s: Optional[CorrectorFamily] = None,
    corr_t: Optional[CorrectorFamily] = None,
) -> tuple[list[Mat], list[Mat], Mat]:
    """
    Correct (S_1..S_m, T_1..T_k, Qc) to an exact element of A + B.

    E = f((Qc + Qc*)/2) with f the central cutoff; S_j is compressed to E
    and T_k to 1 - E, each optionally corrected inside its corner.

    Returns:
        (S_hat list, T_hat list, E) with S_hat E = E S_hat = S_hat and T_hat E = E T_hat = 0

    Raises:
        SpectralGapError: If (Qc + Qc*)/2 has spectrum in (1/4, 3/4)
    """
    mats = same_dim([*ss, *ts, qc], "direct sum data")
    m, k = len(ss), len(ts)
    ss, ts, qc = mats[:m], mats[m:m + k], mats[-1]
    dim = qc.shape[0]

    h = 0.5 * (qc + adjoint(qc))
    vals = np.linalg.eigvalsh(h)
    inside = vals[(vals > 0.25) & (vals < 0.75)]
    if inside.size:
        raise SpectralGapError(
            f"eigenvalue {inside[0]:.6g} of (Qc+Qc*)/2 lies in (1/4, 3/4)",
            eigenvalue=float(inside[0]),
        )
    e = herm_calculus(h, central_cutoff(), name="(Qc+Qc*)/2")
    e = 0.5 * (e + adjoint(e))

    s_hat = _corner(ss, e, corr_s, 0)
    t_hat = _corner(ts, identity(dim) - e, corr_t, m)
    logger.debug(f"Direct sum split dim {dim} as {int(round(np.trace(e).real))} + {dim - int(round(np.trace(e).real))}")
    return s_hat, t_hat, e


# ============================================================================
# Blockwise (M_m over A)
# ============================================================================

def assemble_blocks(entries: Any) -> list[Mat]:
    """(m, m, k, d, d) entry array to k block matrices of size m d."""
    arr = np.asarray(entries, dtype=np.complex128)
    if arr.ndim != 5 or arr.shape[0] != arr.shape[1] or arr.shape[3] != arr.shape[4]:
        raise ShapeError("entries must have shape (m, m, k, d, d)", shape=list(arr.shape))
    m, _, k, d, _ = arr.shape
    return [arr[:, :, j].transpose(0, 2, 1, 3).reshape(m * d, m * d) for j in range(k)]


def extract_blocks(mats: Sequence[Mat], m: int) -> np.ndarray:
    """Inverse of assemble_blocks."""
    d = mats[0].shape[0] // m
    return np.stack(
        [np.asarray(a).reshape(m, d, m, d).transpose(0, 2, 1, 3) for a in mats],
        axis=2,
    )


def correct_blockwise(entries: Any, base: CorrectorFamily) -> np.ndarray:
    """
    Correct an m x m array of tuples by correcting the assembled block matrices.

    Variable j's block matrix is (a_{s,t,j})_{s,t}; base.corrector runs on the
    k assembled matrices and the results are cut back into entries.

    Raises:
        ShapeError: On a malformed entry array
        LiftkitError: Base corrector errors
    """
    arr = np.asarray(entries, dtype=np.complex128)
    assembled = assemble_blocks(arr)
    fixed = base(assembled)
    logger.debug(f"Blockwise correction with '{base.name}' on {arr.shape[0]}x{arr.shape[0]} blocks")
    return extract_blocks(fixed, arr.shape[0])
