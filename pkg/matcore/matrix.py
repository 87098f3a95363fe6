"""
Dense complex matrices: validation, serialization and exactness checks.

A Mat is a square complex128 numpy array. Operations never mutate their
arguments, so Mats can be shared freely between threads.
"""

from typing import Any, Iterable, Sequence

import numpy as np
import numpy.typing as npt
import scipy.linalg

from config import config
from errors import InvalidInputError, SchemaError, ShapeError

Mat = npt.NDArray[np.complex128]


def as_mat(a: Any, name: str = "matrix") -> Mat:
    """
    Coerce a to a finite square complex matrix.

    Scalars are promoted to 1x1 matrices.

    Raises:
        ShapeError: If a is not square
        InvalidInputError: If a has NaN or Inf entries
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ShapeError(f"{name} must be a non-empty square matrix", shape=tuple(arr.shape))
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def same_dim(mats: Sequence[Any], name: str = "arguments") -> list[Mat]:
    """Validate a tuple of matrices sharing one dimension."""
    out = [as_mat(m, f"{name}[{k}]") for k, m in enumerate(mats)]
    dims = {m.shape[0] for m in out}
    if len(dims) > 1:
        raise ShapeError(f"{name} have different dimensions", dims=sorted(dims))
    return out


def adjoint(a: Mat) -> Mat:
    return a.conj().T


def hermitian_part(a: Mat) -> Mat:
    return 0.5 * (a + adjoint(a))


def identity(n: int) -> Mat:
    return np.eye(n, dtype=np.complex128)


def direct_sum(*mats: Mat) -> Mat:
    """Block-diagonal direct sum A1 + A2 + ..."""
    return np.asarray(scipy.linalg.block_diag(*mats), dtype=np.complex128)


def op_norm(a: Any) -> float:
    """Operator norm (largest singular value)."""
    return float(np.linalg.norm(as_mat(a), 2))


def commutator(a: Mat, b: Mat) -> Mat:
    return a @ b - b @ a


# ============================================================================
# Exactness contract
# ============================================================================

def projection_defect(x: Mat) -> float:
    """||X - X*|| + ||X - X^2|| in operator norm."""
    return op_norm(x - adjoint(x)) + op_norm(x - x @ x)


def is_projection(x: Mat) -> bool:
    return projection_defect(x) <= config.exact_tol(x.shape[0])


def unitary_defect(u: Mat) -> float:
    one = identity(u.shape[0])
    return op_norm(adjoint(u) @ u - one) + op_norm(u @ adjoint(u) - one)


def is_unitary(u: Mat) -> bool:
    return unitary_defect(u) <= config.exact_tol(u.shape[0])


def partial_isometry_defect(v: Mat, source: Mat, target: Mat) -> float:
    """||V*V - source|| + ||VV* - target||."""
    return op_norm(adjoint(v) @ v - source) + op_norm(v @ adjoint(v) - target)


def is_partial_isometry(v: Mat) -> bool:
    """V*V is a projection (then so is VV*)."""
    return is_projection(adjoint(v) @ v)


def projection_rank(p: Mat) -> int:
    """Rank of an exact projection, read off its trace."""
    return int(round(float(np.trace(p).real)))


def range_basis(p: Mat) -> tuple[Mat, Mat]:
    """
    Orthonormal bases of the range and kernel of a projection.

    Returns:
        (range columns, kernel columns), together a unitary matrix
    """
    vals, vecs = np.linalg.eigh(hermitian_part(p))
    keep = vals > 0.5
    return vecs[:, keep], vecs[:, ~keep]


def basis_of(p: Mat) -> Mat:
    """Orthonormal basis of the range of an exact projection."""
    return range_basis(p)[0]


def projector(basis: Mat) -> Mat:
    """Orthogonal projection onto the span of orthonormal columns."""
    return basis @ adjoint(basis)


def sorted_eigenvalues(a: Mat) -> np.ndarray:
    """Eigenvalues ordered by real part, ties by imaginary part."""
    return np.sort_complex(np.linalg.eigvals(as_mat(a)))


# ============================================================================
# Serialization
# ============================================================================

def mat_to_dict(a: Mat) -> dict[str, Any]:
    """Convert to the {"dim", "re", "im"} JSON layout."""
    a = as_mat(a)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def mat_from_dict(data: dict[str, Any], name: str = "matrix") -> Mat:
    """Reconstruct from the {"dim", "re", "im"} JSON layout."""
    if not isinstance(data, dict) or "re" not in data:
        raise SchemaError(f"{name}: expected an object with 're' (and optional 'im')", field=name)
    try:
        re = np.asarray(data["re"], dtype=np.float64)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{name}: matrix entries must be numbers: {e}", field=name)
    if re.shape != im.shape:
        raise SchemaError(f"{name}: 're' and 'im' shapes differ", field=name)
    mat = as_mat(re + 1j * im, name)
    if "dim" in data and int(data["dim"]) != mat.shape[0]:
        raise SchemaError(f"{name}: declared dim {data['dim']} does not match entries", field=name)
    return mat


def mats_to_list(mats: Iterable[Mat]) -> list[dict[str, Any]]:
    return [mat_to_dict(m) for m in mats]


def mats_from_list(items: Any, name: str = "matrices") -> list[Mat]:
    if not isinstance(items, list):
        raise SchemaError(f"{name}: expected a list of matrices", field=name)
    return [mat_from_dict(item, f"{name}[{k}]") for k, item in enumerate(items)]
