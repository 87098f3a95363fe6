"""
Numerical substrate for liftkit.

Handles:
- Dense complex matrices and their JSON layout
- Block algebras with weighted tracial states and p-norms
- Piecewise scalar functions and Hermitian functional calculus
"""

from .matrix import (
    Mat,
    as_mat,
    same_dim,
    adjoint,
    hermitian_part,
    identity,
    direct_sum,
    op_norm,
    commutator,
    projection_defect,
    is_projection,
    unitary_defect,
    is_unitary,
    partial_isometry_defect,
    is_partial_isometry,
    projection_rank,
    basis_of,
    range_basis,
    projector,
    sorted_eigenvalues,
    mat_to_dict,
    mat_from_dict,
    mats_to_list,
    mats_from_list,
)
from .algebra import BlockAlgebra, p_norm, two_norm
from .calculus import (
    Piece,
    ScalarFn,
    identity_fn,
    retraction,
    isometry_weight,
    central_cutoff,
    plateau,
    inverse_sqrt,
    hermitian_eigh,
    from_spectrum,
    herm_calculus,
)

__all__ = [
    "Mat", "as_mat", "same_dim", "adjoint", "hermitian_part", "identity", "direct_sum",
    "op_norm", "commutator", "projection_defect", "is_projection", "unitary_defect",
    "is_unitary", "partial_isometry_defect", "is_partial_isometry", "projection_rank", "basis_of", "range_basis", "projector",
    "sorted_eigenvalues", "mat_to_dict", "mat_from_dict", "mats_to_list", "mats_from_list",
    "BlockAlgebra", "p_norm", "two_norm",
    "Piece", "ScalarFn", "identity_fn", "retraction", "isometry_weight", "central_cutoff",
    "plateau", "inverse_sqrt", "hermitian_eigh", "from_spectrum", "herm_calculus",
]
