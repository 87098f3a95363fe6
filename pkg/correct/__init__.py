"""
Correctors: maps from approximate to exact solutions of relations.

Handles:
- Projections, unitaries, partial isometries, resolutions and matrix units
- Corrector families, gluing, tensor, direct sum and blockwise constructions
- Commuting normal families, single generators and finite Haar unitaries
"""

from .projections import correct_projection, correct_resolution, correct_two_projections
from .isometries import check_projection, correct_unitary, correct_partial_isometry, polar_partial_isometry
from .units import MatrixUnitSystem, correct_matrix_units
from .families import (
    CorrectorFamily,
    projection_family,
    unitary_family,
    two_projection_family,
    resolution_family,
    combine_families,
    glue,
    glue_joint,
    glue_family,
    glue_joint_family,
)
from .composite import (
    generator_units,
    generator_from_units,
    commutator_estimate,
    correct_tensor,
    correct_direct_sum,
    assemble_blocks,
    extract_blocks,
    correct_blockwise,
)
from .normals import JacobiResult, Interpolant, joint_diagonalize, correct_commuting_normals, single_generator
from .haar import correct_haar, haar_moments

__all__ = [
    "correct_projection", "correct_resolution", "correct_two_projections",
    "check_projection", "correct_unitary", "correct_partial_isometry", "polar_partial_isometry",
    "MatrixUnitSystem", "correct_matrix_units",
    "CorrectorFamily", "projection_family", "unitary_family", "two_projection_family",
    "resolution_family", "combine_families", "glue", "glue_joint", "glue_family", "glue_joint_family",
    "generator_units", "generator_from_units", "commutator_estimate", "correct_tensor",
    "correct_direct_sum", "assemble_blocks", "extract_blocks", "correct_blockwise",
    "JacobiResult", "Interpolant", "joint_diagonalize", "correct_commuting_normals", "single_generator",
    "correct_haar", "haar_moments",
]
