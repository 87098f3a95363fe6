"""
Finite truncations of tracial ultraproducts.

Handles:
- Representative sequences, tail filters and tail norms
- Diagonal completion of 2-norm Cauchy arrays
- Lifting projections, spectral chains and partial isometries per index
- Extending matrix units along Bratteli inclusions
"""

from .sequence import RepSequence, TailFilter, SpectralChain, tail_p_norm, in_ideal, tail_trace
from .completion import validate_cauchy, cauchy_sets, diagonal_completion
from .lifting import (
    target_rank,
    lift_projection_between,
    lift_projection_trace,
    default_grid,
    lift_chain,
    lift_partial_isometry,
    partial_isometry_profile,
)
from .bratteli import (
    InclusionData,
    GluedGenerators,
    standard_units,
    restrict_units,
    propagate_weights,
    check_chain,
    extend_matrix_units,
    bratteli_lift,
)

__all__ = [
    "RepSequence", "TailFilter", "SpectralChain", "tail_p_norm", "in_ideal", "tail_trace",
    "validate_cauchy", "cauchy_sets", "diagonal_completion",
    "target_rank", "lift_projection_between", "lift_projection_trace", "default_grid",
    "lift_chain", "lift_partial_isometry", "partial_isometry_profile",
    "InclusionData", "GluedGenerators", "standard_units", "restrict_units", "propagate_weights", "check_chain",
    "extend_matrix_units", "bratteli_lift",
]
