"""
Noncommutative continuous functions.

Handles:
- Expression DAGs over variables, adjoints, sums, products and functional calculus
- Builders for the universal relations (projection, glue, tensor, direct sum, ...)
- Defect measurement in operator and tracial p-norms
"""

from .expr import (
    NcExpr,
    Var,
    Unit,
    Adjoint,
    Sum,
    Product,
    Scale,
    Calc,
    Relation,
    variables,
    compose,
    shift,
    evaluate,
    chebyshev_approximant,
    expr_to_dict,
    expr_from_dict,
    relation_to_dict,
    relation_from_dict,
)
from .relations import (
    rel_projection,
    rel_projections,
    rel_unitary,
    rel_unitaries,
    rel_partial_isometry,
    rel_commutator,
    rel_commuting_normals,
    rel_two_projections,
    rel_resolution,
    rel_matrix_generator,
    rel_combined,
    rel_glue,
    rel_glue_joint,
    rel_tensor,
    rel_direct_sum,
    RELATION_BUILDERS,
)
from .defect import DefectReport, SummandDefect, defect

__all__ = [
    "NcExpr", "Var", "Unit", "Adjoint", "Sum", "Product", "Scale", "Calc", "Relation",
    "variables", "compose", "shift", "evaluate", "chebyshev_approximant",
    "expr_to_dict", "expr_from_dict", "relation_to_dict", "relation_from_dict",
    "rel_projection", "rel_projections", "rel_unitary", "rel_unitaries", "rel_partial_isometry",
    "rel_commutator", "rel_commuting_normals", "rel_two_projections", "rel_resolution",
    "rel_matrix_generator", "rel_combined", "rel_glue", "rel_glue_joint", "rel_tensor",
    "rel_direct_sum", "RELATION_BUILDERS",
    "DefectReport", "SummandDefect", "defect",
]
