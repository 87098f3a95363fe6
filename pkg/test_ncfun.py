"""
Tests for expression DAGs, relation builders and defect reports.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ArityError, ShapeError
from matcore import BlockAlgebra, retraction
from ncfun import (
    Calc,
    Relation,
    Sum,
    Unit,
    Var,
    chebyshev_approximant,
    compose,
    defect,
    evaluate,
    relation_from_dict,
    relation_to_dict,
    rel_commutator,
    rel_commuting_normals,
    rel_direct_sum,
    rel_glue,
    rel_glue_joint,
    rel_matrix_generator,
    rel_partial_isometry,
    rel_projection,
    rel_projections,
    rel_resolution,
    rel_tensor,
    rel_two_projections,
    shift,
    variables,
)
from correct import MatrixUnitSystem, generator_from_units

NILPOTENT = np.array([[0.0, 1.0], [0.0, 0.0]])


def test_evaluate_products_and_adjoints():
    x = Var(0)
    assert_allclose(evaluate(x.H * x, [NILPOTENT]), np.diag([0.0, 1.0]))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_evaluation_is_unitarily_equivariant(seed, random_unitary):
    gen = np.random.default_rng(seed)
    a, b = (gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4)) for _ in range(2))
    x, y = variables(2)
    e = x * y + 2 * x.H - 0.5j * (y * y * x) + Unit()
    w = random_unitary(4)
    conj = [w.conj().T @ m @ w for m in (a, b)]
    assert_allclose(evaluate(e, conj), w.conj().T @ evaluate(e, [a, b]) @ w, atol=1e-10)


def test_calculus_node():
    x = Var(0)
    e = Calc(retraction(), 0.5 * (x + x.H))
    assert_allclose(evaluate(e, [np.diag([0.05, 0.95])]), np.diag([0.0, 1.0]), atol=1e-15)


def test_shared_nodes_evaluate_once():
    x = Var(0)
    square = x * x
    e = square + square
    assert_allclose(evaluate(e, [np.diag([2.0, 3.0])]), np.diag([8.0, 18.0]))


def test_compose_and_shift():
    x, y = variables(2)
    swapped = compose(x * y, [y, x])
    a, b = np.diag([1.0, 2.0]), np.array([[0.0, 1.0], [1.0, 0.0]])
    assert_allclose(evaluate(swapped, [a, b]), b @ a)
    assert shift(x * y, 2).arity == 4


def test_arity_errors():
    with pytest.raises(ArityError):
        Relation("too_wide", Var(2), 2)
    with pytest.raises(ArityError):
        Sum(())
    with pytest.raises(ShapeError):
        evaluate(rel_projection(), [np.eye(2), np.eye(2)])


def test_relation_json_layout(random_hermitian):
    rel = rel_projection()
    again = relation_from_dict(relation_to_dict(rel))
    h = random_hermitian(3)
    assert again.arity == 1
    assert_allclose(evaluate(again, [h]), evaluate(rel, [h]), atol=1e-14)


# ============================================================================
# Relation builders
# ============================================================================

def test_projection_relation_values():
    assert_allclose(evaluate(rel_projection(), [np.diag([1.0, 0.0])]), np.zeros((2, 2)))
    assert_allclose(evaluate(rel_projection(), [0.5]), [[0.0625]])
    assert defect(rel_projection(), [NILPOTENT]).op == pytest.approx(1.0)


def test_partial_isometry_relation(random_unitary):
    w = random_unitary(4)
    p = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    v = w @ p
    q = v @ v.conj().T
    assert defect(rel_partial_isometry(), [p, q, v]).op <= 1e-12
    gen = np.random.default_rng(7)
    a = gen.standard_normal((4, 4)) / 4
    assert defect(rel_partial_isometry(), [p, q, a]).op > 0


def test_direct_sum_relation_vanishes_on_exact_data():
    rel = rel_direct_sum(rel_projection(), rel_projection())
    p = np.diag([1.0, 1.0, 0.0, 0.0])
    x = np.diag([1.0, 0.0, 0.0, 0.0])
    y = np.diag([0.0, 0.0, 0.0, 1.0])
    assert rel.arity == 3
    assert defect(rel, [x, y, p]).op <= 1e-14


def test_tensor_relation_vanishes_on_exact_data():
    units = MatrixUnitSystem.standard((2,), 2)
    s = generator_from_units(units)
    t = np.kron(np.eye(2), np.diag([1.0, 0.0]))
    rel = rel_tensor(rel_projection(), rel_matrix_generator(2))
    assert rel.arity == 2
    assert defect(rel, [t, s]).op <= 1e-10
    assert defect(rel, [np.kron(np.diag([1.0, 0.0]), np.eye(2)), s]).op > 0.1


def test_glue_relations():
    rel = rel_glue(rel_projection(), rel_projection(), 1)
    assert defect(rel, [NILPOTENT]).op <= 1e-14
    assert defect(rel, [0.5 * NILPOTENT]).op > 0
    joint = rel_glue_joint(rel_projections(2), 1)
    assert defect(joint, [NILPOTENT]).op <= 1e-14
    with pytest.raises(ArityError):
        rel_glue(rel_projection(), rel_projections(2), 1)
    with pytest.raises(ArityError):
        rel_glue_joint(rel_projection(), 1)


def test_commuting_normals_relation(clock_shift):
    rel = rel_commuting_normals(2)
    assert defect(rel, [np.diag([1.0, 2j]), np.diag([3.0, -1.0])]).op <= 1e-14
    assert defect(rel, list(clock_shift(4))).op > 0.1


def test_two_projections_relation():
    rel = rel_two_projections(0.5)
    assert defect(rel, [np.diag([1.0, 0.0]), np.full((2, 2), 0.5)]).op <= 1e-14
    assert defect(rel, [np.diag([1.0, 0.0]), np.diag([1.0, 0.0])]).op > 0


def test_resolution_relation():
    ps = [np.diag([1.0, 0.0, 0.0]), np.diag([0.0, 1.0, 1.0])]
    assert defect(rel_resolution(2), ps).satisfied
    assert not defect(rel_resolution(2), [np.diag([1.0, 0.0, 0.0]), np.diag([0.0, 1.0, 0.0])]).satisfied


# ============================================================================
# Defect reports
# ============================================================================

def test_scalar_defect_report():
    report = defect(rel_projection(), [0.5], ps=(2.0,))
    assert report.op == pytest.approx(0.0625)
    assert report.p_norms[2.0] == pytest.approx(0.0625)
    labels = [s.label for s in report.summands]
    assert labels == ["self_adjoint", "idempotent"]


@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_clock_shift_commutator(n, clock_shift):
    u, v = clock_shift(n)
    report = defect(rel_commutator(), [u, v])
    assert report.p_norms[2.0] == pytest.approx(2 * np.sin(np.pi / n), abs=1e-12)


def test_defect_with_block_algebra():
    alg = BlockAlgebra((1, 1), (0.25, 0.75))
    report = defect(rel_projection(), [np.diag([0.5, 1.0])], alg=alg, ps=(1.0,))
    # only the first block is off, with weight 1/4
    assert report.p_norms[1.0] == pytest.approx(0.25 * 0.0625)


def test_chebyshev_approximants_converge():
    x = Var(0)
    e = Calc(retraction(), 0.5 * (x + x.H))
    a = np.diag([0.05, 0.2, 0.8, 0.95])
    exact = evaluate(e, [a])
    errors = [
        np.linalg.norm(evaluate(chebyshev_approximant(e, k), [a]) - exact, 2)
        for k in (4, 64)
    ]
    assert errors[1] < errors[0]
    assert errors[1] < 0.05
