"""
Tests for matrices, block algebras and functional calculus.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from errors import DomainError, InvalidInputError, InvalidParameterError, ShapeError, SymmetryError
from matcore import (
    BlockAlgebra,
    Piece,
    ScalarFn,
    as_mat,
    central_cutoff,
    herm_calculus,
    identity_fn,
    inverse_sqrt,
    is_projection,
    mat_from_dict,
    mat_to_dict,
    op_norm,
    plateau,
    projection_defect,
    retraction,
)


def _matrix(seed, n):
    gen = np.random.default_rng(seed)
    return gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))


# ============================================================================
# Matrices
# ============================================================================

@pytest.mark.parametrize("a, expected", [
    (np.eye(3), 1.0),
    (np.diag([0.5, -2.0]), 2.0),
    (np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0),
])
def test_op_norm(a, expected):
    assert op_norm(a) == pytest.approx(expected, abs=1e-12)


def test_as_mat_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        as_mat(np.array([[1.0, np.nan], [0.0, 1.0]]))
    with pytest.raises(ShapeError):
        as_mat(np.ones((2, 3)))
    assert as_mat(0.5).shape == (1, 1)


def test_projection_defect():
    assert projection_defect(np.diag([1.0, 0.0])) == 0.0
    assert is_projection(np.diag([1.0, 0.0, 1.0]))
    assert not is_projection(np.diag([0.9, 0.0]))


def test_matrix_json_layout():
    a = np.array([[1.0, 2.0j], [0.5, -1.0]])
    data = mat_to_dict(a)
    assert data["dim"] == 2
    assert data["im"][0][1] == 2.0
    assert_allclose(mat_from_dict(data), a)


# ============================================================================
# Block algebras
# ============================================================================

@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 7.0])
def test_identity_has_unit_norm(p):
    assert BlockAlgebra.matrix(4).p_norm(np.eye(4), p) == pytest.approx(1.0)
    assert BlockAlgebra.from_blocks([2, 3]).p_norm(np.eye(5), p) == pytest.approx(1.0)


def test_p_norm_examples():
    m2 = BlockAlgebra.matrix(2)
    assert m2.p_norm(np.diag([1.0, 0.0]), 2.0) == pytest.approx(np.sqrt(0.5))
    assert m2.p_norm(np.diag([1.0, 2.0]), 1.0) == pytest.approx(1.5)


def test_p_norm_rejects_small_p():
    with pytest.raises(InvalidParameterError):
        BlockAlgebra.matrix(2).p_norm(np.eye(2), 0.5)


def test_algebra_validation():
    with pytest.raises(InvalidParameterError):
        BlockAlgebra((2, 3), (0.5, 0.4))
    alg = BlockAlgebra.from_blocks([1, 2])
    with pytest.raises(ShapeError):
        alg.check(np.ones((3, 3)))
    with pytest.raises(ShapeError):
        alg.check(np.eye(4))


def test_weighted_trace():
    alg = BlockAlgebra((1, 2), (0.25, 0.75))
    a = np.diag([4.0, 1.0, 3.0])
    # 0.25 * 4 + 0.75 * (1 + 3) / 2
    assert alg.trace(a) == pytest.approx(2.5)
    assert alg.min_atom == pytest.approx(0.25)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_trace_is_tracial(seed, n):
    a, b = _matrix(seed, n), _matrix(seed + 1, n)
    alg = BlockAlgebra.matrix(n)
    assert abs(alg.trace(a @ b) - alg.trace(b @ a)) <= 1e-10 * (1 + op_norm(a) * op_norm(b))


@settings(max_examples=200, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.integers(1, 6),
    st.floats(1.0, 8.0),
    st.floats(1.0, 8.0),
)
def test_p_norms_are_monotone(seed, n, p, q):
    p, q = min(p, q), max(p, q)
    a = _matrix(seed, n)
    alg = BlockAlgebra.matrix(n)
    small, large = alg.p_norm(a, p), alg.p_norm(a, q)
    assert small <= large + 1e-10 * (1 + large)
    assert large <= op_norm(a) + 1e-10 * (1 + op_norm(a))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(2.0, 8.0), st.floats(0.0, 1.0))
def test_contractions_shrink_higher_norms(seed, n, p, scale):
    a = _matrix(seed, n)
    a = scale * a / op_norm(a)
    alg = BlockAlgebra.matrix(n)
    assert alg.p_norm(a, p) ** p <= alg.two_norm(a) ** 2 + 1e-10


# ============================================================================
# Functional calculus
# ============================================================================

def test_identity_calculus(random_hermitian):
    h = random_hermitian(5)
    assert_allclose(herm_calculus(h, identity_fn()), h, atol=1e-12)


def test_retraction_rounds_spectrum():
    assert_allclose(herm_calculus(np.diag([0.05, 0.95]), retraction()), np.diag([0.0, 1.0]), atol=1e-15)


def test_inverse_square_root(random_unitary, rng):
    w = random_unitary(6)
    a = (w * rng.uniform(0.75, 1.25, 6)) @ w.conj().T
    r = herm_calculus(a, inverse_sqrt(0.5))
    assert_allclose(r @ r, np.linalg.inv(a), atol=1e-9)


def test_calculus_errors():
    with pytest.raises(DomainError) as err:
        herm_calculus(np.diag([0.1, 1.0]), inverse_sqrt(0.5))
    assert err.value.details["eigenvalue"] == pytest.approx(0.1)
    with pytest.raises(SymmetryError):
        herm_calculus(np.array([[0.0, 1.0], [0.0, 0.0]]), identity_fn())


def test_named_functions():
    assert_allclose(central_cutoff()([0.0, 0.25, 0.5, 0.75, 1.0]), [0.0, 0.0, 0.5, 1.0, 1.0])
    assert_allclose(plateau(2.0)([1.0, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0]), [0.0, 0.5, 1.0, 1.0, 1.0, 0.5, 0.0])
    assert_allclose(retraction()([0.5]), [0.5])


def test_scalar_fn_requires_continuity():
    with pytest.raises(InvalidParameterError):
        ScalarFn((Piece(0.0, 1.0, "constant", 0.0), Piece(1.0, 2.0, "constant", 1.0)))
    clamp = ScalarFn((Piece(0.0, 1.0, "affine", 1.0, 0.0),), outside="clamp")
    assert_allclose(clamp([-1.0, 2.0]), [0.0, 1.0])
