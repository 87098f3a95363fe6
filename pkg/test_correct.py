"""
Tests for the correctors.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from config import config
from errors import (
    ArityError,
    CommutationError,
    ConvergenceError,
    DegenerateCompressionError,
    DeltaTooLargeError,
    InvalidParameterError,
    ProjectionError,
    RankDeficiencyError,
    RankMismatchError,
    ShapeError,
    SpectralGapError,
)
from matcore import BlockAlgebra, direct_sum, is_projection, is_unitary, op_norm, partial_isometry_defect
from ncfun import defect, rel_resolution
from correct import (
    MatrixUnitSystem,
    assemble_blocks,
    combine_families,
    correct_blockwise,
    correct_commuting_normals,
    correct_direct_sum,
    correct_haar,
    correct_matrix_units,
    correct_partial_isometry,
    correct_projection,
    correct_resolution,
    correct_tensor,
    correct_two_projections,
    correct_unitary,
    extract_blocks,
    generator_from_units,
    generator_units,
    glue,
    glue_joint,
    glue_family,
    glue_joint_family,
    haar_moments,
    joint_diagonalize,
    polar_partial_isometry,
    projection_family,
    single_generator,
    two_projection_family,
)


def _unitary(gen, n):
    z = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _hermitian(gen, n):
    z = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    h = 0.5 * (z + z.conj().T)
    return h / np.linalg.norm(h, 2)


def _noise(gen, n):
    z = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    return z / np.linalg.norm(z, 2)


# ============================================================================
# Projections
# ============================================================================

def test_projection_example():
    assert_allclose(correct_projection(np.diag([0.95, 0.05])), np.diag([1.0, 0.0]), atol=1e-15)


def test_projection_spectral_gap():
    with pytest.raises(SpectralGapError) as err:
        correct_projection(np.diag([0.5, 1.0]))
    assert err.value.details["eigenvalue"] == pytest.approx(0.5)
    assert err.value.exit_code == 2


def test_projection_fixed_point(random_projection):
    p = random_projection(5, 2)
    assert_allclose(correct_projection(p), p, atol=0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.floats(0.0, 0.3))
def test_projection_rounding_is_close(seed, n, eps):
    gen = np.random.default_rng(seed)
    rank = int(gen.integers(0, n + 1))
    w = _unitary(gen, n)[:, :rank]
    p = w @ w.conj().T
    a = p + eps * _hermitian(gen, n)
    out = correct_projection(a)
    assert is_projection(out)
    assert op_norm(out - a) <= op_norm(a - p) + 1e-12
    assert round(np.trace(out).real) == rank


def test_resolution(rng, random_unitary):
    w = random_unitary(6)
    exact = [w[:, s] @ w[:, s].conj().T for s in (slice(0, 2), slice(2, 3), slice(3, 6))]
    noisy = [p + 0.005 * _hermitian(rng, 6) for p in exact]
    out = correct_resolution(noisy)
    assert defect(rel_resolution(3), out).satisfied
    for a, b in zip(noisy, out):
        assert op_norm(a - b) < 0.05


def test_resolution_reports_failing_index():
    with pytest.raises(SpectralGapError) as err:
        correct_resolution([np.diag([1.0, 0.0]), np.diag([0.0, 0.5])])
    assert err.value.details["index"] == 1


def test_two_projections(rng):
    c = 0.3
    v = np.array([np.sqrt(c), np.sqrt(1 - c)])
    p1, p2 = np.diag([1.0, 0.0]), np.outer(v, v)
    p1_hat, p2_hat = correct_two_projections(p1 + 1e-3 * _hermitian(rng, 2), p2 + 1e-3 * _hermitian(rng, 2), c)
    assert is_projection(p1_hat) and is_projection(p2_hat)
    assert op_norm(p1_hat @ p2_hat @ p1_hat - c * p1_hat) <= 1e-10
    assert op_norm(p2_hat - p2) < 0.01
    with pytest.raises(InvalidParameterError):
        correct_two_projections(p1, p2, 1.5)


# ============================================================================
# Unitaries and partial isometries
# ============================================================================

def test_unitary_fixed_point(random_unitary):
    u = random_unitary(4)
    assert_allclose(correct_unitary(u), u, atol=0)
    assert_allclose(correct_unitary(1.1 * u), u, atol=1e-12)


def test_unitary_singular():
    with pytest.raises(RankDeficiencyError):
        correct_unitary(np.diag([1.0, 0.0]))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.floats(0.0, 0.5))
def test_polar_factor_is_nearest(seed, n, eps):
    gen = np.random.default_rng(seed)
    u = _unitary(gen, n)
    a = u + eps * _noise(gen, n)
    out = correct_unitary(a)
    assert is_unitary(out)
    assert op_norm(out - a) <= op_norm(a - u) + 1e-10


def test_partial_isometry_scalar():
    assert_allclose(correct_partial_isometry([[1.0]], [[1.0]], [[0.9]]), [[1.0]], atol=1e-15)


def test_partial_isometry_corrects_noise(rng):
    p = np.diag([1.0, 1.0, 0.0, 0.0])
    q = np.diag([0.0, 0.0, 1.0, 1.0])
    v = np.zeros((4, 4))
    v[2, 0] = v[3, 1] = 1.0
    out = correct_partial_isometry(p, q, v + 0.01 * _noise(rng, 4))
    assert partial_isometry_defect(out, p, q) <= config.exact_tol(4)
    assert op_norm(out - v) < 0.05


def test_partial_isometry_errors():
    with pytest.raises(RankMismatchError):
        correct_partial_isometry(np.diag([1.0, 0.0]), np.eye(2), np.eye(2))
    with pytest.raises(ProjectionError):
        correct_partial_isometry(np.diag([0.9, 0.0]), np.diag([1.0, 0.0]), np.eye(2))
    with pytest.raises(SpectralGapError):
        correct_partial_isometry([[1.0]], [[1.0]], [[0.7]])


def test_polar_partial_isometry():
    e = np.diag([1.0, 0.0])
    assert_allclose(polar_partial_isometry(e, e, np.diag([2.0, 5.0])), e, atol=1e-15)
    with pytest.raises(DegenerateCompressionError):
        polar_partial_isometry(e, e, np.diag([0.0, 1.0]))


# ============================================================================
# Matrix units
# ============================================================================

def test_matrix_units(rng, random_unitary):
    exact = MatrixUnitSystem.standard((2, 1)).conjugate(random_unitary(3))
    noisy = MatrixUnitSystem(exact.structure, {k: m + 1e-3 * _noise(rng, 3) for k, m in exact.units.items()})
    assert not noisy.is_exact()
    out = correct_matrix_units(noisy)
    assert out.is_exact(full=True)
    assert max(op_norm(out[k] - exact[k]) for k in exact.keys()) < 0.05


def test_matrix_units_need_diagonals():
    units = dict(MatrixUnitSystem.standard((2,)).units)
    del units[(0, 1, 1)]
    with pytest.raises(ShapeError):
        correct_matrix_units(MatrixUnitSystem((2,), units))


# ============================================================================
# Families and gluing
# ============================================================================

def test_family_arity():
    with pytest.raises(ArityError):
        projection_family(2)([np.eye(2)])
    with pytest.raises(ArityError):
        combine_families(2, [(projection_family(), [0]), (projection_family(), [0])])


def test_glue_rounds_source_and_range():
    v = 0.99 * np.array([[0.0, 1.0], [0.0, 0.0]])
    (w,) = glue(projection_family(), projection_family(), [v])
    assert_allclose(w, [[0.0, 1.0], [0.0, 0.0]], atol=1e-14)


def test_glue_rejects_inadmissible_input():
    v = 0.5 * np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(DeltaTooLargeError):
        glue(projection_family(), projection_family(), [v])


def test_glue_family_relation_vanishes_on_output():
    family = glue_family(projection_family(), projection_family())
    v = 0.99 * np.array([[0.0, 1.0], [0.0, 0.0]])
    assert family.input_defect([v]) > 0
    assert family.input_defect(family([v])) <= 1e-12


def test_glue_joint_uses_one_family():
    v = 0.99 * np.array([[0.0, 1.0], [0.0, 0.0]])
    (w,) = glue_joint(projection_family(2), [v])
    assert_allclose(w, [[0.0, 1.0], [0.0, 0.0]], atol=1e-14)
    with pytest.raises(ArityError):
        glue_joint(projection_family(), [v])
    family = glue_joint_family(projection_family(2))
    assert family.input_defect(family([v])) <= 1e-12


def test_two_projection_family_checks_angle():
    with pytest.raises(InvalidParameterError):
        two_projection_family(1.5)
    family = two_projection_family(0.5)
    assert family.input_defect([np.diag([1.0, 0.0]), np.full((2, 2), 0.5)]) <= 1e-14


# ============================================================================
# Tensor, direct sum, blockwise
# ============================================================================

def test_tensor(rng):
    s = generator_from_units(MatrixUnitSystem.standard((2,), 2))
    t = np.kron(np.eye(2), np.diag([1.0, 0.0]))
    t_hat, s_hat = correct_tensor([t + 1e-3 * _noise(rng, 4)], s + 1e-3 * _noise(rng, 4), 2, projection_family())
    assert op_norm(t_hat[0] @ s_hat - s_hat @ t_hat[0]) <= config.exact_tol(4)
    assert is_projection(t_hat[0])
    assert op_norm(t_hat[0] - t) < 0.05
    assert op_norm(s_hat - s) < 0.05


def test_tensor_errors():
    s = generator_from_units(MatrixUnitSystem.standard((2,), 2))
    with pytest.raises(ShapeError):
        correct_tensor([], s, 3)
    with pytest.raises(SpectralGapError):
        generator_units(1.5 * np.eye(4), 2)


def test_direct_sum():
    qc = np.diag([0.95, 0.9, 0.05])
    s = np.diag([0.97, 0.02, 0.1])
    t = np.diag([0.1, 0.1, 0.98])
    (s_hat,), (t_hat,), e = correct_direct_sum([s], [t], qc, projection_family(), projection_family())
    assert_allclose(e, np.diag([1.0, 1.0, 0.0]), atol=1e-15)
    assert_allclose(s_hat, np.diag([1.0, 0.0, 0.0]), atol=1e-14)
    assert_allclose(t_hat, np.diag([0.0, 0.0, 1.0]), atol=1e-14)
    with pytest.raises(SpectralGapError):
        correct_direct_sum([s], [t], np.diag([0.5, 1.0, 0.0]))


def test_blockwise():
    entries = np.array([[0.95, 0.01], [0.01, 0.03]]).reshape(2, 2, 1, 1, 1)
    out = correct_blockwise(entries, projection_family())
    assert out.shape == (2, 2, 1, 1, 1)
    assert is_projection(assemble_blocks(out)[0])


def test_block_layout(rng):
    mats = [rng.standard_normal((6, 6)) for _ in range(2)]
    entries = extract_blocks(mats, 3)
    assert entries.shape == (3, 3, 2, 2, 2)
    assert_allclose(entries[1, 2, 0], mats[0][2:4, 4:6])
    assert_allclose(assemble_blocks(entries)[1], mats[1])


# ============================================================================
# Commuting normals
# ============================================================================

def test_commuting_normals(rng, random_unitary):
    w = random_unitary(5)
    a = (w * rng.uniform(-1, 1, 5)) @ w.conj().T
    b = (w * np.exp(1j * rng.uniform(0, 2 * np.pi, 5))) @ w.conj().T
    noisy = [a + 1e-4 * _noise(rng, 5), b + 1e-4 * _noise(rng, 5)]
    out = correct_commuting_normals(noisy)
    for x in out:
        assert op_norm(x @ x.conj().T - x.conj().T @ x) <= 1e-10
    assert op_norm(out[0] @ out[1] - out[1] @ out[0]) <= 1e-10
    assert max(op_norm(x - y) for x, y in zip(noisy, out)) < 0.05


def test_jacobi_strict_mode(monkeypatch, clock_shift):
    monkeypatch.setattr(config, "JACOBI_MAX_SWEEPS", 1)
    result = joint_diagonalize(clock_shift(8))
    assert not result.converged
    with pytest.raises(ConvergenceError) as err:
        joint_diagonalize(clock_shift(8), strict=True)
    assert err.value.details["sweeps"] == 1


def test_single_generator():
    b1, b2 = np.diag([1.0, 1.0, 2.0]), np.diag([3.0, 4.0, 4.0])
    c, fns = single_generator([b1, b2])
    assert_allclose(c, np.diag([1.0, 2.0, 3.0]), atol=1e-12)
    assert_allclose(fns[0].apply(c), b1, atol=1e-12)
    assert_allclose(fns[1].apply(c), b2, atol=1e-12)


def test_single_generator_needs_commuting_input(clock_shift):
    with pytest.raises(CommutationError):
        single_generator(clock_shift(3))


# ============================================================================
# Finite Haar unitaries
# ============================================================================

def test_haar_example():
    u = np.diag([1.0, np.exp(1j * (np.pi + 0.2))])
    out = correct_haar(u)
    assert_allclose(out, np.diag([np.exp(0.1j), np.exp(1j * (np.pi + 0.1))]), atol=1e-12)


def test_haar_moments_vanish(random_unitary):
    out = correct_haar(random_unitary(5))
    assert is_unitary(out)
    assert max(haar_moments(out)) <= config.exact_tol(5)


def test_haar_respects_blocks(random_unitary):
    alg = BlockAlgebra.from_blocks([2, 3])
    u = direct_sum(random_unitary(2), random_unitary(3))
    out = correct_haar(u, alg)
    assert_allclose(out[:2, 2:], 0.0, atol=1e-15)
    assert max(haar_moments(out, alg)) <= config.exact_tol(5)
    with pytest.raises(ShapeError):
        correct_haar(random_unitary(5), alg)
