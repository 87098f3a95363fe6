"""
Full-scale acceptance runs. Deselect with: pytest -m "not slow"
"""

import numpy as np
import pytest

from config import config
from matcore import BlockAlgebra, is_projection, op_norm, partial_isometry_defect
from correct import (
    combine_families,
    correct_commuting_normals,
    correct_partial_isometry,
    correct_projection,
    glue,
    glue_family,
    projection_family,
    two_projection_family,
)
from ultra import (
    InclusionData,
    RepSequence,
    TailFilter,
    diagonal_completion,
    extend_matrix_units,
    lift_projection_trace,
    restrict_units,
)

pytestmark = pytest.mark.slow


def _unitary(gen, n):
    z = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _noise(gen, n):
    z = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    return z / np.linalg.norm(z, 2)


def _projection(gen, n, rank):
    w = _unitary(gen, n)[:, :rank]
    return w @ w.conj().T


@pytest.mark.parametrize("dim", [4, 16, 64])
@pytest.mark.parametrize("eps_sq", [0.01, 0.05, 0.1])
def test_projection_rounding_stays_within_eps(dim, eps_sq):
    gen = np.random.default_rng(dim * 1000 + int(eps_sq * 100))
    eps = np.sqrt(eps_sq)
    # offsets m with m + m^2 = eps^2 keep ||A - A^2|| <= eps^2
    m = (np.sqrt(1.0 + 4.0 * eps_sq) - 1.0) / 2.0
    for _ in range(1000):
        rank = int(gen.integers(0, dim + 1))
        base = np.r_[np.ones(rank), np.zeros(dim - rank)]
        w = _unitary(gen, dim)
        a = (w * (base + gen.uniform(-m, m, dim))) @ w.conj().T
        assert op_norm(a - a @ a) <= eps_sq + 1e-12
        out = correct_projection(a)
        assert is_projection(out)
        assert op_norm(a - out) < eps


def test_partial_isometry_exactness_and_fixed_point():
    gen = np.random.default_rng(2)
    medians = {}
    for delta in (0.005, 0.05):
        dists = []
        for _ in range(1000):
            n = int(gen.integers(4, 33))
            rank = int(gen.integers(1, n + 1))
            w = _unitary(gen, n)
            p = _projection(gen, n, rank)
            v = w @ p
            q = v @ v.conj().T
            a = v + delta * _noise(gen, n)
            out = correct_partial_isometry(p, q, a)
            assert partial_isometry_defect(out, p, q) <= config.exact_tol(n)
            assert op_norm(correct_partial_isometry(p, q, v) - v) <= 1e-12
            dists.append(BlockAlgebra.matrix(n).two_norm(out - a))
        medians[delta] = float(np.median(dists))
    assert medians[0.005] < medians[0.05]


def _glue_instance():
    """Partial isometries in M_5 = M_2 + M_3 with sources from M_2 and ranges from M_3."""
    e = np.eye(5)
    u = (e[0] + e[1]) / np.sqrt(2.0)
    q3 = (e[2] + e[3] + e[4]) / np.sqrt(3.0)
    v1 = np.outer(e[2], e[0])
    v2 = np.outer(e[3], u)
    # rank(P_3) = 2, so the range pairs the M_3 vector with a line in the M_2 corner
    v3 = np.outer(e[0], e[0]) + np.outer(q3, e[1])
    return [v1, v2, v3]


def test_glue_on_two_and_three_dimensional_triples():
    corr_p = combine_families(3, [(two_projection_family(0.5), [0, 1]), (projection_family(), [2])])
    corr_q = projection_family(3)
    family = glue_family(corr_p, corr_q)
    exact = _glue_instance()
    assert family.input_defect(exact) <= 1e-12

    gen = np.random.default_rng(35)
    alg = BlockAlgebra.matrix(5)
    for _ in range(10):
        vs = [v + 0.01 * _noise(gen, 5) for v in exact]
        out = glue(corr_p, corr_q, vs)
        assert family.input_defect(out) <= 1e-9
        assert max(alg.two_norm(w - v) for w, v in zip(out, vs)) <= 0.05


def test_diagonal_completion_telescopes():
    gen = np.random.default_rng(4)
    alg = BlockAlgebra.matrix(2)
    size, depth = 64, 8
    base = np.diag([1.0, 0.0])
    directions = []
    for _ in range(size):
        z = gen.standard_normal((2, 2)) + 1j * gen.standard_normal((2, 2))
        h = z + z.conj().T
        directions.append(h / alg.two_norm(h))
    scales = gen.uniform(0.0, 1.0, (depth, size))
    rows = [
        RepSequence.of_matrices(
            [base + 0.5 * 4.0 ** -n * scales[n - 1, i] * directions[i] for i in range(size)],
            bound=2.0,
        )
        for n in range(1, depth + 1)
    ]
    filt = TailFilter.tails(size, depth)
    x = diagonal_completion(rows, filt)
    for n, row in enumerate(rows, start=1):
        for i in filt.level(n):
            assert alg.two_norm(row.at(i) - x.at(i)) <= 2.0 / 4.0 ** n


def test_trace_identity_for_lifted_projections():
    gen = np.random.default_rng(5)
    for _ in range(100):
        dims = [int(d) for d in gen.integers(8, 129, 5)]
        a = RepSequence.of_matrices([_projection(gen, d, int(gen.integers(0, d + 1))) for d in dims])
        t = float(gen.uniform(0.0, 1.0))
        lifted = lift_projection_trace(a, t)
        for i, d in enumerate(dims, start=1):
            alg = BlockAlgebra.matrix(d)
            p, ai = lifted.at(i), a.at(i)
            gap = abs(alg.trace(p) - alg.trace(ai))
            assert abs(alg.two_norm(ai - p) - np.sqrt(gap)) <= 1e-10
            assert abs(alg.trace(p) - t) <= 1.0 / (2 * d) + 1e-12


def test_trace_quantization_halves_with_dimension():
    errors = []
    for d in (8, 16, 32, 64):
        lifted = lift_projection_trace(RepSequence.of_matrices([np.zeros((d, d))]), 1 / 3)
        errors.append(abs(BlockAlgebra.matrix(d).trace(lifted.at(1)) - 1 / 3))
    for coarse, fine in zip(errors, errors[1:]):
        assert fine == pytest.approx(coarse / 2)


def test_commuting_normals_properties():
    gen = np.random.default_rng(6)
    for _ in range(100):
        n = int(gen.integers(3, 9))
        w = _unitary(gen, n)
        a = (w * gen.uniform(-1, 1, n)) @ w.conj().T
        b = (w * np.exp(1j * gen.uniform(0, 2 * np.pi, n))) @ w.conj().T
        noisy = [0.9 * a + 0.01 * _noise(gen, n), 0.9 * b + 0.01 * _noise(gen, n)]
        out = correct_commuting_normals(noisy)
        tol = config.exact_tol(n)
        for x, y in zip(out, noisy):
            assert op_norm(x @ x.conj().T - x.conj().T @ x) <= tol
            assert op_norm(x) <= op_norm(y) + 1e-12
        assert op_norm(out[0] @ out[1] - out[1] @ out[0]) <= tol


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_matrix_unit_extension_example(k):
    inc = InclusionData((2, 3), (4, 5), ((2, 0), (1, 1)))
    gen = np.random.default_rng(k)
    pis = [inc.standard_embedding(k).conjugate(_unitary(gen, 9 * k)) for _ in range(16)]
    for pi, rho in zip(pis, extend_matrix_units(inc, pis)):
        assert rho.is_exact(full=True)
        back = restrict_units(inc, rho)
        assert max(op_norm(back[key] - pi[key]) for key in pi.keys()) <= config.exact_tol(pi.dim)
        for b, weight in enumerate(inc.weights):
            assert np.trace(rho.minimal(b)).real / rho.dim == pytest.approx(weight)
