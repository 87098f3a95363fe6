"""
Random streams and basic random matrices.

Every stream is numpy's Generator over Philox-4x64-10 keyed by the seed
(key words (seed, 0), counter from 0). Uniform doubles take the top 53 bits
of each 64-bit output, Gaussians use numpy's ziggurat on the same stream.
Derived seeds come from HKDF-SHA256 over the master seed.
"""

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

import numpy as np

from errors import InvalidParameterError
from matcore import Mat, adjoint

SEED_MASK = (1 << 64) - 1
SEED_INFO_PREFIX = b"liftkit-trial-seed:"


def stream(seed: int) -> np.random.Generator:
    """Philox stream for a 64-bit seed."""
    if seed < 0:
        raise InvalidParameterError("seed must be non-negative", seed=seed)
    return np.random.Generator(np.random.Philox(key=int(seed) & SEED_MASK))


def derive_seed(master: int, *parts: object) -> int:
    """
    64-bit child seed: first 8 bytes (big-endian) of HKDF-SHA256 over the master
    seed with info "liftkit-trial-seed:" + ":".join(parts).
    """
    info = SEED_INFO_PREFIX + ":".join(str(p) for p in parts).encode("utf-8")
    key = HKDF(
        algorithm=hashes.SHA256(),
        length=8,
        salt=None,
        info=info,
    ).derive((int(master) & SEED_MASK).to_bytes(8, "big"))
    return int.from_bytes(key, "big")


def complex_normal(gen: np.random.Generator, n: int) -> Mat:
    """Ginibre matrix with standard complex Gaussian entries."""
    return (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2.0)


def haar_unitary(gen: np.random.Generator, n: int) -> Mat:
    """Haar-distributed unitary: QR of a Ginibre matrix with the diagonal of R made positive."""
    q, r = np.linalg.qr(complex_normal(gen, n))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def hermitian_direction(gen: np.random.Generator, n: int) -> Mat:
    """Random Hermitian matrix of operator norm 1."""
    g = complex_normal(gen, n)
    h = 0.5 * (g + adjoint(g))
    return h / np.linalg.norm(h, 2)


def general_direction(gen: np.random.Generator, n: int) -> Mat:
    """Random complex matrix of operator norm 1."""
    g = complex_normal(gen, n)
    return g / np.linalg.norm(g, 2)
