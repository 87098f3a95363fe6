"""
Seeded ensembles of approximate solutions.

Handles:
- Philox random streams and HKDF-derived child seeds
- Haar unitaries and random perturbation directions
- Calibrated instances for every corrector kind
"""

from .stream import stream, derive_seed, complex_normal, haar_unitary, hermitian_direction, general_direction
from .generator import EnsembleSpec, EnsembleInstance, KINDS, clock_shift, generate

__all__ = [
    "stream", "derive_seed", "complex_normal", "haar_unitary", "hermitian_direction", "general_direction",
    "EnsembleSpec", "EnsembleInstance", "KINDS", "clock_shift", "generate",
]
