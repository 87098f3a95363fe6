"""
Configuration for liftkit.
"""

import os
from pathlib import Path
from dataclasses import dataclass

# Application version - update this for each release
VERSION = "0.4.0"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


@dataclass
class Config:
    """Application configuration."""

    # Exactness contract: ||X - X*|| + ||X - X^2|| <= EXACTNESS_TOL * dim
    EXACTNESS_TOL: float = 1e-10

    # Functional calculus inputs are accepted up to this skew part (per dimension)
    HERMITIAN_TOL: float = 1e-8

    # Admissible defect for the partial-isometry corrector
    DELTA_PI: float = 0.1

    # Singular values below this are treated as zero in polar factors
    SVD_CUTOFF: float = 1e-8

    # Jacobi joint diagonalization stopping rule
    JACOBI_TOL: float = 1e-12
    JACOBI_MAX_SWEEPS: int = 200

    # Ensemble defect calibration
    CALIBRATION_ATTEMPTS: int = 20

    # Default lift_chain grid is k / 2**DYADIC_RESOLUTION
    DYADIC_RESOLUTION: int = 6

    # Runtime settings
    THREADS: int = _env_int("LIFTKIT_THREADS", os.cpu_count() or 1)
    OUTPUT_DIR: Path = Path(os.getenv("LIFTKIT_OUTPUT_DIR", "runs"))
    LOG_LEVEL: str = os.getenv("LIFTKIT_LOG_LEVEL", "INFO")

    @property
    def runs_dir(self) -> Path:
        """Directory for sweep outputs written without an explicit path."""
        path = self.OUTPUT_DIR
        path.mkdir(parents=True, exist_ok=True)
        return path

    def exact_tol(self, dim: int) -> float:
        """Exactness threshold for a dim x dim matrix."""
        return self.EXACTNESS_TOL * max(dim, 1)

    def hermitian_tol(self, dim: int) -> float:
        """Accepted skew-Hermitian part for a dim x dim matrix."""
        return self.HERMITIAN_TOL * max(dim, 1)


# Global config instance
config = Config()
