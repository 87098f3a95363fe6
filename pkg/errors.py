"""
Error types for liftkit.

Every failure carries a machine-readable code and the CLI exit code it maps to:
1 for usage and schema problems, 2 for failed mathematical preconditions.
"""

from typing import Any


class LiftkitError(Exception):
    """Base class for all liftkit errors."""

    code = "liftkit_error"
    exit_code = 2

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: dict[str, Any] = dict(details)

    def at(self, **context: Any) -> "LiftkitError":
        """Attach location context (index, unit, ...) and return self for re-raising."""
        for key, value in context.items():
            self.details.setdefault(key, value)
        return self

    def __str__(self) -> str:
        if not self.details:
            return self.message
        extra = ", ".join(f"{k}={v}" for k, v in self.details.items())
        return f"{self.message} ({extra})"

    def to_dict(self) -> dict[str, Any]:
        """Convert to JSON-serializable dictionary."""
        return {
            "code": self.code,
            "message": self.message,
            "details": {k: _plain(v) for k, v in self.details.items()},
        }


def _plain(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


# ============================================================================
# Usage / schema errors (exit 1)
# ============================================================================

class UsageError(LiftkitError):
    code = "usage"
    exit_code = 1


class InvalidInputError(UsageError):
    code = "invalid_input"


class InvalidParameterError(UsageError):
    code = "invalid_parameter"


class ShapeError(UsageError):
    code = "shape"


class ArityError(UsageError):
    code = "arity"


class SchemaError(UsageError):
    code = "schema"


# ============================================================================
# Mathematical precondition failures (exit 2)
# ============================================================================

class DomainError(LiftkitError):
    code = "domain"


class SymmetryError(LiftkitError):
    code = "symmetry"


class SpectralGapError(LiftkitError):
    code = "spectral_gap"


class RankMismatchError(LiftkitError):
    code = "rank_mismatch"


class RankDeficiencyError(LiftkitError):
    code = "rank_deficiency"


class DegenerateCompressionError(RankDeficiencyError):
    code = "degenerate_compression"


class ProjectionError(LiftkitError):
    code = "not_a_projection"


class CommutationError(LiftkitError):
    code = "commutation"


class DeltaTooLargeError(LiftkitError):
    code = "delta_too_large"


class NonCauchyError(LiftkitError):
    code = "non_cauchy"


class BratteliError(LiftkitError):
    code = "bratteli"


class ResolutionError(LiftkitError):
    code = "resolution"


class CalibrationError(LiftkitError):
    code = "calibration"


class ExactnessError(LiftkitError):
    code = "exactness_violation"


class ConvergenceError(LiftkitError):
    code = "convergence"
