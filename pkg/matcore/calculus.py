"""
Piecewise scalar functions and Hermitian functional calculus.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import scipy.linalg

from config import config
from errors import DomainError, InvalidParameterError, SchemaError, SymmetryError
from .matrix import Mat, adjoint, as_mat, hermitian_part, op_norm

logger = logging.getLogger(__name__)

PIECE_KINDS = ("constant", "affine", "inv_sqrt")
OUTSIDE_MODES = ("error", "clamp")


@dataclass(frozen=True)
class Piece:
    """One formula on the closed interval [lo, hi]: constant a, affine a*t + b, or 1/sqrt(t)."""
    lo: float
    hi: float
    kind: str
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in PIECE_KINDS:
            raise InvalidParameterError(f"unknown piece kind '{self.kind}'", kinds=list(PIECE_KINDS))
        if not self.lo < self.hi:
            raise InvalidParameterError("piece interval must satisfy lo < hi", lo=self.lo, hi=self.hi)
        if self.kind == "inv_sqrt" and self.lo <= 0:
            raise InvalidParameterError("inverse square root needs lo > 0", lo=self.lo)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            return np.full_like(t, self.a, dtype=np.float64)
        if self.kind == "affine":
            return self.a * t + self.b
        return 1.0 / np.sqrt(t)

    def to_dict(self) -> dict[str, Any]:
        return {
            "lo": None if math.isinf(self.lo) else self.lo,
            "hi": None if math.isinf(self.hi) else self.hi,
            "kind": self.kind,
            "a": self.a,
            "b": self.b,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Piece":
        lo = data.get("lo")
        hi = data.get("hi")
        return cls(
            lo=-math.inf if lo is None else float(lo),
            hi=math.inf if hi is None else float(hi),
            kind=data["kind"],
            a=float(data.get("a", 0.0)),
            b=float(data.get("b", 0.0)),
        )


@dataclass(frozen=True)
class ScalarFn:
    """
    Continuous piecewise function on a connected interval of the real line.

    Pieces are ordered and share endpoints. Values outside the covered interval
    either raise a DomainError ("error") or take the nearest endpoint value ("clamp").
    """
    pieces: tuple[Piece, ...]
    outside: str = "error"
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not self.pieces:
            raise InvalidParameterError("a scalar function needs at least one piece")
        if self.outside not in OUTSIDE_MODES:
            raise InvalidParameterError(f"unknown outside mode '{self.outside}'", modes=list(OUTSIDE_MODES))
        for left, right in zip(self.pieces, self.pieces[1:]):
            if left.hi != right.lo:
                raise InvalidParameterError(
                    "pieces must cover a connected interval",
                    gap=(left.hi, right.lo),
                )
            x = np.array([left.hi])
            lv, rv = float(left(x)[0]), float(right(x)[0])
            if abs(lv - rv) > 1e-12 * max(1.0, abs(lv)):
                raise InvalidParameterError(
                    f"pieces disagree at shared endpoint {left.hi}",
                    left=lv,
                    right=rv,
                )

    @property
    def domain(self) -> tuple[float, float]:
        return self.pieces[0].lo, self.pieces[-1].hi

    def check_domain(self, t: np.ndarray) -> None:
        """Raise a DomainError naming the first value outside the domain."""
        if self.outside == "clamp":
            return
        lo, hi = self.domain
        bad = t[(t < lo) | (t > hi)]
        if bad.size:
            raise DomainError(
                f"eigenvalue {bad[0]:.6g} lies outside the domain [{lo}, {hi}] of {self.name or 'function'}",
                eigenvalue=float(bad[0]),
            )

    def __call__(self, t: Any) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        self.check_domain(t)
        lo, hi = self.domain
        t = np.clip(t, lo, hi)
        out = np.empty_like(t)
        # earlier pieces win at shared endpoints (they agree there anyway)
        for piece in reversed(self.pieces):
            mask = (t >= piece.lo) & (t <= piece.hi)
            if np.any(mask):
                out[mask] = piece(t[mask])
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "outside": self.outside,
            "pieces": [p.to_dict() for p in self.pieces],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScalarFn":
        try:
            pieces = tuple(Piece.from_dict(p) for p in data["pieces"])
        except (KeyError, TypeError) as e:
            raise SchemaError(f"scalar function: malformed pieces: {e}", field="pieces")
        return cls(pieces, outside=data.get("outside", "error"), name=data.get("name", ""))


# ============================================================================
# Named functions
# ============================================================================

INF = math.inf


def identity_fn() -> ScalarFn:
    return ScalarFn((Piece(-INF, INF, "affine", 1.0, 0.0),), name="identity")


def retraction() -> ScalarFn:
    """h: 0 up to 1/3, 3t - 1 in between, 1 from 2/3 on."""
    return ScalarFn((
        Piece(-INF, 1 / 3, "constant", 0.0),
        Piece(1 / 3, 2 / 3, "affine", 3.0, -1.0),
        Piece(2 / 3, INF, "constant", 1.0),
    ), name="retraction")


def isometry_weight() -> ScalarFn:
    """f: 0 up to 1/4, linear to 2/sqrt(3) at 3/4, then 1/sqrt(t)."""
    top = 2.0 / math.sqrt(3.0)
    slope = top / 0.5
    return ScalarFn((
        Piece(-INF, 0.25, "constant", 0.0),
        Piece(0.25, 0.75, "affine", slope, -0.25 * slope),
        Piece(0.75, INF, "inv_sqrt"),
    ), name="isometry_weight")


def central_cutoff() -> ScalarFn:
    """0 up to 1/4, linear, 1 from 3/4 on."""
    return ScalarFn((
        Piece(-INF, 0.25, "constant", 0.0),
        Piece(0.25, 0.75, "affine", 2.0, -0.5),
        Piece(0.75, INF, "constant", 1.0),
    ), name="central_cutoff")


def plateau(center: float, inner: float = 0.25, outer: float = 0.75) -> ScalarFn:
    """Bump equal to 1 on [center - inner, center + inner] and 0 outside (center - outer, center + outer)."""
    ramp = 1.0 / (outer - inner)
    return ScalarFn((
        Piece(-INF, center - outer, "constant", 0.0),
        Piece(center - outer, center - inner, "affine", ramp, -ramp * (center - outer)),
        Piece(center - inner, center + inner, "constant", 1.0),
        Piece(center + inner, center + outer, "affine", -ramp, ramp * (center + outer)),
        Piece(center + outer, INF, "constant", 0.0),
    ), name=f"plateau({center:g})")


def inverse_sqrt(lo: float, hi: float = INF) -> ScalarFn:
    return ScalarFn((Piece(lo, hi, "inv_sqrt"),), name="inverse_sqrt")


# ============================================================================
# Functional calculus
# ============================================================================

def hermitian_eigh(a: Any, name: str = "argument") -> tuple[np.ndarray, Mat]:
    """
    Eigendecomposition of a Hermitian matrix after symmetrization.

    Raises:
        SymmetryError: If ||A - A*|| exceeds the Hermitian tolerance
    """
    a = as_mat(a, name)
    n = a.shape[0]
    skew = op_norm(a - adjoint(a))
    if skew > config.hermitian_tol(n):
        raise SymmetryError(f"{name} is not Hermitian", skew=skew, tolerance=config.hermitian_tol(n))
    vals, vecs = scipy.linalg.eigh(hermitian_part(a))
    return vals, vecs


def from_spectrum(values: np.ndarray, vecs: Mat) -> Mat:
    """U diag(values) U*."""
    return (vecs * values) @ adjoint(vecs)


def herm_calculus(a: Any, g: ScalarFn, name: Optional[str] = None) -> Mat:
    """
    Apply g to a Hermitian matrix: U g(D) U* for A = U D U*.

    Raises:
        SymmetryError: Non-Hermitian input
        DomainError: Eigenvalue outside g's domain
    """
    vals, vecs = hermitian_eigh(a, name or "argument")
    out = from_spectrum(g(vals), vecs)
    logger.debug(f"Applied {g.name or 'scalar function'} to spectrum [{vals[0]:.4g}, {vals[-1]:.4g}]")
    return out
