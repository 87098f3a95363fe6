"""
Seeded instances of approximate solutions with a calibrated defect.

Each kind draws an exact solution and a perturbation direction from one
Philox stream, then rescales the perturbation until the measured defect lies
in [delta / 2, 2 delta].
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from config import config
from errors import CalibrationError, InvalidParameterError, SchemaError
from matcore import (
    BlockAlgebra,
    Mat,
    adjoint,
    identity,
    mats_to_list,
    op_norm,
    projection_defect,
    projector,
)
from ncfun import (
    DefectReport,
    Relation,
    SummandDefect,
    defect,
    rel_commutator,
    rel_partial_isometry,
    rel_projection,
    rel_resolution,
    rel_unitary,
)
from correct import MatrixUnitSystem
from .stream import general_direction, haar_unitary, hermitian_direction, stream

logger = logging.getLogger(__name__)

MAX_DELTA = 0.2
EIGEN_RADIUS = 0.9


@dataclass(frozen=True)
class EnsembleSpec:
    """Kind, dimension, target defect and seed of one instance."""
    kind: str
    dim: int
    delta: float
    seed: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown ensemble kind '{self.kind}'", kinds=sorted(KINDS))
        if self.dim < 2:
            raise InvalidParameterError("ensemble dimension must be at least 2", dim=self.dim)
        if not 0.0 <= self.delta <= MAX_DELTA:
            raise InvalidParameterError(f"delta must lie in [0, {MAX_DELTA}]", delta=self.delta)
        if self.seed < 0:
            raise InvalidParameterError("seed must be non-negative", seed=self.seed)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "dim": self.dim, "delta": self.delta, "seed": self.seed}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EnsembleSpec":
        try:
            return cls(str(data["kind"]), int(data["dim"]), float(data.get("delta", 0.0)), int(data.get("seed", 0)))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"ensemble: missing or malformed field {e}", field="ensemble")


@dataclass
class EnsembleInstance:
    """Perturbed tuple, the exact tuple it came from, and its measured defect."""
    spec: EnsembleSpec
    matrices: list[Mat]
    exact: Optional[list[Mat]]
    scale: float
    measured: float
    report: DefectReport
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "spec": self.spec.to_dict(),
            "matrices": mats_to_list(self.matrices),
            "scale": self.scale,
            "measured": self.measured,
            "report": self.report.to_dict(),
        }
        if self.exact is not None:
            out["exact"] = mats_to_list(self.exact)
        out.update(self.extra)
        return out


@dataclass(frozen=True)
class _Kind:
    """
    build(gen, dim) -> (exact tuple or None, perturb(s) -> tuple, extra JSON fields)
    """
    build: Callable[[np.random.Generator, int], tuple[Optional[list[Mat]], Callable[[float], list[Mat]], dict]]
    measure: Callable[[list[Mat]], float]
    relation: Optional[Callable[[], Relation]]
    calibrated: bool = True


def _random_rank(gen: np.random.Generator, dim: int) -> int:
    return int(gen.integers(1, dim))


def _near_projection(gen, dim):
    rank = _random_rank(gen, dim)
    p = projector(haar_unitary(gen, dim)[:, :rank])
    h = hermitian_direction(gen, dim)
    return [p], lambda s: [p + s * h], {}


def _near_unitary(gen, dim):
    u = haar_unitary(gen, dim)
    h = hermitian_direction(gen, dim)
    return [u], lambda s: [u @ (identity(dim) + s * h)], {}


def _near_partial_isometry(gen, dim):
    rank = _random_rank(gen, dim)
    left = haar_unitary(gen, dim)[:, :rank]
    right = haar_unitary(gen, dim)[:, :rank]
    e, f = projector(right), projector(left)
    v0 = left @ adjoint(right)
    g = f @ general_direction(gen, dim) @ e
    g = g / max(op_norm(g), 1e-300)
    return [e, f, v0], lambda s: [e, f, v0 + s * g], {}


def _unit_block(dim: int) -> int:
    return next(n for n in range(2, dim + 1) if dim % n == 0)


def _near_matrix_units(gen, dim):
    n = _unit_block(dim)
    w = haar_unitary(gen, dim)
    exact = MatrixUnitSystem.standard((n,), dim // n).conjugate(w)
    keys = list(exact.keys())
    g = general_direction(gen, dim)

    def perturb(s: float) -> list[Mat]:
        sim = identity(dim) + s * g
        inv = np.linalg.inv(sim)
        return [sim @ exact[k] @ inv for k in keys]

    return [exact[k] for k in keys], perturb, {"structure": [n]}


def _units_measure(mats: list[Mat]) -> float:
    return max(_units_defects(mats).values())


def _units_defects(mats: list[Mat]) -> dict[str, float]:
    n = int(round(np.sqrt(len(mats))))
    keys = [(0, s, t) for s in range(n) for t in range(n)]
    return MatrixUnitSystem((n,), dict(zip(keys, mats))).defects()


def _almost_commuting_pair(gen, dim):
    w = haar_unitary(gen, dim)
    d1 = EIGEN_RADIUS * np.exp(2j * np.pi * gen.random(dim))
    d2 = EIGEN_RADIUS * np.exp(2j * np.pi * gen.random(dim))
    a0 = (w * d1) @ adjoint(w)
    b0 = (w * d2) @ adjoint(w)
    g1 = general_direction(gen, dim)
    g2 = general_direction(gen, dim)
    return [a0, b0], lambda s: [a0 + s * g1, b0 + s * g2], {}


def _commutator_norm(mats: list[Mat]) -> float:
    a, b = mats
    return op_norm(a @ b - b @ a)


def clock_shift(dim: int) -> tuple[Mat, Mat]:
    """U = diag(1, w, ..., w^{n-1}) and the cyclic shift V, w = e^{2 pi i / n}; UV = w VU."""
    omega = np.exp(2j * np.pi / dim)
    u = np.diag(omega ** np.arange(dim)).astype(np.complex128)
    v = np.roll(np.eye(dim, dtype=np.complex128), 1, axis=0)
    return u, v


def _clock_shift(gen, dim):
    u, v = clock_shift(dim)
    return None, lambda s: [u, v], {}


def _clock_shift_measure(mats: list[Mat]) -> float:
    a, b = mats
    return BlockAlgebra.matrix(a.shape[0]).two_norm(a @ b - b @ a)


def _haar_unitary(gen, dim):
    u = haar_unitary(gen, dim)
    h = hermitian_direction(gen, dim)
    return [u], lambda s: [u @ (identity(dim) + s * h)], {}


def _resolution_count(dim: int) -> int:
    return min(3, dim)


def _near_resolution(gen, dim):
    k = _resolution_count(dim)
    w = haar_unitary(gen, dim)
    cuts = np.array_split(np.arange(dim), k)
    ps = [projector(w[:, idx]) for idx in cuts]
    hs = [hermitian_direction(gen, dim) for _ in ps]
    return ps, lambda s: [p + s * h for p, h in zip(ps, hs)], {}


def _resolution_measure(mats: list[Mat]) -> float:
    dim = mats[0].shape[0]
    return max(max(projection_defect(p) for p in mats), op_norm(sum(mats) - identity(dim)))


def _unitary_measure(mats: list[Mat]) -> float:
    a = mats[0]
    return op_norm(identity(a.shape[0]) - adjoint(a) @ a)


def _partial_isometry_measure(mats: list[Mat]) -> float:
    e, f, a = mats
    return max(op_norm(adjoint(a) @ a - e), op_norm(a @ adjoint(a) - f))


KINDS: dict[str, _Kind] = {
    "near_projection": _Kind(_near_projection, lambda m: projection_defect(m[0]), rel_projection),
    "near_unitary": _Kind(_near_unitary, _unitary_measure, rel_unitary),
    "near_partial_isometry": _Kind(_near_partial_isometry, _partial_isometry_measure, rel_partial_isometry),
    "near_matrix_units": _Kind(_near_matrix_units, _units_measure, None),
    "almost_commuting_pair": _Kind(_almost_commuting_pair, _commutator_norm, rel_commutator),
    "clock_shift": _Kind(_clock_shift, _clock_shift_measure, rel_commutator, calibrated=False),
    "haar_unitary": _Kind(_haar_unitary, _unitary_measure, rel_unitary),
    "near_resolution": _Kind(_near_resolution, _resolution_measure, None),
}


def _report(kind: str, mats: list[Mat], measured: float) -> DefectReport:
    dim = mats[0].shape[0]
    spec = KINDS[kind]
    if spec.relation is not None:
        return defect(spec.relation(), mats)
    if kind == "near_resolution":
        return defect(rel_resolution(len(mats)), mats)
    parts = _units_defects(mats)
    return DefectReport(
        relation="matrix_units",
        op=measured,
        dim=dim,
        summands=[SummandDefect(label, value) for label, value in parts.items()],
    )


def generate(spec: EnsembleSpec) -> EnsembleInstance:
    """
    Draw one instance.

    Deterministic in spec: the same spec gives bit-identical matrices.

    Raises:
        CalibrationError: If the defect misses [delta / 2, 2 delta] after
            CALIBRATION_ATTEMPTS rescalings
    """
    kind = KINDS[spec.kind]
    gen = stream(spec.seed)
    exact, perturb, extra = kind.build(gen, spec.dim)

    scale = spec.delta
    mats = perturb(scale)
    measured = kind.measure(mats)
    if kind.calibrated and spec.delta > 0:
        for attempt in range(config.CALIBRATION_ATTEMPTS):
            if spec.delta / 2 <= measured <= 2 * spec.delta:
                break
            if measured <= 0:
                raise CalibrationError("perturbation has no measurable defect", kind=spec.kind, scale=scale)
            scale *= spec.delta / measured
            mats = perturb(scale)
            measured = kind.measure(mats)
            logger.debug(f"Calibration attempt {attempt + 1}: scale {scale:.4g}, defect {measured:.4g}")
        else:
            if not spec.delta / 2 <= measured <= 2 * spec.delta:
                raise CalibrationError(
                    f"defect {measured:.4g} missed [{spec.delta / 2:g}, {2 * spec.delta:g}]",
                    kind=spec.kind,
                    measured=measured,
                )

    return EnsembleInstance(
        spec=spec,
        matrices=mats,
        exact=exact,
        scale=scale,
        measured=measured,
        report=_report(spec.kind, mats, measured),
        extra=extra,
    )
