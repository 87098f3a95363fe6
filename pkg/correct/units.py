"""
Systems of matrix units and their corrector.

Units are keyed by (block, row, col) with 0-based row and column indices.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from config import config
from errors import LiftkitError, SchemaError, ShapeError
from matcore import Mat, adjoint, as_mat, identity, mat_from_dict, mat_to_dict, op_norm
from .isometries import correct_partial_isometry
from .projections import correct_resolution

logger = logging.getLogger(__name__)

UnitKey = tuple[int, int, int]


@dataclass(frozen=True)
class MatrixUnitSystem:
    """
    Matrix units e^(b)_{st} for M_{n_1} + ... + M_{n_k}, all in one ambient dimension.

    A system may be partial (approximate input to the corrector); complete
    systems carry every key.
    """
    structure: tuple[int, ...]
    units: Mapping[UnitKey, Mat] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "structure", tuple(int(n) for n in self.structure))
        if not self.structure or any(n <= 0 for n in self.structure):
            raise ShapeError("block sizes must be positive", structure=list(self.structure))
        units = {}
        dims = set()
        for key, mat in self.units.items():
            b, s, t = (int(k) for k in key)
            if not (0 <= b < len(self.structure) and 0 <= s < self.structure[b] and 0 <= t < self.structure[b]):
                raise ShapeError("unit key outside the block structure", key=(b, s, t))
            mat = as_mat(mat, f"unit {(b, s, t)}")
            dims.add(mat.shape[0])
            units[(b, s, t)] = mat
        if len(dims) > 1:
            raise ShapeError("units live in different ambient dimensions", dims=sorted(dims))
        object.__setattr__(self, "units", units)

    @property
    def dim(self) -> int:
        """Ambient dimension."""
        return next(iter(self.units.values())).shape[0]

    def keys(self) -> Iterator[UnitKey]:
        """All keys of a complete system, block by block, row-major."""
        for b, n in enumerate(self.structure):
            for s in range(n):
                for t in range(n):
                    yield (b, s, t)

    @property
    def is_complete(self) -> bool:
        return all(key in self.units for key in self.keys())

    def __getitem__(self, key: UnitKey) -> Mat:
        return self.units[key]

    def diagonals(self) -> list[Mat]:
        return [self.units[(b, s, s)] for b, n in enumerate(self.structure) for s in range(n)]

    def minimal(self, b: int) -> Mat:
        """The first diagonal unit e^(b)_{00} of block b."""
        return self.units[(b, 0, 0)]

    def conjugate(self, w: Mat) -> "MatrixUnitSystem":
        """The system W e W* for a unitary W."""
        return MatrixUnitSystem(self.structure, {k: w @ m @ adjoint(w) for k, m in self.units.items()})

    def defects(self, full: bool = False) -> dict[str, float]:
        """
        Largest violation of the matrix-unit relations.

        The default checks a generating set (projections, partition, source and
        range of the first row, factorization through the first row, adjoints);
        full=True checks every product e_st e_uv.
        """
        if not self.is_complete:
            raise ShapeError("defects need a complete system")
        one = identity(self.dim)
        out = {
            "partition": op_norm(sum(self.diagonals()) - one),
            "adjoint": 0.0,
            "multiplication": 0.0,
        }
        for b, n in enumerate(self.structure):
            def e(s: int, t: int, b: int = b) -> Mat:
                return self.units[(b, s, t)]

            for s in range(n):
                for t in range(n):
                    out["adjoint"] = max(out["adjoint"], op_norm(adjoint(e(s, t)) - e(t, s)))
            if full:
                for s in range(n):
                    for t in range(n):
                        for u in range(n):
                            for v in range(n):
                                want = e(s, v) if t == u else 0.0
                                out["multiplication"] = max(out["multiplication"], op_norm(e(s, t) @ e(u, v) - want))
            else:
                for s in range(n):
                    d = e(s, s)
                    out["multiplication"] = max(
                        out["multiplication"],
                        op_norm(d @ d - d),
                        op_norm(adjoint(e(0, s)) @ e(0, s) - d),
                        op_norm(e(0, s) @ adjoint(e(0, s)) - e(0, 0)),
                    )
                    for t in range(n):
                        out["multiplication"] = max(out["multiplication"], op_norm(e(s, 0) @ e(0, t) - e(s, t)))
        return out

    def is_exact(self, full: bool = False) -> bool:
        tol = config.exact_tol(self.dim)
        return all(v <= tol for v in self.defects(full).values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "structure": list(self.structure),
            "units": [
                {"block": b, "row": s, "col": t, "matrix": mat_to_dict(m)}
                for (b, s, t), m in sorted(self.units.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MatrixUnitSystem":
        try:
            structure = tuple(data["structure"])
            units = {
                (int(u["block"]), int(u["row"]), int(u["col"])): mat_from_dict(u["matrix"], "unit")
                for u in data["units"]
            }
        except (KeyError, TypeError) as e:
            raise SchemaError(f"matrix unit system: missing field {e}", field="units")
        return cls(structure, units)

    @classmethod
    def standard(cls, structure: Sequence[int], multiplicity: int = 1) -> "MatrixUnitSystem":
        """
        Standard units of M_{n_1} + ... + M_{n_k} acting on C^{sum n} tensor C^{multiplicity}.
        """
        total = sum(structure)
        units = {}
        offset = 0
        for b, n in enumerate(structure):
            for s in range(n):
                for t in range(n):
                    base = np.zeros((total, total), dtype=np.complex128)
                    base[offset + s, offset + t] = 1.0
                    units[(b, s, t)] = np.kron(base, np.eye(multiplicity))
            offset += n
        return cls(tuple(structure), units)


def correct_matrix_units(approx: MatrixUnitSystem) -> MatrixUnitSystem:
    """
    Correct approximate matrix units to an exact system.

    Uses the diagonal candidates and the first-row candidates e^(b)_{0t}
    (falling back to adjoints of e^(b)_{t0}): the diagonals become an exact
    resolution of the identity, each e_{0t} an exact partial isometry from
    e_tt to e_00, and e_st := e_{0s}* e_{0t}.

    Raises:
        ShapeError: If a needed candidate is missing
        LiftkitError: Constituent corrector errors, with the unit key attached
    """
    order = [(b, s) for b, n in enumerate(approx.structure) for s in range(n)]
    missing = [(b, s, s) for b, s in order if (b, s, s) not in approx.units]
    if missing:
        raise ShapeError("diagonal unit candidates are missing", unit=missing[0])

    try:
        diag = dict(zip(order, correct_resolution([approx.units[(b, s, s)] for b, s in order])))
    except LiftkitError as e:
        index = e.details.pop("index", None)
        if index is not None:
            e.at(unit=(*order[index], order[index][1]))
        raise

    units: dict[UnitKey, Mat] = {}
    for b, n in enumerate(approx.structure):
        top = diag[(b, 0)]
        row = {0: top}
        for t in range(1, n):
            candidate = approx.units.get((b, 0, t))
            if candidate is None and (b, t, 0) in approx.units:
                candidate = adjoint(approx.units[(b, t, 0)])
            if candidate is None:
                raise ShapeError("off-diagonal unit candidate is missing", unit=(b, 0, t))
            try:
                row[t] = correct_partial_isometry(diag[(b, t)], top, candidate)
            except LiftkitError as e:
                raise e.at(unit=(b, 0, t))
        for s in range(n):
            for t in range(n):
                if s == t:
                    units[(b, s, t)] = diag[(b, s)]
                elif s == 0:
                    units[(b, s, t)] = row[t]
                elif t == 0:
                    units[(b, s, t)] = adjoint(row[s])
                else:
                    units[(b, s, t)] = adjoint(row[s]) @ row[t]
    logger.debug(f"Corrected matrix units for structure {list(approx.structure)}")
    return MatrixUnitSystem(approx.structure, units)
