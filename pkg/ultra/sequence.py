"""
Representative sequences and tail filters.

A RepSequence is a finite truncation (a_1, ..., a_N) of an element of the
product of the algebras A_i. Limits along the ultrafilter are modeled by the
value at the largest index together with the whole profile.

Indices are 1-based everywhere a user sees them.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from config import config
from errors import InvalidParameterError, LiftkitError, SchemaError, ShapeError
from matcore import BlockAlgebra, Mat, as_mat, mat_from_dict, mat_to_dict, op_norm
from workers import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RepSequence:
    """One element per index, each in its own block algebra."""
    algebras: tuple[BlockAlgebra, ...]
    reps: tuple[Mat, ...]
    bound: float = float("inf")

    def __post_init__(self):
        object.__setattr__(self, "algebras", tuple(self.algebras))
        if len(self.algebras) != len(self.reps):
            raise ShapeError(
                "one algebra per representative is required",
                algebras=len(self.algebras),
                reps=len(self.reps),
            )
        if not self.reps:
            raise ShapeError("a sequence needs at least one index")
        reps = []
        for i, (alg, rep) in enumerate(zip(self.algebras, self.reps), start=1):
            try:
                rep = alg.check(as_mat(rep, f"rep {i}"), f"rep {i}")
            except LiftkitError as e:
                raise e.at(index=i)
            norm = op_norm(rep)
            if norm > self.bound + config.exact_tol(rep.shape[0]):
                raise InvalidParameterError(
                    f"rep {i} has norm {norm:.6g} above the bound {self.bound:g}",
                    index=i,
                    norm=norm,
                )
            reps.append(rep)
        object.__setattr__(self, "reps", tuple(reps))

    @classmethod
    def of_matrices(cls, reps: Sequence[Any], bound: Optional[float] = None) -> "RepSequence":
        """Sequence in the factors M_{dim_i} with their normalized traces."""
        mats = [as_mat(r, f"rep {i}") for i, r in enumerate(reps, start=1)]
        if bound is None:
            bound = max(op_norm(m) for m in mats) if mats else 0.0
        return cls(tuple(BlockAlgebra.matrix(m.shape[0]) for m in mats), tuple(mats), float(bound))

    def __len__(self) -> int:
        return len(self.reps)

    def at(self, i: int) -> Mat:
        """Representative at 1-based index i."""
        if not 1 <= i <= len(self.reps):
            raise ShapeError(f"index {i} outside 1..{len(self.reps)}", index=i)
        return self.reps[i - 1]

    @property
    def dims(self) -> list[int]:
        return [alg.dim for alg in self.algebras]

    def with_reps(self, reps: Sequence[Mat], bound: Optional[float] = None) -> "RepSequence":
        """Same algebras, new representatives."""
        mats = list(reps)
        if bound is None:
            bound = max(op_norm(m) for m in mats)
        return RepSequence(self.algebras, tuple(mats), float(bound))

    def map_indexed(self, fn: Callable[[int, BlockAlgebra, Mat], Any]) -> list[Any]:
        """
        Apply fn(i, algebra, rep) per index on the worker pool.

        Errors are re-raised with the 1-based index attached.
        """
        def run(item: tuple[int, BlockAlgebra, Mat]) -> Any:
            i, alg, rep = item
            try:
                return fn(i, alg, rep)
            except LiftkitError as e:
                raise e.at(index=i)

        return parallel_map(run, list(zip(range(1, len(self) + 1), self.algebras, self.reps)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "algebras": [alg.to_dict() for alg in self.algebras],
            "reps": [mat_to_dict(r) for r in self.reps],
            "bound": None if np.isinf(self.bound) else self.bound,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RepSequence":
        if not isinstance(data, dict) or "reps" not in data:
            raise SchemaError("sequence: expected an object with 'reps'", field="reps")
        reps = [mat_from_dict(r, f"reps[{k}]") for k, r in enumerate(data["reps"])]
        if "algebras" in data:
            algebras = tuple(BlockAlgebra.from_dict(a) for a in data["algebras"])
        else:
            algebras = tuple(BlockAlgebra.matrix(r.shape[0]) for r in reps)
        bound = data.get("bound")
        if bound is None:
            bound = max(op_norm(r) for r in reps) if reps else 0.0
        return cls(algebras, tuple(reps), float(bound))


@dataclass(frozen=True)
class TailFilter:
    """
    Decreasing index sets E_1 > E_2 > ... with E_1 the full index set 1..N.
    """
    size: int
    sets: tuple[frozenset[int], ...] = field(default=())

    def __post_init__(self):
        sets = tuple(frozenset(int(i) for i in s) for s in self.sets)
        object.__setattr__(self, "sets", sets)
        full = frozenset(range(1, self.size + 1))
        if not sets or sets[0] != full:
            raise InvalidParameterError("E_1 must be the full index set", size=self.size)
        for n in range(1, len(sets)):
            if not sets[n] <= sets[n - 1]:
                raise InvalidParameterError(f"E_{n + 1} is not contained in E_{n}", level=n + 1)
            if not sets[n] <= full:
                raise InvalidParameterError(f"E_{n + 1} has indices outside 1..{self.size}", level=n + 1)

    @classmethod
    def tails(cls, size: int, depth: int) -> "TailFilter":
        """E_n = {i >= n} for n = 1..depth."""
        if depth < 1:
            raise InvalidParameterError("depth must be positive", depth=depth)
        return cls(size, tuple(frozenset(range(n, size + 1)) for n in range(1, depth + 1)))

    @property
    def depth(self) -> int:
        return len(self.sets)

    def level(self, n: int) -> frozenset[int]:
        """E_n for 1-based n."""
        return self.sets[n - 1]

    def to_dict(self) -> dict[str, Any]:
        return {"size": self.size, "sets": [sorted(s) for s in self.sets]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TailFilter":
        try:
            return cls(int(data["size"]), tuple(data["sets"]))
        except (KeyError, TypeError) as e:
            raise SchemaError(f"filter: missing field {e}", field="filter")


@dataclass
class SpectralChain:
    """Increasing projections P(t_0) <= ... <= P(t_m) with their traces."""
    parameters: list[float]
    projections: list[Mat]
    traces: list[float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "parameters": self.parameters,
            "ranks": [int(round(float(np.trace(p).real))) for p in self.projections],
            "traces": self.traces,
            "projections": [mat_to_dict(p) for p in self.projections],
        }


def tail_p_norm(x: RepSequence, p: float) -> tuple[float, list[float]]:
    """
    Per-index p-norms and the tail estimate (the value at the largest index).
    """
    profile = [alg.p_norm(rep, p) for alg, rep in zip(x.algebras, x.reps)]
    return profile[-1], profile


def in_ideal(x: RepSequence, p: float, theta: float) -> bool:
    """Membership verdict for J_p at tolerance theta."""
    estimate, _ = tail_p_norm(x, p)
    return estimate < theta


def tail_trace(x: RepSequence) -> tuple[complex, list[complex]]:
    """Estimate of lim tau_i(a_i) with its profile."""
    profile = [alg.trace(rep) for alg, rep in zip(x.algebras, x.reps)]
    return profile[-1], profile
