"""
Finite-dimensional block algebras with a weighted tracial state.
"""

from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from config import config
from errors import InvalidParameterError, SchemaError, ShapeError
from .matrix import Mat, adjoint, as_mat


@dataclass(frozen=True)
class BlockAlgebra:
    """
    Direct sum M_{n_1} + ... + M_{n_k} with tau(a) = sum_j alpha_j tr(a_j) / n_j.
    """
    block_dims: tuple[int, ...]
    trace_weights: tuple[float, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        weights = tuple(float(w) for w in self.trace_weights)
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "trace_weights", weights)
        if not dims or any(n <= 0 for n in dims):
            raise ShapeError("block dims must be positive", blocks=list(dims))
        if len(weights) != len(dims):
            raise ShapeError("one trace weight per block is required", blocks=len(dims), weights=len(weights))
        if any(w <= 0 or not np.isfinite(w) for w in weights):
            raise InvalidParameterError("trace weights must be positive", weights=list(weights))
        if abs(sum(weights) - 1.0) > 1e-12:
            raise InvalidParameterError("trace weights must sum to 1", total=sum(weights))

    @classmethod
    def from_blocks(cls, dims: Sequence[int], weights: Optional[Sequence[float]] = None) -> "BlockAlgebra":
        """Build with dimension-proportional weights n_j / sum(n_k) unless given."""
        if weights is None:
            total = float(sum(dims))
            weights = [n / total for n in dims]
        return cls(tuple(dims), tuple(weights))

    @classmethod
    def matrix(cls, n: int) -> "BlockAlgebra":
        """Single factor M_n with its normalized trace."""
        return cls((n,), (1.0,))

    @property
    def dim(self) -> int:
        return sum(self.block_dims)

    @property
    def is_factor(self) -> bool:
        return len(self.block_dims) == 1

    @property
    def min_atom(self) -> float:
        """Smallest trace of a minimal projection."""
        return min(w / n for w, n in zip(self.trace_weights, self.block_dims))

    def slices(self) -> list[slice]:
        out, start = [], 0
        for n in self.block_dims:
            out.append(slice(start, start + n))
            start += n
        return out

    def check(self, a: Any, name: str = "element") -> Mat:
        """
        Validate a as a block-diagonal element of this algebra.

        Raises:
            ShapeError: On dimension mismatch or off-block entries
        """
        a = as_mat(a, name)
        if a.shape[0] != self.dim:
            raise ShapeError(f"{name} has dim {a.shape[0]}, algebra has dim {self.dim}")
        if not self.is_factor:
            mask = np.ones(a.shape, dtype=bool)
            for s in self.slices():
                mask[s, s] = False
            scale = max(1.0, float(np.max(np.abs(a))))
            if np.any(np.abs(a[mask]) > config.exact_tol(self.dim) * scale):
                raise ShapeError(f"{name} is not block-diagonal for blocks {list(self.block_dims)}")
        return a

    def blocks(self, a: Mat) -> list[Mat]:
        return [a[s, s] for s in self.slices()]

    def trace(self, a: Any) -> complex:
        """Tracial state tau(a)."""
        a = self.check(a)
        return complex(sum(
            w * np.trace(block) / n
            for w, n, block in zip(self.trace_weights, self.block_dims, self.blocks(a))
        ))

    def p_norm(self, a: Any, p: float) -> float:
        """(tau((a*a)^{p/2}))^{1/p} via eigendecomposition of a*a."""
        if not np.isfinite(p) or p < 1:
            raise InvalidParameterError("p must be a finite real >= 1", p=p)
        a = self.check(a)
        total = 0.0
        for w, n, block in zip(self.trace_weights, self.block_dims, self.blocks(a)):
            eig = np.clip(np.linalg.eigvalsh(adjoint(block) @ block), 0.0, None)
            total += w * float(np.sum(eig ** (p / 2.0))) / n
        return total ** (1.0 / p)

    def two_norm(self, a: Any) -> float:
        return self.p_norm(a, 2.0)

    def to_dict(self) -> dict[str, Any]:
        return {"blocks": list(self.block_dims), "weights": list(self.trace_weights)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BlockAlgebra":
        if not isinstance(data, dict) or "blocks" not in data:
            raise SchemaError("algebra: expected an object with 'blocks'", field="algebra")
        return cls.from_blocks(data["blocks"], data.get("weights"))


def p_norm(alg: BlockAlgebra, a: Any, p: float) -> float:
    """Tracial p-norm of a in alg."""
    return alg.p_norm(a, p)


def two_norm(a: Mat) -> float:
    """2-norm for the normalized trace of M_dim."""
    a = as_mat(a)
    return BlockAlgebra.matrix(a.shape[0]).two_norm(a)
