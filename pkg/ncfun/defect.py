"""
Defect measurement: how far a tuple is from satisfying a relation.
"""

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

from config import config
from errors import ShapeError
from matcore import BlockAlgebra, op_norm
from .expr import Evaluator, NcExpr, Relation, Sum


@dataclass
class SummandDefect:
    label: str
    op: float
    p_norms: dict[float, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "op": self.op, "p": {str(p): v for p, v in self.p_norms.items()}}


@dataclass
class DefectReport:
    """Operator-norm and p-norm defects of a relation on a tuple."""
    relation: str
    op: float
    p_norms: dict[float, float] = field(default_factory=dict)
    summands: list[SummandDefect] = field(default_factory=list)
    dim: int = 0

    @property
    def satisfied(self) -> bool:
        """Relation holds within the exactness contract."""
        return self.op <= config.exact_tol(self.dim)

    def to_dict(self) -> dict[str, Any]:
        return {
            "relation": self.relation,
            "dim": self.dim,
            "op": self.op,
            "p": {str(p): v for p, v in self.p_norms.items()},
            "satisfied": self.satisfied,
            "summands": [s.to_dict() for s in self.summands],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DefectReport":
        return cls(
            relation=data["relation"],
            op=float(data["op"]),
            dim=int(data.get("dim", 0)),
            p_norms={float(p): float(v) for p, v in data.get("p", {}).items()},
            summands=[
                SummandDefect(s["label"], float(s["op"]), {float(p): float(v) for p, v in s.get("p", {}).items()})
                for s in data.get("summands", [])
            ],
        )


def defect(
    e: Union[Relation, NcExpr],
    args: Sequence[Any],
    alg: Optional[BlockAlgebra] = None,
    ps: Sequence[float] = (2.0,),
) -> DefectReport:
    """
    Measure a relation on a tuple.

    Args:
        e: Relation (or bare expression)
        args: Argument tuple
        alg: Algebra supplying the trace for p-norms (defaults to M_dim)
        ps: Requested p values

    Returns:
        DefectReport with aggregated and per-summand values
    """
    name = e.name if isinstance(e, Relation) else "expr"
    if isinstance(e, Relation):
        if len(args) != e.arity:
            raise ShapeError(f"relation '{e.name}' expects {e.arity} arguments", given=len(args))
        expr = e.expr
    else:
        expr = e

    ev = Evaluator(args)
    alg = alg or BlockAlgebra.matrix(ev.dim)
    value = ev(expr)
    report = DefectReport(
        relation=name,
        op=op_norm(value),
        p_norms={float(p): alg.p_norm(value, p) for p in ps},
        dim=ev.dim,
    )
    if isinstance(expr, Sum) and expr.labels:
        for label, term in zip(expr.labels, expr.terms):
            part = ev(term)
            report.summands.append(SummandDefect(
                label=label,
                op=op_norm(part),
                p_norms={float(p): alg.p_norm(part, p) for p in ps},
            ))
    return report
