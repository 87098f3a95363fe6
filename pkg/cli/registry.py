"""
Corrector registry for the command line.

Every entry maps a tuple of matrices (plus JSON params) to the corrected tuple
in the same layout, and lists the linear residuals whose norms make up the
before/after defect reports and the exactness post-check.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from config import config
from errors import ArityError, InvalidParameterError, ShapeError
from matcore import BlockAlgebra, Mat, adjoint, herm_calculus, identity, plateau
from ncfun import DefectReport, SummandDefect
from correct import (
    CorrectorFamily,
    MatrixUnitSystem,
    combine_families,
    correct_commuting_normals,
    correct_direct_sum,
    correct_haar,
    correct_matrix_units,
    correct_partial_isometry,
    correct_projection,
    correct_resolution,
    correct_tensor,
    correct_two_projections,
    correct_unitary,
    glue,
    haar_moments,
    projection_family,
    resolution_family,
    two_projection_family,
    unitary_family,
)

Residuals = list[tuple[str, Mat]]


@dataclass(frozen=True)
class CorrectorEntry:
    name: str
    run: Callable[[list[Mat], dict[str, Any]], list[Mat]]
    residuals: Callable[[list[Mat], dict[str, Any]], Residuals]
    kinds: tuple[str, ...] = ()
    arity: Optional[int] = None
    params: tuple[str, ...] = field(default=())

    def check_arity(self, mats: Sequence[Mat]) -> None:
        if self.arity is not None and len(mats) != self.arity:
            raise ArityError(f"'{self.name}' takes {self.arity} matrices", given=len(mats))
        if not mats:
            raise ArityError(f"'{self.name}' needs at least one matrix")


def residual_report(name: str, residuals: Residuals, dim: int, ps: Sequence[float] = (2.0,)) -> DefectReport:
    """Summed operator and p-norms of the residual matrices."""
    alg = BlockAlgebra.matrix(dim)
    summands = [
        SummandDefect(label, float(np.linalg.norm(r, 2)), {float(p): alg.p_norm(r, p) for p in ps})
        for label, r in residuals
    ]
    return DefectReport(
        relation=name,
        op=float(sum(s.op for s in summands)),
        p_norms={float(p): float(sum(s.p_norms[float(p)] for s in summands)) for p in ps},
        summands=summands,
        dim=dim,
    )


def _param(params: dict[str, Any], key: str, cast: Callable[[Any], Any], default: Any = None) -> Any:
    if key not in params:
        if default is None:
            raise InvalidParameterError(f"missing parameter '{key}'", param=key)
        return default
    try:
        return cast(params[key])
    except (TypeError, ValueError):
        raise InvalidParameterError(f"parameter '{key}' is malformed", param=key)


# ============================================================================
# Residuals
# ============================================================================

def _projection_res(a: Mat, tag: str = "") -> Residuals:
    return [(f"self_adjoint{tag}", a - adjoint(a)), (f"idempotent{tag}", a - a @ a)]


def _projections_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    out: Residuals = []
    for j, a in enumerate(mats):
        out += _projection_res(a, f"_{j}")
    return out


def _unitary_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    out: Residuals = []
    for j, u in enumerate(mats):
        one = identity(u.shape[0])
        out += [(f"isometry_{j}", one - adjoint(u) @ u), (f"co_isometry_{j}", one - u @ adjoint(u))]
    return out


def _partial_isometry_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    p, q, v = mats
    return [("source", adjoint(v) @ v - p), ("range", v @ adjoint(v) - q)]


def _resolution_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    out = _projections_res(mats, params)
    out.append(("partition", sum(mats) - identity(mats[0].shape[0])))
    for j in range(len(mats)):
        for k in range(j + 1, len(mats)):
            out.append((f"orthogonal_{j}_{k}", mats[j] @ mats[k]))
    return out


def _two_projections_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    c = _param(params, "c", float)
    p, q = mats
    x, y = p @ q @ p, q @ p @ q
    return _projections_res(mats, params) + [("angle_0", x @ x - c * x), ("angle_1", y @ y - c * y)]


def _structure(params: dict[str, Any], count: int) -> tuple[int, ...]:
    structure = tuple(int(n) for n in params.get("structure", ()))
    if not structure:
        n = int(round(np.sqrt(count)))
        structure = (n,)
    if sum(n * n for n in structure) != count:
        raise ShapeError("matrix count does not match the unit structure", structure=list(structure), given=count)
    return structure


def _units(mats: list[Mat], params: dict[str, Any]) -> MatrixUnitSystem:
    structure = _structure(params, len(mats))
    keys = [(b, s, t) for b, n in enumerate(structure) for s in range(n) for t in range(n)]
    return MatrixUnitSystem(structure, dict(zip(keys, mats)))


def _units_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    units = _units(mats, params)
    out: Residuals = [("partition", sum(units.diagonals()) - identity(units.dim))]
    for b, n in enumerate(units.structure):
        for s in range(n):
            out.append((f"idempotent_{b}_{s}", units[(b, s, s)] @ units[(b, s, s)] - units[(b, s, s)]))
            for t in range(n):
                out.append((f"adjoint_{b}_{s}_{t}", adjoint(units[(b, s, t)]) - units[(b, t, s)]))
                out.append((f"product_{b}_{s}_{t}", units[(b, s, 0)] @ units[(b, 0, t)] - units[(b, s, t)]))
    return out


def _normals_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    out: Residuals = [(f"normal_{j}", a @ adjoint(a) - adjoint(a) @ a) for j, a in enumerate(mats)]
    for j in range(len(mats)):
        for k in range(j + 1, len(mats)):
            out.append((f"commute_{j}_{k}", mats[j] @ mats[k] - mats[k] @ mats[j]))
    return out


def _haar_algebra(params: dict[str, Any]) -> Optional[BlockAlgebra]:
    return BlockAlgebra.from_dict(params["algebra"]) if "algebra" in params else None


def _haar_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    (v,) = mats
    one = identity(v.shape[0])
    moments = haar_moments(v, _haar_algebra(params))
    return _unitary_res(mats, params) + [(f"moment_{k + 1}", m * one) for k, m in enumerate(moments)]


def generator_residuals(s: Mat, n: int) -> Residuals:
    """Unsquared terms of the M_n generator relation."""
    re = 0.5 * (s + adjoint(s))
    skew = 0.5 * (s - adjoint(s))
    diag = [herm_calculus(re, plateau(float(k + 1)), name="Re S") for k in range(n)]
    out: Residuals = [("spectrum", re - sum((k + 1) * d for k, d in enumerate(diag)))]
    steps = [diag[k + 1] @ skew @ diag[k] for k in range(n - 1)]
    for k, f in enumerate(steps):
        out.append((f"source_{k}", adjoint(f) @ f - diag[k]))
        out.append((f"range_{k}", f @ adjoint(f) - diag[k + 1]))
    out.append(("skew", skew - sum((f - adjoint(f) for f in steps), np.zeros_like(s))))
    return out


def _tensor_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    n = _param(params, "n", int)
    ts, s = mats[:-1], mats[-1]
    out: Residuals = []
    for i, t in enumerate(ts):
        out.append((f"commute_{i}", t @ s - s @ t))
        out.append((f"commute_adj_{i}", t @ adjoint(s) - adjoint(s) @ t))
    return out + generator_residuals(s, n)


def _direct_sum_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    m = _param(params, "m", int)
    e = mats[-1]
    ss, ts = mats[:m], mats[m:-1]
    out: Residuals = [("central_self_adjoint", e - adjoint(e)), ("central_idempotent", e - e @ e)]
    for j, x in enumerate(ss):
        out += [(f"commute_x_{j}", e @ x - x @ e), (f"support_x_{j}", e @ x - x)]
    for j, y in enumerate(ts):
        out += [(f"commute_y_{j}", e @ y - y @ e), (f"support_y_{j}", e @ y)]
    return out


GlueFamily = tuple[Callable[[dict[str, Any], int], CorrectorFamily], Callable[[list[Mat], dict[str, Any]], Residuals]]

# family builder from a part spec and its size, with the linear residuals of the part
GLUE_FAMILIES: dict[str, GlueFamily] = {
    "projection": (lambda part, k: projection_family(k), _projections_res),
    "unitary": (lambda part, k: unitary_family(k), _unitary_res),
    "two_projections": (lambda part, k: two_projection_family(_param(part, "c", float)), _two_projections_res),
    "resolution": (lambda part, k: resolution_family(k), _resolution_res),
}


def _glue_parts(params: dict[str, Any], side: str, n: int) -> list[tuple[str, dict[str, Any], list[int]]]:
    """
    Parts of one side of a glue: [{"family": name, "indices": [...], ...}].

    A missing side means n independent projections.

    Raises:
        InvalidParameterError: On unknown families or indices that do not cover the tuple once
    """
    spec = params.get(side)
    if spec is None:
        return [("projection", {}, list(range(n)))]
    if not isinstance(spec, list) or not all(isinstance(part, dict) for part in spec):
        raise InvalidParameterError(f"parameter '{side}' must be a list of family objects", param=side)
    parts, used = [], []
    for part in spec:
        name = part.get("family")
        if name not in GLUE_FAMILIES:
            raise InvalidParameterError(
                f"unknown glue family '{name}'; known: {', '.join(sorted(GLUE_FAMILIES))}",
                param=side,
            )
        try:
            indices = [int(i) for i in part.get("indices", [])]
        except (TypeError, ValueError):
            raise InvalidParameterError(f"'{side}' indices are malformed", param=side)
        parts.append((name, part, indices))
        used += indices
    if sorted(used) != list(range(n)):
        raise InvalidParameterError(f"'{side}' families must cover indices 0..{n - 1} once", param=side, indices=used)
    return parts


def _glue_side(params: dict[str, Any], side: str, n: int) -> CorrectorFamily:
    """The combined corrector family for the sources or ranges of an n-tuple."""
    parts = _glue_parts(params, side, n)
    families = [(GLUE_FAMILIES[name][0](part, len(indices)), indices) for name, part, indices in parts]
    if len(families) == 1 and families[0][1] == list(range(n)):
        return families[0][0]
    return combine_families(n, families)


def _glue_res(mats: list[Mat], params: dict[str, Any]) -> Residuals:
    n = len(mats)
    out: Residuals = []
    for side, squares in (("sources", [adjoint(v) @ v for v in mats]), ("ranges", [v @ adjoint(v) for v in mats])):
        for name, part, indices in _glue_parts(params, side, n):
            tag = f"{side[:-1]}_{name}@{','.join(map(str, indices))}"
            out += [(f"{tag}_{label}", r) for label, r in GLUE_FAMILIES[name][1]([squares[i] for i in indices], part)]
    return out


# ============================================================================
# Runners
# ============================================================================

def _run_projection(mats, params):
    return [correct_projection(a) for a in mats]


def _run_unitary(mats, params):
    return [correct_unitary(u) for u in mats]


def _run_resolution(mats, params):
    return correct_resolution(mats)


def _run_partial_isometry(mats, params):
    p, q, a = mats
    return [p, q, correct_partial_isometry(p, q, a)]


def _run_two_projections(mats, params):
    return list(correct_two_projections(mats[0], mats[1], _param(params, "c", float)))


def _run_units(mats, params):
    exact = correct_matrix_units(_units(mats, params))
    return [exact[key] for key in exact.keys()]


def _run_normals(mats, params):
    return correct_commuting_normals(mats, _param(params, "p", float, 2.0))


def _run_haar(mats, params):
    (u,) = mats
    return [correct_haar(u, _haar_algebra(params))]


def _run_tensor(mats, params):
    t_hat, s_hat = correct_tensor(mats[:-1], mats[-1], _param(params, "n", int))
    return [*t_hat, s_hat]


def _run_direct_sum(mats, params):
    m = _param(params, "m", int)
    if not 0 <= m <= len(mats) - 1:
        raise InvalidParameterError("split index m is outside the tuple", m=m)
    s_hat, t_hat, e = correct_direct_sum(mats[:m], mats[m:-1], mats[-1])
    return [*s_hat, *t_hat, e]


def _run_glue(mats, params):
    n = len(mats)
    return glue(_glue_side(params, "sources", n), _glue_side(params, "ranges", n), mats)


REGISTRY: dict[str, CorrectorEntry] = {
    "projection": CorrectorEntry("projection", _run_projection, _projections_res, ("near_projection",)),
    "unitary": CorrectorEntry("unitary", _run_unitary, _unitary_res, ("near_unitary", "haar_unitary")),
    "partial_isometry": CorrectorEntry(
        "partial_isometry", _run_partial_isometry, _partial_isometry_res, ("near_partial_isometry",), arity=3,
    ),
    "resolution": CorrectorEntry("resolution", _run_resolution, _resolution_res, ("near_resolution",)),
    "two_projections": CorrectorEntry("two_projections", _run_two_projections, _two_projections_res, arity=2, params=("c",)),
    "matrix_units": CorrectorEntry("matrix_units", _run_units, _units_res, ("near_matrix_units",), params=("structure",)),
    "commuting_normals": CorrectorEntry(
        "commuting_normals", _run_normals, _normals_res, ("almost_commuting_pair", "clock_shift"), params=("p",),
    ),
    "haar": CorrectorEntry("haar", _run_haar, _haar_res, ("haar_unitary", "near_unitary"), arity=1, params=("algebra",)),
    "tensor": CorrectorEntry("tensor", _run_tensor, _tensor_res, params=("n",)),
    "direct_sum": CorrectorEntry("direct_sum", _run_direct_sum, _direct_sum_res, params=("m",)),
    "glue": CorrectorEntry("glue", _run_glue, _glue_res, params=("sources", "ranges")),
}


def lookup(name: str) -> CorrectorEntry:
    """
    Raises:
        InvalidParameterError: For unknown names, listing the registered ones
    """
    entry = REGISTRY.get(name)
    if entry is None:
        raise InvalidParameterError(
            f"unknown corrector '{name}'; registered: {', '.join(sorted(REGISTRY))}",
            registered=sorted(REGISTRY),
        )
    return entry


def exactness_bound(dim: int) -> float:
    return config.exact_tol(dim)
