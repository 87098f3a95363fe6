"""
Subcommand bodies.

Each command returns its exit code: 0 on success, 1 for usage and schema
problems, 2 when a mathematical precondition fails. Failures still write a
report with the error code and details.
"""

import argparse
import logging
from typing import Any, Callable, Optional

import numpy as np

from errors import LiftkitError, SchemaError
from matcore import BlockAlgebra, Mat, mats_from_list, mats_to_list
from ncfun import (
    RELATION_BUILDERS,
    Relation,
    defect,
    rel_commuting_normals,
    rel_matrix_generator,
    rel_projections,
    rel_resolution,
    rel_two_projections,
    rel_unitaries,
    relation_from_dict,
)
from correct import MatrixUnitSystem
from ultra import (
    GluedGenerators,
    InclusionData,
    RepSequence,
    TailFilter,
    bratteli_lift,
    default_grid,
    diagonal_completion,
    extend_matrix_units,
    in_ideal,
    lift_chain,
    lift_partial_isometry,
    lift_projection_trace,
    partial_isometry_profile,
    restrict_units,
    tail_p_norm,
    tail_trace,
)
from ensembles import EnsembleSpec, generate
from .io import read_json, write_csv, write_json
from .registry import lookup, residual_report
from .runlog import RunLog
from .sweep import SweepConfig, output_paths, run_sweep

logger = logging.getLogger(__name__)

Body = Callable[[RunLog], dict[str, Any]]


def _execute(op: str, out: Optional[str], body: Body) -> int:
    log = RunLog()
    try:
        result = body(log)
    except LiftkitError as e:
        log.add("error", f"{op} failed", str(e))
        write_json({"op": op, "error": e.to_dict(), "log": log.to_list()}, out)
        return e.exit_code
    write_json({"op": op, **result, "log": log.to_list()}, out)
    return 0


def _norms(p: Optional[float]) -> tuple[float, ...]:
    return (2.0,) if p is None or p == 2.0 else (2.0, float(p))


def _tuple_input(data: Any) -> tuple[list[Mat], dict[str, Any]]:
    """A bare list of matrices, or {"matrices", "params"?} as written by `gen`."""
    if isinstance(data, list):
        return mats_from_list(data), {}
    if not isinstance(data, dict) or "matrices" not in data:
        raise SchemaError("input: expected a list of matrices or an object with 'matrices'", field="matrices")
    params = {k: data[k] for k in ("structure", "algebra") if k in data}
    extra = data.get("params", {})
    if not isinstance(extra, dict):
        raise SchemaError("input: 'params' must be an object", field="params")
    params.update(extra)
    return mats_from_list(data["matrices"]), params


# ============================================================================
# correct
# ============================================================================

def run_correct(args: argparse.Namespace) -> int:
    """Correct the tuple in --in with the corrector --op and report before/after defects."""

    def body(log: RunLog) -> dict[str, Any]:
        entry = lookup(args.op)
        mats, params = _tuple_input(read_json(args.input, "in"))
        if args.p is not None:
            params.setdefault("p", args.p)
        entry.check_arity(mats)
        dim = mats[0].shape[0]
        ps = _norms(args.p)

        before = residual_report(entry.name, entry.residuals(mats, params), dim, ps)
        log.add("info", f"Correcting with '{entry.name}'", f"{len(mats)} matrices of size {dim}, defect {before.op:.3g}")
        outputs = entry.run(mats, params)
        after = residual_report(entry.name, entry.residuals(outputs, params), dim, ps)
        alg = BlockAlgebra.matrix(dim)
        diffs = [b - a for a, b in zip(mats, outputs)]
        distance = {"op": float(sum(np.linalg.norm(d, 2) for d in diffs))}
        distance.update({f"p{p:g}": float(sum(alg.p_norm(d, p) for d in diffs)) for p in ps})
        log.add("info", "Correction finished", f"defect {after.op:.3g}, distance {distance['op']:.3g}")
        return {
            "outputs": mats_to_list(outputs),
            "params": params,
            "before": before.to_dict(),
            "after": after.to_dict(),
            "distance": distance,
        }

    return _execute(f"correct:{args.op}", args.out, body)


# ============================================================================
# defect
# ============================================================================

PARAMETRIC_RELATIONS: dict[str, Callable[[list[Mat], dict[str, Any]], Relation]] = {
    "projections": lambda mats, params: rel_projections(len(mats)),
    "unitaries": lambda mats, params: rel_unitaries(len(mats)),
    "resolution": lambda mats, params: rel_resolution(len(mats)),
    "commuting_normals": lambda mats, params: rel_commuting_normals(len(mats)),
    "two_projections": lambda mats, params: rel_two_projections(float(params["c"])),
    "matrix_generator": lambda mats, params: rel_matrix_generator(int(params["n"])),
}


def _relation(name: Optional[str], data: Any, mats: list[Mat], params: dict[str, Any]) -> Relation:
    if isinstance(data, dict) and "relation" in data:
        return relation_from_dict(data["relation"])
    if name in RELATION_BUILDERS:
        return RELATION_BUILDERS[name]()
    if name in PARAMETRIC_RELATIONS:
        try:
            return PARAMETRIC_RELATIONS[name](mats, params)
        except KeyError as e:
            raise SchemaError(f"relation '{name}' needs parameter {e}", field=f"params.{e.args[0]}")
    names = sorted([*RELATION_BUILDERS, *PARAMETRIC_RELATIONS])
    raise SchemaError(f"unknown relation {name!r}; built in: {', '.join(names)}", field="op")


def run_defect(args: argparse.Namespace) -> int:
    """Evaluate a relation (built-in --op or the input's 'relation') on a tuple."""

    def body(log: RunLog) -> dict[str, Any]:
        data = read_json(args.input, "in")
        mats, params = _tuple_input(data)
        rel = _relation(args.op, data, mats, params)
        alg = BlockAlgebra.from_dict(params["algebra"]) if "algebra" in params else None
        report = defect(rel, mats, alg, _norms(args.p))
        log.add("info", f"Measured '{rel.name}'", f"op defect {report.op:.3g}")
        return {"report": report.to_dict(), "satisfied": report.satisfied}

    return _execute(f"defect:{args.op or 'custom'}", args.out, body)


# ============================================================================
# gen
# ============================================================================

def run_gen(args: argparse.Namespace) -> int:
    """Draw one ensemble instance from --config or --op/--dim/--delta/--seed."""

    def body(log: RunLog) -> dict[str, Any]:
        if args.config:
            spec = EnsembleSpec.from_dict(read_json(args.config, "config"))
        else:
            if not args.op or args.dim is None:
                raise SchemaError("gen needs --config or both --op and --dim", field="op")
            spec = EnsembleSpec(args.op, args.dim, args.delta, args.seed)
        instance = generate(spec)
        log.add("info", f"Generated '{spec.kind}'", f"dim {spec.dim}, measured defect {instance.measured:.3g}")
        return instance.to_dict()

    return _execute("gen", args.out, body)


# ============================================================================
# sweep
# ============================================================================

def run_sweep_command(args: argparse.Namespace) -> int:
    """Run a sweep config; rows go to CSV, the summary to JSON next to it."""
    try:
        cfg = SweepConfig.from_dict(read_json(args.config, "config"))
    except LiftkitError as e:
        logger.error(f"Sweep config rejected: {e}")
        write_json({"op": "sweep", "error": e.to_dict()}, None)
        return e.exit_code

    result = run_sweep(cfg)
    csv_path, summary_path = output_paths(cfg, args.out)
    write_csv(result.rows, result.columns, csv_path)
    write_json({"op": "sweep", **result.summary(csv_path)}, summary_path)
    return 0


# ============================================================================
# ultra
# ============================================================================

def _sequence(data: Any, name: str) -> RepSequence:
    if not isinstance(data, dict):
        raise SchemaError(f"{name}: expected a sequence object", field=name)
    try:
        return RepSequence.from_dict(data)
    except SchemaError as e:
        raise e.at(field=name)


def _systems(data: Any, name: str) -> list[MatrixUnitSystem]:
    items = data.get("systems") if isinstance(data, dict) else data
    if not isinstance(items, list):
        raise SchemaError(f"{name}: expected a list of matrix unit systems", field=name)
    return [MatrixUnitSystem.from_dict(item) for item in items]


def _glued(data: Any) -> list[GluedGenerators]:
    items = data.get("targets") if isinstance(data, dict) else data
    if not isinstance(items, list):
        raise SchemaError("targets: expected a list of glued generators", field="targets")
    return [GluedGenerators.from_dict(item) for item in items]


def _chain(data: Any) -> list[InclusionData]:
    items = data.get("chain") if isinstance(data, dict) else data
    if not isinstance(items, list) or not items:
        raise SchemaError("chain: expected a non-empty list of inclusions", field="chain")
    return [InclusionData.from_dict(item) for item in items]


def _ultra_tail_norm(args: argparse.Namespace, log: RunLog) -> dict[str, Any]:
    x = _sequence(read_json(args.input, "in"), "in")
    p = 2.0 if args.p is None else float(args.p)
    estimate, profile = tail_p_norm(x, p)
    trace, traces = tail_trace(x)
    out = {"p": p, "estimate": estimate, "profile": profile, "trace": [trace.real, trace.imag]}
    out["trace_profile"] = [[t.real, t.imag] for t in traces]
    if args.theta is not None:
        out["in_ideal"] = in_ideal(x, p, args.theta)
    log.add("info", f"Tail {p:g}-norm {estimate:.4g}", f"{len(x)} indices")
    return out


def _ultra_diagonal_completion(args: argparse.Namespace, log: RunLog) -> dict[str, Any]:
    data = read_json(args.input, "in")
    if not isinstance(data, dict) or not isinstance(data.get("rows"), list) or not data["rows"]:
        raise SchemaError("array: expected an object with a non-empty 'rows' list", field="rows")
    rows = [_sequence(r, f"rows[{k}]") for k, r in enumerate(data["rows"])]
    if "filter" in data:
        filt = TailFilter.from_dict(data["filter"])
    else:
        filt = TailFilter.tails(len(rows[0]), len(rows))
    x = diagonal_completion(rows, filt)
    log.add("info", "Diagonal completion", f"{len(rows)} rows over {len(x)} indices")
    return {"completion": x.to_dict(), "filter": filt.to_dict()}


def _ultra_lift_projection(args: argparse.Namespace, log: RunLog) -> dict[str, Any]:
    a = _sequence(read_json(args.input, "in"), "in")
    if args.t is None:
        raise SchemaError("lift-projection needs --t", field="t")
    lifted = lift_projection_trace(a, args.t)
    traces = [float(alg.trace(p).real) for alg, p in zip(lifted.algebras, lifted.reps)]
    log.add("info", f"Lifted projections to trace {args.t:g}", f"max error {max(abs(t - args.t) for t in traces):.3g}")
    return {"lifted": lifted.to_dict(), "traces": traces}


def _ultra_lift_chain(args: argparse.Namespace, log: RunLog) -> dict[str, Any]:
    t = _sequence(read_json(args.input, "in"), "in")
    grid = args.grid if args.grid else default_grid()
    chains = lift_chain(t, grid)
    log.add("info", "Lifted spectral chains", f"{len(grid)} grid points")
    return {"grid": list(grid), "chains": [c.to_dict() for c in chains]}


def _ultra_lift_partial_isometry(args: argparse.Namespace, log: RunLog) -> dict[str, Any]:
    data = read_json(args.input, "in")
    if not isinstance(data, dict) or not all(k in data for k in ("E", "F", "W")):
        raise SchemaError("input: expected an object with 'E', 'F' and 'W'", field="in")
    e, f, w = (_sequence(data[k], k) for k in ("E", "F", "W"))
    v = lift_partial_isometry(e, f, w)
    profile = partial_isometry_profile(e, f, w, v)
    log.add("info", "Lifted partial isometries", f"tail distance {profile[-1]['distance']:.3g}")
    return {"lifted": v.to_dict(), "profile": profile}


def _ultra_extend_units(args: argparse.Namespace, log: RunLog) -> dict[str, Any]:
    inc = InclusionData.from_dict(read_json(args.inclusion, "inclusion"))
    pi = _systems(read_json(args.pi, "pi"), "pi")
    targets = _glued(read_json(args.targets, "targets")) if args.targets else None
    rho = extend_matrix_units(inc, pi, targets)
    restriction = []
    for i, (system, lifted) in enumerate(zip(pi, rho), start=1):
        back = restrict_units(inc, lifted)
        miss = max(float(np.linalg.norm(back[k] - system[k], 2)) for k in system.keys())
        restriction.append({"index": i, "restriction_defect": miss, "unit_defects": lifted.defects()})
    log.add("info", "Extended matrix units", f"{len(rho)} indices, {list(inc.a_blocks)} -> {list(inc.b_blocks)}")
    return {"systems": [r.to_dict() for r in rho], "restriction": restriction}


def _ultra_bratteli(args: argparse.Namespace, log: RunLog) -> dict[str, Any]:
    chain = _chain(read_json(args.chain, "chain"))
    if not args.ambient:
        raise SchemaError("bratteli needs --ambient", field="ambient")
    depth = args.depth if args.depth is not None else len(chain)
    tower = bratteli_lift(chain, depth, args.ambient)
    levels = []
    for level, systems in enumerate(tower, start=1):
        levels.append({
            "level": level,
            "structure": list(systems[0].structure),
            "minimal_traces": [
                [float(np.trace(s.minimal(b)).real) / s.dim for b in range(len(s.structure))]
                for s in systems
            ],
            "systems": [s.to_dict() for s in systems],
        })
    log.add("info", "Bratteli tower", f"depth {depth} over ambient dims {list(args.ambient)}")
    return {"levels": levels}


ULTRA_COMMANDS: dict[str, Callable[[argparse.Namespace, RunLog], dict[str, Any]]] = {
    "tail-norm": _ultra_tail_norm,
    "diagonal-completion": _ultra_diagonal_completion,
    "lift-projection": _ultra_lift_projection,
    "lift-chain": _ultra_lift_chain,
    "lift-partial-isometry": _ultra_lift_partial_isometry,
    "extend-units": _ultra_extend_units,
    "bratteli": _ultra_bratteli,
}


def run_ultra(args: argparse.Namespace) -> int:
    """Dispatch an ultra subcommand."""
    handler = ULTRA_COMMANDS[args.ultra_command]
    return _execute(f"ultra:{args.ultra_command}", args.out, lambda log: handler(args, log))
