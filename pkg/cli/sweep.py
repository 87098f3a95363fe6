"""
Defect/distance sweeps over generated ensembles.

One CSV row per trial in a fixed column order, plus a JSON summary with
per-cell medians and a verdict on whether the distance grows with delta.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from config import config
from errors import LiftkitError, SchemaError
from matcore import BlockAlgebra, Mat
from ensembles import EnsembleSpec, KINDS, derive_seed, generate
from ensembles.generator import MAX_DELTA
from workers import parallel_map
from .registry import REGISTRY, CorrectorEntry, exactness_bound, residual_report
from .runlog import RunLog

logger = logging.getLogger(__name__)

BASE_COLUMNS = ("dim", "delta", "trial", "defect_in_op", "defect_in_2", "defect_out_op", "dist_op", "dist_2")
EXACTNESS_VIOLATION = "exactness_violation"


def columns(p_norms: tuple[float, ...]) -> list[str]:
    """CSV header: base columns, one dist_p column per extra p, runtime_ms, error."""
    extra = [f"dist_p{p:g}" for p in p_norms if p != 2.0]
    return [*BASE_COLUMNS, *extra, "runtime_ms", "error"]


def _field(data: dict[str, Any], key: str, kind: type, default: Any = None) -> Any:
    if key not in data:
        if default is None:
            raise SchemaError(f"missing field '{key}'", field=key)
        return default
    value = data[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise SchemaError(f"field '{key}' must be {kind.__name__}", field=key)
    return value


def _number_list(data: dict[str, Any], key: str, kind: type, default: Any = None) -> list:
    raw = _field(data, key, list, default)
    out = []
    for j, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not isinstance(v, int)):
            raise SchemaError(f"field '{key}[{j}]' must be {kind.__name__}", field=f"{key}[{j}]")
        out.append(kind(v))
    return out


@dataclass(frozen=True)
class SweepConfig:
    """A sweep: corrector, ensemble template, delta grid, dims, trials, norms, master seed, output."""
    corrector: str
    kind: str
    deltas: tuple[float, ...]
    dims: tuple[int, ...]
    trials: int
    p_norms: tuple[float, ...] = (2.0,)
    seed: int = 0
    output: Optional[str] = None
    timing: bool = False
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def entry(self) -> CorrectorEntry:
        return REGISTRY[self.corrector]

    @classmethod
    def from_dict(cls, data: Any) -> "SweepConfig":
        """
        Raises:
            SchemaError: With the offending field path in details["field"]
        """
        if not isinstance(data, dict):
            raise SchemaError("sweep config must be a JSON object", field="")

        corrector = _field(data, "corrector", str)
        if corrector not in REGISTRY:
            raise SchemaError(
                f"unknown corrector '{corrector}'; registered: {', '.join(sorted(REGISTRY))}",
                field="corrector",
            )
        ensemble = _field(data, "ensemble", dict)
        kind = ensemble.get("kind")
        if kind not in KINDS:
            raise SchemaError(f"unknown ensemble kind {kind!r}", field="ensemble.kind")
        if kind not in REGISTRY[corrector].kinds:
            raise SchemaError(
                f"corrector '{corrector}' does not accept ensemble '{kind}'",
                field="ensemble.kind",
                accepted=list(REGISTRY[corrector].kinds),
            )

        deltas = _number_list(data, "deltas", float)
        if not deltas:
            raise SchemaError("delta grid is empty", field="deltas")
        if any(d <= 0 or d > MAX_DELTA for d in deltas):
            raise SchemaError(f"deltas must lie in (0, {MAX_DELTA}]", field="deltas")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise SchemaError("delta grid must be strictly increasing", field="deltas")

        dims = _number_list(data, "dims", int)
        if not dims or any(d < 2 for d in dims):
            raise SchemaError("dims must be a non-empty list of integers >= 2", field="dims")

        trials = _field(data, "trials", int)
        if trials < 1:
            raise SchemaError("trials must be at least 1", field="trials")

        p_norms = _number_list(data, "p_norms", float, [2.0])
        if any(not math.isfinite(p) or p < 1 for p in p_norms):
            raise SchemaError("p-norms must be finite and >= 1", field="p_norms")
        if 2.0 not in p_norms:
            p_norms = [2.0, *p_norms]

        seed = _field(data, "seed", int, 0)
        if seed < 0:
            raise SchemaError("seed must be non-negative", field="seed")
        output = data.get("output")
        if output is not None and not isinstance(output, str):
            raise SchemaError("field 'output' must be a path string", field="output")

        return cls(
            corrector=corrector,
            kind=kind,
            deltas=tuple(deltas),
            dims=tuple(dims),
            trials=trials,
            p_norms=tuple(p_norms),
            seed=seed,
            output=output,
            timing=_field(data, "timing", bool, False),
            params=_field(data, "params", dict, {}),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "corrector": self.corrector,
            "ensemble": {"kind": self.kind},
            "deltas": list(self.deltas),
            "dims": list(self.dims),
            "trials": self.trials,
            "p_norms": list(self.p_norms),
            "seed": self.seed,
            "output": self.output,
            "timing": self.timing,
            "params": self.params,
        }


@dataclass
class SweepResult:
    """Per-trial rows ordered by (dim, delta, trial) and the derived summary."""
    config: SweepConfig
    rows: list[dict[str, Any]]
    log: RunLog

    @property
    def columns(self) -> list[str]:
        return columns(self.config.p_norms)

    def cells(self) -> list[dict[str, Any]]:
        out = []
        for dim in self.config.dims:
            for delta in self.config.deltas:
                rows = [r for r in self.rows if r["dim"] == dim and r["delta"] == delta]
                ok = [r for r in rows if not r["error"]]
                out.append({
                    "dim": dim,
                    "delta": delta,
                    "trials": len(rows),
                    "failures": len(rows) - len(ok),
                    "exactness_violations": sum(r["error"] == EXACTNESS_VIOLATION for r in rows),
                    **{f"median_{key}": _median(ok, key) for key in BASE_COLUMNS[3:]},
                })
        return out

    def monotone(self) -> dict[str, bool]:
        """Per dim: does the median 2-norm distance not decrease as delta grows?"""
        cells = self.cells()
        verdict = {}
        for dim in self.config.dims:
            medians = [c["median_dist_2"] for c in cells if c["dim"] == dim and c["median_dist_2"] is not None]
            verdict[str(dim)] = all(b >= a - 1e-12 for a, b in zip(medians, medians[1:]))
        return verdict

    def summary(self, csv_path: str) -> dict[str, Any]:
        verdict = self.monotone()
        return {
            "config": self.config.to_dict(),
            "csv": csv_path,
            "columns": self.columns,
            "rows": len(self.rows),
            "cells": self.cells(),
            "monotone": verdict,
            "monotone_all": all(verdict.values()),
            "log": self.log.to_list(),
        }


def _median(rows: list[dict[str, Any]], key: str) -> Optional[float]:
    values = [r[key] for r in rows if r[key] != ""]
    return float(np.median(values)) if values else None


def _distances(inputs: list[Mat], outputs: list[Mat], p_norms: tuple[float, ...]) -> dict[str, float]:
    alg = BlockAlgebra.matrix(inputs[0].shape[0])
    diffs = [b - a for a, b in zip(inputs, outputs)]
    out = {"dist_op": float(sum(np.linalg.norm(d, 2) for d in diffs))}
    for p in p_norms:
        key = "dist_2" if p == 2.0 else f"dist_p{p:g}"
        out[key] = float(sum(alg.p_norm(d, p) for d in diffs))
    return out


def run_trial(cfg: SweepConfig, dim: int, delta_index: int, trial: int) -> dict[str, Any]:
    """
    One row. Errors are recorded in the 'error' column, never raised.

    The harness checks the output defect against the exactness bound itself.
    """
    delta = cfg.deltas[delta_index]
    row: dict[str, Any] = {c: "" for c in columns(cfg.p_norms)}
    row.update(dim=dim, delta=delta, trial=trial, runtime_ms=0)
    entry = cfg.entry
    try:
        seed = derive_seed(cfg.seed, dim, delta_index, trial)
        instance = generate(EnsembleSpec(cfg.kind, dim, delta, seed))
        params = {**instance.extra, **cfg.params}
        inputs = instance.matrices
        before = residual_report(entry.name, entry.residuals(inputs, params), dim)
        row.update(defect_in_op=before.op, defect_in_2=before.p_norms[2.0])

        start = time.perf_counter()
        outputs = entry.run(inputs, params)
        elapsed = (time.perf_counter() - start) * 1000

        after = residual_report(entry.name, entry.residuals(outputs, params), dim)
        row.update(defect_out_op=after.op, **_distances(inputs, outputs, cfg.p_norms))
        if cfg.timing:
            row["runtime_ms"] = round(elapsed, 3)
        if not after.op <= exactness_bound(dim):
            row["error"] = EXACTNESS_VIOLATION
    except LiftkitError as e:
        row["error"] = e.code
    return row


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Run every (dim, delta, trial); rows come back ordered regardless of scheduling."""
    log = RunLog(timestamps=cfg.timing)
    log.add(
        "info",
        f"Sweep '{cfg.corrector}' on '{cfg.kind}'",
        f"dims {list(cfg.dims)}, deltas {list(cfg.deltas)}, {cfg.trials} trial(s), seed {cfg.seed}",
    )
    work = [
        (dim, k, trial)
        for dim in cfg.dims
        for k in range(len(cfg.deltas))
        for trial in range(cfg.trials)
    ]
    rows = parallel_map(lambda item: run_trial(cfg, *item), work)

    failures = [r for r in rows if r["error"]]
    if failures:
        codes = sorted({r["error"] for r in failures})
        log.add("warning", f"{len(failures)} of {len(rows)} trial(s) failed", ", ".join(codes))
    else:
        log.add("info", f"All {len(rows)} trial(s) succeeded")
    return SweepResult(cfg, rows, log)


def output_paths(cfg: SweepConfig, override: Optional[str] = None) -> tuple[str, str]:
    """CSV path and its JSON summary path."""
    csv_path = Path(override or cfg.output or config.runs_dir / f"sweep_{cfg.corrector}_{cfg.seed}.csv")
    return str(csv_path), str(csv_path.with_suffix(".summary.json"))
