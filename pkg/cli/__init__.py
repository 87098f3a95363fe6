"""
Command-line harness for liftkit.

Handles:
- Running correctors on file-supplied tuples with before/after defect reports
- Defect/distance sweeps over generated ensembles (CSV + JSON summary)
- Driving the ultraproduct lifts on finite truncations
- Ensemble generation and standalone relation checks
"""

from .registry import REGISTRY, CorrectorEntry, lookup, residual_report, generator_residuals
from .runlog import RunLog
from .sweep import SweepConfig, SweepResult, columns, run_sweep, run_trial, output_paths
from .commands import run_correct, run_defect, run_gen, run_sweep_command, run_ultra, ULTRA_COMMANDS

__all__ = [
    "REGISTRY", "CorrectorEntry", "lookup", "residual_report", "generator_residuals",
    "RunLog",
    "SweepConfig", "SweepResult", "columns", "run_sweep", "run_trial", "output_paths",
    "run_correct", "run_defect", "run_gen", "run_sweep_command", "run_ultra", "ULTRA_COMMANDS",
]
