"""
liftkit - Main Entry Point

Corrects approximate solutions of *-algebra relations into exact ones and
lifts tracial ultraproduct elements on finite truncations.

    python main.py correct --op projection --in p.json --out p_fixed.json
    python main.py sweep --config sweep.json
    python main.py ultra bratteli --chain car.json --depth 3 --ambient 64
"""

import sys
import logging
import argparse
from typing import Optional, Sequence

from config import config, VERSION
from errors import LiftkitError
from cli import REGISTRY, ULTRA_COMMANDS, run_correct, run_defect, run_gen, run_sweep_command, run_ultra
from ensembles import KINDS

logger = logging.getLogger("liftkit")


def _add_io(parser: argparse.ArgumentParser, needs_input: bool = True) -> None:
    if needs_input:
        parser.add_argument("--in", dest="input", help="input JSON file")
    parser.add_argument("--out", help="output file (stdout when omitted)")


def _parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="liftkit", description="Correct approximate *-algebra relations.")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("correct", help="correct a tuple of matrices")
    p.add_argument("--op", required=True, help=f"corrector: {', '.join(sorted(REGISTRY))}")
    p.add_argument("--p", type=float, help="extra tracial p-norm for reports (and the commuting_normals p)")
    _add_io(p)

    p = commands.add_parser("defect", help="measure a relation on a tuple")
    p.add_argument("--op", help="built-in relation name (or give 'relation' in the input)")
    p.add_argument("--p", type=float, help="extra tracial p-norm")
    _add_io(p)

    p = commands.add_parser("gen", help="generate an ensemble instance")
    p.add_argument("--op", help=f"ensemble kind: {', '.join(sorted(KINDS))}")
    p.add_argument("--dim", type=int)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="EnsembleSpec JSON instead of the flags")
    _add_io(p, needs_input=False)

    p = commands.add_parser("sweep", help="run a defect/distance sweep")
    p.add_argument("--config", required=True, help="sweep config JSON")
    p.add_argument("--out", help="CSV path (overrides the config's output)")

    p = commands.add_parser("ultra", help="lifts on ultraproduct truncations")
    ultra = p.add_subparsers(dest="ultra_command", required=True)
    for name in ULTRA_COMMANDS:
        sub = ultra.add_parser(name)
        _add_io(sub, needs_input=name not in ("extend-units", "bratteli"))
        if name == "tail-norm":
            sub.add_argument("--p", type=float)
            sub.add_argument("--theta", type=float, help="ideal membership tolerance")
        elif name == "lift-projection":
            sub.add_argument("--t", type=float, help="target trace")
        elif name == "lift-chain":
            sub.add_argument("--grid", type=float, nargs="+")
        elif name == "extend-units":
            sub.add_argument("--inclusion", required=True)
            sub.add_argument("--pi", required=True)
            sub.add_argument("--targets", help="glued generators of B per index")
        elif name == "bratteli":
            sub.add_argument("--chain", required=True)
            sub.add_argument("--depth", type=int)
            sub.add_argument("--ambient", type=int, nargs="+", help="ambient dimension per index")

    commands.add_parser("version", help="print the version")
    return parser.parse_args(argv)


HANDLERS = {
    "correct": run_correct,
    "defect": run_defect,
    "gen": run_gen,
    "sweep": run_sweep_command,
    "ultra": run_ultra,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parse_args(argv)
    except SystemExit as e:
        # argparse reports usage errors as 2; ours are 1
        code = int(e.code or 0)
        return 1 if code == 2 else code

    if args.command == "version":
        print(f"liftkit {VERSION}")
        return 0

    try:
        return HANDLERS[args.command](args)
    except LiftkitError as e:
        # Reports that could not be written at all
        logger.error(str(e))
        return e.exit_code


if __name__ == "__main__":
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    sys.exit(main())
