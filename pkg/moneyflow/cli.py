"""Command-line front end: ``moneyflow run|sweep|lattice|indicators``.

Exit codes: 0 success, 2 configuration or input error, 3 integration
failure (boundary reached or step failure), 4 internal invariant violation.

Example
-------
.. code-block:: console

    $ moneyflow run --preset fig-erratum --out runs/erratum
    $ moneyflow sweep --preset fig-correct --axis alpha1 --values 0,0.5,1,1.5 --out runs/a1
    $ moneyflow lattice --rates 1,1.1,0.9 --beta 2 --dt 0.1
    $ moneyflow indicators runs/erratum/trajectory.csv --sample 0.1 --out runs/erratum-coarse
"""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

from . import __version__
from ._errors import ConfigError, InvariantViolation, MoneyFlowError, StepFailure
from .config import PRESETS, load_config
from .scenario import lattice_report, recompute_indicators, run_scenario, sweep, to_jsonable

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_INVARIANT = 4


def _floats(text: str) -> List[float]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        return [float(p) for p in parts]
    except ValueError as err:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from err


def _tolerances(text: str) -> List[Tuple[str, Any]]:
    values = _floats(text)
    if len(values) not in (1, 2):
        raise ConfigError(f"expected REL or REL,ABS, got {text!r}", field="integrator")
    flags: List[Tuple[str, Any]] = [("integrator.rel_tol", values[0])]
    if len(values) == 2:
        flags.append(("integrator.abs_tol", values[1]))
    return flags


def _scenario_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS), help="Named preset scenario")
    parser.add_argument("--config", metavar="FILE", help="YAML scenario file")
    parser.add_argument(
        "--set",
        dest="assignments",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one setting, e.g. model.alpha1=0.5 (repeatable)",
    )
    parser.add_argument("--tol", metavar="REL[,ABS]", help="Integrator tolerances")
    parser.add_argument("--t-end", type=float, metavar="TAU", help="Integration span")
    parser.add_argument("--sample", type=float, metavar="DTAU", help="Output sampling interval")
    parser.add_argument("--out", metavar="DIR", help="Output directory")
    parser.add_argument(
        "--svg", action=argparse.BooleanOptionalAction, default=None, help="Write SVG plots"
    )


def _flags(args: argparse.Namespace) -> List[Tuple[str, Any]]:
    flags: List[Tuple[str, Any]] = []
    if args.tol is not None:
        flags.extend(_tolerances(args.tol))
    if args.t_end is not None:
        flags.append(("integrator.t_end", args.t_end))
    if args.sample is not None:
        flags.append(("sampling.dtau", args.sample))
    if args.out is not None:
        flags.append(("output.dir", args.out))
    if args.svg is not None:
        flags.append(("output.svg", args.svg))
    return flags


def _load(args: argparse.Namespace):
    return load_config(
        path=args.config, preset=args.preset, assignments=args.assignments, flags=_flags(args)
    )


def _cmd_run(args: argparse.Namespace) -> int:
    report = asyncio.run(run_scenario(_load(args)))
    print(f"{report.status}: {report.artifacts['report_json']}")
    return EXIT_OK if report.termination.completed else EXIT_INTEGRATION


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load(args)
    result = asyncio.run(sweep(cfg, args.axis, _floats(args.values)))
    print(f"{len(result.values)} items, {len(result.failures)} failed: {result.summary_path}")
    if any(isinstance(f, InvariantViolation) for f in result.failures):
        return EXIT_INVARIANT
    if any(isinstance(f, StepFailure) for f in result.failures):
        return EXIT_INTEGRATION
    if result.failures:
        return EXIT_CONFIG
    if any(not o.termination.completed for o in result.outcomes):  # type: ignore[union-attr]
        return EXIT_INTEGRATION
    return EXIT_OK


def _cmd_lattice(args: argparse.Namespace) -> int:
    report = lattice_report(_floats(args.rates), beta=args.beta, dt=args.dt, sigma2=args.sigma2)
    text = json.dumps(to_jsonable(report), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(args.out)
    else:
        print(text)
    return EXIT_OK


def _cmd_indicators(args: argparse.Namespace) -> int:
    out = args.out or str(Path(args.csv).parent)
    divergence = asyncio.run(
        recompute_indicators(args.csv, out, dtau=args.sample, base=args.base, svg=args.svg)
    )
    print(
        f"max gap {divergence.max_gap:.6g}, rank correlation {divergence.rank_correlation:.4f}: "
        f"{Path(out) / 'indicators.csv'}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moneyflow", description="Fast money flow exchange-rate model"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="More logging (-v info, -vv debug)"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one scenario")
    _scenario_options(run)
    run.set_defaults(handler=_cmd_run)

    sweep_cmd = commands.add_parser("sweep", help="Run a scenario per value of one parameter")
    _scenario_options(sweep_cmd)
    sweep_cmd.add_argument("--axis", required=True, help="alpha1, alpha2, beta, c0 or a dotted key")
    sweep_cmd.add_argument("--values", required=True, help="Comma-separated values (may be empty)")
    sweep_cmd.set_defaults(handler=_cmd_sweep)

    lat = commands.add_parser("lattice", help="Plaquette, action and matrix checks")
    lat.add_argument("--rates", required=True, help="Comma-separated exchange rates S_n")
    lat.add_argument("--beta", type=float, default=1.0)
    lat.add_argument("--dt", type=float, default=1.0)
    lat.add_argument("--sigma2", type=float, default=1.0)
    lat.add_argument("--out", metavar="FILE", help="Write the JSON report here")
    lat.set_defaults(handler=_cmd_lattice)

    ind = commands.add_parser("indicators", help="Recompute PVI/NVI from a trajectory CSV")
    ind.add_argument("csv", help="trajectory.csv written by 'run'")
    ind.add_argument("--sample", type=float, metavar="DTAU", help="Coarser sampling interval")
    ind.add_argument("--base", type=float, default=1000.0)
    ind.add_argument("--out", metavar="DIR", help="Output directory (default: next to the CSV)")
    ind.add_argument("--svg", action=argparse.BooleanOptionalAction, default=True)
    ind.set_defaults(handler=_cmd_indicators)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logger.debug("command %s with %s", args.command, vars(args))

    try:
        return args.handler(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except StepFailure as err:
        print(f"integration failed: {err}", file=sys.stderr)
        return EXIT_INTEGRATION
    except InvariantViolation as err:
        print(f"invariant violated: {err}", file=sys.stderr)
        return EXIT_INVARIANT
    except MoneyFlowError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
