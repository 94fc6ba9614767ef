import argparse
import shlex
from pathlib import Path
from typing import Callable, Dict, List, Optional

from loguru import logger
from pydantic import ValidationError

from persistent.model.study import StudySpec
from presentations.commands import angular_command, flt_command, radial_command, solve_command
from repository.study_result_repository import StudyResultRepository
from services.study_service import SOLVE_FAILURES, StudyService
from settings.settings import settings
from utils.errors import InvalidArgumentError

EXIT_OK, EXIT_SOLVE_FAILURE, EXIT_USAGE = 0, 1, 2

SCATTERERS = ("sphere", "vacuum", "offset", "hollowed", "tabulated")

COMMANDS: Dict[str, Callable[[StudySpec, StudyService], int]] = {
    "radial-convergence": radial_command.run,
    "angular-convergence": angular_command.run,
    "flt-accuracy": flt_command.run,
    "flt-timing": flt_command.run,
    "single-solve": solve_command.run,
}


def int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    solver = settings.solver
    parser = argparse.ArgumentParser(
        prog="scatter_app.py",
        description="Axisymmetric acoustic scattering: solves, convergence studies and transform benchmarks.",
    )
    parser.add_argument("--study", choices=sorted(COMMANDS), default="single-solve")
    parser.add_argument("--scatterer", choices=SCATTERERS, default="sphere")
    parser.add_argument("--F", type=int_list, default=[solver.F], help="angular modes, comma separated for sweeps")
    parser.add_argument("--Ni", type=int_list, default=[solver.n_i], help="radial intervals, comma separated for sweeps")
    parser.add_argument("--Nd", type=int, default=solver.n_d, help="Chebyshev nodes per interval")
    parser.add_argument("--k", type=float, default=solver.k, help="wavenumber")
    parser.add_argument("--beta", type=float, default=2.2, help="exponent of the hollowed sphere")
    parser.add_argument("--rmax", type=float, default=solver.r_max, help="outer radius of the computational ball")
    parser.add_argument("--tol", type=float, default=solver.tol, help="relative GMRES residual")
    parser.add_argument("--Fref", type=int, default=None, help="reference F of the angular study")
    parser.add_argument("--sizes", type=int_list, default=[256, 1024, 4096], help="transform sizes of the benchmark")
    parser.add_argument(
        "--table",
        default=None,
        help='tabulated scatterer file, rows "rho, l, re, im" separated by commas or spaces, # comments',
    )
    parser.add_argument("--out", default=None, help="output CSV, defaults to <study>.csv")
    parser.add_argument("--moment-cache", default=None, metavar="DIR", help="directory of cached moment tables")
    parser.add_argument("--threads", type=int, default=None, help="worker threads, 1 runs serially")
    parser.add_argument("--rerun", default=None, metavar="CSV", help="repeat the study written to CSV")
    return parser


def rerun_arguments(path: str) -> List[str]:
    """
    Arguments of the command echoed at the top of a written study file.
    """
    if not Path(path).is_file():
        raise InvalidArgumentError(f"{path} does not exist")
    command, _ = StudyResultRepository().read_header(path)
    if not command:
        raise InvalidArgumentError(f"{path} carries no command line")
    tokens = shlex.split(command)
    first = next((i for i, token in enumerate(tokens) if token.startswith("--")), len(tokens))
    return tokens[first:]


def parse_spec(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.rerun:
        args = parser.parse_args(rerun_arguments(args.rerun) + _passthrough(args))
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be at least 1")
    return args


def _passthrough(args: argparse.Namespace) -> List[str]:
    extra = []
    if args.moment_cache:
        extra += ["--moment-cache", args.moment_cache]
    if args.threads:
        extra += ["--threads", str(args.threads)]
    return extra


def spec_from_args(args: argparse.Namespace) -> StudySpec:
    return StudySpec(
        kind=args.study,
        scatterer=args.scatterer,
        F=args.F,
        n_i=args.Ni,
        n_d=args.Nd,
        k=args.k,
        r_max=args.rmax,
        tol=args.tol,
        beta=args.beta,
        sizes=args.sizes,
        reference_f=args.Fref,
        table=args.table,
        out=args.out or f"{args.study}.csv",
    )


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_spec(argv)
        spec = spec_from_args(args)
        service = StudyService(cache_dir=args.moment_cache, threads=args.threads)
        logger.info("study started {}", spec.model_dump_json())
        return COMMANDS[spec.kind](spec, service)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    except (InvalidArgumentError, ValidationError) as e:
        logger.error("usage error: {}", e)
        return EXIT_USAGE
    except SOLVE_FAILURES as e:
        logger.error("solve failed: {}", e)
        return EXIT_SOLVE_FAILURE
