"""
Command-line entry point.

Usage:
    python -m src.cli dmat 3/2 0.3 1.1 2.0 --format csv
    python -m src.cli ybasis --jmax 1 --grid 3,3,5
    python -m src.cli majorana to-constellation state.json --svg stars.svg
    python -m src.cli su3 dim 1 1
    python -m src.cli sun obstruction 4
    python -m src.cli weyl symbol --op vacuum --jmax 1/2
    python -m src.cli verify all --seed 42

Exit codes: 0 success, 1 failed verification checks, 2 usage or input errors.
All JSON floats carry 17 significant digits; output is deterministic for a fixed --seed.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from src.core.group_core import (
    EulerAngles,
    HalfInt,
    Su2Element,
    exact_haar_grid,
    haar_grid,
    m_labels,
    random_su2,
    su2_from_euler,
)
from src.core.wigner import wigner_matrix
from src.phase_space.wigner_weyl import (
    LEFT,
    RIGHT,
    FourierCoeffs,
    MomentumIndex,
    MomentumOperator,
    SymbolOption,
    basis_vector,
    commutant_operator,
    exponential_grid,
    momentum_dimension,
    rank_one_operator,
    regular_matrix,
    symbol_grid,
    symbol_trace_pairing,
    weyl_symbol,
)
from src.representations.majorana import (
    Constellation,
    constellation_to_state,
    state_to_constellation,
    write_constellation_svg,
)
from src.representations.schwinger_basis import SpinState, Y_values
from src.representations.sun_structure import (
    Su3Irrep,
    branch_fundamental,
    common_once_irrep,
)
from src.utils.run_logger import initialize_logging
from src.utils.serialization import dumps, loads, matrix_pairs, to_csv
from src.utils.settings import Settings, load_settings, parse_grid_triple
from src.verification.suite import ALL_SUITE, run_suite
from src.verification.checks import SUITES

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

OPERATOR_KINDS = ("vacuum", "left", "right", "commutant", "rank-one")


class UsageError(ValueError):
    """Bad command-line input detected after argument parsing."""


def _half_int(text: str) -> HalfInt:
    try:
        return HalfInt.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _grid(text: str):
    try:
        return parse_grid_triple(text, "--grid")
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="seed for randomized inputs and suites")
    common.add_argument("--jmax", type=_half_int, help="truncation j_max, e.g. 3/2")
    common.add_argument("--grid", type=_grid, help="quadrature node counts a,b,c")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--workers", type=int, help="worker threads")
    common.add_argument("--timings", action="store_true", help="include runtimes in reports")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="schwinger",
        description="Schwinger representation toolkit: D-matrices, Schwinger basis, "
                    "Majorana constellations, SU(n) labels and Wigner-Weyl symbols.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    dmat = commands.add_parser("dmat", parents=[common], help="dump D^j(g) for Euler angles")
    dmat.add_argument("j", type=_half_int)
    dmat.add_argument("alpha", type=float)
    dmat.add_argument("beta", type=float)
    dmat.add_argument("gamma", type=float)

    commands.add_parser("ybasis", parents=[common], help="Y_jm values on a Haar grid (CSV)")

    majorana = commands.add_parser("majorana", help="Majorana constellations")
    majorana_commands = majorana.add_subparsers(dest="action", required=True)
    for action, noun in (("to-constellation", "SpinState"), ("to-state", "Constellation")):
        sub = majorana_commands.add_parser(action, parents=[common], help=f"convert a {noun} JSON file")
        sub.add_argument("input", help=f"{noun} JSON file, or - for stdin")
        sub.add_argument("--svg", help="also write a stereographic scatter plot")

    su3 = commands.add_parser("su3", parents=[common], help="SU(3) irreps (p, q)")
    su3.add_argument("action", choices=("dim", "multiplets", "highest"))
    su3.add_argument("p", type=int)
    su3.add_argument("q", type=int)

    sun = commands.add_parser("sun", parents=[common], help="SU(n) fundamentals")
    sun.add_argument("action", choices=("branch", "obstruction"))
    sun.add_argument("n", type=int)
    sun.add_argument("p", type=int, nargs="?", help="fundamental rank (branch only)")

    weyl = commands.add_parser("weyl", parents=[common], help="Wigner-Weyl symbols")
    weyl.add_argument("action", choices=("symbol", "trace", "verify"))
    weyl.add_argument("--op", choices=OPERATOR_KINDS, default="vacuum", help="operator A")
    weyl.add_argument("--op-b", choices=OPERATOR_KINDS, help="operator B for trace (default A)")
    weyl.add_argument("--element", help="Euler angles alpha,beta,gamma for translations")
    weyl.add_argument("--option", choices=("I", "II"), default="II")

    verify = commands.add_parser("verify", parents=[common], help="run a verification suite")
    verify.add_argument("suite", choices=(ALL_SUITE,) + SUITES)
    return parser


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {output}")
    else:
        sys.stdout.write(text)


def _euler(alpha: float, beta: float, gamma: float) -> EulerAngles:
    angles = EulerAngles(alpha, beta, gamma)
    angles.validate()
    return angles


def _read_json(source: str):
    text = sys.stdin.read() if source == "-" else Path(source).read_text(encoding="utf-8")
    return loads(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_dmat(args: argparse.Namespace, settings: Settings) -> int:
    e = _euler(args.alpha, args.beta, args.gamma)
    matrix = wigner_matrix(args.j, su2_from_euler(e)).entries
    if args.format == "csv":
        labels = m_labels(args.j)
        rows = [
            (str(m), str(n), float(matrix[a, b].real), float(matrix[a, b].imag))
            for a, m in enumerate(labels) for b, n in enumerate(labels)
        ]
        _emit(to_csv(("m", "n", "re", "im"), rows), args.output)
    else:
        _emit(dumps({"j": str(args.j), "euler": [e.alpha, e.beta, e.gamma],
                     "matrix": matrix_pairs(matrix)}), args.output)
    return EXIT_OK


def cmd_ybasis(args: argparse.Namespace, settings: Settings) -> int:
    j_max = args.jmax if args.jmax is not None else HalfInt(2)
    grid = haar_grid(*args.grid) if args.grid else exact_haar_grid(j_max.twice_value)
    xi, eta = grid.xi_eta()
    rows = []
    for two_j in range(j_max.twice_value + 1):
        values = Y_values(two_j, xi, eta)
        labels = m_labels(HalfInt(two_j))
        for node in range(len(grid)):
            for k, m in enumerate(labels):
                value = values[node, k]
                rows.append((float(grid.alpha[node]), float(grid.beta[node]), float(grid.gamma[node]),
                             str(HalfInt(two_j)), str(m), float(value.real), float(value.imag)))
    _emit(to_csv(("alpha", "beta", "gamma", "j", "m", "re", "im"), rows), args.output)
    return EXIT_OK


def cmd_majorana(args: argparse.Namespace, settings: Settings) -> int:
    data = _read_json(args.input)
    if args.action == "to-constellation":
        constellation = state_to_constellation(SpinState.from_dict(data))
        result = constellation.to_dict()
    else:
        constellation = Constellation.from_dict(data)
        result = constellation_to_state(constellation).to_dict()
    if args.svg:
        write_constellation_svg(constellation, args.svg)
    _emit(dumps(result), args.output)
    return EXIT_OK


def cmd_su3(args: argparse.Namespace, settings: Settings) -> int:
    irrep = Su3Irrep(args.p, args.q)
    if args.action == "dim":
        _emit(f"{irrep.dimension}\n", args.output)
    elif args.action == "multiplets":
        _emit(dumps([entry.to_dict() for entry in irrep.multiplets]), args.output)
    else:
        _emit(dumps(irrep.highest_weight.to_dict()), args.output)
    return EXIT_OK


def cmd_sun(args: argparse.Namespace, settings: Settings) -> int:
    if args.action == "branch":
        if args.p is None:
            raise UsageError("sun branch needs both n and p")
        _emit(dumps([label.to_dict() for label in branch_fundamental(args.n, args.p)]), args.output)
    else:
        witness = common_once_irrep(args.n)
        _emit(f"{witness.name if witness else 'none'}\n", args.output)
    return EXIT_OK


def _element(args: argparse.Namespace, rng: np.random.Generator) -> Su2Element:
    if not args.element:
        return random_su2(rng)
    try:
        alpha, beta, gamma = (float(part) for part in args.element.split(","))
    except ValueError:
        raise UsageError(f"--element must be alpha,beta,gamma, got {args.element!r}")
    return su2_from_euler(_euler(alpha, beta, gamma))


def build_operator(kind: str, two_j_max: int, g: Su2Element, rng: np.random.Generator) -> MomentumOperator:
    """Named example operators for the weyl subcommands."""
    if kind == "vacuum":
        zero = HalfInt(0)
        return rank_one_operator(basis_vector(MomentumIndex(zero, zero, zero), two_j_max), two_j_max)
    if kind == "left":
        return regular_matrix(LEFT, g, two_j_max)
    if kind == "right":
        return regular_matrix(RIGHT, g, two_j_max)
    if kind == "commutant":
        return commutant_operator(FourierCoeffs.random(rng, two_j_max))
    dimension = momentum_dimension(two_j_max)
    return rank_one_operator(rng.normal(size=dimension) + 1j * rng.normal(size=dimension), two_j_max)


def cmd_weyl(args: argparse.Namespace, settings: Settings) -> int:
    if args.action == "verify":
        return _verify("weyl", args, settings)

    rng = np.random.default_rng(settings.seed)
    two_j_max = (args.jmax if args.jmax is not None else HalfInt(1)).twice_value
    grid = haar_grid(*args.grid) if args.grid else symbol_grid(two_j_max)
    xgrid = exponential_grid(*settings.x_grid, settings.antipode_eps)
    option = SymbolOption(args.option)
    g = _element(args, rng)
    op_a = build_operator(args.op, two_j_max, g, rng)
    symbol_a = weyl_symbol(op_a, grid=grid, option=option, xgrid=xgrid, workers=settings.workers)

    if args.action == "symbol":
        _emit(dumps(symbol_a.to_dict()), args.output)
        return EXIT_OK

    op_b = build_operator(args.op_b, two_j_max, g, rng) if args.op_b else op_a
    symbol_b = symbol_a if op_b is op_a else weyl_symbol(op_b, grid=grid, option=option, xgrid=xgrid,
                                                         workers=settings.workers)
    result = {
        "option": option.value,
        "two_j_max": two_j_max,
        "symbol_pairing": symbol_trace_pairing(symbol_a, symbol_b),
        "operator_trace": (op_a @ op_b).trace(),
    }
    warnings = [s.accuracy_warning for s in (symbol_a, symbol_b) if s.accuracy_warning]
    if warnings:
        result["accuracy_warning"] = warnings[0]
    _emit(dumps(result), args.output)
    return EXIT_OK


def _verify(suite: str, args: argparse.Namespace, settings: Settings) -> int:
    run_logger = initialize_logging(settings.logs_dir)
    report = run_suite(suite, settings, run_logger)
    _emit(dumps(report.to_dict(include_timings=args.timings)), args.output)
    if not report.passed:
        logger.error(f"Failed checks: {', '.join(report.failed_checks)}")
        return EXIT_FAILED
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    return _verify(args.suite, args, settings)


COMMANDS: Dict[str, Callable[[argparse.Namespace, Settings], int]] = {
    "dmat": cmd_dmat,
    "ybasis": cmd_ybasis,
    "majorana": cmd_majorana,
    "su3": cmd_su3,
    "sun": cmd_sun,
    "weyl": cmd_weyl,
    "verify": cmd_verify,
}


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run the command and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    _configure_logging(args.verbose)
    try:
        settings = load_settings().with_overrides(
            seed=args.seed,
            workers=args.workers,
        )
        if args.command == "verify" or (args.command == "weyl" and args.action == "verify"):
            settings = settings.with_overrides(
                x_grid=args.grid,
                symbol_two_j_max=args.jmax.twice_value if args.jmax is not None else None,
            )
        return COMMANDS[args.command](args, settings)
    except (ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
