"""Command-line front end.

    squeezehom simulate --nbar 3 --samples 100000 --bins 628 --seed 1 --out run1
    squeezehom scaling --nbar 5,10,20,40 --out scal

Exit codes: 0 success, 2 usage error, 3 numeric or convergence error,
4 I/O error, 5 conflicting state specification.
"""

import argparse
import math
import os
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from .errors import (
    AmbiguousPeakError,
    ConvergenceError,
    DomainError,
    FlatDistributionError,
    InvalidArgumentError,
    OutputCollisionError,
)
from .experiments import (
    DEFAULT_SAMPLES,
    DEFAULT_SHIFT,
    ExperimentConfig,
    analytic_curve,
    run_fringe_translation,
    run_monte_carlo_reproduction,
    run_scaling_study,
    run_squeezed_state_comparison,
)
from .gaussian import r_from_nbar
from .phase_stats import DEFAULT_BIN_COUNT

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4
EXIT_CONFLICT = 5

SEED_ENV = "SQUEEZEHOM_SEED"
PROG = "squeezehom"

_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


class UsageError(Exception):
    pass


class ConflictError(Exception):
    pass


def parse_angle(text: str) -> float:
    """Radians from ``"0.39"``, ``"pi/8"``, ``"-3pi/4"`` or ``"2*pi"``."""
    m = _ANGLE.match(text)
    if m:
        sign, factor, divisor = m.groups()
        value = (float(factor) if factor else 1.0) * math.pi / (float(divisor) if divisor else 1.0)
        return -value if sign == "-" else value
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle must be finite: {text!r}")
    return value


def _float_list(text: str) -> list:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, defaults: dict) -> None:
    state = p.add_argument_group("state")
    state.add_argument("--nbar", type=_float_list, help=f"mean photon number(s) of the squeezing, comma-separated (default {defaults['nbar']})")
    state.add_argument("--r", type=_float_list, help="squeezing magnitude(s); exclusive with --nbar")
    state.add_argument("--psi", type=parse_angle, help="squeezing phase; the phase peak sits at psi/2 (default 0)")
    state.add_argument("--phi0", type=parse_angle, help="phase peak location, i.e. psi/2; exclusive with --psi")
    state.add_argument("--alpha-re", type=float, default=defaults.get("alpha_re", 0.0), help="real part of the displacement")
    state.add_argument("--alpha-im", type=float, default=0.0, help="imaginary part of the displacement")
    run = p.add_argument_group("run")
    run.add_argument("--shift", type=parse_angle, default=DEFAULT_SHIFT, help="applied phase shift (default pi/8)")
    run.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help=f"double-homodyne events per run (default {DEFAULT_SAMPLES})")
    run.add_argument("--bins", type=int, default=DEFAULT_BIN_COUNT, help=f"angular bins over [-pi, pi) (default {DEFAULT_BIN_COUNT})")
    run.add_argument("--seed", type=int, help=f"64-bit seed (default ${SEED_ENV}, else 1)")
    run.add_argument("--reps", type=int, default=5, help="repetitions per photon number in the scaling study (default 5)")
    run.add_argument("--workers", type=int, default=1, help="threads used for sampling (default 1)")
    out = p.add_argument_group("output")
    out.add_argument("--out", required=True, type=Path, help="output directory")
    out.add_argument("--force", action="store_true", help="overwrite existing output files")
    out.add_argument("--dump-samples", action="store_true", help="also write raw x,y samples (translate); simulate always writes them")


SUBCOMMANDS = {
    "simulate": ("Monte Carlo of the double-homodyne procedure", {"nbar": "3"}),
    "analytic": ("exact and approximate phase densities, no sampling", {"nbar": "3"}),
    "scaling": ("peak width versus photon number with a log-log fit", {"nbar": "5,10,20,40"}),
    "translate": ("peak translation under a phase shift", {"nbar": "3"}),
    "compare-squeezed": ("displaced squeezed state versus squeezed vacuum under a shift", {"nbar": "3", "alpha_re": 1.0}),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Squeezed-vacuum double-homodyne phase detection simulator.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name, (help_text, defaults) in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        _add_common(p, defaults)
        if name == "translate":
            p.add_argument("--analytic", action="store_true", help="compare exact densities only, no sampling")
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} is not an integer: {env!r}") from None


def build_config(args) -> ExperimentConfig:
    if args.nbar is not None and args.r is not None:
        raise ConflictError("--nbar and --r are mutually exclusive")
    if args.psi is not None and args.phi0 is not None:
        raise ConflictError("--psi and --phi0 both set the squeezing orientation")
    if args.r is not None:
        r_values = tuple(args.r)
    else:
        nbar = args.nbar if args.nbar is not None else _float_list(SUBCOMMANDS[args.subcommand][1]["nbar"])
        r_values = tuple(r_from_nbar(n) for n in nbar)
    phi0 = args.phi0 if args.phi0 is not None else (args.psi / 2 if args.psi is not None else 0.0)
    if args.subcommand != "scaling" and len(r_values) != 1:
        raise UsageError(f"{args.subcommand} takes a single --nbar/--r value")
    return ExperimentConfig(
        r_values=r_values,
        samples_per_run=args.samples,
        bin_count=args.bins,
        phi0=phi0,
        shift=args.shift,
        seed=_resolve_seed(args),
        repetitions=args.reps,
        alpha=complex(args.alpha_re, args.alpha_im),
        workers=args.workers,
    )


def emit_outputs(report, directory, force: bool = False) -> list:
    """Write a report's artifacts into ``directory`` and return the written paths.

    ``report`` is a mapping of file name to text (or to a callable taking the
    target path), or an object exposing such a mapping via ``artifacts()``.
    Nothing is written if any target exists and ``force`` is false.
    """
    artifacts = report.artifacts() if hasattr(report, "artifacts") else dict(report)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    targets = [directory / name for name in artifacts]
    if not force:
        for path in targets:
            if path.exists():
                raise OutputCollisionError(f"refusing to overwrite {path} (use --force)")
    for path, content in zip(targets, artifacts.values()):
        if callable(content):
            content(path)
        else:
            path.write_text(content)
    return targets


def _run(args) -> list:
    cfg = build_config(args)
    if args.subcommand == "simulate":
        artifacts = run_monte_carlo_reproduction(cfg).artifacts()
    elif args.subcommand == "analytic":
        artifacts = analytic_curve(cfg)
    elif args.subcommand == "scaling":
        artifacts = run_scaling_study(cfg).artifacts()
    elif args.subcommand == "translate":
        artifacts = run_fringe_translation(cfg, analytic=args.analytic).artifacts(dump_samples=args.dump_samples)
    else:
        artifacts = run_squeezed_state_comparison(cfg).artifacts()
    return emit_outputs(artifacts, args.out, force=args.force)


def parse_and_dispatch(argv=None) -> int:
    """Run one CLI invocation and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    def fail(code, message):
        print(f"{PROG}: error: {message}", file=sys.stderr)
        return code

    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            written = _run(args)
        for w in caught:
            print(f"{PROG}: warning: {w.message}", file=sys.stderr)
    except ConflictError as exc:
        return fail(EXIT_CONFLICT, f"conflicting specification: {exc}")
    except (UsageError, DomainError, InvalidArgumentError) as exc:
        return fail(EXIT_USAGE, str(exc))
    except (ConvergenceError, FlatDistributionError, AmbiguousPeakError, np.linalg.LinAlgError) as exc:
        return fail(EXIT_NUMERIC, str(exc))
    except OSError as exc:
        return fail(EXIT_IO, str(exc))
    for path in written:
        print(path)
    return EXIT_OK


def main():
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
