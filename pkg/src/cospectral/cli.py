"""Command-line interface.

Subcommands: sweep-controllability, lemma-mc, mate-scan, census, enum-ortho,
bounds.  Graphs travel as graph6 strings, matrices as exact-fraction text.
Exit code 0 on success; on failure the error class name and message go to
stderr and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .errors import DimensionError, FormatError, GuardError, PreconditionError
from .experiments import (
    ExperimentConfig,
    emit,
    run_bounds,
    run_census,
    run_controllability_sweep,
    run_enum_ortho,
    run_lemma_mc,
    run_mate_scan,
)
from .ortho import (
    MODE_DIVIDES,
    MODE_EXACT,
    RationalOrthogonalMatrix,
    matrix_from_text,
    rotation_3_4_5,
)


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


def _parse_n_range(text: str) -> tuple[int, ...]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise argparse.ArgumentTypeError("empty n range")
        return tuple(range(lo_i, hi_i + 1))
    return (int(text),)


def _add_common(sub: argparse.ArgumentParser, default_format: str) -> None:
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--n", type=int, help="single order n")
    group.add_argument(
        "--n-range", type=_parse_n_range, metavar="LO:HI", help="inclusive range of n"
    )
    sub.add_argument("--p", type=_parse_fraction, default=Fraction(1, 2),
                     metavar="NUM/DEN", help="exact edge probability (default 1/2)")
    sub.add_argument("--level", type=int, default=2, help="conjugator level bound")
    sub.add_argument("--trials", type=int, default=100)
    sub.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    sub.add_argument("--out", default=None, metavar="PATH")
    sub.add_argument("--format", choices=("csv", "json"), default=default_format)
    sub.add_argument(
        "--quotient-signed-perms",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="search one representative per signed-permutation orbit",
    )


def _config(args, kind: str, default_n: int, mode: str = MODE_EXACT) -> ExperimentConfig:
    if args.n_range is not None:
        ns = args.n_range
    elif args.n is not None:
        ns = (args.n,)
    else:
        ns = (default_n,)
    return ExperimentConfig(
        kind=kind,
        ns=ns,
        p=args.p,
        level=args.level,
        trials=args.trials,
        master_seed=args.seed,
        out=args.out,
        fmt=args.format,
        quotient_signed_perms=args.quotient_signed_perms,
        mode=mode,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cospectral",
        description="Exact experiments on cospectral mates, conjugator levels, and bound tables.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sweep = subs.add_parser("sweep-controllability",
                            help="controllable fraction of G(n,p) samples")
    _add_common(sweep, "csv")

    lemma = subs.add_parser("lemma-mc",
                            help="Monte Carlo check of the integral-conjugation bound")
    _add_common(lemma, "json")
    lemma.add_argument("--q", default=None, metavar="PATH",
                       help="conjugator as fraction text (default: 3-4-5 rotation of order n)")

    scan = subs.add_parser("mate-scan", help="sample graphs and search for mates")
    _add_common(scan, "json")

    census = subs.add_parser("census", help="exhaustive cospectral census")
    _add_common(census, "csv")

    enum_cmd = subs.add_parser("enum-ortho", help="enumerate rational orthogonal matrices")
    _add_common(enum_cmd, "json")
    enum_cmd.add_argument("--mode", choices=(MODE_EXACT, MODE_DIVIDES),
                          default=MODE_EXACT)

    bounds = subs.add_parser("bounds", help="epsilon-series bound table")
    _add_common(bounds, "csv")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sweep-controllability":
            config = _config(args, "controllability-sweep", default_n=10)
            text = emit(run_controllability_sweep(config), config)
        elif args.command == "lemma-mc":
            config = _config(args, "lemma-mc", default_n=6)
            if args.q:
                with open(args.q, "r", encoding="utf-8") as fh:
                    q = RationalOrthogonalMatrix(matrix_from_text(fh.read()))
            else:
                q = rotation_3_4_5(config.ns[0])
            text = emit(run_lemma_mc(config, q), config)
        elif args.command == "mate-scan":
            config = _config(args, "mate-scan", default_n=5)
            text = emit(run_mate_scan(config), config)
        elif args.command == "census":
            config = _config(args, "census", default_n=5)
            text = emit(run_census(config), config)
        elif args.command == "enum-ortho":
            config = _config(args, "enum-ortho", default_n=4, mode=args.mode)
            text = emit(run_enum_ortho(config), config)
        elif args.command == "bounds":
            config = _config(args, "bounds", default_n=10)
            text = emit(run_bounds(config), config)
        else:  # pragma: no cover - argparse enforces the choices
            raise ValueError(f"unknown command {args.command!r}")
    except (
        GuardError,
        PreconditionError,
        DimensionError,
        FormatError,
        ValueError,
        OSError,
    ) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if not config.out:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
