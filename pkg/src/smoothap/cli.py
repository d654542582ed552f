"""Command-line entry point: ``smoothap <command> --x ... --y ... --q ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile

from .errors import CapacityError, DomainError, InvariantError, NumericError
from .report import COMMANDS, RunConfig, to_csv, to_json

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_INTERNAL = 0, 2, 3, 4

log = logging.getLogger("smoothap")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--x", type=float, required=True, help="cutoff x > 1")
    common.add_argument("--y", type=float, required=True, help="smoothness bound y >= 2")
    common.add_argument("--q", type=int, default=1, help="modulus (default 1)")
    common.add_argument("--epsilon", type=float, default=0.05, help="weight transition width")
    common.add_argument("--side", choices=("lower", "upper"), default="lower")
    common.add_argument("--B", type=int, default=10, help="order bound for problem characters")
    common.add_argument("--threshold-scale", type=float, default=1.0)
    common.add_argument("--U", type=float, default=None, help="central segment width (default 1/sqrt(epsilon))")
    common.add_argument("--T", type=float, default=None, help="contour truncation (default: from decay bound)")
    common.add_argument("--char", default=None, help="character id (comma-separated exponents) for contour")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="smoothap", description="Smooth numbers in arithmetic progressions.")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "psi": "exact counts per reduced residue",
        "saddle": "saddle point data and the saddle-point estimate",
        "spectrum": "normalized character sums |Psi(x,y;chi)|/Psi_q",
        "equidist": "full equidistribution report",
        "subgroup": "problem characters, the subgroup H and coset statistics",
        "contour": "truncated inverse-Mellin integral for one character",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def _write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".smoothap-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = RunConfig(
            x=args.x, y=args.y, q=args.q, epsilon=args.epsilon, side=args.side, B=args.B,
            threshold_scale=args.threshold_scale, U=args.U, output_format=args.format,
            seed=args.seed, T=args.T, char=args.char,
        )
        report = COMMANDS[args.command](config)
    except DomainError as exc:
        print(f"smoothap: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CapacityError, NumericError, MemoryError) as exc:
        print(f"smoothap: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InvariantError as exc:
        print(f"smoothap: internal consistency check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    text = to_json(report) if args.format == "json" else to_csv(args.command, report)
    if args.out:
        _write_atomic(args.out, text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
