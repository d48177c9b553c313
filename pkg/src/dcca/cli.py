"""Command-line interface.

Exit codes: 0 success, 1 runtime or data failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .arfima import ArfimaParams, arfima_pair
from .detrend import BoxMode, pearson, rho_dcca_scales
from .errors import DegenerateInputError, DomainError
from .montecarlo import (
    DEFAULT_D,
    DEFAULT_RHO,
    DEFAULT_SCALE_FRACTIONS,
    DEFAULT_T,
    ESTIMATORS,
    GridSpec,
    parse_fraction,
    resolve_scale,
    run_grid,
)
from .report import SchemaError, read_csv, render_charts, write_csv

logger = logging.getLogger("dcca")


class DataError(Exception):
    """Runtime or input-data failure; maps to exit code 1."""


def _list(conv):
    def parse(text: str):
        try:
            return [conv(item) for item in text.split(",") if item.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return parse


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="base random seed (uint64)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for mc")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(prog="dcca", description="DCCA correlation coefficient toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="simulate a correlated ARFIMA(0,d,0) pair")
    p.add_argument("--T", type=int, required=True, dest="T")
    p.add_argument("--d1", type=float, required=True)
    p.add_argument("--d2", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("dcca", parents=[common], help="DCCA coefficient of a two-column x,y CSV")
    p.add_argument("--input", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--scales", type=_list(int), help="absolute scales, e.g. 10,20")
    g.add_argument("--scale-fracs", type=_list(parse_fraction), help="scales relative to T, e.g. 1/100,1/5")
    p.add_argument("--mode", choices=[m.value for m in BoxMode], default=BoxMode.NON_OVERLAPPING.value)
    p.add_argument("--pearson", action="store_true", help="also print Pearson's coefficient")

    p = sub.add_parser("mc", parents=[common], help="run the Monte Carlo grid")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--T-list", type=_list(int), default=list(DEFAULT_T), dest="T_list")
    p.add_argument("--d-list", type=_list(float), default=list(DEFAULT_D))
    p.add_argument("--rho-list", type=_list(float), default=list(DEFAULT_RHO))
    p.add_argument("--scale-fracs", type=_list(parse_fraction), default=list(DEFAULT_SCALE_FRACTIONS))
    p.add_argument("--estimators", type=_list(str), default=list(ESTIMATORS))
    p.add_argument("--mode", choices=[m.value for m in BoxMode], default=BoxMode.NON_OVERLAPPING.value)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plot", parents=[common], help="render SVG charts from an aggregate CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    return parser


def _fmt(v: float) -> str:
    return repr(float(v))


def cmd_gen(args, parser) -> int:
    try:
        params = ArfimaParams(d1=args.d1, d2=args.d2, rho=args.rho, T=args.T, seed=args.seed)
    except DomainError as exc:
        parser.error(str(exc))
    pair = arfima_pair(params)
    lines = ["x,y"] + [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(pair.x, pair.y)]
    try:
        Path(args.out).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    except OSError as exc:
        raise DataError(f"cannot write {args.out}: {exc}") from exc
    return 0


def read_pair(path) -> tuple[np.ndarray, np.ndarray]:
    """Read the ``x`` and ``y`` columns of a CSV with a header row."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or "x" not in reader.fieldnames or "y" not in reader.fieldnames:
                raise DataError(f"{path}: header must contain columns x and y")
            xs, ys = [], []
            for lineno, rec in enumerate(reader, start=2):
                try:
                    xs.append(float(rec["x"]))
                    ys.append(float(rec["y"]))
                except (TypeError, ValueError):
                    raise DataError(f"{path}: line {lineno}: x and y must be numbers") from None
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    x, y = np.array(xs), np.array(ys)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError(f"{path}: non-finite values")
    return x, y


def cmd_dcca(args, parser) -> int:
    x, y = read_pair(args.input)
    T = len(x)
    if args.scales is not None:
        scales = args.scales
    else:
        try:
            scales = [resolve_scale(T, f) for f in args.scale_fracs]
        except ValueError as exc:
            parser.error(str(exc))
    if not scales:
        parser.error("no scales given")
    for s in scales:
        if s < 4:
            parser.error(f"scale s={s} must be >= 4")
        if s > T:
            raise DataError(f"scale s={s} exceeds series length T={T}")
    try:
        values = rho_dcca_scales(x, y, scales, args.mode)
        r = pearson(x, y) if args.pearson else None
    except DegenerateInputError as exc:
        raise DataError(str(exc)) from exc
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    out = ["s,rho_dcca"] + [f"{s},{v:.6f}" for s, v in zip(scales, values)]
    if r is not None:
        out.append(f"pearson,{r:.6f}")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def _progress(quiet: bool):
    if quiet:
        return None

    def sink(done: int, total: int) -> None:
        sys.stderr.write(f"\r{done}/{total} chunks")
        if done == total:
            sys.stderr.write("\n")
        sys.stderr.flush()

    return sink


def cmd_mc(args, parser) -> int:
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        spec = GridSpec(
            d_values=tuple(args.d_list),
            rho_values=tuple(args.rho_list),
            T_values=tuple(args.T_list),
            scale_fractions=tuple(args.scale_fracs),
            reps=args.reps,
            base_seed=args.seed,
            estimators=tuple(args.estimators),
            mode=args.mode,
        )
    except ValueError as exc:
        parser.error(str(exc))
    started = time.perf_counter()
    result = run_grid(spec, progress=_progress(args.quiet), threads=args.threads)
    elapsed = time.perf_counter() - started
    if result.rows:
        try:
            write_csv(result.rows, args.out)
        except OSError as exc:
            raise DataError(f"cannot write {args.out}: {exc}") from exc
    sidecar = Path(str(args.out) + ".errors.json")
    if result.errors:
        sidecar.write_text(json.dumps([asdict(e) for e in result.errors], indent=2) + "\n", encoding="utf-8")
    print(f"cells={result.cells} reps={result.reps} rows={len(result.rows)} "
          f"errors={len(result.errors)} wall={elapsed:.1f}s")
    if result.errors:
        print(f"error details written to {sidecar}", file=sys.stderr)
        return 1
    return 0


def cmd_plot(args, parser) -> int:
    try:
        rows = read_csv(args.input)
    except SchemaError as exc:
        raise DataError(f"{args.input}: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc}") from exc
    if not rows:
        raise DataError(f"{args.input}: no data rows")
    for path in render_charts(rows, args.out_dir):
        print(path)
    return 0


COMMANDS = {"gen": cmd_gen, "dcca": cmd_dcca, "mc": cmd_mc, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args, parser)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
