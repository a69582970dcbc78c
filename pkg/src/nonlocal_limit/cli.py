"""Command-line entry point ``nonlocal-limit``.

Exit codes: 0 success, 2 configuration error, 3 invariant violation during a
run, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import Quadratic, SmoothedKruzkov, bump_lattice, entropy_audit, l1_distance
from .config import SweepSpec, parse_config, render_config
from .core_model import SimConfig
from .errors import InsufficientTrajectoryResolution, InvariantViolation, ModelError, ValidationError
from .experiments import figure1, singular_limit_sweep, solution_extent
from .io import fmt, read_field_csv, write_field_csv, write_snapshot_csv, write_table_csv
from .local_reference import FluxFunction, run_local
from .nonlocal_solver import run_nonlocal

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_IO = 4

log = logging.getLogger("nonlocal_limit")


def _simulate(config: SimConfig, retain: bool):
    if config.is_local:
        return run_local(config, retain=retain)
    return run_nonlocal(config, retain=retain)


def _single_config(path) -> SimConfig:
    config = parse_config(path)
    if isinstance(config, SweepSpec):
        raise ValidationError(f"{path} describes a sweep; use the 'sweep' subcommand")
    return config


def _window(text: str):
    try:
        lo, hi = (float(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("window must look like a,b") from None
    return lo, hi


def cmd_run(args) -> int:
    config = _single_config(args.config)
    sys.stdout.write(render_config(config))
    result = _simulate(config, retain=False)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for t in result.snapshot_times:
        write_snapshot_csv(result, t, out / f"snapshot_t_{format(t, 'g')}.csv")
    diag = result.diagnostics.as_arrays()
    with (out / "diagnostics.csv").open("w", newline="") as fh:
        fh.write("time,mass,l1,linf,tv\n")
        for row in zip(*(diag[k] for k in ("time", "mass", "l1", "linf", "tv"))):
            fh.write(",".join(fmt(v) for v in row) + "\n")
    print(f"# {result.kind} run: {result.steps} steps, max|q| = {fmt(result.max_linf())}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = parse_config(args.config)
    if not isinstance(spec, SweepSpec):
        raise ValidationError(f"{args.config} has no [sweep] section")
    sys.stdout.write(render_config(spec))
    try:
        outcome = singular_limit_sweep(spec, workers=args.workers, entropy=not args.no_entropy)
    except InsufficientTrajectoryResolution as exc:
        raise InsufficientTrajectoryResolution(f"{exc} (or pass --no-entropy)") from exc
    if args.out:
        write_table_csv(outcome.table, args.out)
    print("eta,l1_q,l1_w,linf_max,entropy_min")
    for r in outcome.table.rows:
        print(",".join(fmt(v) for v in (r.eta, r.l1_q, r.l1_w, r.linf_max, r.entropy_min)))
    print(f"# reference gap (coarse local vs coarsened fine) = {fmt(outcome.table.reference_gap)}")
    return EXIT_OK


def cmd_figure1(args) -> int:
    tables = figure1(args.out, workers=args.workers)
    for name, table in tables.items():
        l1 = ", ".join(f"{v:.5g}" for v in table.column("l1_q"))
        print(f"{name}: l1_q = [{l1}]")
    return EXIT_OK


def cmd_entropy_audit(args) -> int:
    config = _single_config(args.config)
    result = _simulate(config, retain=True)
    pair = Quadratic() if args.pair == "quadratic" else SmoothedKruzkov(k=args.k)
    bumps = bump_lattice(config.t_end, *solution_extent(config))
    values = entropy_audit(result, pair, bumps, FluxFunction.for_velocity(config.velocity))
    print("t0,x0,rt,rx,scale,E")
    for b, e in zip(bumps, values):
        print(",".join(fmt(v) for v in (b.t0, b.x0, b.rt, b.rx, b.scale(), e)))
    print(f"# min E = {fmt(np.min(values))}")
    return EXIT_OK


def cmd_compare(args) -> int:
    a = read_field_csv(args.a)
    b = read_field_csv(args.b)
    print(fmt(l1_distance(a, b, args.window)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonlocal-limit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="single simulation; writes snapshot and diagnostics CSVs")
    s.add_argument("config")
    s.add_argument("--out", default=".", help="output directory (default: current)")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="singular-limit convergence table")
    s.add_argument("config")
    s.add_argument("--out", help="also write the table CSV here")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--no-entropy", action="store_true", help="skip the entropy column (reported as 0)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("figure1", help="four-panel reproduction: snapshots, tables, metadata")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_figure1)

    s = sub.add_parser("entropy-audit", help="entropy functional over the 3x3 bump lattice")
    s.add_argument("config")
    s.add_argument("--pair", choices=("quadratic", "kruzkov"), default="quadratic")
    s.add_argument("--k", type=float, default=0.0, help="Kruzkov constant")
    s.set_defaults(func=cmd_entropy_audit)

    s = sub.add_parser("compare", help="windowed L1 distance between two snapshot CSVs")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--window", type=_window, default=None)
    s.set_defaults(func=cmd_compare)
    return p


def _glue_window(argv):
    """Let ``--window -0.6,1.1`` through; argparse would read -0.6,1.1 as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--window":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--window={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_window(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ModelError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
