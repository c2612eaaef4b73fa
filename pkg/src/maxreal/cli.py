"""Command-line driver.

    maxreal --spec FILE --bounds 2..8 [--solver external] [--out json]
    maxreal --benchmark robot --bound 8
    maxreal --emit-spec power3 > power3.spec
    maxreal --list-instances

Exit status: 0 when an optimal machine was found, 1 when every tested bound
is unrealizable, 2 on errors, 3 when the budget ran out before any bound
was settled with a certified optimum.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from typing import List, Optional

from . import __version__
from .encoding import Mode
from .problem import ProblemError, SynthesisProblem, format_problem, parse_problem
from .specgen import instance_catalogue, power_instance, robot_spec
from .synth import SynthOptions, report_render, synthesize_max

log = logging.getLogger("maxreal")

EXIT_SAT, EXIT_UNSAT, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2, 3


def parse_bounds(text: str) -> List[int]:
    text = text.strip()
    m = re.fullmatch(r"(\d+)\s*\.\.\s*(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise argparse.ArgumentTypeError(f"empty bound range {text!r}")
        return list(range(lo, hi + 1))
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bounds must look like A..B or a,b,c; got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("no bounds given")
    return out


def benchmark(name: str) -> SynthesisProblem:
    if name == "robot":
        return robot_spec()
    m = re.fullmatch(r"power(\d+)", name)
    if m:
        return power_instance(int(m.group(1)))
    raise ProblemError(f"unknown benchmark {name!r}; use robot or power1..power12")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="maxreal",
        description="Synthesize a finite-state controller that satisfies a hard LTL specification "
                    "and as much as possible of a list of soft safety specifications.")
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--spec", metavar="FILE", help="problem file ([inputs] [outputs] [hard] [soft] ...)")
    src.add_argument("--benchmark", metavar="NAME", help="built-in problem: robot or power1..power12")
    src.add_argument("--emit-spec", metavar="NAME", help="print a built-in problem in the file format and exit")
    src.add_argument("--list-instances", action="store_true", help="print the power-network instance table")
    b = ap.add_mutually_exclusive_group()
    b.add_argument("--bound", type=int, metavar="N", help="machine size bound")
    b.add_argument("--bounds", type=parse_bounds, metavar="A..B", help="range A..B or list a,b,c of bounds")
    ap.add_argument("--all-bounds", action="store_true", help="keep solving after the first realizable bound")
    ap.add_argument("--solver", choices=("builtin", "external"), default="builtin")
    ap.add_argument("--solver-cmd", metavar="TEMPLATE",
                    help="external solver command line; {wcnf} is replaced by the instance path "
                         "(default: the bundled CP-SAT adapter)")
    ap.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.EQUAL.value)
    ap.add_argument("--timeout", type=float, metavar="SECONDS", help="solver budget per bound")
    ap.add_argument("--conflicts", type=int, metavar="N", help="conflict budget per bound (builtin solver)")
    ap.add_argument("--emit-wcnf", metavar="PATH", help="write each MaxSAT instance ({bound} is substituted)")
    ap.add_argument("--out", choices=("text", "json", "dot"), default="text")
    ap.add_argument("--output", metavar="FILE", help="write the report here instead of stdout")
    ap.add_argument("--dump-automata", metavar="DIR", help="write dot files for every automaton")
    ap.add_argument("--exact-encoding", action="store_true",
                    help="give every automaton state a counter instead of only states on rejecting cycles")
    ap.add_argument("--jobs", type=int, default=1, help="solve bounds in parallel processes")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return _run(args, ap)
    except (ProblemError, OSError, ValueError) as exc:
        print(f"maxreal: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # report anything unexpected as an error exit
        log.debug("unhandled error", exc_info=True)
        print(f"maxreal: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _run(args, ap) -> int:
    if args.list_instances:
        rows = instance_catalogue()
        cols = list(rows[0])
        print(" ".join(f"{c:>12}" for c in cols))
        for r in rows:
            print(" ".join(f"{str(r[c]):>12}" for c in cols))
        return 0
    if args.emit_spec:
        sys.stdout.write(format_problem(benchmark(args.emit_spec)))
        return 0
    warnings: List[str] = []
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            problem, warnings = parse_problem(fh.read(), name=args.spec)
    elif args.benchmark:
        problem = benchmark(args.benchmark)
    else:
        ap.error("one of --spec, --benchmark, --emit-spec or --list-instances is required")
    for w in warnings:
        log.warning(w)
    if args.bound is not None:
        bounds = [args.bound]
    elif args.bounds is not None:
        bounds = args.bounds
    else:
        ap.error("--bound or --bounds is required")
    if min(bounds) < 1:
        ap.error("bounds must be positive")
    opts = SynthOptions(
        bounds=bounds,
        solver=args.solver,
        solver_cmd=args.solver_cmd,
        mode=Mode(args.mode),
        timeout=args.timeout,
        conflict_limit=args.conflicts,
        emit_wcnf=args.emit_wcnf,
        dump_automata=args.dump_automata,
        compact=not args.exact_encoding,
        all_bounds=args.all_bounds,
        jobs=max(1, args.jobs),
    )
    report = synthesize_max(problem, opts)
    report.warnings.extend(warnings)
    data = report_render(report, args.out)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    code = report.exit_code()
    if code == EXIT_UNSAT:
        print("maxreal: no implementation within the tested bounds", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
