"""Command line: check, run, profile and meta subcommands.

Exit status: 0 success, 1 the program was rejected or a check failed, 2 usage,
parse or input errors.  ``--format records`` prints one JSON object per line.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import corpus
from .machine import Machine, PrimitiveTable, readback
from .surface import ParseError, parse_program, show_expr
from .typecheck import MUTANTS, TypeCheckError
from .verify import (
    Verifier, generate_well_typed, gen_signature, load_program, preservation_run, preservation_suite,
    progress_suite,
)

DEFAULT_FUEL = 1_000_000


class Output:
    def __init__(self, fmt: str):
        self.fmt = fmt

    def text(self, line: str = "") -> None:
        if self.fmt == "text":
            print(line)

    def record(self, rec: dict) -> None:
        if self.fmt == "records":
            print(json.dumps(rec, sort_keys=True))


def default_fuel() -> int:
    raw = os.environ.get("WLT_FUEL")
    return int(raw) if raw else DEFAULT_FUEL


def read_program(ref: str, variant: str = "li"):
    """A path to a program file, or the name of a bundled program."""
    path = Path(ref)
    if path.exists():
        return path.stem, parse_program(path.read_text())
    if ref in corpus.names():
        return ref, corpus.load(ref, variant)
    raise FileNotFoundError(f"no such file or bundled program: {ref}")


def parse_params(items: List[str]) -> dict:
    out = {}
    for item in items or ():
        name, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"--param expects name=value, got {item!r}")
        out[name.strip()] = int(value)
    return out


# ---------------------------------------------------------------- commands


def cmd_check(args, out: Output) -> int:
    name, program = read_program(args.program, args.variant)
    verdict, _, _ = load_program(program, parse_params(args.param), args.mutant)
    if verdict.ok:
        out.text(f"{name}: ok : {verdict.type}")
        out.record({"program": name, "ok": True, "type": str(verdict.type)})
        if args.explain:
            out.text("store context:")
            for x, t in verdict.context:
                out.text(f"  {x} : {t}")
            out.text("elaborated control:")
            out.text("  " + show_expr(verdict.config.control))
        return 0
    err = verdict.error
    out.text(f"{name}: rejected: {err}")
    out.record(dict({"program": name, "ok": False}, **err.record()))
    if args.explain and err.var is not None:
        out.text(f"  offending variable: {err.var}")
    return 1


def cmd_run(args, out: Output) -> int:
    name, program = read_program(args.program, args.variant)
    verdict, machine, raw = load_program(program, parse_params(args.param), args.mutant)
    if verdict.ok:
        start = verdict.config
    elif args.unsafe:
        out.text(f"warning: running an ill-typed program: {verdict.error}")
        start = raw
    else:
        out.text(f"{name}: rejected: {verdict.error} (use --unsafe to run anyway)")
        out.record(dict({"program": name, "status": "rejected"}, **verdict.error.record()))
        return 1
    fuel = args.fuel if args.fuel is not None else default_fuel()
    res = machine.run(start, fuel=fuel, trace=args.trace)
    for rec in res.trace:
        out.text(rec.line())
        out.record(rec.record())
    summary = {"program": name, "status": res.status, "steps": res.steps}
    if res.status == "terminal":
        summary["value"] = readback(res.config.store, res.terminal)
        out.text(f"{name}: {summary['value']}  ({res.steps} steps)")
    elif res.status == "stuck":
        summary["stuck"] = str(res.stuck)
        out.text(f"{name}: {res.stuck}")
    else:
        out.text(f"{name}: fuel exhausted after {res.steps} steps")
    out.record(summary)
    return 0 if res.status == "terminal" else 1


def cmd_profile(args, out: Output) -> int:
    from .profile import growth_experiment

    names = [args.program] if args.program else list(corpus.PROGRAMS)
    variants = [args.variant] if args.variant else list(corpus.VARIANTS)
    mismatches = 0
    for ref in names:
        meta = corpus.PROGRAMS.get(ref)
        function = args.function or (meta.function if meta else None)
        ns = [int(x) for x in args.ns.split(",")] if args.ns else list(meta.ns if meta else (4, 8, 16, 32))
        for variant in variants:
            name, program = read_program(ref, variant)
            g = growth_experiment(corpus.loader(program), ns, name, variant, function, args.fuel or default_fuel())
            out.text(g.text())
            if meta is not None and g.degree is not None:
                want = corpus.expected_degree(ref, variant)
                good = g.degree.degree == want
                mismatches += not good
                out.text(f"expected degree {want}: {'ok' if good else 'MISMATCH'}")
            elif g.degree is None:
                mismatches += 1
                out.text("degree unavailable: some run did not terminate")
            out.text()
            for rec in g.records():
                out.record(rec)
    return 1 if mismatches else 0


def cmd_meta(args, out: Output) -> int:
    fuel = args.fuel if args.fuel is not None else default_fuel()
    failures = 0
    names = [args.program] if args.program else list(corpus.PROGRAMS)
    pool = []
    for ref in names:
        name, program = read_program(ref)
        meta = corpus.PROGRAMS.get(ref)
        ns = [int(x) for x in args.ns.split(",")] if args.ns else list(meta.preservation_ns if meta else [None])
        for n in ns:
            r = preservation_suite(program, name, n, fuel, args.mutant, keep_configs=args.progress)
            if args.preservation:
                out.text(f"preservation {name} n={n}: {r.verdict} after {r.steps_checked} steps"
                         + (f" [{r.rule} at step {r.step}] {r.message}" if r.verdict != "pass" else ""))
                out.record(dict(r.record(), kind="preservation"))
                failures += r.verdict != "pass"
            if args.progress:
                _, machine, _ = load_program(program, {"n": n} if n is not None else None, args.mutant)
                pool += [(f"{name} n={n} step {k}", c, machine) for k, c in enumerate(r.configs)]
    if args.progress:
        sig = gen_signature()
        generated, tries = generate_well_typed(args.count, seed=args.seed)
        gm = Machine(sig, PrimitiveTable(), args.mutant)
        for k, c in enumerate(generated):
            pool.append((f"generated #{k}", c, gm))
        rep = progress_suite(pool)
        out.text(f"progress: {rep.checked} configurations checked ({len(generated)} generated from "
                 f"{tries} draws, seed {args.seed}); {len(rep.stuck)} stuck")
        for label, why in rep.stuck[:20]:
            out.text(f"  {label}: {why}")
        out.record({"kind": "progress", "checked": rep.checked, "generated": len(generated),
                    "stuck": [{"config": a, "why": b} for a, b in rep.stuck], "seed": args.seed})
        failures += len(rep.stuck) > 0
    return 1 if failures else 0


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wlt", description="Weak-linear type checker, store machine and profiler.")
    p.add_argument("--format", choices=("text", "records"), default="text")
    sub = p.add_subparsers(dest="command", required=True)

    def program_args(sp, positional=True):
        if positional:
            sp.add_argument("program", help="program file or bundled program name")
        sp.add_argument("--variant", choices=corpus.VARIANTS, default="li",
                        help="variant of a bundled program")
        sp.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
        sp.add_argument("--mutant", action="append", default=[], choices=MUTANTS)

    c = sub.add_parser("check", help="type-check a program")
    program_args(c)
    c.add_argument("--explain", action="store_true", help="show the store context or the offending variable")

    r = sub.add_parser("run", help="evaluate a program")
    program_args(r)
    r.add_argument("--fuel", type=int, default=None, help="step limit (default $WLT_FUEL or 1000000)")
    r.add_argument("--trace", action="store_true", help="print one line per step")
    r.add_argument("--unsafe", action="store_true", help="run even if the program is rejected")

    pr = sub.add_parser("profile", help="memory balance and growth degree of bundled programs")
    pr.add_argument("--program", default=None)
    pr.add_argument("--variant", choices=corpus.VARIANTS, default=None)
    pr.add_argument("--ns", default=None, help="comma separated sizes")
    pr.add_argument("--function", default=None, help="store function to measure")
    pr.add_argument("--fuel", type=int, default=None)

    m = sub.add_parser("meta", help="executable preservation and progress checks")
    m.add_argument("--preservation", action="store_true")
    m.add_argument("--progress", action="store_true")
    m.add_argument("--program", default=None)
    m.add_argument("--ns", default=None, help="comma separated sizes")
    m.add_argument("--fuel", type=int, default=None)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--count", type=int, default=1000, help="generated configurations for progress")
    m.add_argument("--mutant", action="append", default=[], choices=MUTANTS)
    return p


COMMANDS = {"check": cmd_check, "run": cmd_run, "profile": cmd_profile, "meta": cmd_meta}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "meta" and not (args.preservation or args.progress):
        args.preservation = args.progress = True
    out = Output(args.format)
    try:
        return COMMANDS[args.command](args, out)
    except ParseError as exc:
        out.text(f"parse error: {exc}")
        out.record({"error": "parse", "message": exc.message if hasattr(exc, "message") else str(exc),
                    "line": getattr(exc, "line", None), "col": getattr(exc, "col", None)})
        return 2
    except (FileNotFoundError, ValueError, KeyError) as exc:
        out.text(f"error: {exc}")
        out.record({"error": type(exc).__name__, "message": str(exc)})
        return 2
    except TypeCheckError as exc:
        out.text(f"rejected: {exc}")
        out.record(dict({"error": "type"}, **exc.record()))
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
