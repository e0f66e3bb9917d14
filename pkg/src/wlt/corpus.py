"""The bundled example programs and their expected behaviour."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Dict, Optional, Tuple

from .machine import Machine, PrimitiveTable
from .surface import ParseError, ProgramFile, parse_program


@dataclass(frozen=True)
class CorpusProgram:
    name: str
    function: str  # store function whose memory cost is measured
    ns: Tuple[int, ...]  # sizes used for growth degrees
    degree_li: int
    degree_un: int
    preservation_ns: Tuple[int, ...]


PROGRAMS: Dict[str, CorpusProgram] = {
    "fib": CorpusProgram("fib", "fib", (4, 8, 16, 32), 0, 1, tuple(range(0, 17))),
    "map": CorpusProgram("map", "map", (4, 8, 16, 32), 0, 1, tuple(range(0, 17))),
    "mapa": CorpusProgram("mapa", "mapa", (4, 8, 16, 32), 0, 2, tuple(range(1, 17))),
    "sort": CorpusProgram("sort", "sort", (4, 6, 8, 10), 1, 3, tuple(range(1, 9))),
}
VARIANTS = ("li", "un")
EXTRA = ("counterexample",)


def source(name: str, variant: str = "li") -> str:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    fname = f"{name}.wl" if variant == "li" else f"{name}_un.wl"
    return resources.files("wlt").joinpath("corpus", fname).read_text()


def load(name: str, variant: str = "li") -> ProgramFile:
    return parse_program(source(name, variant))


def get_program(name: str, variant: str = "li", n: Optional[int] = None) -> ProgramFile:
    """A bundled program with its size parameter set to ``n``."""
    if name not in PROGRAMS and name not in EXTRA:
        raise KeyError(f"unknown program {name!r}")
    p = load(name, variant)
    if n is None:
        return p
    low = 1 if name in ("sort", "mapa") else 0
    if n < low:
        raise ValueError(f"{name} needs n >= {low}")
    return p.with_params(n=n)


def expected_degree(name: str, variant: str) -> int:
    meta = PROGRAMS[name]
    return meta.degree_li if variant == "li" else meta.degree_un


def names() -> Tuple[str, ...]:
    return tuple(PROGRAMS) + EXTRA


def loader(program: ProgramFile, mutants=(), checked: bool = True):
    """Return ``load(n) -> (machine, configuration)``; the start configuration is elaborated."""
    from .verify import load_program

    def make(n: Optional[int]):
        params = {"n": n} if n is not None else None
        verdict, machine, raw = load_program(program, params, mutants)
        if not verdict.ok:
            if checked:
                raise verdict.error
            # unchecked runs still need operator indices; fall back to the raw configuration
            return machine, raw
        return machine, verdict.config

    return make


def fibonacci_third(n: int) -> int:
    """Third component of ``fib n``: the recurrence a, b <- b, a + b started at 1, 1."""
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return b
