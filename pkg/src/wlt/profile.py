"""Memory balance of a run and growth degrees by exact finite differences.

Balance counts memory locations (arrays by length, everything else 1).  The
initial store is booked as one allocation at step 0; every later step books its
allocations and deallocations.  A measured function gets a baseline: the balance
just before its first application, so its cost excludes building the input.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .machine import Machine, StepRecord, Stuck, size_of
from .syntax import Var


@dataclass
class BalanceLedger:
    initial: int = 0
    balance: int = 0
    peak: int = 0
    allocated: int = 0
    freed: int = 0
    baseline: Optional[int] = None
    baseline_step: Optional[int] = None
    peak_since_baseline: Optional[int] = None
    events: List[Tuple[int, str, int, int]] = field(default_factory=list)  # step, rule, delta, balance
    keep_events: bool = False

    def start(self, weight: int) -> None:
        self.initial = self.balance = self.peak = weight
        if self.keep_events:
            self.events.append((0, "init", weight, weight))

    def book(self, rec: StepRecord) -> None:
        plus = sum(size_of(v) for _, v in rec.allocs)
        minus = sum(size_of(v) for _, v in rec.frees)
        self.allocated += plus
        self.freed += minus
        self.balance += plus - minus
        if self.balance > self.peak:
            self.peak = self.balance
        if self.baseline is not None and self.balance > self.peak_since_baseline:
            self.peak_since_baseline = self.balance
        if self.keep_events:
            self.events.append((rec.step, rec.rule, plus - minus, self.balance))

    @property
    def final(self) -> int:
        return self.balance

    @property
    def relative(self) -> Optional[int]:
        """Final balance minus the baseline of the measured function."""
        if self.baseline is None:
            return None
        return self.balance - self.baseline

    @property
    def relative_peak(self) -> Optional[int]:
        if self.baseline is None:
            return None
        return self.peak_since_baseline - self.baseline


@dataclass
class ProfileResult:
    status: str
    steps: int
    ledger: BalanceLedger
    value: object = None
    stuck: Optional[Stuck] = None
    store_weight: int = 0


def applies(redex, function: str) -> bool:
    """Is ``redex`` an application whose head is the store function ``function``?"""
    return type(redex).__name__ == "App" and type(redex.fn) is Var and redex.fn.name == function


def instrumented_run(machine: Machine, config, function: Optional[str] = None, fuel: int = 10 ** 7,
                     keep_events: bool = False) -> ProfileResult:
    c = config.copy()
    ledger = BalanceLedger(keep_events=keep_events)
    ledger.start(c.store.weight())
    steps = 0
    while not c.is_terminal():
        if steps >= fuel:
            return ProfileResult("fuel", steps, ledger, store_weight=c.store.weight())
        before = ledger.balance
        out = machine.step_in_place(c, steps + 1)
        if isinstance(out, Stuck):
            return ProfileResult("stuck", steps, ledger, stuck=out, store_weight=c.store.weight())
        steps += 1
        if function is not None and ledger.baseline is None and out.rule == "efu" and applies(out.redex, function):
            ledger.baseline = ledger.peak_since_baseline = before
            ledger.baseline_step = steps
        ledger.book(out)
    return ProfileResult("terminal", steps, ledger, c.store.cells.get(c.control.name), store_weight=c.store.weight())


# ---------------------------------------------------------------- degrees


@dataclass(frozen=True)
class DegreeEstimate:
    degree: int
    saturated: bool  # the highest available difference is nonzero, so the degree may be larger
    differences: Tuple[Fraction, ...]  # leading divided difference of each order

    def __str__(self):
        return f"{self.degree}{'+' if self.saturated else ''}"


def divided_differences(xs: Sequence[int], ys: Sequence[int]) -> List[List[Fraction]]:
    if len(xs) != len(ys) or len(set(xs)) != len(xs):
        raise ValueError("need distinct abscissae, one value each")
    table = [[Fraction(y) for y in ys]]
    for k in range(1, len(xs)):
        prev = table[-1]
        table.append([(prev[i + 1] - prev[i]) / (xs[i + k] - xs[i]) for i in range(len(prev) - 1)])
    return table


def polynomial_degree(xs: Sequence[int], ys: Sequence[int]) -> DegreeEstimate:
    """Degree of the interpolating polynomial: the highest order whose divided differences are nonzero."""
    table = divided_differences(xs, ys)
    degree = 0
    for k, row in enumerate(table):
        if any(d != 0 for d in row):
            degree = k
    leading = tuple(row[0] for row in table)
    return DegreeEstimate(degree, degree == len(xs) - 1 and len(xs) > 1, leading)


@dataclass
class GrowthRow:
    program: str
    variant: str
    n: int
    final: int
    peak: int
    relative: Optional[int]
    steps: int
    status: str

    def record(self) -> dict:
        return dict(self.__dict__)


@dataclass
class GrowthResult:
    program: str
    variant: str
    function: Optional[str]
    rows: List[GrowthRow]
    degree: Optional[DegreeEstimate]

    def records(self) -> List[dict]:
        deg = None if self.degree is None else self.degree.degree
        return [dict(r.record(), degree=deg) for r in self.rows]

    def text(self) -> str:
        lines = [f"{self.program} [{self.variant}] measured on {self.function or 'whole run'}"]
        lines.append(f"{'n':>6} {'final':>10} {'peak':>10} {'relative':>10} {'steps':>10}")
        for r in self.rows:
            lines.append(f"{r.n:>6} {r.final:>10} {r.peak:>10} {str(r.relative):>10} {r.steps:>10}")
        lines.append(f"degree: {self.degree if self.degree is not None else 'n/a'}")
        return "\n".join(lines)


def growth_experiment(load, ns: Iterable[int], program: str = "program", variant: str = "li",
                      function: Optional[str] = None, fuel: int = 10 ** 7) -> GrowthResult:
    """``load(n)`` returns ``(machine, configuration)`` for size ``n``."""
    ns = list(ns)
    if len(ns) < 4 or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 2:
        raise ValueError("sizes must be strictly increasing, at least 4 of them, each >= 2")
    rows = []
    for n in ns:
        machine, config = load(n)
        res = instrumented_run(machine, config, function, fuel)
        led = res.ledger
        rows.append(GrowthRow(program, variant, n, led.final, led.peak, led.relative, res.steps, res.status))
    ok = rows and all(r.status == "terminal" for r in rows)
    ys = [r.relative if function is not None else r.final for r in rows]
    degree = polynomial_degree([r.n for r in rows], ys) if ok and None not in ys else None
    return GrowthResult(program, variant, function, rows, degree)


def profile_program(program, n: Optional[int] = None, function: Optional[str] = None,
                    fuel: int = 10 ** 7, keep_events: bool = False) -> ProfileResult:
    """Check, load and run ``program`` at size ``n`` with balance accounting."""
    from .corpus import loader

    machine, config = loader(program)(n)
    return instrumented_run(machine, config, function, fuel, keep_events)


def corpus_growth(name: str, variant: str = "li", ns: Optional[Sequence[int]] = None) -> GrowthResult:
    from . import corpus

    meta = corpus.PROGRAMS[name]
    return growth_experiment(corpus.loader(corpus.load(name, variant)), ns or meta.ns, name, variant,
                             meta.function)


def to_json(results: Sequence[GrowthResult]) -> str:
    return json.dumps([rec for g in results for rec in g.records()], indent=2)
