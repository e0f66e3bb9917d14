"""Store-based small-step machine with explicit deallocation.

Deallocation happens only through the removal operator: an operator call frees
each argument whose declared input qualifier is ``li`` (the qualifier written in
the operator type, never the one in the store), and ``if``/``spl``/``case``/
application free their scrutinee or closure when the stored value is linear.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .syntax import (
    App, ArrayRange, Case, Cons, Expr, HI, Hidden, If, LI, Lam, Let, Lit, Nil, Op, Q,
    QualifiedSignature, Split, TupleE, Type, UN, Var, apply_subst, is_value,
)

# ---------------------------------------------------------------- values


@dataclass(frozen=True)
class Const:
    value: Union[int, bool, Tuple[int, ...]]


@dataclass(frozen=True)
class TupleCells:
    vars: Tuple[str, ...]


@dataclass(frozen=True)
class Closure:
    param: str
    ptype: Type
    body: Expr


@dataclass(frozen=True)
class NilCell:
    elem: Optional[Type] = None


@dataclass(frozen=True)
class ConsCell:
    head: str
    tail: str


Prevalue = Union[Const, TupleCells, Closure, NilCell, ConsCell]


@dataclass(frozen=True)
class Value:
    q: Q
    w: Prevalue

    def __post_init__(self):
        if self.q is HI:
            raise ValueError("stored values are qualified li or un")


def size_of(v: Value) -> int:
    """Memory locations held by a value: arrays count their length, the rest 1."""
    w = v.w
    if type(w) is Const and isinstance(w.value, tuple):
        return len(w.value)
    return 1


def show_prevalue(w: Prevalue) -> str:
    from .surface import show_expr, show_type

    if type(w) is Const:
        v = w.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, int):
            return str(v)
        return "{" + ", ".join(map(str, v)) + "}"
    if type(w) is TupleCells:
        return "<" + ", ".join(w.vars) + ">"
    if type(w) is Closure:
        return f"\\{w.param}: {show_type(w.ptype)}. {show_expr(w.body)}"
    if type(w) is NilCell:
        return "[]"
    return f"({w.head} : {w.tail})"


def show_value(v: Value) -> str:
    w = show_prevalue(v.w)
    if type(v.w) is Closure:
        return f"{v.q.value} ({w})"
    return f"{v.q.value} {w}"


# ---------------------------------------------------------------- store


class Store:
    """Ordered cells with a monotone fresh-name counter (``v0``, ``v1``, ...)."""

    __slots__ = ("cells", "counter", "annotations")

    def __init__(self, cells: Iterable[Tuple[str, Value]] = (), counter: int = 0,
                 annotations: Optional[Dict[str, Type]] = None):
        self.cells: Dict[str, Value] = {}
        for x, v in cells:
            if x in self.cells:
                raise ValueError(f"store variable {x} bound twice")
            self.cells[x] = v
        self.counter = counter
        self.annotations: Dict[str, Type] = dict(annotations or {})

    def copy(self) -> "Store":
        s = Store.__new__(Store)
        s.cells = dict(self.cells)
        s.counter = self.counter
        s.annotations = self.annotations
        return s

    def __contains__(self, x) -> bool:
        return x in self.cells

    def __getitem__(self, x) -> Value:
        return self.cells[x]

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells.items())

    def __eq__(self, other) -> bool:
        return (isinstance(other, Store) and list(self.cells.items()) == list(other.cells.items())
                and self.counter == other.counter)

    def names(self) -> List[str]:
        return list(self.cells)

    def fresh(self) -> str:
        k = self.counter
        while f"v{k}" in self.cells:
            k += 1
        return f"v{k}"

    def alloc(self, x: str, v: Value) -> None:
        if x in self.cells:
            raise MachineError("alloc", f"{x} is already bound")
        self.cells[x] = v
        if x.startswith("v") and x[1:].isdigit():
            self.counter = max(self.counter, int(x[1:]) + 1)

    def remove(self, x: str) -> Value:
        try:
            return self.cells.pop(x)
        except KeyError:
            raise MachineError("dealloc", f"linear removal of unbound variable {x}") from None

    def weight(self) -> int:
        return sum(size_of(v) for v in self.cells.values())

    def __repr__(self) -> str:
        return "(" + ", ".join(f"{x} = {show_value(v)}" for x, v in self.cells.items()) + ")"


class MachineError(Exception):
    def __init__(self, rule: str, message: str):
        self.rule = rule
        self.message = message
        super().__init__(f"[{rule}] {message}")


def dealloc(s: Store, quals: Sequence[Q], xs: Sequence[str]) -> List[Tuple[str, Value]]:
    """Apply the removal operator left to right, in place; returns the freed cells."""
    if len(quals) != len(xs):
        raise ValueError("one qualifier per variable")
    freed = []
    for q, x in zip(quals, xs):
        if q is LI:
            freed.append((x, s.remove(x)))
    return freed


# ---------------------------------------------------------------- primitives


class PrimitiveError(Exception):
    pass


def _ints(*ws):
    out = []
    for w in ws:
        if type(w) is not Const or type(w.value) is not int:
            raise PrimitiveError(f"expected an integer, got {show_prevalue(w)}")
        out.append(w.value)
    return out


def _array(w):
    if type(w) is not Const or not isinstance(w.value, tuple):
        raise PrimitiveError(f"expected an array, got {show_prevalue(w)}")
    return w.value


def _same_const(a, b):
    if type(a) is not Const or type(b) is not Const or type(a.value) is not type(b.value):
        raise PrimitiveError("comparison of incompatible constants")
    return a.value, b.value


def _get(a, i):
    arr = _array(a)
    (k,) = _ints(i)
    if not 0 <= k < len(arr):
        raise PrimitiveError(f"index {k} out of range for array of length {len(arr)}")
    return Const(arr[k])


def _set(a, i, v):
    arr = _array(a)
    k, x = _ints(i, v)
    if not 0 <= k < len(arr):
        raise PrimitiveError(f"index {k} out of range for array of length {len(arr)}")
    return Const(arr[:k] + (x,) + arr[k + 1:])


def _arith(fn):
    def prim(a, b):
        x, y = _ints(a, b)
        return Const(fn(x, y))
    return prim


def _eq(a, b):
    x, y = _same_const(a, b)
    return Const(x == y)


BUILTINS: Dict[str, Callable] = {
    "add": _arith(lambda x, y: x + y),
    "sub": _arith(lambda x, y: x - y),
    "mul": _arith(lambda x, y: x * y),
    "eq": _eq,
    "lt": _arith(lambda x, y: x < y),
    "le": _arith(lambda x, y: x <= y),
    "eqz": lambda a: Const(_ints(a)[0] == 0),
    "id": lambda a: a,
    "get": _get,
    "set": _set,
    "fst": lambda a, *rest: a,
}


def _const_literal(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        raise KeyError(f"bad constant key const:{text}") from None


class PrimitiveTable:
    """Primitive-binding keys to host functions over prevalues.

    Besides the builtin names, ``const:<literal>`` yields a constant and
    ``param:<name>`` yields the integer program parameter ``name``.
    """

    def __init__(self, params: Optional[Dict[str, int]] = None, extra: Optional[Dict[str, Callable]] = None):
        self.params = dict(params or {})
        self.table = dict(BUILTINS)
        if extra:
            self.table.update(extra)

    def __contains__(self, key: str) -> bool:
        try:
            self.lookup(key)
        except KeyError:
            return False
        return True

    def lookup(self, key: str) -> Callable:
        if key in self.table:
            return self.table[key]
        kind, _, arg = key.partition(":")
        if kind == "const":
            c = Const(_const_literal(arg))
            return lambda: c
        if kind == "param":
            if arg not in self.params:
                raise KeyError(f"unknown parameter {arg!r}")
            c = Const(self.params[arg])
            return lambda: c
        raise KeyError(f"unknown primitive {key!r}")

    def apply(self, key: str, ws: Sequence[Prevalue]) -> Prevalue:
        fn = self.lookup(key)
        try:
            return fn(*ws)
        except TypeError as exc:
            raise PrimitiveError(f"{key}: {exc}") from None


# ---------------------------------------------------------------- decomposition


@dataclass(frozen=True)
class Frame:
    node: Expr
    slot: int  # which child holds the hole


class AlreadyVariable:
    def __repr__(self):
        return "AlreadyVariable"


ALREADY_VARIABLE = AlreadyVariable()


def decompose(e: Expr):
    """Split ``e`` into evaluation frames (outermost first) and a redex."""
    frames: List[Frame] = []
    if type(e) is Var:
        return ALREADY_VARIABLE
    while True:
        t = type(e)
        if t is Var:
            raise MachineError("decompose", "hole landed on a variable")
        if is_value(e):
            return frames, e
        slot = _hole_slot(e)
        if slot is None:
            return frames, e
        frames.append(Frame(e, slot))
        e = _child(e, slot)


def _hole_slot(e: Expr) -> Optional[int]:
    t = type(e)
    if t is Op:
        for i, a in enumerate(e.args):
            if type(a) is not Var:
                return i
        return None
    if t is TupleE:
        for i, a in enumerate(e.items):
            if type(a) is not Var:
                return i
        return None
    if t is App:
        if type(e.fn) is not Var:
            return 0
        return 1 if type(e.arg) is not Var else None
    if t is Cons:
        if type(e.head) is not Var:
            return 0
        return 1 if type(e.tail) is not Var else None
    if t is If:
        return None if type(e.cond) is Var else 0
    if t is Split:
        return None if type(e.expr) is Var else 0
    if t is Case:
        return None if type(e.scrut) is Var else 0
    if t is Let:
        return None if type(e.bound) is Var else 0
    return None


def _child(e: Expr, slot: int) -> Expr:
    t = type(e)
    if t is Op:
        return e.args[slot]
    if t is TupleE:
        return e.items[slot]
    if t is App:
        return e.fn if slot == 0 else e.arg
    if t is Cons:
        return e.head if slot == 0 else e.tail
    if t is If:
        return e.cond
    if t is Split:
        return e.expr
    if t is Case:
        return e.scrut
    if t is Let:
        return e.bound
    raise MachineError("decompose", f"no hole in {t.__name__}")


def _replace(e: Expr, slot: int, c: Expr) -> Expr:
    t = type(e)
    if t is Op:
        return Op(e.name, e.args[:slot] + (c,) + e.args[slot + 1:], e.index, pos=e.pos)
    if t is TupleE:
        return TupleE(e.q, e.items[:slot] + (c,) + e.items[slot + 1:], pos=e.pos)
    if t is App:
        return App(c, e.arg, pos=e.pos) if slot == 0 else App(e.fn, c, pos=e.pos)
    if t is Cons:
        return Cons(e.q, c, e.tail, pos=e.pos) if slot == 0 else Cons(e.q, e.head, c, pos=e.pos)
    if t is If:
        return If(c, e.then, e.else_, pos=e.pos)
    if t is Split:
        return Split(c, e.pattern, e.body, pos=e.pos)
    if t is Case:
        return Case(c, e.nil_branch, e.head, e.tail, e.cons_branch, pos=e.pos)
    if t is Let:
        return Let(e.name, c, e.body, e.ann, pos=e.pos)
    raise MachineError("plug", f"no hole in {t.__name__}")


def plug(frames: Sequence[Frame], e: Expr) -> Expr:
    for f in reversed(frames):
        e = _replace(f.node, f.slot, e)
    return e


# ---------------------------------------------------------------- steps


@dataclass(frozen=True)
class StepRecord:
    step: int
    rule: str
    redex: Expr
    allocs: Tuple[Tuple[str, Value], ...] = ()
    frees: Tuple[Tuple[str, Value], ...] = ()

    def line(self) -> str:
        from .surface import show_expr

        parts = [str(self.step), self.rule, show_expr(self.redex)]
        parts += [f"+{x}({size_of(v)})" for x, v in self.allocs]
        parts += [f"-{x}({size_of(v)})" for x, v in self.frees]
        return ", ".join(parts)

    def record(self) -> dict:
        from .surface import show_expr

        return {
            "step": self.step,
            "rule": self.rule,
            "redex": show_expr(self.redex),
            "alloc": [{"var": x, "size": size_of(v)} for x, v in self.allocs],
            "dealloc": [{"var": x, "size": size_of(v)} for x, v in self.frees],
        }


@dataclass(frozen=True)
class Terminal:
    var: str


@dataclass(frozen=True)
class Stuck:
    rule: str
    message: str
    redex: Optional[Expr] = None

    def __str__(self) -> str:
        from .surface import show_expr

        at = f" at {show_expr(self.redex)}" if self.redex is not None else ""
        return f"stuck [{self.rule}]{at}: {self.message}"


class Configuration:
    __slots__ = ("store", "control")

    def __init__(self, store: Store, control: Expr):
        self.store = store
        self.control = control

    def copy(self) -> "Configuration":
        return Configuration(self.store.copy(), self.control)

    def is_terminal(self) -> bool:
        return type(self.control) is Var

    def __eq__(self, other) -> bool:
        return isinstance(other, Configuration) and self.store == other.store and self.control == other.control

    def __repr__(self) -> str:
        from .surface import show_expr

        return f"{self.store!r}; {show_expr(self.control)}"


def value_of(e: Expr) -> Value:
    t = type(e)
    if t is Lit:
        v = e.value
        if isinstance(v, ArrayRange):
            raise MachineError("eva", "array range not instantiated")
        return Value(e.q, Const(v))
    if t is Lam:
        return Value(e.q, Closure(e.param, e.ptype, e.body))
    if t is TupleE:
        return Value(e.q, TupleCells(tuple(a.name for a in e.items)))
    if t is Nil:
        return Value(e.q, NilCell(e.elem))
    if t is Cons:
        return Value(e.q, ConsCell(e.head.name, e.tail.name))
    raise MachineError("eva", "not a value")


class Machine:
    """One machine instance binds a signature, primitives and mutant switches."""

    def __init__(self, sig: QualifiedSignature, prims: Optional[PrimitiveTable] = None,
                 mutants: Iterable[str] = ()):
        self.sig = sig
        self.prims = prims or PrimitiveTable()
        self.mutants = frozenset(mutants)
        self.store_qualifier_dealloc = "store-qualifier-dealloc" in self.mutants

    def lookup(self, s: Store, x: str, rule: str) -> Value:
        v = s.cells.get(x)
        if v is None:
            raise MachineError(rule, f"variable {x} is not in the store")
        return v

    def resolve(self, e: Op) -> int:
        if e.index is not None:
            return e.index
        cands = self.sig.candidates(e.name, len(e.args))
        if len(cands) != 1:
            raise MachineError("eop", f"operator {e.name} is not resolved to a signature entry")
        return cands[0]

    def beta(self, s: Store, r: Expr):
        """Apply one beta rule in place; returns ``(rule, new expr, allocs, frees)``."""
        t = type(r)
        if is_value(r):
            x = s.fresh()
            v = value_of(r)
            s.alloc(x, v)
            return "eva", Var(x), ((x, v),), ()
        if t is Op:
            index = self.resolve(r)
            entry = self.sig[index]
            tau = entry.optype
            xs = [a.name for a in r.args]
            vals = [self.lookup(s, x, "eop") for x in xs]
            try:
                w = self.prims.apply(entry.key, [v.w for v in vals])
            except (PrimitiveError, KeyError) as exc:
                raise MachineError("eop", str(exc)) from None
            x = s.fresh()
            if self.store_qualifier_dealloc:
                quals = [v.q for v in vals]
            else:
                quals = list(tau.pseudoqualifiers)
            doomed = [y for q, y in zip(quals, xs) if q is LI]
            if len(set(doomed)) != len(doomed):
                # the second removal of the same cell would fail; nothing is mutated yet
                raise MachineError("eop", "the same cell is removed twice by one operator call")
            frees = dealloc(s, quals, xs)
            v = Value(tau.output.q, w)
            s.alloc(x, v)
            return "eop", Var(x), ((x, v),), tuple(frees)
        if t is If:
            x = r.cond.name
            v = self.lookup(s, x, "eif")
            if type(v.w) is not Const or type(v.w.value) is not bool:
                raise MachineError("eif", f"{x} does not hold a boolean")
            frees = dealloc(s, [v.q], [x])
            return "eif", (r.then if v.w.value else r.else_), (), tuple(frees)
        if t is Split:
            x = r.expr.name
            v = self.lookup(s, x, "esp")
            if type(v.w) is not TupleCells or len(v.w.vars) != len(r.pattern):
                raise MachineError("esp", f"{x} does not hold a {len(r.pattern)}-tuple")
            frees = dealloc(s, [v.q], [x])
            body = apply_subst(dict(zip(r.pattern, v.w.vars)), r.body)
            return "esp", body, (), tuple(frees)
        if t is App:
            f = r.fn.name
            v = self.lookup(s, f, "efu")
            if type(v.w) is not Closure:
                raise MachineError("efu", f"{f} does not hold a function")
            frees = dealloc(s, [v.q], [f])
            body = apply_subst({v.w.param: r.arg.name}, v.w.body)
            return "efu", body, (), tuple(frees)
        if t is Let:
            return "ele", apply_subst({r.name: r.bound.name}, r.body), (), ()
        if t is Case:
            x = r.scrut.name
            v = self.lookup(s, x, "eca")
            if type(v.w) is NilCell:
                frees = dealloc(s, [v.q], [x])
                return "eca", r.nil_branch, (), tuple(frees)
            if type(v.w) is ConsCell:
                frees = dealloc(s, [v.q], [x])
                body = apply_subst({r.head: v.w.head, r.tail: v.w.tail}, r.cons_branch)
                return "eca", body, (), tuple(frees)
            raise MachineError("eca", f"{x} does not hold a list cell")
        raise MachineError("beta", f"{t.__name__} is not a redex")

    def step_in_place(self, c: Configuration, step_no: int = 0):
        """Advance ``c`` by one step; returns a StepRecord, Terminal or Stuck."""
        d = decompose(c.control)
        if d is ALREADY_VARIABLE:
            return Terminal(c.control.name)
        frames, redex = d
        try:
            rule, new, allocs, frees = self.beta(c.store, redex)
        except MachineError as exc:
            return Stuck(exc.rule, exc.message, redex)
        c.control = plug(frames, new)
        return StepRecord(step_no, rule, redex, allocs, frees)

    def step(self, c: Configuration):
        """Pure step: returns a new Configuration, Terminal or Stuck."""
        c2 = c.copy()
        out = self.step_in_place(c2)
        if isinstance(out, StepRecord):
            return c2
        return out

    def run(self, c: Configuration, fuel: int = 10 ** 6, trace: bool = False,
            observer: Optional[Callable[[StepRecord, Configuration], None]] = None,
            copy: bool = True) -> "RunResult":
        if fuel < 0:
            raise ValueError("fuel must be non-negative")
        c = c.copy() if copy else c
        records: List[StepRecord] = []
        steps = 0
        while True:
            if c.is_terminal():
                return RunResult("terminal", c, steps, records, terminal=c.control.name)
            if steps >= fuel:
                return RunResult("fuel", c, steps, records)
            out = self.step_in_place(c, steps + 1)
            if isinstance(out, Stuck):
                return RunResult("stuck", c, steps, records, stuck=out)
            steps += 1
            if trace:
                records.append(out)
            if observer is not None:
                observer(out, c)


@dataclass
class RunResult:
    status: str  # terminal | fuel | stuck
    config: Configuration
    steps: int
    trace: List[StepRecord] = field(default_factory=list)
    terminal: Optional[str] = None
    stuck: Optional[Stuck] = None

    @property
    def value(self) -> Optional[Value]:
        if self.terminal is None:
            return None
        return self.config.store.cells.get(self.terminal)


# ---------------------------------------------------------------- loading programs


def instantiate_value(e: Expr, params: Dict[str, int]) -> Expr:
    if type(e) is Lit and isinstance(e.value, ArrayRange):
        return Lit(e.q, e.value.expand(params), pos=e.pos)
    return e


def expand_ranges(e: Expr, params: Dict[str, int]) -> Expr:
    """Replace symbolic array ranges by concrete arrays everywhere in ``e``."""
    from .syntax import children

    t = type(e)
    if t is Lit:
        return instantiate_value(e, params)
    if not children(e):
        return e
    if t is Op:
        return Op(e.name, tuple(expand_ranges(a, params) for a in e.args), e.index, pos=e.pos)
    if t is TupleE:
        return TupleE(e.q, tuple(expand_ranges(a, params) for a in e.items), pos=e.pos)
    if t is App:
        return App(expand_ranges(e.fn, params), expand_ranges(e.arg, params), pos=e.pos)
    if t is Lam:
        return Lam(e.q, e.param, e.ptype, expand_ranges(e.body, params), pos=e.pos)
    if t is Split:
        return Split(expand_ranges(e.expr, params), e.pattern, expand_ranges(e.body, params), pos=e.pos)
    if t is If:
        return If(*(expand_ranges(x, params) for x in (e.cond, e.then, e.else_)), pos=e.pos)
    if t is Let:
        return Let(e.name, expand_ranges(e.bound, params), expand_ranges(e.body, params), e.ann, pos=e.pos)
    if t is Cons:
        return Cons(e.q, expand_ranges(e.head, params), expand_ranges(e.tail, params), pos=e.pos)
    if t is Case:
        return Case(expand_ranges(e.scrut, params), expand_ranges(e.nil_branch, params), e.head, e.tail,
                    expand_ranges(e.cons_branch, params), pos=e.pos)
    return e


def initial_configuration(store_entries, main: Expr, params: Dict[str, int]) -> Configuration:
    """Build ``(S, e)`` from value expressions; entries must already be values."""
    s = Store()
    for entry in store_entries:
        v = expand_ranges(entry.value, params)
        if not is_value(v):
            raise MachineError("load", f"store entry {entry.name} is not a value")
        s.alloc(entry.name, value_of(v))
        if entry.ann is not None:
            s.annotations[entry.name] = entry.ann
    return Configuration(s, expand_ranges(main, params))


def readback(s: Store, x: str, limit: int = 10_000) -> str:
    """Render the value reachable from ``x`` (tuples, lists and constants are followed)."""
    budget = [limit]

    def go(y: str) -> str:
        budget[0] -= 1
        if budget[0] < 0:
            return "..."
        v = s.cells.get(y)
        if v is None:
            return f"<dangling {y}>"
        w = v.w
        if type(w) is TupleCells:
            return "<" + ", ".join(go(z) for z in w.vars) + ">"
        if type(w) in (NilCell, ConsCell):
            items = []
            while type(w) is ConsCell:
                items.append(go(w.head))
                nxt = s.cells.get(w.tail)
                if nxt is None:
                    items.append(f"<dangling {w.tail}>")
                    break
                w = nxt.w
            return "[" + ", ".join(items) + "]"
        if type(w) is Closure:
            return "<function>"
        return show_prevalue(w)

    return go(x)
