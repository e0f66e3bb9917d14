"""Store typing, configuration typing and executable preservation/progress suites.

``config_check`` decides whether some context types both the store and the
control expression.  The store is read left to right.  Each cell either enters
the context with its own type or is absorbed by a later cell that consumes it
(tuple or list components, linear closures).  A linear base constant may enter
as a hidden entry instead; that choice stays open until some user forces it: a
stored closure reading it hidden makes it hidden, a consumer makes it linear,
and the control expression settles whatever is left.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import kernels as K
from .machine import (
    Closure, Configuration, Const, ConsCell, Machine, NilCell, PrimitiveTable, RunResult, Stuck,
    StepRecord, Store, Terminal, TupleCells, Value, initial_configuration,
)
from .syntax import (
    App, ARRAY, Arrow, Base, BOOL, Case, Cons, Expr, Hidden, If, INT, LI, Lam, Let, ListT, Lit, Nil,
    Op, PseudoType, QualifiedSignature, Split, TupleE, TupleT, Type, TypeContext, UN, Var, depth,
    free_var_set, type_is_q,
)
from .typecheck import Checker, TypeCheckError, check_closed

FALLBACK_CAP = 12  # at most 2**12 li/hi assignments are tried


def const_base(w: Const) -> Base:
    v = w.value
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, int):
        return INT
    return ARRAY


@dataclass
class StoreTyping:
    context: Dict[str, PseudoType]
    flexible: set
    owners: Dict[str, str]
    cells: Dict[str, Value]

    def as_context(self) -> TypeContext:
        return TypeContext(self.context.items())


@dataclass
class ConfigVerdict:
    ok: bool
    type: Optional[Type] = None
    context: Optional[TypeContext] = None
    error: Optional[TypeCheckError] = None
    inconclusive: bool = False
    config: Optional[Configuration] = None  # elaborated configuration
    owners: Dict[str, str] = field(default_factory=dict)

    def __bool__(self):
        return self.ok


class Verifier:
    """Typing of stores and configurations for one signature (closure typings are cached)."""

    def __init__(self, sig: QualifiedSignature, mutants: Iterable[str] = ()):
        self.sig = sig
        self.checker = Checker(sig, [m for m in mutants if m == "operator-pseudosplit"])
        self._fv: Dict[int, Tuple[object, tuple]] = {}
        self._closure: Dict[tuple, tuple] = {}

    # ------------------------------------------------------------ store

    def _free(self, w: Closure):
        hit = self._fv.get(id(w))
        if hit is None or hit[0] is not w:
            fvs = tuple(sorted(free_var_set(w.body) - {w.param}))
            hit = (w, fvs)
            self._fv[id(w)] = hit
        return hit[1]

    def _type_closure(self, ctx: dict, x: str, v: Value, ann: Optional[Type]):
        w = v.w
        fvs = self._free(w)
        local = ctx
        if x in fvs:
            if ann is None or v.q is not UN or not isinstance(ann.pre, Arrow) or ann.q is not UN:
                raise TypeCheckError("store-rec", f"{x} refers to itself; only unrestricted functions "
                                                  f"with a type annotation may", x)
            local = {k: t for k, t in ctx.items() if type_is_q(UN, t)}
            local[x] = ann
        key = (id(w), v.q, tuple((y, local.get(y)) for y in fvs))
        hit = self._closure.get(key)
        if hit is not None and hit[0] is w:
            return hit[1], hit[2], hit[3]
        lam = Lam(v.q, w.param, w.ptype, w.body)
        t, rep, el = self.checker.infer(local, lam, ann)
        new = Closure(el.param, el.ptype, el.body)
        self._closure[key] = (w, t, rep, new)
        return t, rep, new

    def type_store(self, store: Store, forced: Optional[Dict[str, str]] = None) -> StoreTyping:
        forced = forced or {}
        ctx: Dict[str, PseudoType] = {}
        flex: set = set()
        owners: Dict[str, str] = {}
        cells: Dict[str, Value] = {}

        def consume(y: str, by: str):
            if y in owners:
                raise TypeCheckError("store", f"{y} is consumed by both {owners[y]} and {by}", y)
            owners[y] = by
            del ctx[y]
            flex.discard(y)

        def component(y: str, by: str, q) -> Type:
            t = ctx.get(y)
            if t is None:
                why = f"already consumed by {owners[y]}" if y in owners else "not available"
                raise TypeCheckError("store", f"{by} refers to {y}, which is {why}", y)
            if isinstance(t, Hidden):
                raise TypeCheckError("store", f"{by} holds {y}, which must stay hidden", y)
            if not type_is_q(q, t):
                raise TypeCheckError("store", f"{q} cell {by} holds linear {y}", y)
            return t

        for x, v in store:
            ann = store.annotations.get(x)
            w = v.w
            tw = type(w)
            if tw is Const:
                b = const_base(w)
                mode = forced.get(x)
                if v.q is LI and mode == "hi":
                    t = Hidden(b)
                else:
                    t = Type(v.q, b)
                    if v.q is LI and mode is None:
                        flex.add(x)
            elif tw is TupleCells:
                types = [component(y, x, v.q) for y in w.vars]
                lin = [y for y, ty in zip(w.vars, types) if ty.q is LI]
                if len(set(lin)) != len(lin):
                    raise TypeCheckError("store", f"{x} holds the same linear cell twice", x)
                for y in lin:
                    consume(y, x)
                t = Type(v.q, TupleT(tuple(types)))
            elif tw is ConsCell:
                th = component(w.head, x, v.q)
                tt = component(w.tail, x, v.q)
                if tt != Type(v.q, ListT(th)):
                    raise TypeCheckError("store", f"{x}: tail {w.tail} : {tt} does not fit head {th}", x)
                if w.head == w.tail and th.q is LI:
                    raise TypeCheckError("store", f"{x} holds the same linear cell twice", x)
                for y, ty in ((w.head, th), (w.tail, tt)):
                    if ty.q is LI:
                        consume(y, x)
                t = tt
            elif tw is NilCell:
                elem = w.elem
                if elem is None and ann is not None and isinstance(ann.pre, ListT):
                    elem = ann.pre.elem
                    w = NilCell(elem)
                    v = Value(v.q, w)
                if elem is None:
                    raise TypeCheckError("store", f"{x}: element type of the empty list is unknown", x)
                t = Type(v.q, ListT(elem))
            elif tw is Closure:
                t, rep, w2 = self._type_closure(ctx, x, v, ann)
                for y, u in rep.items():
                    if y == x:
                        continue
                    if u == K.LINEAR:
                        consume(y, x)
                    elif u == K.HIDDEN and y in flex:
                        flex.discard(y)
                        ctx[y] = Hidden(ctx[y].pre)
                    elif u == K.HIDDEN and isinstance(ctx.get(y), Type):
                        raise TypeCheckError("store", f"closure {x} reads {y} hidden, but {y} is linear here", y)
                if w2 is not w:
                    v = Value(v.q, w2)
            else:  # pragma: no cover
                raise TypeCheckError("store", f"unknown prevalue in {x}", x)
            if ann is not None and t != ann and not (isinstance(t, Hidden) and ann == Type(LI, t.base)):
                raise TypeCheckError("store", f"{x} is annotated {ann} but holds a {t}", x)
            ctx[x] = t
            cells[x] = v
        return StoreTyping(ctx, flex, owners, cells)

    # ------------------------------------------------------------ configurations

    def _attempt(self, c: Configuration, forced=None) -> ConfigVerdict:
        st = self.type_store(c.store, forced)
        t, rep, el = check_closed(self.checker, st.context, c.control, flexible=frozenset(st.flexible))
        ctx = dict(st.context)
        for y in st.flexible:
            if rep.get(y) != K.LINEAR:
                ctx[y] = Hidden(ctx[y].pre)
        owners = dict(st.owners)
        for y, u in rep.items():
            if u == K.LINEAR:
                owners[y] = "<control>"
        s2 = Store(st.cells.items(), c.store.counter, c.store.annotations)
        return ConfigVerdict(True, t, TypeContext(ctx.items()), config=Configuration(s2, el), owners=owners)

    def check(self, c: Configuration) -> ConfigVerdict:
        try:
            return self._attempt(c)
        except TypeCheckError as err:
            first = err
        candidates = [x for x, v in c.store if v.q is LI and type(v.w) is Const]
        if not candidates:
            return ConfigVerdict(False, error=first)
        if len(candidates) > FALLBACK_CAP:
            return ConfigVerdict(False, error=first, inconclusive=True)
        for choice in itertools.product(("li", "hi"), repeat=len(candidates)):
            try:
                return self._attempt(c, dict(zip(candidates, choice)))
            except TypeCheckError:
                continue
        return ConfigVerdict(False, error=first)


def store_typing_check(s: Store, ctx, sig: QualifiedSignature) -> bool:
    """Does ``|- S : ctx`` hold?  ``ctx`` must list the surviving cells in store order.

    Linear base cells may be listed as ``li B`` or ``hi B``; every other entry is
    compared with the reconstructed type.
    """
    want = ctx.as_dict() if isinstance(ctx, TypeContext) else dict(ctx)
    ver = Verifier(sig)
    try:
        st = ver.type_store(s, {x: ("hi" if isinstance(t, Hidden) else "li")
                                for x, t in want.items() if x in s and s[x].q is LI and type(s[x].w) is Const})
    except TypeCheckError:
        return False
    if list(st.context) != list(want):
        return False
    return all(st.context[x] == want[x] for x in want)


def config_check(c: Configuration, sig: QualifiedSignature, mutants: Iterable[str] = ()) -> ConfigVerdict:
    return Verifier(sig, mutants).check(c)


# ---------------------------------------------------------------- runtime invariants


def well_typing_violations(store: Store, ctx: TypeContext) -> List[str]:
    """Shape agreement between context entries and stored values."""
    out = []
    for x, t in ctx:
        v = store.cells.get(x)
        if v is None:
            out.append(f"{x} is typed but not stored")
            continue
        if isinstance(t, Hidden):
            if v.q is not LI or type(v.w) is not Const or const_base(v.w) != t.base:
                out.append(f"{x} : {t} but the store holds a non-linear or non-base value")
            continue
        if v.q is not t.q:
            out.append(f"{x} : {t} but the stored value is {v.q}")
        shape = {Base: Const, TupleT: TupleCells, Arrow: Closure}.get(type(t.pre))
        if shape is not None and type(v.w) is not shape:
            out.append(f"{x} : {t} but holds a {type(v.w).__name__}")
        if isinstance(t.pre, ListT) and type(v.w) not in (NilCell, ConsCell):
            out.append(f"{x} : {t} but holds a {type(v.w).__name__}")
    return out


def owner_violations(store: Store, verdict: ConfigVerdict) -> List[str]:
    """Linear non-base cells must have exactly one consumer across the store and control."""
    out = []
    seen: Dict[str, str] = {}
    for y, by in verdict.owners.items():
        if y in seen:
            out.append(f"{y} owned by {seen[y]} and {by}")
        seen[y] = by
    for x, v in store:
        if v.q is LI and type(v.w) is not Const and x not in seen:
            out.append(f"linear cell {x} has no consumer")
    return out


# ---------------------------------------------------------------- programs


def load_program(program, params: Optional[Dict[str, int]] = None, mutants: Iterable[str] = ()):
    """Build, type and elaborate the initial configuration of a program file.

    Returns ``(verdict, machine)``; ``verdict.config`` is the elaborated start.
    """
    pdict = dict(program.params)
    if params:
        pdict.update(params)
    c = initial_configuration(program.store, program.main, pdict)
    verdict = Verifier(program.signature, mutants).check(c)
    prims = PrimitiveTable(pdict)
    machine = Machine(program.signature, prims, mutants)
    return verdict, machine, c


@dataclass
class SuiteReport:
    program: str
    n: Optional[int]
    steps_checked: int
    verdict: str  # pass | violation | refused | fuel
    rule: Optional[str] = None
    step: Optional[int] = None
    message: str = ""
    configs: List[Configuration] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"

    def record(self) -> dict:
        return {
            "program": self.program, "n": self.n, "steps_checked": self.steps_checked,
            "verdict": self.verdict, "step": self.step, "rule": self.rule, "message": self.message,
        }


def preservation_suite(program, name: str = "program", n: Optional[int] = None, fuel: int = 10 ** 6,
                       mutants: Iterable[str] = (), keep_configs: bool = False,
                       params: Optional[Dict[str, int]] = None) -> SuiteReport:
    """Type the configuration after every step; the first failure is reported."""
    mutants = tuple(mutants)
    if n is not None:
        params = dict(params or {}, n=n)
    verdict, machine, _ = load_program(program, params, mutants)
    if not verdict.ok:
        return SuiteReport(name, n, 0, "refused", "check", 0, str(verdict.error))
    return preservation_run(verdict.config, program.signature, machine, name, n, fuel, mutants, keep_configs)


def preservation_run(c: Configuration, sig, machine: Machine, name="config", n=None, fuel=10 ** 6,
                     mutants: Iterable[str] = (), keep_configs=False) -> SuiteReport:
    ver = Verifier(sig, mutants)
    c = c.copy()
    configs = [c.copy()] if keep_configs else []
    steps = 0
    while not c.is_terminal():
        if steps >= fuel:
            return SuiteReport(name, n, steps, "fuel", message="fuel exhausted", configs=configs)
        out = machine.step_in_place(c, steps + 1)
        if isinstance(out, Stuck):
            return SuiteReport(name, n, steps, "violation", out.rule, steps + 1, str(out), configs)
        steps += 1
        v = ver.check(c)
        if not v.ok:
            return SuiteReport(name, n, steps, "violation", out.rule, steps,
                               ("inconclusive: " if v.inconclusive else "") + str(v.error), configs)
        if keep_configs and not c.is_terminal():
            configs.append(c.copy())
    return SuiteReport(name, n, steps, "pass", configs=configs)


@dataclass
class ProgressReport:
    checked: int
    stuck: List[Tuple[str, str]] = field(default_factory=list)
    skipped_terminal: int = 0

    @property
    def ok(self) -> bool:
        return not self.stuck


def progress_suite(pool: Iterable[Tuple[str, Configuration, Machine]]) -> ProgressReport:
    """Every non-terminal configuration of the pool must take a step."""
    rep = ProgressReport(0)
    for label, c, machine in pool:
        if c.is_terminal():
            rep.skipped_terminal += 1
            continue
        rep.checked += 1
        out = machine.step(c)
        if isinstance(out, Stuck):
            rep.stuck.append((label, str(out)))
    return rep


# ---------------------------------------------------------------- generated programs

GEN_SIGNATURE_TEXT = """\
+ : (li int, li int) -> li int = add
+ : (un int, un int) -> un int = add
+ : (hi int, li int) -> li int = add
- : (li int, hi int) -> li int = sub
= : (hi int, hi int) -> li bool = eq
= : (un int, li int) -> un bool = eq
< : (li int, li int) -> li bool = lt
id : hi int -> li int = id
id : hi int -> un int = id
0 : li int = const:0
1 : li int = const:1
1 : un int = const:1
true : li bool = const:true
false : un bool = const:false
"""


def gen_signature() -> QualifiedSignature:
    from .surface import parse_signature

    return parse_signature(GEN_SIGNATURE_TEXT.splitlines())


_BASES = [Type(LI, INT), Type(UN, INT), Type(LI, BOOL), Type(UN, BOOL)]


class Generator:
    """Type-directed random configurations; linearity is left to the checker's filter."""

    def __init__(self, sig: QualifiedSignature, rng: random.Random, max_depth: int = 4):
        self.sig = sig
        self.rng = rng
        self.max_depth = max_depth
        self.names = itertools.count()

    def fresh(self) -> str:
        return f"b{next(self.names)}"

    def small_type(self, depth=0) -> Type:
        r = self.rng.random()
        if depth < 1 and r < 0.15:
            q = self.rng.choice([LI, UN])
            items = [self.small_type(depth + 1) for _ in range(self.rng.randint(1, 2))]
            if q is UN:
                items = [Type(UN, t.pre) for t in items]
            return Type(q, TupleT(tuple(items)))
        if depth < 1 and r < 0.25:
            q = self.rng.choice([LI, UN])
            return Type(q, Arrow(self.rng.choice(_BASES), self.rng.choice(_BASES)))
        return self.rng.choice(_BASES)

    def expr(self, t: Type, env: Dict[str, PseudoType], d: int) -> Expr:
        rng = self.rng
        vars_ = [x for x, ty in env.items() if ty == t]
        if d >= self.max_depth:
            opts = ["var"] * bool(vars_) + ["lit"] * isinstance(t.pre, Base)
            if isinstance(t.pre, Base):
                opts += ["const"]
            if not opts:
                opts = ["direct"]
        else:
            opts = ["var"] * (3 * bool(vars_))
            if isinstance(t.pre, Base):
                opts += ["lit", "op", "op", "op", "if", "let", "app", "spl", "const"]
            else:
                opts += ["direct", "direct", "let", "if"]
        if d == 1 and d < self.max_depth:
            opts = [o for o in opts if o not in ("var", "lit", "const")]
        choice = rng.choice(opts)
        if choice == "var":
            return Var(rng.choice(vars_))
        if choice == "lit":
            return Lit(t.q, rng.randint(0, 3) if t.pre == INT else rng.random() < 0.5)
        if choice == "const":
            cands = [i for i, e in enumerate(self.sig, 1) if e.optype.arity == 0 and e.optype.output == t]
            if not cands:
                return Lit(t.q, 1 if t.pre == INT else True)
            return Op(self.sig[rng.choice(cands)].name, ())
        if choice == "op":
            cands = [i for i, e in enumerate(self.sig, 1) if e.optype.arity > 0 and e.optype.output == t]
            if not cands:
                return self.expr(t, env, self.max_depth)
            i = rng.choice(cands)
            args = []
            for want in self.sig[i].optype.inputs:
                if isinstance(want, Hidden):
                    hv = [x for x, ty in env.items()
                          if ty == want or (isinstance(ty, Type) and ty.q is LI and ty.pre == want.base)]
                    args.append(Var(rng.choice(hv)) if hv else Var("nowhere"))
                else:
                    args.append(self.expr(want, env, d + 1))
            return Op(self.sig[i].name, tuple(args))
        if choice == "if":
            c = self.expr(Type(rng.choice([LI, UN]), BOOL), env, d + 1)
            return If(c, self.expr(t, env, d + 1), self.expr(t, env, d + 1))
        if choice == "let":
            bt = self.small_type(1)
            x = self.fresh()
            bound = self.expr(bt, env, d + 1)
            return Let(x, bound, self.expr(t, dict(env, **{x: bt}), d + 1))
        if choice == "spl":
            items = tuple(self.small_type(1) for _ in range(rng.randint(1, 2)))
            q = rng.choice([LI, UN])
            if q is UN:
                items = tuple(Type(UN, it.pre) for it in items)
            names = tuple(self.fresh() for _ in items)
            scrut = self.expr(Type(q, TupleT(items)), env, d + 1)
            inner = dict(env)
            inner.update(zip(names, items))
            return Split(scrut, names, self.expr(t, inner, d + 1))
        if choice == "app":
            pt = rng.choice(_BASES)
            ft = Type(rng.choice([LI, UN]), Arrow(pt, t))
            return App(self.expr(ft, env, d + 1), self.expr(pt, env, d + 1))
        # direct constructor for compound types
        if isinstance(t.pre, TupleT):
            return TupleE(t.q, tuple(self.expr(it, env, d + 1) for it in t.pre.items))
        if isinstance(t.pre, Arrow):
            x = self.fresh()
            return Lam(t.q, x, t.pre.dom, self.expr(t.pre.cod, dict(env, **{x: t.pre.dom}), d + 1))
        if isinstance(t.pre, ListT):
            return Nil(t.q, t.pre.elem)
        return Lit(t.q, 0 if t.pre == INT else False)

    def store(self) -> Tuple[Store, Dict[str, PseudoType]]:
        s = Store()
        env: Dict[str, PseudoType] = {}
        for k in range(self.rng.randint(0, 3)):
            t = self.rng.choice(_BASES)
            x = f"s{k}"
            v = self.rng.randint(0, 3) if t.pre == INT else self.rng.random() < 0.5
            s.alloc(x, Value(t.q, Const(v)))
            env[x] = t
        return s, env

    def configuration(self) -> Configuration:
        s, env = self.store()
        t = self.rng.choice(_BASES + [self.small_type()])
        return Configuration(s, self.expr(t, env, 1))


def generate_well_typed(count: int, seed: int = 0, max_depth: int = 4, max_tries: int = 2_000_000,
                        sig: Optional[QualifiedSignature] = None):
    """Draw configurations until ``count`` pass ``config_check``; returns elaborated ones."""
    sig = sig or gen_signature()
    rng = random.Random(seed)
    gen = Generator(sig, rng, max_depth)
    ver = Verifier(sig)
    out: List[Configuration] = []
    seen = set()
    tries = 0
    while len(out) < count and tries < max_tries:
        tries += 1
        c = gen.configuration()
        if depth(c.control) > max_depth:
            continue
        key = repr(c)
        if key in seen:
            continue
        v = ver.check(c)
        if v.ok:
            seen.add(key)
            out.append(v.config)
    return out, tries
