"""Abstract syntax: qualifiers, types, signatures, expressions and substitution."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union


class Q(enum.Enum):
    """Qualifiers ``li``/``un`` plus the pseudoqualifier ``hi``."""

    LI = "li"
    UN = "un"
    HI = "hi"

    def __str__(self) -> str:
        return self.value


LI, UN, HI = Q.LI, Q.UN, Q.HI
QUALIFIERS = (LI, UN)
PSEUDOQUALIFIERS = (LI, UN, HI)


def qualifier_leq(a: Q, b: Q) -> bool:
    # reflexive-transitive closure of li <= un; hi only relates to itself
    return a is b or (a is LI and b is UN)


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self) -> str:
        return self.name


INT, BOOL, ARRAY = Base("int"), Base("bool"), Base("array")


@dataclass(frozen=True)
class TupleT:
    items: Tuple["Type", ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("tuple pretype needs at least one component")


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class ListT:
    elem: "Type"


Pretype = Union[Base, TupleT, Arrow, ListT]


@dataclass(frozen=True)
class Type:
    q: Q
    pre: Pretype

    def __post_init__(self):
        if self.q is HI:
            raise ValueError("hi is not a type qualifier")

    def __str__(self) -> str:
        from .surface import show_type

        return show_type(self)


@dataclass(frozen=True)
class Hidden:
    """Pseudotype ``hi B``; only ever wraps a base pretype."""

    base: Base

    def __post_init__(self):
        if not isinstance(self.base, Base):
            raise ValueError("hi applies only to base pretypes")

    def __str__(self) -> str:
        return f"hi {self.base}"


PseudoType = Union[Type, Hidden]


def type_is_q(q: Q, t: PseudoType) -> bool:
    if isinstance(t, Hidden):
        return True
    return qualifier_leq(q, t.q)


def ctx_is_q(q: Q, ctx: Union["TypeContext", Iterable[Tuple[str, PseudoType]]]) -> bool:
    return all(type_is_q(q, t) for _, t in ctx)


def is_base(t: PseudoType) -> bool:
    return isinstance(t, Type) and isinstance(t.pre, Base)


class TypeContext:
    """Ordered bindings ``x : pseudotype`` with each variable bound at most once."""

    __slots__ = ("bindings", "_index")

    def __init__(self, bindings: Iterable[Tuple[str, PseudoType]] = ()):
        self.bindings: Tuple[Tuple[str, PseudoType], ...] = tuple(bindings)
        self._index = {}
        for x, t in self.bindings:
            if x in self._index:
                raise ValueError(f"variable {x!r} appears twice in context")
            self._index[x] = t

    def __iter__(self) -> Iterator[Tuple[str, PseudoType]]:
        return iter(self.bindings)

    def __len__(self) -> int:
        return len(self.bindings)

    def __contains__(self, x: str) -> bool:
        return x in self._index

    def __getitem__(self, x: str) -> PseudoType:
        return self._index[x]

    def get(self, x: str, default=None):
        return self._index.get(x, default)

    def __eq__(self, other) -> bool:
        return isinstance(other, TypeContext) and self.bindings == other.bindings

    def __hash__(self) -> int:
        return hash(self.bindings)

    def extend(self, x: str, t: PseudoType) -> "TypeContext":
        return TypeContext(self.bindings + ((x, t),))

    def as_dict(self) -> dict:
        return dict(self.bindings)

    def __repr__(self) -> str:
        inner = ", ".join(f"{x}: {t}" for x, t in self.bindings)
        return f"[{inner}]"


# ---------------------------------------------------------------- signatures


@dataclass(frozen=True)
class OperatorType:
    inputs: Tuple[PseudoType, ...]
    output: Type

    def __post_init__(self):
        for t in self.inputs:
            if isinstance(t, Type) and t.q is HI:  # pragma: no cover - Type rejects it
                raise ValueError("use Hidden for hi inputs")

    @property
    def arity(self) -> int:
        return len(self.inputs)

    @property
    def pseudoqualifiers(self) -> Tuple[Q, ...]:
        return tuple(HI if isinstance(t, Hidden) else t.q for t in self.inputs)

    def __str__(self) -> str:
        from .surface import show_optype

        return show_optype(self)


@dataclass(frozen=True)
class SigEntry:
    name: str
    optype: OperatorType
    key: str


class QualifiedSignature:
    """Operator typings in order of appearance; entries are addressed 1-based."""

    def __init__(self, entries: Iterable[SigEntry] = ()):
        self.entries: Tuple[SigEntry, ...] = tuple(entries)
        self._by_name: dict = {}
        for i, e in enumerate(self.entries, start=1):
            self._by_name.setdefault(e.name, []).append(i)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, index: int) -> SigEntry:
        if index < 1:
            raise IndexError(index)
        return self.entries[index - 1]

    def __eq__(self, other) -> bool:
        return isinstance(other, QualifiedSignature) and self.entries == other.entries

    def names(self) -> set:
        return set(self._by_name)

    def candidates(self, name: str, arity: int) -> list:
        """Distinct entry indices for ``name`` with the given arity (duplicates collapsed)."""
        seen = set()
        out = []
        for i in self._by_name.get(name, ()):
            e = self.entries[i - 1]
            if e.optype.arity != arity or (e.optype, e.key) in seen:
                continue
            seen.add((e.optype, e.key))
            out.append(i)
        return out

    def add(self, entry: SigEntry) -> "QualifiedSignature":
        return QualifiedSignature(self.entries + (entry,))


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class ArrayRange:
    """Symbolic inclusive integer range ``{lo .. hi}``; bounds are ints or ``(param, offset)``."""

    lo: Union[int, Tuple[str, int]]
    hi: Union[int, Tuple[str, int]]

    def expand(self, params: Mapping[str, int]) -> Tuple[int, ...]:
        lo, hi = (_bound(b, params) for b in (self.lo, self.hi))
        step = 1 if hi >= lo else -1
        return tuple(range(lo, hi + step, step))


def _bound(b, params) -> int:
    if isinstance(b, int):
        return b
    name, off = b
    if name not in params:
        raise KeyError(f"unknown parameter {name!r}")
    return params[name] + off


LitValue = Union[int, bool, Tuple[int, ...], ArrayRange]


def _pos():
    return field(default=None, compare=False, repr=False, kw_only=True)


class Expr:
    __slots__ = ()

    def __str__(self) -> str:
        from .surface import show_expr

        return show_expr(self)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class Op(Expr):
    """Operator occurrence; ``index`` is the 1-based signature entry once resolved."""

    name: str
    args: Tuple[Expr, ...]
    index: Optional[int] = None
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class Lit(Expr):
    q: Q
    value: LitValue
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class TupleE(Expr):
    q: Q
    items: Tuple[Expr, ...]
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class Lam(Expr):
    q: Q
    param: str
    ptype: Type
    body: Expr
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class Split(Expr):
    expr: Expr
    pattern: Tuple[str, ...]
    body: Expr
    pos: Optional[tuple] = _pos()

    def __post_init__(self):
        if len(set(self.pattern)) != len(self.pattern):
            raise ValueError("pattern variables must be pairwise distinct")


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    else_: Expr
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class Let(Expr):
    name: str
    bound: Expr
    body: Expr
    ann: Optional[Type] = None
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class Nil(Expr):
    q: Q
    elem: Optional[Type] = None
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class Cons(Expr):
    q: Q
    head: Expr
    tail: Expr
    pos: Optional[tuple] = _pos()


@dataclass(frozen=True)
class Case(Expr):
    scrut: Expr
    nil_branch: Expr
    head: str
    tail: str
    cons_branch: Expr
    pos: Optional[tuple] = _pos()

    def __post_init__(self):
        if self.head == self.tail:
            raise ValueError("case pattern variables must be distinct")


Substitution = Mapping[str, str]


def is_value(e: Expr) -> bool:
    if isinstance(e, (Lit, Lam, Nil)):
        return True
    if isinstance(e, TupleE):
        return all(type(i) is Var for i in e.items)
    if isinstance(e, Cons):
        return type(e.head) is Var and type(e.tail) is Var
    return False


# ---------------------------------------------------------------- free variables


def free_vars(e: Expr) -> list:
    """Free variable occurrences, duplicates kept, in evaluation order."""
    out: list = []
    _fv(e, frozenset(), out)
    return out


def _fv(e: Expr, bound: frozenset, out: list) -> None:
    t = type(e)
    if t is Var:
        if e.name not in bound:
            out.append(e.name)
    elif t is Op:
        for a in e.args:
            _fv(a, bound, out)
    elif t is TupleE:
        for a in e.items:
            _fv(a, bound, out)
    elif t is App:
        _fv(e.fn, bound, out)
        _fv(e.arg, bound, out)
    elif t is Lam:
        _fv(e.body, bound | {e.param}, out)
    elif t is Split:
        _fv(e.expr, bound, out)
        _fv(e.body, bound | set(e.pattern), out)
    elif t is If:
        _fv(e.cond, bound, out)
        _fv(e.then, bound, out)
        _fv(e.else_, bound, out)
    elif t is Let:
        _fv(e.bound, bound, out)
        _fv(e.body, bound | {e.name}, out)
    elif t is Cons:
        _fv(e.head, bound, out)
        _fv(e.tail, bound, out)
    elif t is Case:
        _fv(e.scrut, bound, out)
        _fv(e.nil_branch, bound, out)
        _fv(e.cons_branch, bound | {e.head, e.tail}, out)
    # Lit, Nil: closed


def free_var_set(e: Expr) -> set:
    return set(free_vars(e))


def all_names(e: Expr) -> set:
    """Every variable name appearing in ``e``, bound or free."""
    names = set(free_vars(e))
    stack = [e]
    while stack:
        n = stack.pop()
        t = type(n)
        if t is Lam:
            names.add(n.param)
        elif t is Split:
            names.update(n.pattern)
        elif t is Let:
            names.add(n.name)
        elif t is Case:
            names.update((n.head, n.tail))
        stack.extend(children(n))
    return names


def children(e: Expr) -> list:
    t = type(e)
    if t is Op:
        return list(e.args)
    if t is TupleE:
        return list(e.items)
    if t is App:
        return [e.fn, e.arg]
    if t is Lam:
        return [e.body]
    if t is Split:
        return [e.expr, e.body]
    if t is If:
        return [e.cond, e.then, e.else_]
    if t is Let:
        return [e.bound, e.body]
    if t is Cons:
        return [e.head, e.tail]
    if t is Case:
        return [e.scrut, e.nil_branch, e.cons_branch]
    return []


def depth(e: Expr) -> int:
    cs = children(e)
    return 1 + max((depth(c) for c in cs), default=0)


# ---------------------------------------------------------------- substitution


def fresh_name(base: str, avoid: set) -> str:
    root = base.split("'", 1)[0]
    k = 1
    while f"{root}'{k}" in avoid:
        k += 1
    return f"{root}'{k}"


def apply_subst(d: Substitution, e: Expr) -> Expr:
    """Capture-avoiding variable-for-variable substitution."""
    d = {k: v for k, v in d.items() if k != v}
    if not d:
        return e
    return _subst(d, e)


def _binders(d: dict, names: Sequence[str], body_fv: set):
    """Restrict ``d`` under binders ``names`` and rename binders that would capture."""
    inner = {k: v for k, v in d.items() if k not in names}
    live = {v for k, v in inner.items() if k in body_fv}
    renames = {}
    if live & set(names):
        avoid = body_fv | set(inner) | set(inner.values()) | set(names)
        for n in names:
            if n in live:
                new = fresh_name(n, avoid)
                avoid.add(new)
                renames[n] = new
        inner.update(renames)
    return inner, renames


def _subst(d: dict, e: Expr) -> Expr:
    t = type(e)
    if t is Var:
        new = d.get(e.name)
        return e if new is None else Var(new, pos=e.pos)
    if t is Op:
        return Op(e.name, tuple(_subst(d, a) for a in e.args), e.index, pos=e.pos)
    if t is TupleE:
        return TupleE(e.q, tuple(_subst(d, a) for a in e.items), pos=e.pos)
    if t is App:
        return App(_subst(d, e.fn), _subst(d, e.arg), pos=e.pos)
    if t is Lam:
        inner, ren = _binders(d, (e.param,), free_var_set(e.body))
        if not inner:
            return e
        return Lam(e.q, ren.get(e.param, e.param), e.ptype, _subst(inner, e.body), pos=e.pos)
    if t is Split:
        head = _subst(d, e.expr)
        inner, ren = _binders(d, e.pattern, free_var_set(e.body))
        body = _subst(inner, e.body) if inner else e.body
        return Split(head, tuple(ren.get(x, x) for x in e.pattern), body, pos=e.pos)
    if t is If:
        return If(_subst(d, e.cond), _subst(d, e.then), _subst(d, e.else_), pos=e.pos)
    if t is Let:
        bound = _subst(d, e.bound)
        inner, ren = _binders(d, (e.name,), free_var_set(e.body))
        body = _subst(inner, e.body) if inner else e.body
        return Let(ren.get(e.name, e.name), bound, body, e.ann, pos=e.pos)
    if t is Cons:
        return Cons(e.q, _subst(d, e.head), _subst(d, e.tail), pos=e.pos)
    if t is Case:
        scrut = _subst(d, e.scrut)
        nil = _subst(d, e.nil_branch)
        inner, ren = _binders(d, (e.head, e.tail), free_var_set(e.cons_branch))
        cons = _subst(inner, e.cons_branch) if inner else e.cons_branch
        return Case(scrut, nil, ren.get(e.head, e.head), ren.get(e.tail, e.tail), cons, pos=e.pos)
    return e


def alpha_equiv(a: Expr, b: Expr) -> bool:
    return _alpha(a, b, {}, {})


def _alpha(a: Expr, b: Expr, ma: dict, mb: dict) -> bool:
    if type(a) is not type(b):
        return False
    t = type(a)
    if t is Var:
        la, lb = ma.get(a.name), mb.get(b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la is not None and la == lb
    if t is Lit:
        return a.q is b.q and a.value == b.value
    if t is Nil:
        return a.q is b.q and a.elem == b.elem
    if t is Op:
        return (a.name, a.index, len(a.args)) == (b.name, b.index, len(b.args)) and all(
            _alpha(x, y, ma, mb) for x, y in zip(a.args, b.args))
    if t is TupleE:
        return a.q is b.q and len(a.items) == len(b.items) and all(
            _alpha(x, y, ma, mb) for x, y in zip(a.items, b.items))
    if t is App:
        return _alpha(a.fn, b.fn, ma, mb) and _alpha(a.arg, b.arg, ma, mb)
    if t is If:
        return all(_alpha(x, y, ma, mb) for x, y in ((a.cond, b.cond), (a.then, b.then), (a.else_, b.else_)))
    if t is Cons:
        return a.q is b.q and _alpha(a.head, b.head, ma, mb) and _alpha(a.tail, b.tail, ma, mb)
    level = len(ma)

    def bind(xs, ys):
        na, nb = dict(ma), dict(mb)
        for i, (x, y) in enumerate(zip(xs, ys)):
            na[x] = nb[y] = (level, i)
        return na, nb

    if t is Lam:
        if a.q is not b.q or a.ptype != b.ptype:
            return False
        na, nb = bind([a.param], [b.param])
        return _alpha(a.body, b.body, na, nb)
    if t is Split:
        if len(a.pattern) != len(b.pattern) or not _alpha(a.expr, b.expr, ma, mb):
            return False
        na, nb = bind(a.pattern, b.pattern)
        return _alpha(a.body, b.body, na, nb)
    if t is Let:
        if a.ann != b.ann or not _alpha(a.bound, b.bound, ma, mb):
            return False
        na, nb = bind([a.name], [b.name])
        return _alpha(a.body, b.body, na, nb)
    if t is Case:
        if not (_alpha(a.scrut, b.scrut, ma, mb) and _alpha(a.nil_branch, b.nil_branch, ma, mb)):
            return False
        na, nb = bind([a.head, a.tail], [b.head, b.tail])
        return _alpha(a.cons_branch, b.cons_branch, na, nb)
    raise TypeError(f"not an expression: {a!r}")
