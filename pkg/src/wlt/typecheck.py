"""Split and pseudosplit relations, pseudotyping, and the algorithmic type checker.

The checker is syntax directed.  Each subterm is typed against the full context
and reports how it used every variable (unrestricted, hidden read, linear
consumption).  Multi-premise rules fold those reports in evaluation order: the
operator rule with the plain split, every other rule with the pseudosplit, which
alone lets hidden reads of a linear base variable precede its consumption.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import kernels as K
from .syntax import (
    App, Arrow, Base, BOOL, Case, Cons, Expr, HI, Hidden, If, INT, ARRAY, LI, Lam, Let, ListT,
    Lit, Nil, Op, PseudoType, Q, QualifiedSignature, Split, TupleE, TupleT, Type, TypeContext,
    UN, Var, ArrayRange, ctx_is_q, qualifier_leq, type_is_q,
)

MUTANTS = ("operator-pseudosplit", "store-qualifier-dealloc")


class Usage(enum.IntEnum):
    UNR = K.UNR
    HIDDEN = K.HIDDEN
    LINEAR = K.LINEAR


@dataclass(frozen=True)
class UsageReport:
    uses: Dict[str, Usage]
    consumed_at: Dict[str, int] = field(default_factory=dict)

    def __getitem__(self, x):
        return self.uses[x]

    def get(self, x, default=None):
        return self.uses.get(x, default)


class TypeCheckError(Exception):
    def __init__(self, rule: str, message: str, var: Optional[str] = None, pos=None):
        self.rule = rule
        self.var = var
        self.pos = pos
        self.message = message
        where = f"line {pos[0]}, col {pos[1]}: " if pos else ""
        super().__init__(f"{where}[{rule}] {message}")

    def record(self) -> dict:
        return {
            "rule": self.rule,
            "var": self.var,
            "line": self.pos[0] if self.pos else None,
            "col": self.pos[1] if self.pos else None,
            "message": self.message,
        }


class NeedsAnnotation(TypeCheckError):
    pass


_MERGE_MESSAGES = {
    K.ERR_TWICE: "linear variable {x} is consumed twice",
    K.ERR_AFTER: "linear variable {x} is read hidden after being consumed",
    K.ERR_MIXED: "operator arguments combine a hidden read and a consumption of {x}; "
                 "the operator rule splits its context with the plain split, so {x} "
                 "cannot be both hidden and linear there",
    K.ERR_KIND: "variable {x} is used with incompatible usages",
    K.ERR_BRANCH: "linear variable {x} is consumed in one branch but not the other",
}


def base_of(t: PseudoType) -> Optional[Base]:
    if isinstance(t, Hidden):
        return t.base
    if isinstance(t.pre, Base):
        return t.pre
    return None


def _lit_base(v) -> Base:
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, int):
        return INT
    if isinstance(v, (tuple, ArrayRange)):
        return ARRAY
    raise TypeError(f"bad literal {v!r}")


# ---------------------------------------------------------------- split relations

_QCODE = {LI: K.QLI, UN: K.QUN}


def _encode(t: Optional[PseudoType], pretypes: dict) -> Tuple[int, int]:
    if t is None:
        return K.ABSENT, 0
    if isinstance(t, Hidden):
        key = t.base
        q = K.QHI
    else:
        key = t.pre
        q = _QCODE[t.q]
    return q, pretypes.setdefault(key, len(pretypes) + 1)


def _subsequence_ok(part: TypeContext, order: Dict[str, int]) -> bool:
    last = -1
    for x, _ in part:
        k = order.get(x)
        if k is None or k <= last:
            return False
        last = k
    return True


def _split_relation(parts: Sequence[TypeContext], whole: TypeContext, pseudo: bool) -> bool:
    parts = [p if isinstance(p, TypeContext) else TypeContext(p) for p in parts]
    whole = whole if isinstance(whole, TypeContext) else TypeContext(whole)
    n = len(parts)
    if n == 0:
        return ctx_is_q(UN, whole)
    order = {x: i for i, (x, _) in enumerate(whole)}
    if not all(_subsequence_ok(p, order) for p in parts):
        return False
    pretypes: dict = {}
    wq, wp, pq, pp, base = [], [], [], [], []
    for x, t in whole:
        q, p = _encode(t, pretypes)
        wq.append(q)
        wp.append(p)
        base.append(base_of(t) is not None)
        for part in parts:
            q, p = _encode(part.get(x), pretypes)
            pq.append(q)
            pp.append(p)
    return K.split_ok(wq, wp, pq, pp, base, n, pseudo) < 0


def split_check(parts: Sequence[TypeContext], whole: TypeContext) -> bool:
    """Is ``parts[0] o ... o parts[n-1] = whole`` derivable?"""
    return _split_relation(parts, whole, False)


def pseudosplit_check(parts: Sequence[TypeContext], whole: TypeContext) -> bool:
    """Is the pseudosplit ``parts[0] u ... u parts[n-1] = whole`` derivable?"""
    return _split_relation(parts, whole, True)


# ---------------------------------------------------------------- checker


@dataclass
class Verdict:
    ok: bool
    type: Optional[PseudoType] = None
    report: Optional[UsageReport] = None
    expr: Optional[Expr] = None
    error: Optional[TypeCheckError] = None

    def __bool__(self):
        return self.ok


def _err(rule, message, var=None, e=None):
    return TypeCheckError(rule, message, var, getattr(e, "pos", None))


class Checker:
    """Algorithmic typing.  ``infer`` returns ``(type, usage dict, elaborated expr)``.

    Contexts are plain dicts (insertion ordered) from variable to pseudotype.
    Elaboration fills operator indices and list element types.
    """

    def __init__(self, sig: QualifiedSignature, mutants: Iterable[str] = ()):
        self.sig = sig
        self.mutants = frozenset(mutants)
        unknown = self.mutants - set(MUTANTS)
        if unknown:
            raise ValueError(f"unknown mutant(s): {', '.join(sorted(unknown))}")
        self.op_kind = K.PSEUDO if "operator-pseudosplit" in self.mutants else K.SPLIT

    # -- usage plumbing

    def merge(self, kind, reports, exprs, rule):
        acc, x, code, idx = K.merge_reports(kind, list(reports))
        if x is not None:
            raise _err(rule, _MERGE_MESSAGES[code].format(x=x), x, exprs[idx] if idx < len(exprs) else None)
        return acc

    def join(self, reports, e, rule):
        out, x, code = K.join_branches(list(reports))
        if x is not None:
            raise _err(rule, _MERGE_MESSAGES[code].format(x=x), x, e)
        return out

    @staticmethod
    def bind(ctx: dict, names, types) -> dict:
        inner = {k: v for k, v in ctx.items() if k not in names}
        for x, t in zip(names, types):
            inner[x] = t
        return inner

    def close_binders(self, rep: dict, names, types, e, rule) -> dict:
        for x, t in zip(names, types):
            u = rep.get(x)
            if t.q is LI and u != K.LINEAR:
                what = "never used" if u is None else "only read hidden, never consumed"
                raise _err(rule, f"linear variable {x} is {what}", x, e)
        return {k: v for k, v in rep.items() if k not in names}

    # -- entry point

    def infer(self, ctx: dict, e: Expr, expected: Optional[Type] = None):
        t = type(e)
        method = getattr(self, "t_" + t.__name__)
        ty, rep, el = method(ctx, e, expected)
        if expected is not None and ty != expected:
            raise _err("mismatch", f"expected {expected}, found {ty}", None, e)
        return ty, rep, el

    def t_Var(self, ctx, e, expected):
        t = ctx.get(e.name)
        if t is None:
            raise _err("var", f"unbound variable {e.name}", e.name, e)
        if isinstance(t, Hidden):
            raise _err("var", f"{e.name} : {t} may only appear as a hidden operator input", e.name, e)
        return t, {e.name: K.LINEAR if t.q is LI else K.UNR}, e

    def t_Lit(self, ctx, e, expected):
        return Type(e.q, _lit_base(e.value)), {}, e

    def pseudo_arg(self, ctx, e, want: PseudoType):
        """Pseudotyping of one operator argument against the declared input."""
        if isinstance(want, Hidden):
            if type(e) is not Var:
                raise _err("op-hidden", f"a hidden input ({want}) must be a variable", None, e)
            t = ctx.get(e.name)
            if t is None:
                raise _err("var", f"unbound variable {e.name}", e.name, e)
            if t == want or (isinstance(t, Type) and t.q is LI and t.pre == want.base):
                return want, {e.name: K.HIDDEN}, e
            raise _err("op-hidden", f"{e.name} : {t} cannot be read as {want}", e.name, e)
        return self.infer(ctx, e, want)

    def t_Op(self, ctx, e, expected):
        n = len(e.args)
        if e.index is not None:
            if not 1 <= e.index <= len(self.sig):
                raise _err("op", f"signature has no entry {e.index}", None, e)
            entry = self.sig[e.index]
            if entry.name != e.name or entry.optype.arity != n:
                raise _err("op", f"signature entry {e.index} is {entry.name}/{entry.optype.arity}, "
                                 f"not {e.name}/{n}", None, e)
            cands = [e.index]
        else:
            cands = self.sig.candidates(e.name, n)
            if not cands:
                raise _err("op", f"no operator {e.name} of arity {n} in the signature", None, e)
        fits, errors = [], []
        for i in cands:
            tau = self.sig[i].optype
            if expected is not None and tau.output != expected:
                errors.append(_err("mismatch", f"expected {expected}, {e.name}@{i} yields {tau.output}", None, e))
                continue
            try:
                fits.append(self.op_with(ctx, e, i))
            except NeedsAnnotation:
                raise
            except TypeCheckError as err:
                errors.append(err)
        if len(fits) == 1:
            return fits[0]
        if not fits:
            if len(errors) == 1:
                raise errors[0]
            real = [x for x in errors if x.rule != "mismatch"]
            raise real[0] if real else errors[0]
        distinct = {f[0] for f in fits}
        which = ", ".join(f"@{f[2].index}" for f in fits)
        raise _err("op-ambiguous", f"{e.name} is ambiguous here ({which} fit"
                   + (f", yielding {len(distinct)} different types" if len(distinct) > 1 else "")
                   + "); annotate the occurrence", None, e)

    def op_with(self, ctx, e, index):
        tau = self.sig[index].optype
        reps, args = [], []
        for a, want in zip(e.args, tau.inputs):
            _, rep, el = self.pseudo_arg(ctx, a, want)
            reps.append(rep)
            args.append(el)
        rep = self.merge(self.op_kind, reps, e.args, "op")
        return tau.output, rep, Op(e.name, tuple(args), index, pos=e.pos)

    def t_TupleE(self, ctx, e, expected):
        wants = [None] * len(e.items)
        if expected is not None and isinstance(expected.pre, TupleT) and len(expected.pre.items) == len(e.items):
            wants = list(expected.pre.items)
        types, reps, items = [], [], []
        for a, w in zip(e.items, wants):
            t, rep, el = self.infer(ctx, a, w)
            if not type_is_q(e.q, t):
                raise _err("tuple", f"component {el} : {t} violates {e.q}(T) in a {e.q} tuple", None, a)
            types.append(t)
            reps.append(rep)
            items.append(el)
        rep = self.merge(K.PSEUDO, reps, e.items, "tuple")
        return Type(e.q, TupleT(tuple(types))), rep, TupleE(e.q, tuple(items), pos=e.pos)

    def t_App(self, ctx, e, expected):
        ft, frep, fel = self.infer(ctx, e.fn)
        if not isinstance(ft.pre, Arrow):
            raise _err("app", f"applying a non-function of type {ft}", None, e.fn)
        at, arep, ael = self.infer(ctx, e.arg, ft.pre.dom)
        rep = self.merge(K.PSEUDO, [frep, arep], [e.fn, e.arg], "app")
        return ft.pre.cod, rep, App(fel, ael, pos=e.pos)

    def t_Lam(self, ctx, e, expected):
        inner = self.bind(ctx, [e.param], [e.ptype])
        bt, brep, bel = self.infer(inner, e.body)
        rep = self.close_binders(brep, [e.param], [e.ptype], e, "lambda")
        if e.q is UN:
            for x, u in rep.items():
                if u == K.LINEAR:
                    raise _err("lambda", f"unrestricted function captures linear variable {x}", x, e)
        return Type(e.q, Arrow(e.ptype, bt)), rep, Lam(e.q, e.param, e.ptype, bel, pos=e.pos)

    def t_Split(self, ctx, e, expected):
        st, srep, sel = self.infer(ctx, e.expr)
        if not isinstance(st.pre, TupleT) or len(st.pre.items) != len(e.pattern):
            raise _err("spl", f"cannot split {st} with a {len(e.pattern)}-pattern", None, e.expr)
        comps = st.pre.items
        inner = self.bind(ctx, e.pattern, comps)
        bt, brep, bel = self.infer(inner, e.body, expected)
        brep = self.close_binders(brep, e.pattern, comps, e, "spl")
        rep = self.merge(K.PSEUDO, [srep, brep], [e.expr, e.body], "spl")
        return bt, rep, Split(sel, e.pattern, bel, pos=e.pos)

    def branches(self, ctx_pairs, expected, rule, e):
        """Type branch bodies (possibly under different binders) to one common type."""
        results = [None] * len(ctx_pairs)
        order = list(range(len(ctx_pairs)))
        want = expected
        pending = []
        for k in order:
            c, body = ctx_pairs[k]
            try:
                results[k] = self.infer(c, body, want)
                if want is None:
                    want = results[k][0]
            except NeedsAnnotation:
                pending.append(k)
        for k in pending:
            if want is None:
                raise NeedsAnnotation(rule, "cannot determine the branch type; annotate the empty list",
                                      None, ctx_pairs[k][1].pos)
            c, body = ctx_pairs[k]
            results[k] = self.infer(c, body, want)
        t0 = results[0][0]
        for r, (_, body) in zip(results[1:], ctx_pairs[1:]):
            if r[0] != t0:
                raise _err(rule, f"branches have different types {t0} and {r[0]}", None, body)
        return t0, results

    def t_If(self, ctx, e, expected):
        ct, crep, cel = self.infer(ctx, e.cond)
        if ct.pre != BOOL:
            raise _err("if", f"condition has type {ct}, not a boolean", None, e.cond)
        t, res = self.branches([(ctx, e.then), (ctx, e.else_)], expected, "if", e)
        joined = self.join([r[1] for r in res], e, "if")
        rep = self.merge(K.PSEUDO, [crep, joined], [e.cond, e], "if")
        return t, rep, If(cel, res[0][2], res[1][2], pos=e.pos)

    def t_Let(self, ctx, e, expected):
        bt, brep, bel = self.infer(ctx, e.bound, e.ann)
        inner = self.bind(ctx, [e.name], [bt])
        t, rep2, el2 = self.infer(inner, e.body, expected)
        rep2 = self.close_binders(rep2, [e.name], [bt], e, "let")
        rep = self.merge(K.PSEUDO, [brep, rep2], [e.bound, e.body], "let")
        return t, rep, Let(e.name, bel, el2, e.ann, pos=e.pos)

    def t_Nil(self, ctx, e, expected):
        if e.elem is not None:
            return Type(e.q, ListT(e.elem)), {}, e
        if expected is not None and isinstance(expected.pre, ListT) and expected.q is e.q:
            return expected, {}, Nil(e.q, expected.pre.elem, pos=e.pos)
        if expected is not None:
            raise _err("mismatch", f"expected {expected}, found a {e.q} list", None, e)
        raise NeedsAnnotation("nil", "element type of the empty list is unknown; write `q [] :: T`", None, e.pos)

    def t_Cons(self, ctx, e, expected):
        want = None
        if expected is not None and isinstance(expected.pre, ListT):
            want = expected.pre.elem
        ht, hrep, hel = self.infer(ctx, e.head, want)
        if not type_is_q(e.q, ht):
            raise _err("cons", f"element {hel} : {ht} violates {e.q}(T) in a {e.q} list", None, e.head)
        tt, trep, tel = self.infer(ctx, e.tail, Type(e.q, ListT(ht)))
        rep = self.merge(K.PSEUDO, [hrep, trep], [e.head, e.tail], "cons")
        return tt, rep, Cons(e.q, hel, tel, pos=e.pos)

    def t_Case(self, ctx, e, expected):
        st, srep, sel = self.infer(ctx, e.scrut)
        if not isinstance(st.pre, ListT):
            raise _err("case", f"case scrutinee has type {st}, not a list", None, e.scrut)
        zt = (st.pre.elem, st)
        inner = self.bind(ctx, [e.head, e.tail], zt)
        t, res = self.branches([(ctx, e.nil_branch), (inner, e.cons_branch)], expected, "case", e)
        crep = self.close_binders(res[1][1], [e.head, e.tail], zt, e, "case")
        joined = self.join([res[0][1], crep], e, "case")
        rep = self.merge(K.PSEUDO, [srep, joined], [e.scrut, e], "case")
        return t, rep, Case(sel, res[0][2], e.head, e.tail, res[1][2], pos=e.pos)


def check_closed(checker: Checker, ctx: dict, e: Expr, expected=None, flexible: FrozenSet[str] = frozenset()):
    """Type ``e`` under ``ctx`` and demand every linear entry be consumed.

    Names in ``flexible`` are linear base entries that may instead be read
    hidden or left unused (the store may present them as hidden).
    """
    t, rep, el = checker.infer(ctx, e, expected)
    for x, ty in ctx.items():
        if isinstance(ty, Type) and ty.q is LI and x not in flexible and rep.get(x) != K.LINEAR:
            what = "never used" if x not in rep else "only read hidden, never consumed"
            raise TypeCheckError("linear", f"linear variable {x} is {what}", x, getattr(e, "pos", None))
    return t, rep, el


def _as_dict(ctx) -> dict:
    if isinstance(ctx, TypeContext):
        return ctx.as_dict()
    return dict(ctx)


def type_of(ctx, sig: QualifiedSignature, e: Expr, expected: Optional[Type] = None,
            mutants: Iterable[str] = ()) -> Verdict:
    """Typing judgment ``ctx |- e : T`` as a verdict (never raises on ill-typed input)."""
    checker = Checker(sig, mutants)
    try:
        t, rep, el = check_closed(checker, _as_dict(ctx), e, expected)
    except TypeCheckError as err:
        return Verdict(False, error=err)
    return Verdict(True, t, UsageReport({x: Usage(u) for x, u in rep.items()}), el)


def pseudo_type_of(ctx, sig: QualifiedSignature, e: Expr, expected: PseudoType,
                   mutants: Iterable[str] = ()) -> Verdict:
    """Pseudotyping of an operator argument: a hidden variable needs an unrestricted residue."""
    checker = Checker(sig, mutants)
    d = _as_dict(ctx)
    try:
        if isinstance(expected, Hidden):
            t, rep, el = checker.pseudo_arg(d, e, expected)
            for x, ty in d.items():
                if x != getattr(e, "name", None) and not type_is_q(UN, ty):
                    raise TypeCheckError("op-hidden", f"{x} : {ty} is left unused beside the hidden read",
                                         x, getattr(e, "pos", None))
        else:
            t, rep, el = check_closed(checker, d, e, expected)
    except TypeCheckError as err:
        return Verdict(False, error=err)
    return Verdict(True, t, UsageReport({x: Usage(u) for x, u in rep.items()}), el)


def merge_usages(kind: str, reports: Sequence[UsageReport]) -> UsageReport:
    """Combine premise reports; ``kind`` is ``split``, ``pseudosplit`` or ``branch``."""
    dicts = [{x: int(u) for x, u in r.uses.items()} for r in reports]
    if kind == "branch":
        out, x, code = K.join_branches(dicts)
    elif kind in ("split", "pseudosplit"):
        out, x, code, _ = K.merge_reports(K.SPLIT if kind == "split" else K.PSEUDO, dicts)
    else:
        raise ValueError(f"unknown merge kind {kind!r}")
    if x is not None:
        raise TypeCheckError(kind, _MERGE_MESSAGES[code].format(x=x), x)
    consumed = {}
    for k, r in enumerate(reports):
        for v, u in r.uses.items():
            if u == Usage.LINEAR:
                consumed[v] = k
    return UsageReport({v: Usage(u) for v, u in out.items()}, consumed)


def elaborate(sig: QualifiedSignature, ctx, e: Expr, mutants: Iterable[str] = ()) -> Expr:
    """Resolve operator occurrences and list element types; raises TypeCheckError."""
    return check_closed(Checker(sig, mutants), _as_dict(ctx), e)[2]
