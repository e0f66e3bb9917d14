"""Explicit declarative derivations rebuilt from the algorithmic checker.

``derive`` turns a successful check into a tree whose nodes carry the exact
context of each judgment.  Premise contexts are cut from the usage reports: un
and hidden entries go everywhere, a consumed linear entry goes to its consuming
premise, and a linear base entry read hidden before its consumption appears as
``hi B`` in every earlier premise.  ``validate`` then re-checks every node
against the rules with ``split_check``/``pseudosplit_check`` and the leaf side
conditions, sharing nothing with the usage merging that produced the verdict.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import kernels as K
from .syntax import (
    App, Arrow, BOOL, Case, Cons, Expr, Hidden, If, LI, Lam, Let, ListT, Lit, Nil, Op, PseudoType,
    QualifiedSignature, Split, TupleE, TupleT, Type, TypeContext, UN, Var, all_names, apply_subst,
    ctx_is_q, fresh_name, type_is_q,
)
from .typecheck import Checker, TypeCheckError, _lit_base, check_closed, pseudosplit_check, split_check


@dataclass
class Derivation:
    rule: str
    context: Tuple[Tuple[str, PseudoType], ...]
    expr: Expr
    type: PseudoType
    premises: List["Derivation"] = field(default_factory=list)
    binders: Tuple[Tuple[Tuple[str, PseudoType], ...], ...] = ()  # per premise, names bound by the rule

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)


class DerivationError(Exception):
    pass


def _without(ctx: Dict[str, PseudoType], names) -> Dict[str, PseudoType]:
    return {k: v for k, v in ctx.items() if k not in names}


class _Builder:
    def __init__(self, sig: QualifiedSignature):
        self.checker = Checker(sig)
        self.sig = sig

    def usage(self, ctx, e, expected=None):
        return self.checker.infer(ctx, e, expected)

    def parts(self, ctx: Dict[str, PseudoType], reports: Sequence[dict], pseudo: bool) -> List[Dict[str, PseudoType]]:
        n = len(reports)
        out = [dict() for _ in range(n)]
        for x, t in ctx.items():
            if isinstance(t, Hidden) or t.q is UN:
                for p in out:
                    p[x] = t
                continue
            users = [i for i, r in enumerate(reports) if r.get(x) == K.LINEAR]
            if len(users) != 1:
                raise DerivationError(f"linear {x} is consumed by {len(users)} premises")
            j = users[0]
            out[j][x] = t
            hidden_before = any(reports[i].get(x) == K.HIDDEN for i in range(j))
            if pseudo and hidden_before:
                for i in range(j):
                    out[i][x] = Hidden(t.pre)
        # keep every part in the order of the whole
        order = list(ctx)
        return [{x: p[x] for x in order if x in p} for p in out]

    def freshen(self, ctx, e: Expr) -> Expr:
        """Rename binders of ``e`` that clash with ``ctx`` (rules assume fresh binders)."""
        te = type(e)
        avoid = set(ctx) | set(all_names(e))
        def rn(x, body, *more):
            if x not in ctx:
                return x, body, more
            y = fresh_name(x, avoid)
            avoid.add(y)
            return y, apply_subst({x: y}, body), tuple(apply_subst({x: y}, m) for m in more)
        if te is Lam:
            x, body, _ = rn(e.param, e.body)
            return Lam(e.q, x, e.ptype, body, pos=e.pos)
        if te is Let:
            x, body, _ = rn(e.name, e.body)
            return Let(x, e.bound, body, e.ann, pos=e.pos)
        if te is Split:
            pat, body = list(e.pattern), e.body
            for k, x in enumerate(pat):
                pat[k], body, _ = rn(x, body)
            return Split(e.expr, tuple(pat), body, pos=e.pos)
        if te is Case:
            h, body, _ = rn(e.head, e.cons_branch)
            t, body, _ = rn(e.tail, body)
            return Case(e.scrut, e.nil_branch, h, t, body, pos=e.pos)
        return e

    def build(self, ctx: Dict[str, PseudoType], e: Expr, expected=None) -> Derivation:
        e = self.freshen(ctx, e)
        t, rep, _ = self.usage(ctx, e, expected)
        te = type(e)
        C = tuple(ctx.items())
        if te is Var:
            return Derivation("var", C, e, t)
        if te is Lit:
            return Derivation("const", C, e, t)
        if te is Nil:
            return Derivation("nil", C, e, t)
        if te is Op:
            tau = self.sig[e.index].optype
            reps = [self.checker.pseudo_arg(ctx, a, w)[1] for a, w in zip(e.args, tau.inputs)]
            parts = self.parts(ctx, reps, pseudo=False)
            prem = [self.pseudo(p, a, w) for p, a, w in zip(parts, e.args, tau.inputs)]
            return Derivation("op", C, e, t, prem)
        if te is Lam:
            inner = dict(_without(ctx, [e.param]), **{e.param: e.ptype})
            return Derivation("lambda", C, e, t, [self.build(inner, e.body)], (((e.param, e.ptype),),))
        if te is TupleE:
            items = t.pre.items
            reps = [self.usage(ctx, a, w)[1] for a, w in zip(e.items, items)]
            parts = self.parts(ctx, reps, pseudo=True)
            return Derivation("tuple", C, e, t, [self.build(p, a, w) for p, a, w in zip(parts, e.items, items)])
        if te is App:
            ft, frep, _ = self.usage(ctx, e.fn)
            _, arep, _ = self.usage(ctx, e.arg, ft.pre.dom)
            p0, p1 = self.parts(ctx, [frep, arep], pseudo=True)
            return Derivation("app", C, e, t, [self.build(p0, e.fn, ft), self.build(p1, e.arg, ft.pre.dom)])
        if te is Split:
            st, srep, _ = self.usage(ctx, e.expr)
            binds = tuple(zip(e.pattern, st.pre.items))
            brep = self._body_report(ctx, binds, e.body, t)
            p0, p1 = self.parts(ctx, [srep, brep], pseudo=True)
            inner = dict(_without(p1, e.pattern), **dict(binds))
            return Derivation("spl", C, e, t, [self.build(p0, e.expr, st), self.build(inner, e.body, t)],
                              ((), binds))
        if te is Let:
            bt, brep, _ = self.usage(ctx, e.bound, e.ann)
            binds = ((e.name, bt),)
            rep2 = self._body_report(ctx, binds, e.body, t)
            p0, p1 = self.parts(ctx, [brep, rep2], pseudo=True)
            inner = dict(_without(p1, [e.name]), **{e.name: bt})
            return Derivation("let", C, e, t, [self.build(p0, e.bound, bt), self.build(inner, e.body, t)],
                              ((), binds))
        if te is If:
            _, crep, _ = self.usage(ctx, e.cond)
            r1 = self.usage(ctx, e.then, t)[1]
            r2 = self.usage(ctx, e.else_, t)[1]
            joined = self.checker.join([r1, r2], e, "if")
            p0, p1 = self.parts(ctx, [crep, joined], pseudo=True)
            ct = self.usage(ctx, e.cond)[0]
            return Derivation("if", C, e, t, [self.build(p0, e.cond, ct), self.build(p1, e.then, t),
                                             self.build(p1, e.else_, t)])
        if te is Cons:
            ht, hrep, _ = self.usage(ctx, e.head, t.pre.elem)
            _, trep, _ = self.usage(ctx, e.tail, t)
            p0, p1 = self.parts(ctx, [hrep, trep], pseudo=True)
            return Derivation("cons", C, e, t, [self.build(p0, e.head, ht), self.build(p1, e.tail, t)])
        if te is Case:
            st, srep, _ = self.usage(ctx, e.scrut)
            binds = ((e.head, st.pre.elem), (e.tail, st))
            r1 = self.usage(ctx, e.nil_branch, t)[1]
            r2 = self._body_report(ctx, binds, e.cons_branch, t)
            joined = self.checker.join([r1, r2], e, "case")
            p0, p1 = self.parts(ctx, [srep, joined], pseudo=True)
            inner = dict(_without(p1, [e.head, e.tail]), **dict(binds))
            return Derivation("case", C, e, t, [self.build(p0, e.scrut, st), self.build(p1, e.nil_branch, t),
                                               self.build(inner, e.cons_branch, t)], ((), (), binds))
        raise DerivationError(f"no rule for {te.__name__}")

    def _body_report(self, ctx, binds, body, t):
        names = [x for x, _ in binds]
        inner = dict(_without(ctx, names), **dict(binds))
        rep = self.usage(inner, body, t)[1]
        return {k: v for k, v in rep.items() if k not in names}

    def pseudo(self, ctx: Dict[str, PseudoType], e: Expr, want: PseudoType) -> Derivation:
        if isinstance(want, Hidden):
            return Derivation("hidden-arg", tuple(ctx.items()), e, want)
        return self.build(ctx, e, want)


def derive(sig: QualifiedSignature, ctx, e: Expr, expected=None) -> Derivation:
    """Reconstruct a derivation of ``ctx |- e : T``; raises TypeCheckError if ``e`` is ill-typed."""
    d = ctx.as_dict() if isinstance(ctx, TypeContext) else dict(ctx)
    _, _, el = check_closed(Checker(sig), d, e, expected)
    return _Builder(sig).build(d, el, expected)


# ---------------------------------------------------------------- validation


def _ctx(pairs) -> TypeContext:
    return TypeContext(pairs)


def _strip(premise: Derivation, binds) -> TypeContext:
    """The part of a premise context contributed by the conclusion (binders removed)."""
    names = {x for x, _ in binds}
    for x, t in binds:
        if dict(premise.context).get(x) != t:
            raise DerivationError(f"binder {x} : {t} missing from premise context")
    return _ctx([(x, t) for x, t in premise.context if x not in names])


def validate(d: Derivation, sig: QualifiedSignature) -> None:
    """Raise DerivationError unless every node is an instance of its rule."""
    C = _ctx(d.context)
    e = d.expr
    prem = d.premises

    def need(cond, what):
        if not cond:
            raise DerivationError(f"{d.rule} at {type(e).__name__}: {what}")

    def parts_ok(parts, pseudo):
        fn = pseudosplit_check if pseudo else split_check
        need(fn(parts, C), ("pseudosplit" if pseudo else "split") + " of the context fails")

    if d.rule == "var":
        need(type(e) is Var, "not a variable")
        t = C.get(e.name)
        need(isinstance(t, Type) and t == d.type, "variable type")
        need(ctx_is_q(UN, _ctx([(x, u) for x, u in C if x != e.name])), "other entries must be unrestricted")
    elif d.rule == "const":
        need(d.type == Type(e.q, _lit_base(e.value)), "constant type")
        need(ctx_is_q(UN, C), "context must be unrestricted")
    elif d.rule == "nil":
        need(d.type.q is e.q and isinstance(d.type.pre, ListT), "nil type")
        need(ctx_is_q(UN, C), "context must be unrestricted")
    elif d.rule == "hidden-arg":
        need(type(e) is Var and C.get(e.name) == d.type and isinstance(d.type, Hidden), "hidden argument")
        need(ctx_is_q(UN, _ctx([(x, u) for x, u in C if x != e.name])), "residue must be unrestricted")
    elif d.rule == "op":
        tau = sig[e.index].optype
        need(d.type == tau.output and len(prem) == tau.arity, "operator type")
        for p, want in zip(prem, tau.inputs):
            need(p.type == want, "argument pseudotype")
        if tau.arity == 0:
            need(ctx_is_q(UN, C), "nullary operator needs an unrestricted context")
        else:
            parts_ok([_ctx(p.context) for p in prem], False)
    elif d.rule == "lambda":
        (body,) = prem
        need(ctx_is_q(e.q, C), f"{e.q} closure over a context violating {e.q}(ctx)")
        need(_strip(body, d.binders[0]) == C, "body context")
        need(d.type == Type(e.q, Arrow(e.ptype, body.type)), "lambda type")
    elif d.rule == "tuple":
        need(all(type_is_q(e.q, p.type) for p in prem), "component qualifier")
        need(d.type == Type(e.q, TupleT(tuple(p.type for p in prem))), "tuple type")
        parts_ok([_ctx(p.context) for p in prem], True)
    elif d.rule == "app":
        f, a = prem
        need(isinstance(f.type.pre, Arrow) and f.type.pre.dom == a.type and f.type.pre.cod == d.type, "application types")
        parts_ok([_ctx(f.context), _ctx(a.context)], True)
    elif d.rule in ("spl", "let"):
        s, body = prem
        if d.rule == "spl":
            need(isinstance(s.type.pre, TupleT) and tuple(t for _, t in d.binders[1]) == s.type.pre.items, "pattern types")
        else:
            need(d.binders[1] == ((e.name, s.type),), "let binder")
        need(body.type == d.type, "body type")
        parts_ok([_ctx(s.context), _strip(body, d.binders[1])], True)
    elif d.rule == "if":
        c, a, b = prem
        need(c.type.pre == BOOL, "condition type")
        need(a.context == b.context, "branches share their context")
        need(a.type == b.type == d.type, "branch types")
        parts_ok([_ctx(c.context), _ctx(a.context)], True)
    elif d.rule == "cons":
        h, t = prem
        need(type_is_q(e.q, h.type) and t.type == Type(e.q, ListT(h.type)) == d.type, "cons types")
        parts_ok([_ctx(h.context), _ctx(t.context)], True)
    elif d.rule == "case":
        s, nil_b, cons_b = prem
        need(isinstance(s.type.pre, ListT), "scrutinee type")
        need(d.binders[2] == ((e.head, s.type.pre.elem), (e.tail, s.type)), "case binders")
        need(_strip(cons_b, d.binders[2]) == _ctx(nil_b.context), "branches share their context")
        need(nil_b.type == cons_b.type == d.type, "branch types")
        parts_ok([_ctx(s.context), _ctx(nil_b.context)], True)
    else:
        raise DerivationError(f"unknown rule {d.rule}")
    for p in prem:
        validate(p, sig)


def check_derivable(sig: QualifiedSignature, ctx, e: Expr, expected=None) -> Derivation:
    """Derive and validate; returns the derivation."""
    d = derive(sig, ctx, e, expected)
    validate(d, sig)
    return d
