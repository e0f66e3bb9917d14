import dataclasses
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import NAMES, exprs
from wlt.syntax import (
    HI, INT, LI, UN, App, Case, Hidden, Lam, Let, Op, OperatorType, Split, TupleT,
    Type, TypeContext, Var, alpha_equiv, apply_subst, ctx_is_q, fresh_name, free_vars, qualifier_leq, type_is_q,
)

T = Type(UN, INT)


@pytest.mark.parametrize("a,b,want", [(LI, UN, True), (UN, UN, True), (UN, LI, False), (HI, LI, False)])
def test_qualifier_leq_examples(a, b, want):
    assert qualifier_leq(a, b) is want


def test_qualifier_leq_is_partial_order():
    qs = (LI, UN, HI)
    for a in qs:
        assert qualifier_leq(a, a)
    for a, b in itertools.product(qs, repeat=2):
        if qualifier_leq(a, b) and qualifier_leq(b, a):
            assert a is b
    for a, b, c in itertools.product(qs, repeat=3):
        if qualifier_leq(a, b) and qualifier_leq(b, c):
            assert qualifier_leq(a, c)


def test_type_and_context_qualifiers():
    assert type_is_q(LI, Type(UN, INT))
    assert not type_is_q(UN, Type(LI, INT))
    assert type_is_q(UN, Hidden(INT))
    assert ctx_is_q(UN, TypeContext())
    assert ctx_is_q(UN, TypeContext([("x", Type(UN, INT)), ("y", Hidden(INT))]))
    assert not ctx_is_q(UN, TypeContext([("x", Type(LI, INT))]))


def test_type_invariants():
    with pytest.raises(ValueError):
        Type(HI, INT)
    with pytest.raises(ValueError):
        Hidden(TupleT((T,)))
    with pytest.raises(ValueError):
        TupleT(())
    tau = OperatorType((Hidden(INT), Type(LI, INT)), Type(LI, INT))
    assert tau.pseudoqualifiers == (HI, LI) and tau.arity == 2


def test_context_rejects_duplicates():
    with pytest.raises(ValueError):
        TypeContext([("x", T), ("x", T)])
    ctx = TypeContext([("x", T)])
    with pytest.raises(ValueError):
        ctx.extend("x", T)


def test_pattern_variables_distinct():
    with pytest.raises(ValueError):
        Split(Var("p"), ("a", "a"), Var("a"))
    with pytest.raises(ValueError):
        Case(Var("p"), Var("q"), "h", "h", Var("h"))


def test_free_vars_examples():
    assert free_vars(Var("x")) == ["x"]
    assert free_vars(Lam(UN, "x", T, Var("x"))) == []
    assert free_vars(Op("+", (Var("x"), Var("x")))) == ["x", "x"]
    assert free_vars(Let("x", Var("y"), App(Var("x"), Var("z")))) == ["y", "z"]


def test_subst_examples():
    assert apply_subst({"x": "y"}, Var("x")) == Var("y")
    lam = Lam(UN, "x", T, Var("x"))
    assert apply_subst({"x": "y"}, lam) == lam
    got = apply_subst({"z": "x"}, Split(Var("z"), ("x",), Var("x")))
    assert alpha_equiv(got, Split(Var("x"), ("x'",), Var("x'")))
    # capture: the binder must move out of the way of the incoming x
    got = apply_subst({"z": "x"}, Split(Var("z"), ("x",), Op("+", (Var("x"), Var("z")))))
    assert got.expr == Var("x")
    (b,) = got.pattern
    assert b != "x" and got.body == Op("+", (Var(b), Var("x")))


def test_fresh_name():
    assert fresh_name("x", set()) == "x'1"
    assert fresh_name("x'1", {"x'1"}) == "x'2"


def rename_binders(e, counter):
    """An alpha-equivalent copy with every binder renamed apart."""
    def new():
        counter[0] += 1
        return f"b{counter[0]}"

    t = type(e)
    if t is Lam:
        y = new()
        return Lam(e.q, y, e.ptype, rename_binders(apply_subst({e.param: y}, e.body), counter))
    if t is Split:
        ys = tuple(new() for _ in e.pattern)
        body = apply_subst(dict(zip(e.pattern, ys)), e.body)
        return Split(rename_binders(e.expr, counter), ys, rename_binders(body, counter))
    if t is Let:
        y = new()
        return Let(y, rename_binders(e.bound, counter), rename_binders(apply_subst({e.name: y}, e.body), counter), e.ann)
    if t is Case:
        h, tl = new(), new()
        cons = apply_subst({e.head: h, e.tail: tl}, e.cons_branch)
        return Case(rename_binders(e.scrut, counter), rename_binders(e.nil_branch, counter), h, tl,
                    rename_binders(cons, counter))
    changes = {}
    for name in ("args", "items"):
        if hasattr(e, name):
            changes[name] = tuple(rename_binders(a, counter) for a in getattr(e, name))
    for name in ("fn", "arg", "cond", "then", "else_", "head", "tail"):
        if hasattr(e, name):
            changes[name] = rename_binders(getattr(e, name), counter)
    return dataclasses.replace(e, **changes)


subst_maps = st.dictionaries(st.sampled_from(NAMES), st.sampled_from(NAMES), max_size=3)


@settings(max_examples=300, deadline=None)
@given(exprs(), subst_maps)
def test_subst_respects_alpha_equivalence(e, d):
    e2 = rename_binders(e, [0])
    assert alpha_equiv(e, e2)
    assert alpha_equiv(apply_subst(d, e), apply_subst(d, e2))


@settings(max_examples=300, deadline=None)
@given(exprs(), st.sampled_from(NAMES), st.sampled_from(NAMES))
def test_subst_replaces_free_occurrences(e, x, y):
    out = apply_subst({x: y}, e)
    want = [y if v == x else v for v in free_vars(e)]
    assert free_vars(out) == want
