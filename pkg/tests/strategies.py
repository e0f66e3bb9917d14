"""Hypothesis strategies for expressions and types."""
from hypothesis import strategies as st

from wlt.syntax import (
    BOOL, INT, LI, UN, App, Arrow, Case, Cons, If, Lam, Let, ListT, Lit, Nil, Op, Split, TupleE, TupleT, Type, Var,
)

NAMES = ("x", "y", "z", "w")
OPS = ("+", "<", "id")
quals = st.sampled_from((LI, UN))
names = st.sampled_from(NAMES)


def types(max_depth=2):
    base = st.builds(Type, quals, st.sampled_from((INT, BOOL)))
    if max_depth == 0:
        return base
    sub = types(max_depth - 1)
    return st.one_of(
        base,
        st.builds(lambda q, items: Type(q, TupleT(tuple(items))), quals, st.lists(sub, min_size=1, max_size=3)),
        st.builds(lambda q, a, b: Type(q, Arrow(a, b)), quals, sub, sub),
        st.builds(lambda q, a: Type(q, ListT(a)), quals, sub),
    )


literals = st.one_of(st.integers(-5, 99), st.booleans(), st.lists(st.integers(0, 9), min_size=1, max_size=4).map(tuple))


def exprs(max_leaves=12):
    leaf = st.one_of(
        st.builds(Var, names),
        st.builds(Lit, quals, literals),
        st.builds(Nil, quals),
        st.builds(Nil, quals, types(1)),
    )

    def grow(sub):
        return st.one_of(
            st.builds(lambda a, b, i: Op("+", (a, b), i), sub, sub, st.sampled_from((None, 1, 2))),
            st.builds(lambda a, b: Op("<", (a, b)), sub, sub),
            st.builds(lambda a: Op("id", (a,)), sub),
            st.builds(lambda q, items: TupleE(q, tuple(items)), quals, st.lists(sub, min_size=1, max_size=3)),
            st.builds(App, sub, sub),
            st.builds(Lam, quals, names, types(1), sub),
            st.builds(lambda e, pat, b: Split(e, tuple(pat), b), sub, st.lists(names, min_size=1, max_size=3, unique=True), sub),
            st.builds(If, sub, sub, sub),
            st.builds(Let, names, sub, sub, st.one_of(st.none(), types(1))),
            st.builds(Cons, quals, sub, sub),
            st.builds(lambda s, n, ht, c: Case(s, n, ht[0], ht[1], c), sub, sub,
                      st.lists(names, min_size=2, max_size=2, unique=True), sub),
        )

    return st.recursive(leaf, grow, max_leaves=max_leaves)
