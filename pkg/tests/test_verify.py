import pytest

from wlt import corpus
from wlt.machine import Configuration, Const, Machine, PrimitiveTable, Store, TupleCells, Value
from wlt.surface import parse_expr
from wlt.syntax import INT, LI, UN, Hidden, TupleT, Type, TypeContext
from wlt.verify import (
    Verifier, config_check, gen_signature, generate_well_typed, load_program, owner_violations, preservation_run,
    preservation_suite, progress_suite, store_typing_check, well_typing_violations,
)

GEN = gen_signature()
LINT = Type(LI, INT)


def li(w):
    return Value(LI, w)


def test_store_typing_examples():
    assert store_typing_check(Store(), TypeContext(), GEN)
    s = Store([("x", li(Const(3)))])
    assert store_typing_check(s, TypeContext([("x", Hidden(INT))]), GEN)
    assert store_typing_check(s, TypeContext([("x", LINT)]), GEN)
    assert not store_typing_check(s, TypeContext([("x", Type(UN, INT))]), GEN)
    s = Store([("x", li(Const(3))), ("y", li(TupleCells(("x",))))])
    assert store_typing_check(s, TypeContext([("y", Type(LI, TupleT((LINT,))))]), GEN)  # x consumed by y
    assert not store_typing_check(s, TypeContext([("x", LINT), ("y", Type(LI, TupleT((LINT,))))]), GEN)


@pytest.mark.parametrize("name", list(corpus.PROGRAMS))
def test_corpus_configurations_check(name):
    verdict, _, raw = load_program(corpus.load(name))
    assert verdict.ok
    assert config_check(raw, corpus.load(name).signature).ok


def test_counterexample_configuration_fails():
    p = corpus.load("counterexample")
    verdict, _, raw = load_program(p)
    assert not verdict.ok and verdict.error.var == "x"
    assert not config_check(raw, p.signature).ok


def test_closed_value():
    assert config_check(Configuration(Store(), parse_expr("li 3")), GEN).ok


def test_preservation_passes_on_fib():
    r = preservation_suite(corpus.load("fib"), "fib", 4)
    assert r.verdict == "pass" and r.steps_checked > 20


def test_preservation_detects_dealloc_mutant():
    r = preservation_suite(corpus.load("fib"), "fib", 4, mutants=["store-qualifier-dealloc"])
    assert r.verdict == "violation" and r.rule == "eop"


def test_preservation_refuses_ill_typed_start():
    r = preservation_suite(corpus.load("counterexample"), "counterexample")
    assert r.verdict == "refused" and r.steps_checked == 0


def test_operator_mutant_accepts_then_breaks():
    p = corpus.load("counterexample")
    verdict, _, _ = load_program(p, mutants=["operator-pseudosplit"])
    assert verdict.ok
    r = preservation_suite(p, "counterexample", mutants=["operator-pseudosplit"])
    assert r.verdict == "violation" and r.step == 1


def test_hidden_capture_gap():
    """A closure reading a linear base cell hidden, built before that cell is consumed.

    The start is well typed, but once the closure is stored the cell must be
    hidden for the closure and linear for the application at the same time.
    The run itself completes; only the typing of the intermediate
    configuration is lost.
    """
    s = Store([("s0", li(Const(False))), ("s1", li(Const(0)))])
    c = Configuration(s, parse_expr("(li \\b: li int. b -@4 s1) s1", ops=GEN.names()))
    start = config_check(c, GEN)
    assert start.ok and start.type == LINT
    m = Machine(GEN, PrimitiveTable())
    r = preservation_run(start.config, GEN, m, fuel=100)
    assert r.verdict == "violation" and r.step == 1 and "s1" in r.message
    assert m.run(start.config).status == "terminal"


@pytest.mark.parametrize("name,n", [("fib", 3), ("map", 3), ("mapa", 3), ("sort", 3)])
def test_store_invariants_along_traces(name, n):
    p = corpus.load(name)
    verdict, machine, _ = load_program(p, {"n": n})
    ver = Verifier(p.signature)
    c = verdict.config.copy()
    while not c.is_terminal():
        machine.step_in_place(c)
        v = ver.check(c)
        assert v.ok
        ctx = TypeContext(v.context)
        assert well_typing_violations(c.store, ctx) == []
        assert owner_violations(c.store, v) == []
        for x, t in ctx:  # hidden entries point at linear base constants
            if isinstance(t, Hidden):
                assert c.store[x].q is LI and type(c.store[x].w) is Const


def test_progress_on_map():
    r = preservation_suite(corpus.load("map"), "map", 3, keep_configs=True)
    _, machine, _ = load_program(corpus.load("map"), {"n": 3})
    rep = progress_suite([(f"map {k}", c, machine) for k, c in enumerate(r.configs)])
    assert rep.ok and rep.checked == len(r.configs)


def test_progress_excludes_terminal():
    m = Machine(GEN, PrimitiveTable())
    c = Configuration(Store([("x", li(Const(1)))]), parse_expr("x"))
    rep = progress_suite([("t", c, m)])
    assert rep.checked == 0 and rep.skipped_terminal == 1


def test_progress_on_generated():
    configs, tries = generate_well_typed(200, seed=3, max_depth=3)
    assert len(configs) == 200 and tries >= 200
    m = Machine(GEN, PrimitiveTable())
    assert progress_suite([(str(k), c, m) for k, c in enumerate(configs)]).ok


def test_generation_is_seeded():
    a, _ = generate_well_typed(20, seed=11)
    b, _ = generate_well_typed(20, seed=11)
    assert [repr(c) for c in a] == [repr(c) for c in b]
