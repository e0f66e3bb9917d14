from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import insertion_sort
from wlt import cli, corpus
from wlt.machine import (
    ALREADY_VARIABLE, Configuration, Const, Machine, MachineError, PrimitiveTable, StepRecord, Store, Stuck,
    Terminal, TupleCells, Value, _hole_slot, dealloc, decompose, plug,
)
from wlt.surface import parse_expr, parse_signature
from wlt.syntax import HI, LI, Var, children, is_value
from wlt.verify import gen_signature, generate_well_typed

SIG = parse_signature("""\
+ : (hi int, li int) -> li int = add
* : (li int, li int) -> li int = mul
""".splitlines())
GOLDEN = Path(__file__).parent / "golden"


def li(v):
    return Value(LI, Const(v))


def store(**cells):
    s = Store()
    for x, v in cells.items():
        s.alloc(x, v)
    return s


def expr(text):
    return parse_expr(text, ops=SIG.names())


def test_fresh_names():
    assert Store().fresh() == "v0"
    s = store(**{f"v{k}": li(k) for k in range(5)})
    assert s.fresh() == "v5"
    assert s.fresh() == s.fresh()


def test_store_rejects_duplicates():
    with pytest.raises(ValueError):
        Store([("x", li(1)), ("x", li(2))])
    with pytest.raises(ValueError):
        Value(HI, Const(1))


def test_dealloc_examples():
    s = store(x=li(3))
    dealloc(s, [LI], ["x"])
    assert len(s) == 0
    s = store(x=li(3))
    dealloc(s, [HI], ["x"])
    assert "x" in s
    s = store(x=li(3), y=li(4))
    assert [x for x, _ in dealloc(s, [LI, LI], ["x", "y"])] == ["x", "y"] and len(s) == 0
    with pytest.raises(MachineError):
        dealloc(Store(), [LI], ["x"])


def test_decompose_examples():
    assert decompose(expr("li 3")) == ([], expr("li 3"))
    frames, redex = decompose(expr("f (li 3)"))
    assert redex == expr("li 3") and frames[0].node == expr("f (li 3)") and frames[0].slot == 1
    assert decompose(Var("x")) is ALREADY_VARIABLE


def test_function_position_first():
    _, redex = decompose(expr("(li \\x: li int. x) (li 3)"))
    assert redex == expr("li \\x: li int. x")


def test_step_examples():
    m = Machine(SIG, PrimitiveTable())
    c = Configuration(Store(), expr("li 3"))
    rec = m.step_in_place(c, 1)
    assert rec.rule == "eva" and c.control == Var("v0") and c.store["v0"] == li(3)

    c = Configuration(store(x=Value(LI, Const(True))), parse_expr("if x then y else z"))
    assert m.step_in_place(c).rule == "eif" and c.control == Var("y") and "x" not in c.store

    c = Configuration(store(x=li(3), y=li(1)), expr("x +@1 y"))
    rec = m.step_in_place(c)
    assert "x" in c.store and "y" not in c.store and c.store[c.control.name] == li(4)
    assert [x for x, _ in rec.frees] == ["y"]


def test_hidden_argument_survives_eop():
    m = Machine(SIG, PrimitiveTable())
    c = Configuration(store(x=li(3), y=li(1)), expr("x +@1 y"))
    m.step_in_place(c)
    assert c.store["x"] == li(3)
    # the dealloc mutant reads the store qualifier and drops the hidden argument
    bad = Machine(SIG, PrimitiveTable(), ["store-qualifier-dealloc"])
    c = Configuration(store(x=li(3), y=li(1)), expr("x +@1 y"))
    bad.step_in_place(c)
    assert "x" not in c.store


def test_split_and_let_steps():
    m = Machine(SIG, PrimitiveTable())
    c = Configuration(store(p=Value(LI, TupleCells(("a", "b"))), a=li(1), b=li(2)),
                      expr("spl p as <u, w> in u *@2 w"))
    assert m.step_in_place(c).rule == "esp"
    assert c.control == expr("a *@2 b") and "p" not in c.store
    c = Configuration(store(a=li(1)), parse_expr("let z = a in z"))
    assert m.step_in_place(c).rule == "ele" and c.control == Var("a")


def test_terminal_stuck_and_fuel():
    m = Machine(SIG, PrimitiveTable())
    assert m.step(Configuration(store(x=li(1)), Var("x"))) == Terminal("x")
    out = m.step(Configuration(Store(), parse_expr("if x then y else z")))
    assert isinstance(out, Stuck) and out.rule == "eif"
    res = m.run(Configuration(Store(), expr("li 3")), fuel=0)
    assert res.status == "fuel" and res.steps == 0


def test_golden_trace_fib(capsys):
    assert cli.main(["run", "fib", "--param", "n=1", "--trace"]) == 0
    assert capsys.readouterr().out == (GOLDEN / "fib_n1_trace.txt").read_text()


def test_fib_n0_terminates():
    machine, config = corpus.loader(corpus.load("fib"))(0)
    assert machine.run(config).status == "terminal"


def test_sort_n4_against_host_sort():
    machine, config = corpus.loader(corpus.load("sort"))(4)
    res = machine.run(config)
    assert res.status == "terminal"
    assert list(res.value.w.value) == insertion_sort([3, 2, 1, 0])


def trace_configs(machine, config, limit=2000):
    c = config.copy()
    out = [c.copy()]
    while not c.is_terminal() and len(out) < limit:
        before = set(c.store.names())
        rec = machine.step_in_place(c, len(out))
        assert isinstance(rec, StepRecord), rec
        for x, _ in rec.allocs:
            assert x not in before  # every allocation is fresh
        out.append(c.copy())
    return out


@pytest.fixture(scope="module")
def pool():
    configs, _ = generate_well_typed(150, seed=7, max_depth=4)
    m = Machine(gen_signature(), PrimitiveTable())
    out = []
    for c in configs:
        out += [(m, x) for x in trace_configs(m, c)]
    for name in ("map", "mapa"):
        machine, config = corpus.loader(corpus.load(name))(3)
        out += [(machine, x) for x in trace_configs(machine, config)]
    return out


def test_unique_decomposition(pool):
    for _, c in pool:
        d = decompose(c.control)
        if c.is_terminal():
            assert d is ALREADY_VARIABLE
            continue
        frames, redex = d
        assert plug(frames, redex) == c.control
        assert is_value(redex) or _hole_slot(redex) is None
        for f in frames:  # everything left of the hole is already a variable
            assert not is_value(f.node)
            left = children(f.node)[:f.slot]
            assert all(type(x) is Var for x in left)


def test_determinism(pool):
    for machine, c in pool[::7]:
        a, b = machine.step(c), machine.step(c)
        assert a == b


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_store_names_distinct_after_runs(seed):
    configs, _ = generate_well_typed(1, seed=seed, max_depth=3)
    m = Machine(gen_signature(), PrimitiveTable())
    for c in configs:
        res = m.run(c, fuel=10 ** 4)
        names = res.config.store.names()
        assert len(names) == len(set(names))
