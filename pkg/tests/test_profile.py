from fractions import Fraction

import pytest

from wlt import corpus
from wlt.machine import Closure, Const, Value
from wlt.profile import divided_differences, growth_experiment, polynomial_degree, profile_program
from wlt.surface import parse_program
from wlt.syntax import INT, LI, UN, Type, Var


def test_size_of():
    from wlt.machine import size_of

    assert size_of(Value(LI, Const(3))) == 1
    assert size_of(Value(LI, Const((0, 1, 2, 3)))) == 4
    assert size_of(Value(UN, Closure("x", Type(LI, INT), Var("x")))) == 1


def test_single_allocation():
    res = profile_program(parse_program("main:\n  li 3\n"))
    assert res.status == "terminal" and res.ledger.final == 1


def test_operator_frees_inputs():
    p = parse_program("signature:\n  + : (li int, li int) -> li int = add\n  0 : li int = const:0\n"
                      "main:\n  let x = li 3 in x + 0\n")
    res = profile_program(p, keep_events=True)
    assert res.ledger.final == 1 and res.ledger.freed == 2
    assert [e[1] for e in res.ledger.events] == ["init", "eva", "ele", "eop", "eop"]


@pytest.mark.parametrize("name", list(corpus.PROGRAMS))
@pytest.mark.parametrize("variant", corpus.VARIANTS)
def test_ledger_conservation(name, variant):
    res = profile_program(corpus.load(name, variant), 5, corpus.PROGRAMS[name].function)
    led = res.ledger
    assert res.status == "terminal"
    assert led.final == res.store_weight == led.initial + led.allocated - led.freed
    assert led.peak >= led.final


@pytest.mark.parametrize("name", list(corpus.PROGRAMS))
def test_unrestricted_never_frees(name):
    res = profile_program(corpus.load(name, "un"), 5)
    assert res.ledger.freed == 0


@pytest.mark.parametrize("name", ["fib", "map", "mapa"])
def test_weak_linear_peak_bounded(name):
    fn = corpus.PROGRAMS[name].function
    peaks = {profile_program(corpus.load(name), n, fn).ledger.relative_peak for n in (2, 5, 9, 17)}
    assert len(peaks) == 1


def test_fib_balance_constant():
    a = profile_program(corpus.load("fib"), 6, "fib").ledger
    b = profile_program(corpus.load("fib"), 7, "fib").ledger
    assert a.final == b.final and a.relative == b.relative


def test_divided_differences():
    table = divided_differences([1, 2, 4], [1, 4, 16])
    assert table[1] == [3, 6] and table[2] == [1]
    assert polynomial_degree([4, 8, 16, 32], [7, 7, 7, 7]).degree == 0
    assert polynomial_degree([4, 8, 16, 32], [n * n + 1 for n in (4, 8, 16, 32)]).degree == 2
    d = polynomial_degree([4, 6, 8, 10], [n ** 3 for n in (4, 6, 8, 10)])
    assert d.degree == 3 and d.saturated and d.differences[3] == Fraction(1)
    with pytest.raises(ValueError):
        divided_differences([1, 1], [2, 3])


def test_growth_rejects_bad_sizes():
    with pytest.raises(ValueError):
        growth_experiment(None, [4, 8, 16])
    with pytest.raises(ValueError):
        growth_experiment(None, [4, 8, 8, 16])


def test_growth_examples():
    from wlt.profile import corpus_growth

    assert corpus_growth("fib", "li").degree.degree == 0
    assert corpus_growth("mapa", "un").degree.degree == 2
    assert corpus_growth("sort", "un").degree.degree == 3
