import re

import pytest

from oracles import fibonacci_host
from wlt import corpus
from wlt.machine import Const
from wlt.surface import print_program
from wlt.verify import load_program


def test_names():
    assert set(corpus.PROGRAMS) == {"fib", "map", "mapa", "sort"}
    assert "counterexample" in corpus.names()


def test_get_program_params():
    assert corpus.get_program("fib", "li", 5).param_dict == {"n": 5}
    with pytest.raises(ValueError):
        corpus.get_program("sort", "li", 0)
    with pytest.raises(KeyError):
        corpus.get_program("quicksort")
    with pytest.raises(ValueError):
        corpus.source("fib", "affine")


def test_fib_context():
    verdict, _, _ = load_program(corpus.get_program("fib", "li", 5))
    assert str(dict(verdict.context)["fib"]) == "un (li int -> li <li int, li int, li int>)"


def test_sort_initial_array():
    verdict, _, _ = load_program(corpus.get_program("sort", "li", 4))
    a = verdict.config.store["a"]
    assert a.q.value == "li" and a.w == Const((3, 2, 1, 0))


def erase(text):
    """Forget qualifiers and explicit operator indices."""
    return re.sub(r"@\d+", "", re.sub(r"\b(li|hi)\b", "un", text))


@pytest.mark.parametrize("name", list(corpus.PROGRAMS))
def test_unrestricted_variant_has_same_shape(name):
    li, un = corpus.load(name, "li"), corpus.load(name, "un")
    assert erase(print_program(li)) == erase(print_program(un))
    assert "li " not in print_program(un) and "hi " not in print_program(un)


@pytest.mark.parametrize("n", range(0, 12))
def test_fib_third_component(n):
    machine, config = corpus.loader(corpus.get_program("fib"))(n)
    res = machine.run(config)
    third = res.config.store[res.value.w.vars[2]].w.value
    assert third == fibonacci_host(n) == corpus.fibonacci_third(n)


@pytest.mark.parametrize("name", list(corpus.PROGRAMS))
@pytest.mark.parametrize("variant", corpus.VARIANTS)
def test_terminates_at_32(name, variant):
    machine, config = corpus.loader(corpus.load(name, variant))(32)
    assert machine.run(config).status == "terminal"


def test_map_output():
    from wlt.machine import readback

    machine, config = corpus.loader(corpus.load("map"))(4)
    res = machine.run(config)
    assert readback(res.config.store, res.terminal) == "[1, 2, 3, 4]"
