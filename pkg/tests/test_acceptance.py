"""Acceptance criteria; each test prints one PASS/FAIL line."""
import sys
import time
from pathlib import Path

import pytest

from wlt import cli, corpus
from wlt.machine import Const, Machine, PrimitiveTable
from wlt.profile import corpus_growth
from wlt.syntax import BOOL, INT, LI, UN, Hidden, Type, TypeContext
from wlt.typecheck import pseudosplit_check, split_check
from wlt.verify import gen_signature, generate_well_typed, load_program, preservation_suite, progress_suite

sys.path.insert(0, str(Path(__file__).parent))
from oracles import fibonacci_host, insertion_sort, split_cases  # noqa: E402

WEAK = ["fib", "map", "mapa", "sort"]


def report(capsys, label, ok, detail=""):
    with capsys.disabled():
        print(f"\n[acceptance] {label}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, detail


@pytest.fixture(scope="module")
def preservation():
    reports = {}
    for name in WEAK:
        program = corpus.load(name)
        for n in corpus.PROGRAMS[name].preservation_ns:
            reports[name, n] = preservation_suite(program, name, n, fuel=10 ** 6, keep_configs=True)
    return reports


@pytest.mark.parametrize("name", WEAK)
def test_c1_corpus_well_typed(capsys, name):
    t0 = time.perf_counter()
    verdict, _, _ = load_program(corpus.load(name))
    dt = time.perf_counter() - t0
    report(capsys, f"C1 {name} well-typed", verdict.ok and dt < 1.0, f"({dt * 1000:.1f} ms) {verdict.error or ''}")


def test_c2_counterexample_rejected(capsys):
    verdict, _, _ = load_program(corpus.load("counterexample"))
    code = cli.main(["check", "counterexample"])
    report(capsys, "C2 counterexample rejected", not verdict.ok and code == 1, str(verdict.error))


def test_c3_preservation(capsys, preservation):
    bad = [f"{k}: {r.verdict} {r.message}" for k, r in preservation.items() if r.verdict != "pass"]
    steps = sum(r.steps_checked for r in preservation.values())
    report(capsys, "C3 preservation", not bad, f"({len(preservation)} runs, {steps} steps) {'; '.join(bad[:3])}")


def test_c4_progress(capsys, preservation):
    pool = []
    for (name, n), r in preservation.items():
        _, machine, _ = load_program(corpus.load(name), {"n": n})
        pool += [(f"{name} n={n} #{k}", c, machine) for k, c in enumerate(r.configs)]
    generated, _ = generate_well_typed(1000, seed=0, max_depth=4)
    gm = Machine(gen_signature(), PrimitiveTable())
    pool += [(f"generated #{k}", c, gm) for k, c in enumerate(generated)]
    rep = progress_suite(pool)
    ok = rep.ok and len(generated) >= 1000
    report(capsys, "C4 progress", ok, f"({rep.checked} configurations, {len(generated)} generated) {rep.stuck[:3]}")


def test_c5_mutants(capsys):
    dealloc = [name for name in WEAK
               if preservation_suite(corpus.load(name), name, 3, mutants=["store-qualifier-dealloc"]).verdict != "pass"]
    ce = corpus.load("counterexample")
    accepted, _, _ = load_program(ce, mutants=["operator-pseudosplit"])
    run = preservation_suite(ce, "counterexample", mutants=["operator-pseudosplit"])
    meta = cli.main(["meta", "--preservation", "--program", "fib", "--ns", "3", "--mutant", "store-qualifier-dealloc"])
    ok = bool(dealloc) and accepted.ok and run.verdict != "pass" and meta == 1
    report(capsys, "C5 mutation sensitivity", ok,
           f"(dealloc mutant caught on {dealloc}; pseudosplit mutant accepts counterexample: {accepted.ok}, "
           f"then {run.verdict} at step {run.step})")


GROWTH = [(name, v) for name in WEAK for v in corpus.VARIANTS]


@pytest.mark.parametrize("name,variant", GROWTH)
def test_c6_growth_degree(capsys, name, variant):
    g = corpus_growth(name, variant)
    want = corpus.expected_degree(name, variant)
    got = None if g.degree is None else g.degree.degree
    ys = [r.relative for r in g.rows]
    report(capsys, f"C6 {name} [{variant}] degree {want}", got == want,
           f"(measured {got} over n={[r.n for r in g.rows]}, balances {ys})")


def test_c7_split_oracle(capsys):
    bases = {"int": INT, "bool": BOOL}

    def ctx(entries):
        return TypeContext([(x, Hidden(bases[p]) if q == "hi" else Type(LI if q == "li" else UN, bases[p]))
                            for x, q, p in entries])

    count, bad = 0, []
    for whole, parts, in_split, in_pseudo in split_cases():
        w, ps = ctx(whole), [ctx(p) for p in parts]
        count += 1
        if split_check(ps, w) != in_split or pseudosplit_check(ps, w) != in_pseudo:
            bad.append((whole, parts))
    report(capsys, "C7 split oracle", not bad, f"({count} cases, {len(bad)} disagreements) {bad[:2]}")


@pytest.mark.parametrize("n", [1, 2, 5, 8, 12])
def test_c8_sort_oracle(capsys, n):
    machine, config = corpus.loader(corpus.load("sort"))(n)
    res = machine.run(config, fuel=10 ** 6)
    start = list(range(n - 1, -1, -1))
    got = res.value.w.value if res.status == "terminal" and type(res.value.w) is Const else None
    report(capsys, f"C8 sort n={n}", got is not None and list(got) == insertion_sort(start), f"({got})")


@pytest.mark.parametrize("n", [0, 1, 5, 10, 20])
def test_c8_fib_oracle(capsys, n):
    from wlt.machine import readback

    machine, config = corpus.loader(corpus.load("fib"))(n)
    res = machine.run(config, fuel=10 ** 6)
    cells = res.value.w.vars
    third = res.config.store[cells[2]].w.value
    report(capsys, f"C8 fib n={n}", res.status == "terminal" and third == fibonacci_host(n),
           f"({readback(res.config.store, res.terminal)})")
