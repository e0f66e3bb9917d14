import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlt import kernels
from wlt import _kernels as pure

compiled = kernels.compiled
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")

usage = st.sampled_from((pure.UNUSED, pure.UNR, pure.HIDDEN, pure.LINEAR))
reports = st.lists(st.dictionaries(st.sampled_from("xyzw"), usage, max_size=4), max_size=4)
kinds = st.sampled_from((pure.SPLIT, pure.PSEUDO))


def test_merge_table():
    H, L = pure.HIDDEN, pure.LINEAR
    assert pure.merge_code(H, L, pure.PSEUDO) == L
    assert pure.merge_code(L, H, pure.PSEUDO) == pure.ERR_AFTER
    assert pure.merge_code(H, L, pure.SPLIT) == pure.ERR_MIXED
    assert pure.merge_code(L, L, pure.PSEUDO) == pure.ERR_TWICE
    assert pure.merge_code(pure.UNR, H, pure.PSEUDO) == pure.ERR_KIND


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    assert (kernels.BACKEND == "cython") == (compiled is not None)


@needs_compiled
@settings(max_examples=500, deadline=None)
@given(kinds, reports)
def test_merge_reports_agree(kind, reps):
    assert compiled.merge_reports(kind, [dict(r) for r in reps]) == pure.merge_reports(kind, reps)


@needs_compiled
@settings(max_examples=500, deadline=None)
@given(reports)
def test_join_branches_agree(reps):
    assert compiled.join_branches([dict(r) for r in reps]) == pure.join_branches(reps)


@st.composite
def split_problems(draw):
    k = draw(st.integers(0, 4))
    n = draw(st.integers(1, 4))
    qual = st.integers(pure.ABSENT, pure.QHI)
    pid = st.integers(1, 2)
    wq = [draw(st.integers(pure.QLI, pure.QHI)) for _ in range(k)]
    wp = [draw(pid) for _ in range(k)]
    pq = [draw(qual) for _ in range(k * n)]
    pp = [draw(pid) for _ in range(k * n)]
    base = [draw(st.booleans()) for _ in range(k)]
    return wq, wp, pq, pp, base, n, draw(st.booleans())


@needs_compiled
@settings(max_examples=1000, deadline=None)
@given(split_problems())
def test_split_ok_agree(problem):
    assert compiled.split_ok(*problem) == pure.split_ok(*problem)


def test_pure_fallback_end_to_end():
    import os
    import subprocess
    import sys

    code = ("import wlt; from wlt import corpus; from wlt.verify import load_program; "
            "print(wlt.BACKEND, all(load_program(corpus.load(n))[0].ok for n in corpus.PROGRAMS))")
    out = subprocess.run([sys.executable, "-c", code], env=dict(os.environ, WLT_PURE="1"),
                         capture_output=True, text=True, check=True).stdout.split()
    assert out == ["python", "True"]
