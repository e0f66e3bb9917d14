"""Compiled kernels versus the pure-Python fallback.

Times the usage merge, the branch join and the split decision on synthetic
inputs, then a whole type check of the sort program with each backend.
Run: python benchmarks/bench_kernels.py
"""
import random
import timeit

from wlt import _kernels as pure
from wlt import kernels

USAGES = [pure.UNR, pure.HIDDEN, pure.LINEAR]


def make_reports(rng, nvars=40, nreports=6):
    reports = []
    for k in range(nreports):
        rep = {}
        for v in range(nvars):
            if rng.random() < 0.3:
                rep[f"x{v}"] = pure.UNR if v % 3 == 0 else (pure.HIDDEN if k < nreports - 1 else pure.LINEAR)
        reports.append(rep)
    return reports


def make_split(rng, k=30, n=4):
    wq, wp, pq, pp, base = [], [], [], [], []
    for _ in range(k):
        if rng.random() < 0.5:
            wq.append(pure.QUN)
            pq += [pure.QUN] * n
        else:
            wq.append(pure.QLI)
            j = rng.randrange(n)
            pq += [pure.ABSENT] * j + [pure.QLI] + [pure.ABSENT] * (n - j - 1)
        wp.append(1)
        pp += [1] * n
        base.append(True)
    return wq, wp, pq, pp, base, n


def bench(mod, label, reports, split_args, number=2000):
    t_merge = timeit.timeit(lambda: mod.merge_reports(pure.PSEUDO, reports), number=number)
    t_join = timeit.timeit(lambda: mod.join_branches(reports[:2]), number=number)
    t_split = timeit.timeit(lambda: mod.split_ok(*split_args, True), number=number)
    print(f"{label:>8}: merge {t_merge * 1e6 / number:8.2f} us  join {t_join * 1e6 / number:8.2f} us  "
          f"split {t_split * 1e6 / number:8.2f} us")
    return t_merge, t_join, t_split


def whole_check(number=20):
    import os
    import subprocess
    import sys

    code = ("import timeit; from wlt import corpus; from wlt.verify import load_program; "
            "p = corpus.load('sort'); "
            "print(timeit.timeit(lambda: load_program(p, {'n': 8}), number=%d) / %d)" % (number, number))
    out = {}
    for label, env in (("cython", {}), ("python", {"WLT_PURE": "1"})):
        res = subprocess.run([sys.executable, "-c", code], env=dict(os.environ, **env),
                             capture_output=True, text=True, check=True)
        out[label] = float(res.stdout.strip())
    return out


def preservation(number=3):
    import os
    import subprocess
    import sys

    code = ("import timeit; from wlt import corpus; from wlt.verify import preservation_suite; "
            "p = corpus.load('sort'); "
            "print(timeit.timeit(lambda: preservation_suite(p, 'sort', 8), number=%d) / %d)" % (number, number))
    out = {}
    for label, env in (("cython", {}), ("python", {"WLT_PURE": "1"})):
        res = subprocess.run([sys.executable, "-c", code], env=dict(os.environ, **env),
                             capture_output=True, text=True, check=True)
        out[label] = float(res.stdout.strip())
    return out


def main():
    rng = random.Random(7)
    reports = make_reports(rng)
    split_args = make_split(rng)
    print(f"backend selected at import: {kernels.BACKEND}")
    tp = bench(pure, "python", reports, split_args)
    if kernels.compiled is None:
        print("compiled kernels not built; nothing to compare")
        return
    tc = bench(kernels.compiled, "cython", reports, split_args)
    print("speedup: " + "  ".join(f"{name} {p / c:5.2f}x" for name, p, c in zip(("merge", "join", "split"), tp, tc)))
    w = whole_check()
    print(f"type check of sort (n=8): cython {w['cython'] * 1e3:.2f} ms, python {w['python'] * 1e3:.2f} ms")
    pr = preservation()
    print(f"preservation suite of sort (n=8): cython {pr['cython']:.3f} s, python {pr['python']:.3f} s")


if __name__ == "__main__":
    main()
