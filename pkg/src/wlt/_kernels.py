"""Pure-Python usage-merge and split-decision kernels.

``_ckernels.pyx`` mirrors this module function for function; ``kernels`` picks
whichever is importable.  Usage codes: 0 unused, 1 unrestricted, 2 hidden read,
3 linear consumption.  Merge kinds: 0 split (operator rule), 1 pseudosplit.
Qualifier codes for split decisions: 0 absent, 1 li, 2 un, 3 hi.
"""

UNUSED, UNR, HIDDEN, LINEAR = 0, 1, 2, 3
SPLIT, PSEUDO = 0, 1
ABSENT, QLI, QUN, QHI = 0, 1, 2, 3

ERR_TWICE = -1      # consumed twice
ERR_AFTER = -2      # hidden read after the consuming use
ERR_MIXED = -3      # hidden and linear use combined by a plain split
ERR_KIND = -4       # usages of incompatible kinds (unrestricted with other)
ERR_BRANCH = -5     # consumed in one branch only


def merge_code(a, b, kind):
    if a == UNUSED:
        return b
    if b == UNUSED:
        return a
    if a == UNR or b == UNR:
        return UNR if a == b else ERR_KIND
    if a == HIDDEN and b == HIDDEN:
        return HIDDEN
    if a == LINEAR and b == LINEAR:
        return ERR_TWICE
    if a == LINEAR:
        return ERR_AFTER if kind == PSEUDO else ERR_MIXED
    # hidden then linear
    return LINEAR if kind == PSEUDO else ERR_MIXED


def merge_reports(kind, reports):
    """Fold usage maps in premise order.

    Returns ``(merged, None, 0, -1)`` or ``(partial, var, code, premise_index)``
    on the first conflict.
    """
    acc = {}
    for idx, rep in enumerate(reports):
        for x, u in rep.items():
            a = acc.get(x, UNUSED)
            r = merge_code(a, u, kind)
            if r < 0:
                return acc, x, r, idx
            acc[x] = r
    return acc, None, 0, -1


def join_branches(reports):
    """Combine branch usages that share one context (if / case arms)."""
    keys = []
    seen = set()
    for rep in reports:
        for x in rep:
            if x not in seen:
                seen.add(x)
                keys.append(x)
    out = {}
    for x in keys:
        us = [rep.get(x, UNUSED) for rep in reports]
        lin = [u == LINEAR for u in us]
        if any(lin):
            if not all(lin):
                return out, x, ERR_BRANCH
            out[x] = LINEAR
            continue
        m = max(us)
        if UNR in us and m != UNR:
            return out, x, ERR_KIND
        out[x] = m
    return out, None, 0


def var_split_ok(wq, wp, pq, pp, base, pseudo):
    """Is the per-variable distribution of one whole entry over the parts derivable?

    ``wq``/``wp`` are the whole entry's qualifier code and pretype id, ``pq``/``pp``
    the same per part (qualifier 0 for absent).
    """
    n = len(pq)
    if wq == QUN or wq == QHI:
        for k in range(n):
            if pq[k] != wq or pp[k] != wp:
                return False
        return True
    # linear whole entry
    j = -1
    for k in range(n):
        if pq[k] == QLI:
            if j >= 0 or pp[k] != wp:
                return False
            j = k
    if j < 0:
        return False
    for k in range(j + 1, n):
        if pq[k] != ABSENT:
            return False
    if j == 0:
        return True
    first = pq[0]
    if first == ABSENT:
        for k in range(j):
            if pq[k] != ABSENT:
                return False
        return True
    if not (pseudo and base and first == QHI):
        return False
    for k in range(j):
        if pq[k] != QHI or pp[k] != wp:
            return False
    return True


def split_ok(wq, wp, pq, pp, base, n, pseudo):
    """Check every variable; ``pq``/``pp`` are row-major ``k x n`` (variable-major).

    Returns the index of the first failing variable or -1.
    """
    k = len(wq)
    for v in range(k):
        if not var_split_ok(wq[v], wp[v], pq[v * n:(v + 1) * n], pp[v * n:(v + 1) * n], base[v], pseudo):
            return v
    return -1
