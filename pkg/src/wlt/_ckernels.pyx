# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of ``_kernels``; same functions, same return conventions."""

cdef enum:
    UNUSED = 0
    UNR = 1
    HIDDEN = 2
    LINEAR = 3
    PSEUDO = 1
    ABSENT = 0
    QLI = 1
    QUN = 2
    QHI = 3
    ERR_TWICE = -1
    ERR_AFTER = -2
    ERR_MIXED = -3
    ERR_KIND = -4
    ERR_BRANCH = -5


cdef inline int _merge(int a, int b, int kind) nogil:
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
    return LINEAR if kind == PSEUDO else ERR_MIXED


def merge_code(int a, int b, int kind):
    return _merge(a, b, kind)


def merge_reports(int kind, list reports):
    cdef dict acc = {}
    cdef dict rep
    cdef int idx = 0
    cdef int a, r
    for rep in reports:
        for x, u in rep.items():
            a = acc.get(x, UNUSED)
            r = _merge(a, u, kind)
            if r < 0:
                return acc, x, r, idx
            acc[x] = r
        idx += 1
    return acc, None, 0, -1


def join_branches(list reports):
    cdef list keys = []
    cdef set seen = set()
    cdef dict rep
    cdef dict out = {}
    cdef int u, m, nlin, nrep = len(reports)
    cdef bint has_unr
    for rep in reports:
        for x in rep:
            if x not in seen:
                seen.add(x)
                keys.append(x)
    for x in keys:
        nlin = 0
        m = 0
        has_unr = False
        for rep in reports:
            u = rep.get(x, UNUSED)
            if u == LINEAR:
                nlin += 1
            if u == UNR:
                has_unr = True
            if u > m:
                m = u
        if nlin:
            if nlin != nrep:
                return out, x, ERR_BRANCH
            out[x] = LINEAR
            continue
        if has_unr and m != UNR:
            return out, x, ERR_KIND
        out[x] = m
    return out, None, 0


cdef bint _var_ok(int wq, int wp, list pq, list pp, Py_ssize_t off, Py_ssize_t n, bint base, bint pseudo):
    cdef Py_ssize_t k
    cdef Py_ssize_t j = -1
    cdef int first
    if wq == QUN or wq == QHI:
        for k in range(n):
            if <int>pq[off + k] != wq or <int>pp[off + k] != wp:
                return False
        return True
    for k in range(n):
        if <int>pq[off + k] == QLI:
            if j >= 0 or <int>pp[off + k] != wp:
                return False
            j = k
    if j < 0:
        return False
    for k in range(j + 1, n):
        if <int>pq[off + k] != ABSENT:
            return False
    if j == 0:
        return True
    first = pq[off]
    if first == ABSENT:
        for k in range(j):
            if <int>pq[off + k] != ABSENT:
                return False
        return True
    if not (pseudo and base and first == QHI):
        return False
    for k in range(j):
        if <int>pq[off + k] != QHI or <int>pp[off + k] != wp:
            return False
    return True


def var_split_ok(int wq, int wp, pq, pp, bint base, bint pseudo):
    return _var_ok(wq, wp, list(pq), list(pp), 0, len(pq), base, pseudo)


def split_ok(list wq, list wp, list pq, list pp, list base, Py_ssize_t n, bint pseudo):
    cdef Py_ssize_t v, k = len(wq)
    for v in range(k):
        if not _var_ok(wq[v], wp[v], pq, pp, v * n, n, base[v], pseudo):
            return v
    return -1
