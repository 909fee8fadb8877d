# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels mirroring :mod:`chowcalc._kernels_py`.

Coefficients are 64-bit integers with checked arithmetic; any overflow
raises ``OverflowError`` so the caller can retry in pure Python.
"""

from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map
from libcpp.pair cimport pair
from libc.stdint cimport int64_t, uint64_t
from cython.operator cimport dereference as deref, preincrement as inc

cdef extern from *:
    """
    static inline int ck_mul(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static inline int ck_add(long long a, long long b, long long *r) {
        return __builtin_add_overflow(a, b, r);
    }
    """
    int ck_mul(long long a, long long b, long long *r) nogil
    int ck_add(long long a, long long b, long long *r) nogil

BITS = 8
BACKEND = "cython"

ctypedef pair[uint64_t, long long] Term
ctypedef vector[Term] Terms
ctypedef unordered_map[uint64_t, long long] Acc


cdef Terms to_terms(dict poly) except *:
    cdef Terms t
    t.reserve(len(poly))
    for k, v in poly.items():
        t.push_back(Term(<uint64_t>k, <long long>v))
    return t


cdef dict from_terms(const Terms& t):
    cdef dict out = {}
    cdef size_t i
    for i in range(t.size()):
        out[t[i].first] = t[i].second
    return out


cdef vector[Terms] to_table(list table) except *:
    cdef vector[Terms] out
    for p in table:
        out.push_back(to_terms(p))
    return out


cdef int apply_c(const Terms& P, int a, const vector[Terms]& tab, Acc& out) nogil:
    """out += P with w_a^e replaced by tab[e]; returns 1 on overflow."""
    cdef int sh = a * 8
    cdef size_t i, j
    cdef uint64_t m, e, base
    cdef long long c, prod, s
    for i in range(P.size()):
        m = P[i].first
        c = P[i].second
        e = (m >> sh) & 255
        if e >= tab.size():
            return 2
        base = m - (e << sh)
        for j in range(tab[e].size()):
            if ck_mul(c, tab[e][j].second, &prod):
                return 1
            s = out[base + tab[e][j].first]
            if ck_add(s, prod, &s):
                return 1
            out[base + tab[e][j].first] = s
    return 0


cdef void drain(Acc& acc, Terms& t) nogil:
    cdef Acc.iterator it = acc.begin()
    t.clear()
    while it != acc.end():
        if deref(it).second != 0:
            t.push_back(Term(deref(it).first, deref(it).second))
        inc(it)


cdef int check(int rc) except -1:
    if rc == 1:
        raise OverflowError("64-bit coefficient overflow")
    if rc == 2:
        raise IndexError("substitution table too short for exponent")
    return 0


def apply_table(dict poly, int a, list table):
    cdef Terms P = to_terms(poly)
    cdef vector[Terms] tab = to_table(table)
    cdef Acc acc
    cdef Terms res
    check(apply_c(P, a, tab, acc))
    drain(acc, res)
    return from_terms(res)


def add_into(dict acc, dict poly, scale=1):
    for k, v in poly.items():
        x = acc.get(k, 0) + scale * v
        if x:
            acc[k] = x
        else:
            del acc[k]
    return acc


def multiply(dict p, dict q):
    cdef Terms P = to_terms(p)
    cdef Terms Q = to_terms(q)
    cdef Acc acc
    cdef Terms res
    cdef size_t i, j
    cdef long long prod, s
    for i in range(P.size()):
        for j in range(Q.size()):
            if ck_mul(P[i].second, Q[j].second, &prod):
                raise OverflowError("64-bit coefficient overflow")
            s = acc[P[i].first + Q[j].first]
            if ck_add(s, prod, &s):
                raise OverflowError("64-bit coefficient overflow")
            acc[P[i].first + Q[j].first] = s
    drain(acc, res)
    return from_terms(res)


cdef struct State:
    int v
    int m


ctypedef vector[pair[State, Terms]] States


cdef int step(const States& src, States& dst, int a, int d,
              const vector[vector[int]]& up,
              const vector[Terms]& ya, const vector[Terms]& ha) nogil:
    cdef unordered_map[long long, Acc] accs
    cdef size_t i
    cdef int v, m, t, rc
    cdef long long key
    cdef unordered_map[long long, Acc].iterator it
    cdef State st
    cdef Terms tmp
    for i in range(src.size()):
        v = src[i].first.v
        m = src[i].first.m
        if m < d:
            key = (<long long>v << 16) | (m + 1)
            rc = apply_c(src[i].second, a, ha, accs[key])
            if rc:
                return rc
        t = up[v][a]
        if t >= 0:
            key = (<long long>t << 16) | m
            rc = apply_c(src[i].second, a, ya, accs[key])
            if rc:
                return rc
    dst.clear()
    it = accs.begin()
    while it != accs.end():
        drain(deref(it).second, tmp)
        if tmp.size():
            st.v = <int>(deref(it).first >> 16)
            st.m = <int>(deref(it).first & 0xFFFF)
            dst.push_back(pair[State, Terms](st, tmp))
        inc(it)
    return 0


cdef void finish(const States& states, int d, unordered_map[int, long long]& row) nogil:
    cdef size_t i, j
    for i in range(states.size()):
        if states[i].first.m == d:
            for j in range(states[i].second.size()):
                if states[i].second[j].first == 0:
                    row[states[i].first.v] += states[i].second[j].second


def leibniz_rows(dict f, int d, list parent, list letter, list up, list ytab, list htab):
    """See :func:`chowcalc._kernels_py.leibniz_rows`."""
    cdef int n = len(parent)
    cdef int rank = len(ytab)
    cdef vector[vector[int]] cup
    cdef vector[vector[Terms]] cy, ch
    cdef vector[vector[int]] children
    cdef vector[int] cletter
    cdef int k, a, node, rc = 0
    for row in up:
        cup.push_back(<vector[int]>row)
    for a in range(rank):
        cy.push_back(to_table(ytab[a]))
        ch.push_back(to_table(htab[a]))
    children.resize(n)
    for k in range(1, n):
        children[<int>parent[k]].push_back(k)
    for k in range(n):
        cletter.push_back(<int>letter[k])

    cdef vector[unordered_map[int, long long]] rows
    rows.resize(n)
    # depth-first walk; stack frames hold (node, index of parent states)
    cdef vector[States] pool
    cdef vector[pair[int, int]] stack
    cdef States root
    cdef State st
    st.v = 0
    st.m = 0
    if f:
        root.push_back(pair[State, Terms](st, to_terms(f)))
    finish(root, d, rows[0])
    pool.push_back(root)
    for k in range(<int>children[0].size() - 1, -1, -1):
        stack.push_back(pair[int, int](children[0][k], 0))
    cdef int pidx
    cdef States cur
    with nogil:
        while stack.size():
            node = stack.back().first
            pidx = stack.back().second
            stack.pop_back()
            # frames above pidx belong to finished subtrees
            while <int>pool.size() > pidx + 1:
                pool.pop_back()
            rc = step(pool[pidx], cur, cletter[node], d, cup, cy[cletter[node]], ch[cletter[node]])
            if rc:
                break
            finish(cur, d, rows[node])
            if cur.size() and children[node].size():
                pool.push_back(cur)
                for k in range(<int>children[node].size() - 1, -1, -1):
                    stack.push_back(pair[int, int](children[node][k], <int>pool.size() - 1))
    check(rc)
    out = []
    cdef unordered_map[int, long long].iterator it
    for k in range(n):
        r = {}
        it = rows[k].begin()
        while it != rows[k].end():
            if deref(it).second:
                r[deref(it).first] = deref(it).second
            inc(it)
        out.append(r)
    return out


def delta_tree(dict p, list parent, list letter, list htab, int max_depth, list depth):
    cdef int n = len(parent)
    cdef int rank = len(htab)
    cdef vector[vector[Terms]] ch
    cdef vector[Terms] polys
    cdef vector[char] have
    cdef int k, a, par
    cdef Acc acc
    for a in range(rank):
        ch.push_back(to_table(htab[a]))
    polys.resize(n)
    have.resize(n, 0)
    if p:
        polys[0] = to_terms(p)
        have[0] = 1
    for k in range(1, n):
        if depth[k] > max_depth:
            continue
        par = parent[k]
        if not have[par]:
            continue
        a = letter[k]
        acc.clear()
        check(apply_c(polys[par], a, ch[a], acc))
        drain(acc, polys[k])
        have[k] = polys[k].size() > 0
    out = {}
    for k in range(n):
        if have[k]:
            out[k] = from_terms(polys[k])
    return out
