"""Pure-Python reference kernels.

Polynomials here are ``dict[int, int]`` mapping a packed monomial to an
integer coefficient.  A monomial ``w1^e1 ... wl^el`` packs to
``sum(e_i << (BITS * (i - 1)))``; products of monomials are sums of keys
as long as every exponent stays below ``2**BITS``.

A substitution table ``table[e]`` holds the packed polynomial that replaces
``w_a^e``; both the simple reflection and the divided difference at ``a``
are of this form (see :mod:`chowcalc.polyops`).
"""

BITS = 8
MASK = (1 << BITS) - 1

BACKEND = "python"


def apply_table(poly, a, table):
    """Substitute ``w_a^e -> table[e]`` in every term of ``poly``."""
    sh = a * BITS
    out = {}
    get = out.get
    for m, c in poly.items():
        e = (m >> sh) & MASK
        base = m - (e << sh)
        for k, v in table[e].items():
            key = base + k
            out[key] = get(key, 0) + c * v
    return {k: v for k, v in out.items() if v}


def add_into(acc, poly, scale=1):
    """``acc += scale * poly`` in place."""
    get = acc.get
    for k, v in poly.items():
        x = get(k, 0) + scale * v
        if x:
            acc[k] = x
        else:
            del acc[k]
    return acc


def multiply(p, q):
    out = {}
    get = out.get
    for k1, v1 in p.items():
        for k2, v2 in q.items():
            k = k1 + k2
            out[k] = get(k, 0) + v1 * v2
    return {k: v for k, v in out.items() if v}


def leibniz_rows(f, d, parent, letter, up, ytab, htab):
    """Matrix of multiplication by ``c(f)`` on a Schubert basis.

    Parameters
    ----------
    f : dict
        Packed polynomial, homogeneous of degree ``d``.
    parent, letter : list of int
        Breadth-first tree on the basis: node ``k > 0`` is
        ``s_letter[k] * node parent[k]`` (letters 0-based); node 0 is the root.
    up : list of list of int
        ``up[v][a]`` is the node ``s_a v`` when that raises length inside the
        basis, else ``-1``.
    ytab, htab : list of list of dict
        Substitution tables for ``s_a`` and ``Delta_a``.

    Returns
    -------
    list of dict
        ``rows[w][v]`` is the coefficient of ``sigma_w`` in ``c(f) sigma_v``.

    Notes
    -----
    Walking down the tree applies one more ``Delta_a`` to ``f * G`` where
    ``G`` represents ``sigma_v``.  By the Leibniz rule each state
    ``(v', m) -> P`` (``m`` Deltas absorbed by ``f``) splits into
    ``(v', m + 1) -> Delta_a P`` and ``(s_a v', m) -> s_a P``.  Depth-first
    order keeps only the states along the current path alive.
    """
    n = len(parent)
    children = [[] for _ in range(n)]
    for k in range(1, n):
        children[parent[k]].append(k)
    rows = [dict() for _ in range(n)]

    def finish(node, states):
        row = rows[node]
        for (v, m), P in states.items():
            if m == d:
                c = P.get(0, 0)
                if c:
                    row[v] = row.get(v, 0) + c

    root = {(0, 0): dict(f)} if f else {}
    finish(0, root)
    stack = [(c, root) for c in reversed(children[0])]
    while stack:
        node, pstates = stack.pop()
        a = letter[node]
        ya, ha = ytab[a], htab[a]
        states = {}
        for (v, m), P in pstates.items():
            if m < d:
                Q = apply_table(P, a, ha)
                if Q:
                    key = (v, m + 1)
                    if key in states:
                        add_into(states[key], Q)
                    else:
                        states[key] = Q
            t = up[v][a]
            if t >= 0:
                Q = apply_table(P, a, ya)
                key = (t, m)
                if key in states:
                    add_into(states[key], Q)
                else:
                    states[key] = Q
        states = {k: P for k, P in states.items() if P}
        finish(node, states)
        if states:
            for c in reversed(children[node]):
                stack.append((c, states))
    return rows


def delta_tree(p, parent, letter, htab, max_depth, depth):
    """``Delta_u p`` for every tree node ``u`` with ``depth[u] <= max_depth``.

    Returns a dict node -> packed polynomial (zero results omitted).
    """
    out = {0: dict(p)} if p else {}
    for k in range(1, len(parent)):
        if depth[k] > max_depth:
            continue
        q = out.get(parent[k])
        if q:
            r = apply_table(q, letter[k], htab[letter[k]])
            if r:
                out[k] = r
    return out
