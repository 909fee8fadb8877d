"""
Preimages under the characteristic map by undetermined coefficients.

A degree-``k`` polynomial ``p = sum a[e] w^e`` is unknown; constraints are
linear in the ``a[e]``:

* invariance: ``s_i p = p`` for ``i`` in ``Theta`` (the default; small
  systems, enough to reach ``E_8``);
* delta: ``Delta_w p = 0`` for every ``w`` of length ``k`` outside
  ``W^Theta`` (enumerates a slice of the full group, so small ranks only);
* normalisation: ``Delta_u p = x_u`` for every ``u`` in ``W^Theta`` of
  length ``k``, where ``x = sum x_u sigma_u`` is the target class.

Elimination is exact and fraction free: rows are primitive integer vectors
and the pivot of a new row is its smallest column, so pivots follow the
monomial order.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Callable, Mapping

from . import kernels
from .polyops import Polynomial, c_map, format_monomial, monomials_of_degree, weyl_operators

log = logging.getLogger(__name__)


class InconsistentSystemError(ValueError):
    """The constraints admit no solution."""


class PreimageError(ArithmeticError):
    """A computed preimage failed the round-trip check ``c(p) = x``."""


class GenericPolynomial:
    """``sum a[e] w^e`` over all exponent vectors ``e`` of degree ``k``.

    Unknown ``j`` is the coefficient of ``monomials[j]``; monomials are in
    increasing grevlex order, so elimination pivots on the smallest
    monomials and the free parameters sit on the largest ones.
    """

    def __init__(self, nvars: int, k: int):
        self.nvars = nvars
        self.degree = k
        self.monomials = monomials_of_degree(nvars, k)[::-1]
        self.index = {m: j for j, m in enumerate(self.monomials)}

    def __len__(self):
        return len(self.monomials)

    def name(self, j: int) -> str:
        return "a[" + ",".join(str(e) for e in self.monomials[j]) + "]"

    def polynomial(self, values) -> Polynomial:
        return Polynomial(self.nvars, {m: v for m, v in zip(self.monomials, values) if v})

    def format(self) -> str:
        """The generic polynomial as text, e.g. ``a[2,0] * w[1]^2 + ...``."""
        return " + ".join(f"{self.name(j)} * {format_monomial(m)}" if any(m) else self.name(j)
                          for j, m in enumerate(self.monomials))


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class LinearSystem:
    """Equations ``sum_j row[j] * x_j = rhs`` over Q in the unknowns of ``generic``."""

    def __init__(self, generic: GenericPolynomial):
        self.generic = generic
        self.rows: list = []
        self.rhs: list = []
        self.tags: list = []

    @property
    def ncols(self) -> int:
        return len(self.generic)

    def __len__(self):
        return len(self.rows)

    def add(self, row: Mapping[int, object], rhs=0, tag=None):
        r = {j: Fraction(v) for j, v in row.items() if v}
        rhs = Fraction(rhs)
        if not r and not rhs:
            return
        self.rows.append(r)
        self.rhs.append(rhs)
        self.tags.append(tag)

    def extend(self, other: "LinearSystem"):
        if other.generic.monomials != self.generic.monomials:
            raise ValueError("systems over different unknowns")
        for r, b, t in zip(other.rows, other.rhs, other.tags):
            self.add(r, b, t)

    def residuals(self, x) -> list:
        return [sum((c * x[j] for j, c in r.items()), Fraction(0)) - b for r, b in zip(self.rows, self.rhs)]

    def equation(self, i: int) -> str:
        """One row as ``a[0,0,1,1] + a[0,0,2,0] - 1 = 0``."""
        r, b = self.rows[i], self.rhs[i]
        parts = []
        for j in sorted(r):
            c = r[j]
            mag = abs(c)
            body = self.generic.name(j) if mag == 1 else f"{_fmt(mag)}{self.generic.name(j)}"
            parts.append(("-" if c < 0 else "+", body))
        if b:
            parts.append(("+" if b < 0 else "-", _fmt(abs(b))))
        if not parts:
            return "0 = 0"
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s + " = 0"

    def dump(self) -> str:
        """Text dump: a header with the generic polynomial, then one equation per line."""
        lines = [f"# unknowns: {self.ncols}, equations: {len(self.rows)}",
                 f"# p = {self.generic.format()}"]
        lines += [self.equation(i) for i in range(len(self.rows))]
        return "\n".join(lines) + "\n"

    def canonical_rows(self) -> set:
        """Rows as primitive integer tuples (sign fixed), for order-free comparison."""
        out = set()
        for r, b in zip(self.rows, self.rhs):
            out.add(_primitive_key(r, b))
        return out


def _primitive_key(r, b):
    items = sorted(r.items())
    vals = [v for _, v in items] + [b]
    den = 1
    for v in vals:
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = [int(v * den) for v in vals]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    g = g or 1
    ints = [v // g for v in ints]
    if ints and ints[0] < 0:
        ints = [-v for v in ints]
    return tuple((j, v) for (j, _), v in zip(items, ints)) + (("rhs", ints[-1]),)


class SolutionSpace:
    """Affine solution set ``particular + span(nullspace)``.

    Attributes
    ----------
    particular : list of Fraction
        The solution with every free parameter set to zero.
    nullspace : list of list of Fraction
        One basis vector per free column.
    free : list of int
        Free columns; ``nullspace[i]`` has a 1 in column ``free[i]``.
    """

    def __init__(self, ncols, particular, nullspace, free):
        self.ncols = ncols
        self.particular = particular
        self.nullspace = nullspace
        self.free = free

    @property
    def free_params(self) -> int:
        return len(self.nullspace)

    def vector(self, params=()) -> list:
        params = list(params) + [0] * (len(self.nullspace) - len(params))
        x = list(self.particular)
        for t, v in zip(params, self.nullspace):
            if t:
                for j, c in enumerate(v):
                    if c:
                        x[j] += t * c
        return x

    def verify(self, system: LinearSystem) -> bool:
        if any(system.residuals(self.particular)):
            return False
        zero = LinearSystem(system.generic)
        zero.rows, zero.rhs = system.rows, [Fraction(0)] * len(system.rows)
        return all(not any(zero.residuals(v)) for v in self.nullspace)

    def contains(self, x) -> bool:
        """Is ``x`` in the affine space?  Decided by solving against the nullspace."""
        diff = [Fraction(a) - b for a, b in zip(x, self.particular)]
        # coordinates on the free columns determine the combination
        comb = [diff[f] for f in self.free]
        recon = [Fraction(0)] * self.ncols
        for t, v in zip(comb, self.nullspace):
            if t:
                for j, c in enumerate(v):
                    if c:
                        recon[j] += t * c
        return recon == diff


def solve(system: LinearSystem, progress: Callable | None = None) -> SolutionSpace:
    """Exact solution of ``system``; raises :class:`InconsistentSystemError`."""
    n = system.ncols
    rhs_col = n
    piv = {}  # pivot column -> primitive integer row (dict col -> int)
    occ = {}  # column -> set of pivot columns whose rows contain it
    total = len(system.rows)
    for idx, (r, b) in enumerate(zip(system.rows, system.rhs)):
        if progress and idx % 5000 == 0:
            progress(f"elimination {idx}/{total} rows, rank {len(piv)}")
        row = _to_int_row(r, b, rhs_col)
        for c in sorted(k for k in row if k in piv):
            if c not in row:
                continue
            row = _eliminate(row, piv[c], c)
        if not row:
            continue
        p = min(row)
        if p == rhs_col:
            raise InconsistentSystemError(
                f"equation {idx} reduces to 0 = {Fraction(-row[rhs_col])}" if system.tags[idx] is None
                else f"equation {idx} ({system.tags[idx]}) is inconsistent")
        # clear column p from the other pivot rows
        for q in list(occ.get(p, ())):
            old = piv[q]
            new = _eliminate(old, row, p)
            for k in old:
                if k not in new and k != q:
                    occ.get(k, set()).discard(q)
            for k in new:
                if k != q:
                    occ.setdefault(k, set()).add(q)
            piv[q] = new
        occ.pop(p, None)
        piv[p] = row
        for k in row:
            if k != p:
                occ.setdefault(k, set()).add(p)
    free = [j for j in range(n) if j not in piv]
    particular = [Fraction(0)] * n
    for p, row in piv.items():
        particular[p] = Fraction(row.get(rhs_col, 0), row[p])
    nullspace = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for q in occ.get(f, ()):
            row = piv[q]
            v[q] = Fraction(-row[f], row[q])
        nullspace.append(v)
    return SolutionSpace(n, particular, nullspace, free)


def _to_int_row(r, b, rhs_col):
    den = 1
    for v in list(r.values()) + [b]:
        den = den * v.denominator // math.gcd(den, v.denominator)
    row = {j: int(v * den) for j, v in r.items()}
    if b:
        row[rhs_col] = int(b * den)
    return _primitive(row)


def _primitive(row):
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        row = {k: v // g for k, v in row.items()}
    return row


def _eliminate(row, prow, c):
    """``prow[c] * row - row[c] * prow``, made primitive (column ``c`` drops out)."""
    a = prow[c]
    b = row[c]
    g = math.gcd(a, b)
    a //= g
    b //= g
    if a < 0:
        a, b = -a, -b
    out = {k: v * a for k, v in row.items()} if a != 1 else dict(row)
    for k, v in prow.items():
        x = out.get(k, 0) - b * v
        if x:
            out[k] = x
        else:
            out.pop(k, None)
    return _primitive(out)


# -- constraint builders --------------------------------------------------------

def build_constraints_invariance(tree, k: int) -> LinearSystem:
    """``s_i p - p = 0`` coefficientwise for every ``i`` in ``Theta``."""
    gen = GenericPolynomial(tree.rank, k)
    system = LinearSystem(gen)
    if k == 0:
        return system
    ops = weyl_operators(tree.system)
    ops.ensure(k)
    for i in sorted(tree.theta.theta):
        a = i - 1
        eqs = {}
        for j, m in enumerate(gen.monomials):
            if m[a] == 0:
                continue  # s_i fixes monomials free of w_i
            key = kernels.pack(m)
            img = kernels.apply_table({key: 1}, a, ops.ytab[a])
            img[key] = img.get(key, 0) - 1
            for mm, c in img.items():
                if c:
                    eqs.setdefault(mm, {})[j] = eqs.setdefault(mm, {}).get(j, 0) + c
        for mm in sorted(eqs):
            system.add(eqs[mm], 0, tag=f"s{i}")
    return system


def _delta_functionals(tree, k, nodes, gen):
    """``rows[node][j] = Delta_node(monomial j)`` for the given length-``k`` nodes."""
    ops = weyl_operators(tree.system)
    ops.ensure(k)
    wanted = set(nodes)
    keep = set()
    for u in nodes:
        while u >= 0 and u not in keep:
            keep.add(u)
            u = tree.parent[u]
    parent = tree.parent_list()
    letter = tree.letter_list()
    # nodes off the needed paths get depth past k so the kernel skips them
    depth = [tree.length[u] if u in keep else k + 1 for u in range(len(tree))]
    rows = {u: {} for u in nodes}
    for j, m in enumerate(gen.monomials):
        vals = kernels.delta_tree({kernels.pack(m): 1}, parent, letter, ops.htab, k, depth)
        for u in wanted:
            q = vals.get(u)
            if q:
                c = q.get(0, 0)
                if c:
                    rows[u][j] = c
    return rows


def build_constraints_delta(tree, k: int, full_tree=None) -> LinearSystem:
    """``Delta_w p = 0`` for every ``w`` of length ``k`` with ``w`` not in ``W^Theta``.

    ``full_tree`` is the coset tree of the trivial parabolic (all of W); it
    is built on demand, truncated at length ``k``.
    """
    gen = GenericPolynomial(tree.rank, k)
    system = LinearSystem(gen)
    if k == 0:
        return system
    if full_tree is None:
        from .weyl import CosetTree, ParabolicSubset

        full_tree = CosetTree(tree.group, ParabolicSubset(tree.rank, frozenset()), max_length=k)
    lam = tree.theta.dominant_weight()
    excluded = []
    for x in full_tree.nodes_of_length(k):
        mu = tuple(sum(a * b for a, b in zip(row, lam)) for row in full_tree.matrices[x])
        if tree.length[tree.index[mu]] != k:
            excluded.append(x)
    rows = _delta_functionals(full_tree, k, excluded, gen)
    for x in excluded:
        system.add(rows[x], 0, tag="w=" + "".join(f"s{a}" for a in full_tree.word(x)))
    return system


def build_normalization(tree, k: int, target: Mapping[int, object]) -> LinearSystem:
    """``Delta_u p = target[u]`` for every ``u`` in ``W^Theta`` of length ``k``."""
    gen = GenericPolynomial(tree.rank, k)
    system = LinearSystem(gen)
    nodes = tree.nodes_of_length(k)
    bad = [u for u in target if u not in set(nodes) and target[u]]
    if bad:
        raise ValueError(f"target has classes outside codimension {k}: {bad}")
    rows = _delta_functionals(tree, k, nodes, gen)
    for u in nodes:
        system.add(rows[u], target.get(u, 0), tag=f"u={u}")
    return system


def build_system(tree, k: int, target: Mapping[int, object], variant: str = "invariance") -> LinearSystem:
    if variant == "invariance":
        system = build_constraints_invariance(tree, k)
    elif variant == "delta":
        system = build_constraints_delta(tree, k)
    else:
        raise ValueError(f"unknown constraint variant {variant!r}")
    system.extend(build_normalization(tree, k, target))
    return system


def preimage_of(tree, target: Mapping[int, object], k: int | None = None, variant: str = "invariance",
                reducer: Callable | None = None, progress: Callable | None = None) -> Polynomial:
    """A polynomial ``p`` with ``c(p) = target``.

    Parameters
    ----------
    tree : CosetTree
    target : dict
        node -> coefficient; all nodes of the same length ``k``.
    variant : {"invariance", "delta"}
    reducer : callable, optional
        Applied to the solution (free parameters set to zero), e.g. a
        Groebner normal form modulo the W-invariant ideal; the result is
        kept only if it is no larger.  It need not be ``W_Theta``-invariant,
        but its c-image is the same.

    Raises
    ------
    InconsistentSystemError, PreimageError
    """
    target = {u: Fraction(v) for u, v in target.items() if v}
    if k is None:
        ks = {tree.length[u] for u in target}
        if len(ks) != 1:
            raise ValueError("target must be a nonzero homogeneous class (or pass k)")
        k = ks.pop()
    system = build_system(tree, k, target, variant)
    if progress:
        progress(f"preimage codim {k}: {len(system)} equations, {system.ncols} unknowns")
    sol = solve(system, progress)
    p = system.generic.polynomial(sol.particular)
    if reducer is not None:
        # q - p lies in the invariant ideal, which c kills, so c(q) = c(p)
        # on every class, not only on the W^Theta ones checked below
        q = reducer(p)
        if len(q) <= len(p):
            p = q
    got = c_map(p, tree, check_invariance=False)
    if got != target:
        raise PreimageError(f"round trip failed in codim {k}")
    return p
