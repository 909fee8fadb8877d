"""
Root systems and weight-lattice data for the simple Dynkin types.

Conventions
-----------
Simple roots are numbered 1..rank following Bourbaki:

* ``A_n``: chain 1-2-...-n.
* ``B_n``: chain, ``alpha_n`` short.  ``C_n``: chain, ``alpha_n`` long.
* ``D_n``: chain 1-...-(n-2), with n-1 and n both attached to n-2.
* ``E_6, E_7, E_8``: chain 1-3-4-5-6-7-8, with node 2 attached to node 4.
* ``F_4``: 1-2=>3-4 with ``alpha_1, alpha_2`` short and ``alpha_3, alpha_4`` long.
* ``G_2``: ``alpha_1`` long, ``alpha_2`` short.

The F4 and G2 length assignments are the ones under which
``s_3(w3) = 2 w2 - w3 + w4`` and ``s_4(w4) = w3 - w4`` hold in F4.

The Cartan matrix is ``a[i][j] = <alpha_i^vee, alpha_j>``.  Weights are
stored as integer tuples in the fundamental-weight basis, and the simple
root ``alpha_j`` has weight coordinates equal to *column* ``j`` of the
Cartan matrix.  Coroots are stored in the simple-coroot basis so that
``<beta^vee, lam>`` is a plain dot product with the weight coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import re

import numpy as np

FAMILIES = "ABCDEFG"

Weight = tuple  # fundamental-weight coordinates (ints or Fractions)


@dataclass(frozen=True, order=True)
class DynkinSpec:
    family: str
    rank: int

    def __post_init__(self):
        f, n = self.family, self.rank
        if f not in FAMILIES or len(f) != 1:
            raise ValueError(f"unknown Dynkin family {f!r}")
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"rank must be a positive integer, got {n!r}")
        ok = {
            "A": n >= 1,
            "B": n >= 2,
            "C": n >= 2,
            "D": n >= 3,
            "E": n in (6, 7, 8),
            "F": n == 4,
            "G": n == 2,
        }[f]
        if not ok:
            raise ValueError(f"invalid rank {n} for family {f}")

    @classmethod
    def parse(cls, text: str) -> "DynkinSpec":
        """Parse ``"E8"``, ``"e8"`` or ``"E_8"``."""
        m = re.fullmatch(r"\s*([A-Ga-g])_?(\d+)\s*", text)
        if not m:
            raise ValueError(f"cannot parse Dynkin type {text!r}")
        return cls(m.group(1).upper(), int(m.group(2)))

    def __str__(self):
        return f"{self.family}{self.rank}"


def cartan_matrix(spec: DynkinSpec) -> tuple:
    n = spec.rank
    a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

    def link(i, j, aij=-1, aji=-1):
        # 1-based node numbers
        a[i - 1][j - 1] = aij
        a[j - 1][i - 1] = aji

    f = spec.family
    if f == "A":
        for i in range(1, n):
            link(i, i + 1)
    elif f == "B":
        for i in range(1, n - 1):
            link(i, i + 1)
        link(n - 1, n, -1, -2)
    elif f == "C":
        for i in range(1, n - 1):
            link(i, i + 1)
        link(n - 1, n, -2, -1)
    elif f == "D":
        for i in range(1, n - 1):
            link(i, i + 1)
        link(n - 2, n)
    elif f == "E":
        link(1, 3)
        link(2, 4)
        for i in range(3, n):
            link(i, i + 1)
    elif f == "F":
        link(1, 2)
        link(2, 3, -2, -1)
        link(3, 4)
    elif f == "G":
        link(1, 2, -1, -3)
    return tuple(tuple(row) for row in a)


def _symmetrizer(a):
    """d_i with d_i a_ij = d_j a_ji, normalised so the shortest root has d = 1."""
    n = len(a)
    d = [None] * n
    d[0] = Fraction(1)
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(n):
            if a[i][j] and d[j] is None:
                d[j] = d[i] * a[i][j] / a[j][i]
                stack.append(j)
    if any(x is None for x in d):
        raise ValueError("Dynkin diagram is not connected")
    m = min(d)
    return tuple(x / m for x in d)


def is_finite_type(a) -> bool:
    """Leading principal minors of the symmetrised matrix are all positive."""
    d = _symmetrizer(a)
    n = len(a)
    s = [[d[i] * a[i][j] for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        if _det([row[:k] for row in s[:k]]) <= 0:
            return False
    return True


def _det(m):
    m = [[Fraction(x) for x in row] for row in m]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


@dataclass(frozen=True)
class Root:
    simple: tuple  # coordinates in the simple-root basis
    weight: tuple  # coordinates in the fundamental-weight basis
    coroot: tuple  # beta^vee in the simple-coroot basis

    @property
    def positive(self) -> bool:
        return any(c > 0 for c in self.simple)

    @property
    def height(self) -> int:
        return sum(self.simple)

    def __neg__(self):
        return Root(tuple(-c for c in self.simple),
                    tuple(-c for c in self.weight),
                    tuple(-c for c in self.coroot))


class RootSystem:
    """A finite crystallographic root system with pairing tables.

    ``positive_roots`` is ordered by height and then by decreasing
    simple-root coordinates, so the first ``rank`` entries are
    ``alpha_1, ..., alpha_rank`` and two constructions give identical lists.
    ``coroot_matrix`` (N x rank) and ``root_weights`` (N x rank) hold the
    positive coroots and roots as integer arrays for vectorised pairings.
    """

    def __init__(self, spec: DynkinSpec):
        self.spec = spec
        self.rank = n = spec.rank
        self.cartan = a = cartan_matrix(spec)
        if not is_finite_type(a):
            raise ValueError(f"{spec} Cartan matrix is not of finite type")
        self.symmetrizer = d = _symmetrizer(a)

        found = set()
        frontier = []
        for j in range(n):
            e = tuple(int(i == j) for i in range(n))
            found.add(e)
            frontier.append(e)
        while frontier:
            nxt = []
            for b in frontier:
                w = self._simple_to_weight(b)
                for i in range(n):
                    # s_i(beta) = beta - <alpha_i^vee, beta> alpha_i
                    if w[i] < 0:
                        c = list(b)
                        c[i] -= w[i]
                        c = tuple(c)
                        if c not in found:
                            found.add(c)
                            nxt.append(c)
            frontier = nxt
        ordered = sorted(found, key=lambda b: (sum(b), tuple(-x for x in b)))
        roots = []
        for b in ordered:
            norm = sum(b[i] * b[j] * d[i] * a[i][j] for i in range(n) for j in range(n)) / 2
            co = [b[j] * d[j] / norm for j in range(n)]
            assert all(x.denominator == 1 for x in co)
            roots.append(Root(b, self._simple_to_weight(b), tuple(int(x) for x in co)))
        self.positive_roots = tuple(roots)
        self.roots = self.positive_roots + tuple(-r for r in self.positive_roots)
        self.simple_roots = tuple(roots[:n])
        self._index = {r.simple: k for k, r in enumerate(self.roots)}
        self.coroot_matrix = np.array([r.coroot for r in roots], dtype=np.int64)
        self.root_weights = np.array([r.weight for r in roots], dtype=np.int64)

    def _simple_to_weight(self, b):
        a = self.cartan
        n = self.rank
        return tuple(sum(a[i][j] * b[j] for j in range(n)) for i in range(n))

    def __repr__(self):
        return f"RootSystem({self.spec})"

    @property
    def num_positive(self) -> int:
        return len(self.positive_roots)

    @property
    def rho(self) -> tuple:
        return (1,) * self.rank

    @property
    def highest_root(self) -> Root:
        return self.positive_roots[-1]

    def simple_root_weight(self, i: int) -> tuple:
        """alpha_i (1-based) in fundamental-weight coordinates."""
        return self.simple_roots[i - 1].weight

    def root(self, simple_coords) -> Root:
        try:
            return self.roots[self._index[tuple(simple_coords)]]
        except KeyError:
            raise ValueError(f"{tuple(simple_coords)} is not a root of {self.spec}") from None

    def is_root(self, beta: Root) -> bool:
        return beta.simple in self._index

    def pairing(self, beta: Root, lam) -> int | Fraction:
        if len(lam) != self.rank or len(beta.coroot) != self.rank:
            raise ValueError("dimension mismatch")
        return sum(c * x for c, x in zip(beta.coroot, lam))

    def reflect(self, beta: Root, lam) -> tuple:
        p = self.pairing(beta, lam)
        return tuple(x - p * b for x, b in zip(lam, beta.weight))

    def simple_reflection(self, i: int, lam) -> tuple:
        """s_i(lam) for 1-based i; cheaper than ``reflect`` for simple roots."""
        p = lam[i - 1]
        if not p:
            return tuple(lam)
        col = self.simple_roots[i - 1].weight
        return tuple(x - p * c for x, c in zip(lam, col))

    def coxeter_number(self) -> int:
        """Order of the Coxeter element s_1 s_2 ... s_n, found by iterating it."""
        n = self.rank
        # columns are images of omega_j; s_i(omega_j) = omega_j - delta_ij alpha_i
        c = np.eye(n, dtype=np.int64)
        for i in range(n):
            s = np.eye(n, dtype=np.int64)
            s[:, i] -= np.array(self.simple_roots[i].weight, dtype=np.int64)
            c = c @ s
        p = c.copy()
        h = 1
        ident = np.eye(n, dtype=np.int64)
        while not np.array_equal(p, ident):
            p = p @ c
            h += 1
        return h


@lru_cache(maxsize=None)
def build_root_system(spec: DynkinSpec) -> RootSystem:
    return RootSystem(spec)


def coroot_pairing(system: RootSystem, beta: Root, lam) -> int | Fraction:
    if not system.is_root(beta):
        raise ValueError("root does not belong to this system")
    return system.pairing(beta, lam)


def reflect_weight(system: RootSystem, beta: Root, lam) -> tuple:
    if not system.is_root(beta):
        raise ValueError("root does not belong to this system")
    return system.reflect(beta, lam)


def fundamental_weight(rank: int, i: int) -> tuple:
    return tuple(int(j == i - 1) for j in range(rank))
