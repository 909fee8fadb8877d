"""
Weyl group elements, lengths and parabolic coset representatives.

An element ``w`` is stored by its action on the fundamental weights: the
matrix whose column ``j`` is ``w(omega_j)``.  That matrix is the equality
key; the reduced word is a certificate recomputed from ``w(rho)``.

Words are read left to right as products, so ``(i1, i2, ..., ik)`` is the
element ``s_i1 s_i2 ... s_ik``.  The canonical word of ``w`` strips the
smallest left descent at each step.

Coset representatives of ``W / W_Theta`` are enumerated through the orbit
of ``lambda_Theta = sum of omega_j over j not in Theta``; its stabiliser is
exactly ``W_Theta``, so orbit points are in bijection with ``W^Theta`` and
the orbit is walked by left multiplication ``u -> s_i u``, which raises the
length precisely when the ``i``-th coordinate of ``u(lambda_Theta)`` is
positive.  The full group is never built for ``E_7`` or ``E_8``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .rootdata import DynkinSpec, Root, RootSystem, build_root_system


def _identity(n):
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _left_simple(system: RootSystem, i: int, mat):
    """s_i * M for a row-major matrix M (0-based i)."""
    row = mat[i]
    alpha = system.simple_roots[i].weight
    return tuple(
        tuple(x - alpha[r] * y for x, y in zip(mat[r], row)) for r in range(system.rank)
    )


def _matmul(a, b):
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n)
    )


def _matvec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def _neg_count(system: RootSystem, mu) -> int:
    return sum(1 for r in system.positive_roots if sum(c * x for c, x in zip(r.coroot, mu)) < 0)


def _descend(system: RootSystem, mu) -> tuple:
    """Letters i1, i2, ... with w = s_i1 s_i2 ... for the element sending rho to mu."""
    mu = list(mu)
    word = []
    n = system.rank
    while True:
        for i in range(n):
            if mu[i] < 0:
                break
        else:
            return tuple(word)
        word.append(i + 1)
        p = mu[i]
        alpha = system.simple_roots[i].weight
        mu = [x - p * a for x, a in zip(mu, alpha)]


class WeylElement:
    """An element of the Weyl group of a fixed root system.

    Parameters
    ----------
    system : RootSystem
    matrix : tuple of tuples
        Row-major integer matrix; column ``j`` is ``w(omega_j)``.
    word : tuple of int, optional
        A reduced word (1-based letters).  Recomputed when omitted.
    """

    __slots__ = ("system", "matrix", "_word", "_hash")

    def __init__(self, system: RootSystem, matrix, word=None):
        self.system = system
        self.matrix = tuple(tuple(int(x) for x in row) for row in matrix)
        self._word = tuple(word) if word is not None else None
        self._hash = hash((system.spec, self.matrix))

    @property
    def images(self) -> tuple:
        """``(w(omega_1), ..., w(omega_l))`` as weight tuples."""
        n = self.system.rank
        return tuple(tuple(self.matrix[i][j] for i in range(n)) for j in range(n))

    @property
    def word(self) -> tuple:
        if self._word is None:
            self._word = _descend(self.system, self.act(self.system.rho))
        return self._word

    def __len__(self):
        return len(self.word)

    @property
    def length(self) -> int:
        return _neg_count(self.system, self.act(self.system.rho))

    def act(self, lam) -> tuple:
        return _matvec(self.matrix, lam)

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.system.spec == other.system.spec and self.matrix == other.matrix

    def __hash__(self):
        return self._hash

    def __mul__(self, other):
        return compose(self, other)

    def inverse(self) -> "WeylElement":
        g = WeylGroup(self.system.spec)
        return g.from_word(reversed(self.word))

    def is_identity(self) -> bool:
        return self.matrix == _identity(self.system.rank)

    def __repr__(self):
        w = "".join(f"s{i}" for i in self.word) or "e"
        return f"WeylElement({self.system.spec}, {w})"


def compose(u: WeylElement, v: WeylElement) -> WeylElement:
    """The product ``u v``; ``(uv)(lam) = u(v(lam))``."""
    if u.system.spec != v.system.spec:
        raise ValueError(f"cannot compose elements of {u.system.spec} and {v.system.spec}")
    return WeylElement(u.system, _matmul(u.matrix, v.matrix))


@dataclass(frozen=True)
class ParabolicSubset:
    """A subset ``Theta`` of the simple roots, as 1-based indices."""

    rank: int
    theta: frozenset

    def __post_init__(self):
        object.__setattr__(self, "theta", frozenset(int(i) for i in self.theta))
        bad = [i for i in self.theta if not 1 <= i <= self.rank]
        if bad:
            raise ValueError(f"simple-root indices {sorted(bad)} out of range 1..{self.rank}")

    @classmethod
    def omitting(cls, rank: int, omitted: Iterable[int]) -> "ParabolicSubset":
        """``Theta = Pi minus {alpha_i : i in omitted}``; ``P_i`` is ``omitting(rank, [i])``."""
        omitted = set(int(i) for i in omitted)
        bad = [i for i in omitted if not 1 <= i <= rank]
        if bad:
            raise ValueError(f"simple-root indices {sorted(bad)} out of range 1..{rank}")
        return cls(rank, frozenset(range(1, rank + 1)) - omitted)

    @classmethod
    def parse(cls, rank: int, text: str) -> "ParabolicSubset":
        """Parse ``"P7"``, ``"7"`` or ``"1,3"`` as the list of omitted nodes; ``"B"`` is the Borel."""
        t = text.strip().upper()
        if t in ("B", "BOREL", ""):
            return cls.omitting(rank, range(1, rank + 1))
        if t.startswith("P"):
            t = t[1:]
        try:
            omitted = [int(x) for x in t.replace("_", ",").split(",") if x.strip()]
        except ValueError:
            raise ValueError(f"cannot parse parabolic {text!r}") from None
        return cls.omitting(rank, omitted)

    @property
    def omitted(self) -> tuple:
        return tuple(i for i in range(1, self.rank + 1) if i not in self.theta)

    def dominant_weight(self) -> tuple:
        """``lambda_Theta``; its stabiliser in W is W_Theta."""
        return tuple(0 if i in self.theta else 1 for i in range(1, self.rank + 1))

    def label(self) -> str:
        om = self.omitted
        if len(om) == self.rank:
            return "B"
        return "P" + ",".join(str(i) for i in om)

    def __contains__(self, i):
        return i in self.theta

    def __iter__(self):
        return iter(sorted(self.theta))

    def __len__(self):
        return len(self.theta)


class WeylGroup:
    """The Weyl group of a simple root system, enumerated lazily."""

    max_full_size = 2_000_000

    def __init__(self, spec: DynkinSpec):
        if isinstance(spec, str):
            spec = DynkinSpec.parse(spec)
        self.spec = spec
        self.system = build_root_system(spec)
        self.rank = spec.rank
        n = self.rank
        self._gens = [_left_simple(self.system, i, _identity(n)) for i in range(n)]

    def __repr__(self):
        return f"WeylGroup({self.spec})"

    # -- elements -------------------------------------------------------

    def identity(self) -> WeylElement:
        return WeylElement(self.system, _identity(self.rank), ())

    def simple_reflection(self, i: int) -> WeylElement:
        if not 1 <= i <= self.rank:
            raise ValueError(f"no simple reflection s_{i} in rank {self.rank}")
        return WeylElement(self.system, self._gens[i - 1], (i,))

    def from_word(self, word: Iterable[int]) -> WeylElement:
        word = list(word)
        mat = _identity(self.rank)
        for i in reversed(word):
            if not 1 <= i <= self.rank:
                raise ValueError(f"letter {i} out of range")
            mat = _left_simple(self.system, i - 1, mat)
        return WeylElement(self.system, mat)

    def from_rho_image(self, mu) -> WeylElement:
        """The unique element sending ``rho`` to the regular weight ``mu``."""
        return self.from_word(_descend(self.system, mu))

    def length(self, w: WeylElement) -> int:
        return w.length

    def compose(self, u: WeylElement, v: WeylElement) -> WeylElement:
        return compose(u, v)

    def reflection_of_root(self, beta: Root) -> WeylElement:
        """``s_beta``; column j is ``omega_j - <beta^vee, omega_j> beta``."""
        if not self.system.is_root(beta):
            raise ValueError("not a root of this system")
        n = self.rank
        mat = tuple(
            tuple(int(i == j) - beta.coroot[j] * beta.weight[i] for j in range(n)) for i in range(n)
        )
        return WeylElement(self.system, mat)

    def longest_element(self, theta: ParabolicSubset | None = None) -> WeylElement:
        """``w_Theta``, the longest element of ``W_Theta`` (``w_0`` when Theta is everything)."""
        if theta is None:
            theta = ParabolicSubset(self.rank, frozenset(range(1, self.rank + 1)))
        self._check(theta)
        mu = list(self.system.rho)
        word = []
        while True:
            for i in sorted(theta.theta):
                if mu[i - 1] > 0:
                    break
            else:
                break
            word.append(i)
            mu = list(self.system.simple_reflection(i, mu))
        # word lists s_{i1} first applied to rho, so the element is s_ik ... s_i1
        return self.from_word(reversed(word))

    # -- enumeration ----------------------------------------------------

    def orbit_layers(self, lam) -> Iterator[list]:
        """Yield the W-orbit of a dominant weight layer by layer.

        Each layer is a list of ``(mu, parent_mu, letter, matrix)`` where
        ``mu = u(lam)`` for the minimal representative ``u`` with matrix
        ``matrix`` and ``u = s_letter * parent``.
        """
        lam = tuple(lam)
        if any(x < 0 for x in lam):
            raise ValueError("orbit enumeration starts at a dominant weight")
        seen = {lam}
        layer = [(lam, None, None, _identity(self.rank))]
        while layer:
            yield layer
            nxt = []
            for mu, _, _, mat in layer:
                for i in range(self.rank):
                    p = mu[i]
                    if p > 0:
                        nu = self.system.simple_reflection(i + 1, mu)
                        if nu not in seen:
                            seen.add(nu)
                            nxt.append((nu, mu, i + 1, _left_simple(self.system, i, mat)))
            layer = nxt

    def elements_of_length(self, k: int) -> list:
        if not 0 <= k <= self.system.num_positive:
            raise ValueError(f"length {k} out of range")
        for depth, layer in enumerate(self.orbit_layers(self.system.rho)):
            if depth == k:
                return [WeylElement(self.system, m) for _, _, _, m in layer]
        return []

    def elements(self) -> list:
        if self.order() > self.max_full_size:
            raise ValueError(f"W({self.spec}) has {self.order()} elements; refusing to enumerate")
        out = []
        for layer in self.orbit_layers(self.system.rho):
            out.extend(WeylElement(self.system, m) for _, _, _, m in layer)
        return out

    def minimal_coset_reps(self, theta: ParabolicSubset, cache=None) -> list:
        """``W^Theta`` graded by length, in breadth-first discovery order."""
        self._check(theta)
        key = None
        if cache is not None:
            key = coset_cache_name(self.spec, theta)
            doc = cache.load(key)
            if doc is not None and doc.get("format") == COSET_CACHE_FORMAT:
                return [self.from_word(w) for w in doc["words"]]
        out = []
        for layer in self.orbit_layers(theta.dominant_weight()):
            out.extend(WeylElement(self.system, m) for _, _, _, m in layer)
        if cache is not None:
            cache.store(key, coset_cache_document(self.spec, theta, out))
        return out

    def maximal_coset_reps(self, theta: ParabolicSubset) -> list:
        wt = self.longest_element(theta)
        return [compose(v, wt) for v in self.minimal_coset_reps(theta)]

    def is_minimal_rep(self, w: WeylElement, theta: ParabolicSubset) -> bool:
        lw = w.length
        return all(compose(w, self.simple_reflection(i)).length == lw + 1 for i in theta)

    # -- counting -------------------------------------------------------

    def poincare_polynomial(self, theta: ParabolicSubset | None = None) -> list:
        """Coefficients of ``sum_w q^l(w)`` over ``W_Theta`` (all of W by default)."""
        if theta is None:
            support = set(range(1, self.rank + 1))
        else:
            self._check(theta)
            support = set(theta.theta)
        heights = [
            r.height
            for r in self.system.positive_roots
            if all(c == 0 or i + 1 in support for i, c in enumerate(r.simple))
        ]
        return macdonald_poincare(heights)

    def quotient_poincare_polynomial(self, theta: ParabolicSubset) -> list:
        """Betti numbers of ``G/P_Theta`` as ``P_W / P_{W_Theta}``."""
        return poly_exact_div(self.poincare_polynomial(), self.poincare_polynomial(theta))

    def order(self) -> int:
        return sum(self.poincare_polynomial())

    def _check(self, theta: ParabolicSubset):
        if theta.rank != self.rank:
            raise ValueError(f"parabolic subset of rank {theta.rank} used with {self.spec}")


class CosetTree:
    """``W^Theta`` as a breadth-first tree in the orbit of ``lambda_Theta``.

    Node ``k`` is a minimal representative ``u_k``; node 0 is the identity
    and, for ``k > 0``, ``u_k = s_{letter[k]} u_{parent[k]}`` with length one
    more than its parent.  ``weights[k] = u_k(lambda_Theta)``.  The reduced
    word of ``u_k`` is ``letter[k]`` followed by the word of its parent, so
    ``Delta_{u_k} = Delta_{letter[k]} o Delta_{u_parent}``.

    Attributes
    ----------
    up : list of tuple
        ``up[k][a]`` (0-based ``a``) is the node ``s_{a+1} u_k`` when that
        lies in ``W^Theta`` with larger length, else ``-1``.

    With ``max_length`` the tree stops at that length (and ``dim`` is the
    truncation length, not the dimension of G/P).
    """

    def __init__(self, group: "WeylGroup", theta: ParabolicSubset, max_length: int | None = None):
        group._check(theta)
        self.group = group
        self.system = group.system
        self.theta = theta
        self.rank = n = group.rank
        self.weights = []
        self.parent = []
        self.letter = []
        self.length = []
        self.matrices = []
        self.index = {}
        for depth, layer in enumerate(group.orbit_layers(theta.dominant_weight())):
            if max_length is not None and depth > max_length:
                break
            for mu, pmu, a, mat in layer:
                self.index[mu] = len(self.weights)
                self.weights.append(mu)
                self.parent.append(-1 if pmu is None else self.index[pmu])
                self.letter.append(0 if a is None else a)
                self.length.append(depth)
                self.matrices.append(mat)
        self.dim = self.length[-1]
        self.by_length = [[] for _ in range(self.dim + 1)]
        for k, l in enumerate(self.length):
            self.by_length[l].append(k)
        up = []
        for mu in self.weights:
            row = []
            for a in range(n):
                if mu[a] > 0:
                    row.append(self.index.get(self.system.simple_reflection(a + 1, mu), -1))
                else:
                    row.append(-1)
            up.append(tuple(row))
        self.up = up
        self._words = {}

    def __len__(self):
        return len(self.weights)

    def nodes_of_length(self, k: int) -> list:
        if 0 <= k <= self.dim:
            return self.by_length[k]
        return []

    def word(self, k: int) -> tuple:
        w = self._words.get(k)
        if w is None:
            w = () if k == 0 else (self.letter[k],) + self.word(self.parent[k])
            self._words[k] = w
        return w

    def element(self, k: int) -> WeylElement:
        return WeylElement(self.system, self.matrices[k], self.word(k))

    def node_of(self, w: WeylElement) -> int:
        """Node of the coset ``w W_Theta``."""
        return self.index[w.act(self.theta.dominant_weight())]

    def rho_image(self, k: int) -> tuple:
        return _matvec(self.matrices[k], self.system.rho)

    # flat arrays for the kernels (letters 0-based, root gets 0)
    def parent_list(self) -> list:
        return list(self.parent)

    def letter_list(self) -> list:
        return [max(a - 1, 0) for a in self.letter]

    def length_list(self) -> list:
        return list(self.length)

    def up_table(self) -> list:
        return [list(r) for r in self.up]


# -- Poincare polynomials via root heights -------------------------------

def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_exact_div(num, den) -> list:
    num = list(num)
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    den = list(den)
    while den and den[-1] == 0:
        den.pop()
    if not den or den[0] == 0 and len(den) == 1:
        raise ZeroDivisionError("division by the zero polynomial")
    q = [0] * max(len(num) - len(den) + 1, 1)
    r = num[:]
    lead = den[-1]
    for k in range(len(num) - len(den), -1, -1):
        c, rem = divmod(r[k + len(den) - 1], lead)
        if rem:
            raise ArithmeticError("inexact polynomial division")
        q[k] = c
        for j, d in enumerate(den):
            r[k + j] -= c * d
    if any(r):
        raise ArithmeticError("inexact polynomial division")
    return q


def macdonald_poincare(heights: Iterable[int]) -> list:
    """``prod_beta (1 - q^(ht+1)) / (1 - q^ht)`` over positive roots of the given heights."""
    num, den = [1], [1]
    for h in heights:
        num = _pmul(num, [1] + [0] * h + [-1])
        den = _pmul(den, [1] + [0] * (h - 1) + [-1])
    return poly_exact_div(num, den)


def degrees_from_poincare(poly, rank: int) -> list:
    """Factor ``P(q) = prod_i (1 - q^d_i) / (1 - q)^rank`` and return the sorted ``d_i``.

    After multiplying by ``(1 - q)^rank`` the lowest nonconstant term of the
    product is ``-q^d`` for the smallest remaining degree ``d``.
    """
    p = list(poly)
    for _ in range(rank):
        p = _pmul(p, [1, -1])
    degs = []
    while True:
        while len(p) > 1 and p[-1] == 0:
            p.pop()
        if len(p) == 1:
            break
        d = next(i for i in range(1, len(p)) if p[i])
        degs.append(d)
        p = poly_exact_div(p, [1] + [0] * (d - 1) + [-1])
    if p != [1] or len(degs) != rank:
        raise ArithmeticError("polynomial is not a product of q-integers")
    return sorted(degs)


# -- cache documents -------------------------------------------------------

COSET_CACHE_FORMAT = "chowcalc.cosets.v1"


def coset_cache_name(spec: DynkinSpec, theta: ParabolicSubset) -> str:
    return f"cosets/{spec}_{theta.label().replace(',', '-')}.json"


def coset_cache_document(spec: DynkinSpec, theta: ParabolicSubset, reps) -> dict:
    """JSON schema: ``{"format", "family", "rank", "theta": [...], "words": [[...], ...]}``."""
    return {
        "format": COSET_CACHE_FORMAT,
        "family": spec.family,
        "rank": spec.rank,
        "theta": sorted(theta.theta),
        "words": [list(w.word) for w in reps],
    }
