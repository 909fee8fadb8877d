"""
Basic Weyl invariants and Groebner bases of the invariant ideal.

Invariants are orbit power sums ``sum_{mu in O} mu^d``, where each weight
``mu`` of a W-orbit ``O`` is read as a linear form in ``w1..wl``.  For
every degree of W the candidates from the orbits of the fundamental
weights are tried in order of orbit size; a candidate is kept when it
raises the rank of the Jacobian matrix at a fixed rational point.
Algebraically independent homogeneous invariants whose degrees are the
degrees of W form a basic set.

Groebner bases use graded reverse lex with ``w1 < w2 < ... < wl`` and a
homogeneous Buchberger loop that processes S-pairs by degree, so a run
stopped at degree ``D`` yields a basis valid for normal forms in degrees
up to ``D``.
"""

from __future__ import annotations

import hashlib
import heapq
import logging
import random
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable

from . import kernels
from .cache import frac_to_str, str_to_frac
from .polyops import Polynomial, weyl_generator_action
from .rootdata import DynkinSpec, build_root_system
from .weyl import ParabolicSubset, WeylGroup, degrees_from_poincare

log = logging.getLogger(__name__)

ORDER = "grevlex"


# -- invariants ---------------------------------------------------------------

class InvariantSet:
    """Homogeneous W-invariants ``generators`` of the given ``degrees``.

    ``complete`` is False when the set was truncated at ``max_degree``.
    """

    def __init__(self, spec: DynkinSpec, generators, degrees, complete=True):
        self.spec = spec
        self.generators = list(generators)
        self.degrees = list(degrees)
        self.complete = complete

    def __len__(self):
        return len(self.generators)

    def check_invariance(self) -> bool:
        system = build_root_system(self.spec)
        return all(weyl_generator_action(system, i, g) == g
                   for g in self.generators for i in range(1, self.spec.rank + 1))

    def jacobian_rank(self, point=None) -> int:
        return _jacobian_rank(self.generators, self.spec.rank, point)

    def to_json(self) -> dict:
        return {
            "format": "chowcalc.invariants.v1",
            "family": self.spec.family,
            "rank": self.spec.rank,
            "degrees": self.degrees,
            "complete": self.complete,
            "generators": [polynomial_to_json(g) for g in self.generators],
        }

    @classmethod
    def from_json(cls, doc) -> "InvariantSet":
        spec = DynkinSpec(doc["family"], doc["rank"])
        gens = [polynomial_from_json(t, spec.rank) for t in doc["generators"]]
        return cls(spec, gens, doc["degrees"], doc["complete"])


def polynomial_to_json(p: Polynomial) -> list:
    return [[list(m), frac_to_str(c)] for m, c in p.sorted_terms()]


def polynomial_from_json(terms, nvars) -> Polynomial:
    return Polynomial(nvars, {tuple(m): str_to_frac(c) for m, c in terms})


def _primitive(p: Polynomial) -> Polynomial:
    """Scale to coprime integer coefficients with a positive leading term."""
    if not p:
        return p
    den = p.denominator()
    ints = [int(c * den) for c in p.terms.values()]
    g = 0
    for v in ints:
        g = gcd(g, v)
    _, lc = p.leading_term()
    s = Fraction(den, g) * (1 if lc > 0 else -1)
    return p * s


def _jacobian_rank(polys, nvars, point=None) -> int:
    if point is None:
        rng = random.Random(20240611)
        point = [Fraction(rng.randint(1, 997), rng.randint(1, 97)) for _ in range(nvars)]
    rows = [[g.derivative(i).evaluate(point) for i in range(1, nvars + 1)] for g in polys]
    return _rank(rows)


def _rank(rows) -> int:
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        p = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[rank], rows[p] = rows[p], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                f = rows[i][c] / rows[rank][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def orbit_power_sum(orbit, d: int, nvars: int) -> Polynomial:
    """``sum_{mu in orbit} mu^d`` with ``mu`` as a linear form in ``w``."""
    total = {}
    for mu in orbit:
        lin = {1 << (kernels.BITS * i): c for i, c in enumerate(mu) if c}
        acc = {0: 1}
        base = lin
        e = d
        while e:
            if e & 1:
                acc = kernels.multiply(acc, base)
            e >>= 1
            if e:
                base = kernels.multiply(base, base)
        kernels.add_into(total, acc)
    return Polynomial.from_packed(nvars, total)


def weight_orbit(group: WeylGroup, lam) -> list:
    out = []
    for layer in group.orbit_layers(lam):
        out.extend(mu for mu, _, _, _ in layer)
    return out


def fundamental_invariants(spec, max_degree: int | None = None,
                           progress: Callable | None = None) -> InvariantSet:
    """A basic set of W-invariants, optionally only those of degree ``<= max_degree``.

    Raises
    ------
    ArithmeticError
        If no candidate orbit yields an independent invariant of some degree.
    """
    if isinstance(spec, str):
        spec = DynkinSpec.parse(spec)
    group = WeylGroup(spec)
    n = spec.rank
    degrees = degrees_from_poincare(group.poincare_polynomial(), n)
    wanted = [d for d in degrees if max_degree is None or d <= max_degree]
    # orbit sizes from Poincare polynomials; orbits are only built when needed
    sizes = []
    for j in range(1, n + 1):
        theta = ParabolicSubset.omitting(n, [j])
        sizes.append((sum(group.quotient_poincare_polynomial(theta)), j))
    sizes.sort()
    built = {}

    def orbit(j):
        if j not in built:
            built[j] = weight_orbit(group, tuple(int(i == j - 1) for i in range(n)))
        return built[j]

    chosen = []
    chosen_deg = []
    for d in wanted:
        for size, j in sizes:
            cand = orbit_power_sum(orbit(j), d, n)
            if not cand:
                continue
            if _jacobian_rank(chosen + [cand], n) == len(chosen) + 1:
                chosen.append(_primitive(cand))
                chosen_deg.append(d)
                if progress:
                    progress(f"invariant of degree {d} from the orbit of w{j} (size {size})")
                break
        else:
            raise ArithmeticError(f"no independent invariant of degree {d} found for {spec}")
    return InvariantSet(spec, chosen, chosen_deg, complete=len(wanted) == len(degrees))


# -- Groebner bases ------------------------------------------------------------

def _key(m):
    # heap key: smallest key = largest monomial in grevlex (w1 < ... < wl)
    return (-sum(m),) + tuple(m)


def _lm(p: dict):
    return min(p, key=_key)


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _monic(p: dict) -> dict:
    c = p[_lm(p)]
    if c == 1:
        return p
    inv = 1 / c
    return {k: v * inv for k, v in p.items()}


class GroebnerBasis:
    """Reduced Groebner basis in grevlex (``w1 < ... < wl``).

    ``truncated_at`` is the degree bound of a truncated computation
    (``None`` for a complete basis); normal forms are trustworthy for
    polynomials up to that degree.
    """

    def __init__(self, nvars: int, basis: Iterable[Polynomial], truncated_at: int | None = None):
        self.nvars = nvars
        self.order = ORDER
        self.basis = list(basis)
        self.truncated_at = truncated_at
        self._polys = [dict(g.terms) for g in self.basis]
        self._lms = [_lm(p) for p in self._polys]

    def __len__(self):
        return len(self.basis)

    def leading_monomials(self) -> list:
        return list(self._lms)

    def _divisor(self, m):
        for idx, lm in enumerate(self._lms):
            if _divides(lm, m):
                return idx
        return None

    def reduce(self, p: Polynomial) -> Polynomial:
        if p.nvars != self.nvars:
            raise ValueError("polynomial and basis have different numbers of variables")
        return Polynomial(self.nvars, _normal_form(dict(p.terms), self._polys, self._lms))

    def is_standard(self, m) -> bool:
        return self._divisor(tuple(m)) is None

    def standard_monomials(self, degree: int) -> list:
        from .polyops import monomials_of_degree

        return [m for m in monomials_of_degree(self.nvars, degree) if self.is_standard(m)]

    def to_json(self, spec=None) -> dict:
        doc = {"format": "chowcalc.groebner.v1", "order": self.order, "nvars": self.nvars,
               "truncated_at": self.truncated_at,
               "basis": [polynomial_to_json(g) for g in self.basis]}
        if spec is not None:
            doc["family"], doc["rank"] = spec.family, spec.rank
        return doc

    @classmethod
    def from_json(cls, doc) -> "GroebnerBasis":
        n = doc["nvars"]
        return cls(n, [polynomial_from_json(t, n) for t in doc["basis"]], doc["truncated_at"])


def _normal_form(p: dict, polys, lms) -> dict:
    """Full reduction of ``p`` (dict exps -> Fraction) by a list of monic polys."""
    if not p:
        return {}
    heap = [_key(m) for m in p]
    heapq.heapify(heap)
    rem = {}
    while heap:
        k = heapq.heappop(heap)
        while heap and heap[0] == k:
            heapq.heappop(heap)
        m = k[1:]
        c = p.pop(m, None)
        if not c:
            continue
        for g, lm in zip(polys, lms):
            if _divides(lm, m):
                shift = tuple(x - y for x, y in zip(m, lm))
                for gm, gc in g.items():
                    if gm == lm:
                        continue
                    t = tuple(x + y for x, y in zip(gm, shift))
                    v = p.get(t, 0) - c * gc
                    if v:
                        if t not in p:
                            heapq.heappush(heap, _key(t))
                        p[t] = v
                    else:
                        p.pop(t, None)
                break
        else:
            rem[m] = c
    return rem


def groebner(generators: list, max_degree: int | None = None,
             progress: Callable | None = None) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal of homogeneous ``generators``.

    S-pairs are handled in order of degree; with ``max_degree`` every pair
    of larger degree is dropped, giving a basis that is exact through that
    degree.  Buchberger's coprime and chain criteria prune pairs.
    """
    if not generators:
        raise ValueError("groebner needs at least one generator")
    nvars = generators[0].nvars
    for g in generators:
        if not g.is_homogeneous():
            raise ValueError("generators must be homogeneous")
    G = []      # monic dict polys
    LM = []
    queue = []  # (degree, seq, kind, payload)
    seq = 0
    for g in generators:
        if g:
            heapq.heappush(queue, (g.degree(), seq, "gen", dict(g.terms)))
            seq += 1
    pending = set()
    processed = 0
    while queue:
        deg, _, kind, payload = heapq.heappop(queue)
        if max_degree is not None and deg > max_degree:
            break
        if kind == "pair":
            i, j = payload
            pending.discard((i, j))
            lcm = _lcm(LM[i], LM[j])
            if all(a == 0 or b == 0 for a, b in zip(LM[i], LM[j])):
                continue
            if _chain_skip(i, j, lcm, LM, pending):
                continue
            s = _spoly(G[i], LM[i], G[j], LM[j], lcm)
        else:
            s = payload
        r = _normal_form(s, G, LM)
        processed += 1
        if progress and processed % 50 == 0:
            progress(f"groebner: degree {deg}, {len(G)} elements, {len(queue)} queued")
        if not r:
            continue
        r = _monic(r)
        lm = _lm(r)
        k = len(G)
        G.append(r)
        LM.append(lm)
        for i in range(k):
            d = sum(_lcm(LM[i], lm))
            if max_degree is None or d <= max_degree:
                heapq.heappush(queue, (d, seq, "pair", (i, k)))
                pending.add((i, k))
                seq += 1
    basis = _autoreduce(G, LM)
    polys = [Polynomial(nvars, p) for p in basis]
    polys.sort(key=lambda q: _key(q.leading_term()[0]))
    return GroebnerBasis(nvars, polys, truncated_at=max_degree)


def _spoly(f, lf, g, lg, lcm):
    sf = tuple(a - b for a, b in zip(lcm, lf))
    sg = tuple(a - b for a, b in zip(lcm, lg))
    out = {}
    for m, c in f.items():
        out[tuple(x + y for x, y in zip(m, sf))] = c
    for m, c in g.items():
        t = tuple(x + y for x, y in zip(m, sg))
        v = out.get(t, 0) - c
        if v:
            out[t] = v
        else:
            out.pop(t, None)
    return out


def _chain_skip(i, j, lcm, LM, pending) -> bool:
    for k in range(len(LM)):
        if k in (i, j):
            continue
        if _divides(LM[k], lcm):
            a = (min(i, k), max(i, k))
            b = (min(j, k), max(j, k))
            if a not in pending and b not in pending:
                return True
    return False


def _autoreduce(G, LM):
    keep = []
    for i, lm in enumerate(LM):
        if any(j != i and _divides(LM[j], lm) and (LM[j] != lm or j < i) for j in range(len(LM))):
            continue
        keep.append(i)
    polys = [G[i] for i in keep]
    lms = [LM[i] for i in keep]
    out = []
    for idx, p in enumerate(polys):
        others = [q for t, q in enumerate(polys) if t != idx]
        olms = [m for t, m in enumerate(lms) if t != idx]
        lead = {lms[idx]: p[lms[idx]]}
        tail = {m: c for m, c in p.items() if m != lms[idx]}
        tail = _normal_form(tail, others, olms)
        lead.update(tail)
        out.append(_monic(lead))
    return out


def reduce(p: Polynomial, gb: GroebnerBasis) -> Polynomial:
    """Normal form of ``p`` modulo ``gb``."""
    return gb.reduce(p)


def invariant_ideal_basis(spec, max_degree: int | None = None, cache=None,
                          progress: Callable | None = None) -> GroebnerBasis:
    """Groebner basis of the ideal generated by the positive-degree invariants.

    Cached under ``groebner/<type>_<order>_<bound>_<hash>.json`` when a
    :class:`~chowcalc.cache.Cache` is given.
    """
    if isinstance(spec, str):
        spec = DynkinSpec.parse(spec)
    inv = None
    name = None
    if cache is not None:
        inv_name = f"invariants/{spec}_{max_degree or 'all'}.json"
        doc = cache.load(inv_name)
        if doc is not None:
            inv = InvariantSet.from_json(doc)
    if inv is None:
        inv = fundamental_invariants(spec, max_degree, progress)
        if cache is not None:
            cache.store(inv_name, inv.to_json())
    if cache is not None:
        h = hashlib.sha256(repr(inv.to_json()["generators"]).encode()).hexdigest()[:12]
        name = f"groebner/{spec}_{ORDER}_{max_degree or 'all'}_{h}.json"
        doc = cache.load(name)
        if doc is not None:
            return GroebnerBasis.from_json(doc)
    gb = groebner(inv.generators, max_degree, progress)
    if cache is not None:
        cache.store(name, gb.to_json(spec))
    return gb
