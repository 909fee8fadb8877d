"""
Polynomials in the fundamental weights, the Weyl action, divided
differences and the characteristic map.

The symmetric algebra of the weight lattice is ``Q[w1, ..., wl]`` with
``wi`` the fundamental weight ``omega_i``.  The simple reflection ``s_a``
fixes ``w_j`` for ``j != a`` and sends ``w_a`` to ``y_a = w_a - alpha_a``,
so on a term ``w_a^e r`` (``r`` free of ``w_a``)::

    s_a(w_a^e r)     = y_a^e r
    Delta_a(w_a^e r) = r * sum_{t<e} w_a^t y_a^(e-1-t)

The second line is ``(u - s_a u) / alpha_a`` with the division done in
closed form.  :func:`divided_difference_by_division` performs the literal
division and asserts a zero remainder; tests use it to pin the
convention.

Hot loops run on packed integer polynomials through :mod:`chowcalc.kernels`.
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from . import kernels
from .rootdata import RootSystem, build_root_system

__all__ = [
    "Polynomial",
    "WeylOperators",
    "weyl_operators",
    "weyl_generator_action",
    "divided_difference",
    "divided_difference_by_division",
    "delta_w",
    "c_map",
    "c_map_full",
    "giambelli_full",
    "leibniz_operator",
    "c_map_product",
    "monomials_of_degree",
    "grevlex_key",
    "parse_polynomial",
    "format_polynomial",
]


def grevlex_key(exps) -> tuple:
    """Sort key for graded reverse lex with ``w1 < w2 < ... < wl``."""
    return (sum(exps),) + tuple(-e for e in exps)


def monomials_of_degree(nvars: int, k: int) -> list:
    """All exponent vectors of total degree ``k``, in decreasing grevlex order."""
    out = []
    for c in itertools.combinations_with_replacement(range(nvars), k):
        e = [0] * nvars
        for i in c:
            e[i] += 1
        out.append(tuple(e))
    out.sort(key=grevlex_key, reverse=True)
    return out


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"unsupported coefficient {x!r}")


class Polynomial:
    """Sparse polynomial over Q in ``nvars`` variables ``w[1]..w[nvars]``.

    ``terms`` maps exponent tuples to nonzero :class:`~fractions.Fraction`
    coefficients.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | None = None):
        self.nvars = nvars
        t = {}
        if terms:
            for k, v in terms.items():
                k = tuple(int(e) for e in k)
                if len(k) != nvars or any(e < 0 for e in k):
                    raise ValueError(f"bad exponent vector {k} for {nvars} variables")
                v = _frac(v)
                if v:
                    t[k] = t.get(k, 0) + v
                    if not t[k]:
                        del t[k]
        self.terms = t

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, nvars):
        return cls(nvars)

    @classmethod
    def constant(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars, i):
        """``w[i]`` for 1-based ``i``."""
        if not 1 <= i <= nvars:
            raise ValueError(f"variable index {i} out of range")
        return cls(nvars, {tuple(int(j == i - 1) for j in range(nvars)): 1})

    @classmethod
    def linear_form(cls, coeffs):
        n = len(coeffs)
        return cls(n, {tuple(int(j == i) for j in range(n)): c for i, c in enumerate(coeffs) if c})

    @classmethod
    def from_packed(cls, nvars, packed: Mapping[int, int], denominator=1):
        p = cls(nvars)
        den = Fraction(denominator)
        p.terms = {kernels.unpack(k, nvars): Fraction(v) / den for k, v in packed.items() if v}
        return p

    # -- queries --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(k) for k in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(k) for k in self.terms}) <= 1

    def homogeneous_part(self, k: int) -> "Polynomial":
        return Polynomial(self.nvars, {m: c for m, c in self.terms.items() if sum(m) == k})

    def coefficient(self, exps) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda kv: grevlex_key(kv[0]), reverse=True)

    def leading_term(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        m = max(self.terms, key=grevlex_key)
        return m, self.terms[m]

    def denominator(self) -> int:
        d = 1
        for v in self.terms.values():
            d = d * v.denominator // math.gcd(d, v.denominator)
        return d

    def to_packed(self):
        """Return ``(packed, den)`` with ``self = packed / den`` and integer coefficients."""
        den = self.denominator()
        return {kernels.pack(k): int(v * den) for k, v in self.terms.items()}, den

    # -- arithmetic -----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials in different numbers of variables")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self.terms)
        for k, v in other.terms.items():
            x = t.get(k, 0) + v
            if x:
                t[k] = x
            else:
                t.pop(k, None)
        r = Polynomial(self.nvars)
        r.terms = t
        return r

    __radd__ = __add__

    def __neg__(self):
        r = Polynomial(self.nvars)
        r.terms = {k: -v for k, v in self.terms.items()}
        return r

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial(self.nvars)
            r = Polynomial(self.nvars)
            r.terms = {k: v * other for k, v in self.terms.items()}
            return r
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return Polynomial(self.nvars)
        if self.degree() + other.degree() <= kernels.MASK:
            a, da = self.to_packed()
            b, db = other.to_packed()
            return Polynomial.from_packed(self.nvars, kernels.multiply(a, b), da * db)
        t = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(x + y for x, y in zip(k1, k2))
                t[k] = t.get(k, 0) + v1 * v2
        return Polynomial(self.nvars, t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        if isinstance(other, Polynomial) and other.degree() == 0:
            return self * (1 / other.constant_term())
        return NotImplemented

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a nonnegative integer")
        r = Polynomial.constant(self.nvars, 1)
        b = self
        while e:
            if e & 1:
                r = r * b
            e >>= 1
            if e:
                b = b * b
        return r

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.nvars, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def substitute_linear(self, images) -> "Polynomial":
        """Replace ``w[j+1]`` by the linear form with coefficient vector ``images[j]``."""
        forms = [Polynomial.linear_form(tuple(im)) for im in images]
        out = Polynomial(self.nvars)
        cache = {}
        for k, v in self.terms.items():
            term = Polynomial.constant(self.nvars, v)
            for j, e in enumerate(k):
                if e:
                    key = (j, e)
                    if key not in cache:
                        cache[key] = forms[j] ** e
                    term = term * cache[key]
            out = out + term
        return out

    def evaluate(self, point) -> Fraction:
        total = Fraction(0)
        for k, v in self.terms.items():
            t = v
            for x, e in zip(point, k):
                if e:
                    t *= Fraction(x) ** e
            total += t
        return total

    def derivative(self, i: int) -> "Polynomial":
        """Partial derivative in ``w[i]`` (1-based)."""
        j = i - 1
        t = {}
        for k, v in self.terms.items():
            if k[j]:
                kk = k[:j] + (k[j] - 1,) + k[j + 1:]
                t[kk] = v * k[j]
        return Polynomial(self.nvars, t)

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)!r})"

    def __str__(self):
        return format_polynomial(self)

    @classmethod
    def parse(cls, text: str, nvars: int) -> "Polynomial":
        return parse_polynomial(text, nvars)


# -- Weyl operators on packed polynomials -----------------------------------

class WeylOperators:
    """Substitution tables for ``s_a`` and ``Delta_a`` on packed polynomials.

    ``ytab[a][e]`` is ``y_a^e`` and ``htab[a][e]`` is
    ``sum_{t<e} w_a^t y_a^(e-1-t)`` for 0-based ``a``; tables grow on demand.
    """

    def __init__(self, system: RootSystem):
        self.system = system
        self.rank = n = system.rank
        self.ytab = [[{0: 1}] for _ in range(n)]
        self.htab = [[{}] for _ in range(n)]
        self._y = []
        self._x = []
        for a in range(n):
            alpha = system.simple_roots[a].weight
            y = {}
            for i in range(n):
                c = int(i == a) - alpha[i]
                if c:
                    y[1 << (kernels.BITS * i)] = c
            self._y.append(y)
            self._x.append({1 << (kernels.BITS * a): 1})
        self.maxdeg = 0

    def ensure(self, deg: int):
        if deg > kernels.MASK:
            raise OverflowError(f"degree {deg} exceeds the packed encoding")
        for e in range(self.maxdeg + 1, deg + 1):
            for a in range(self.rank):
                ys = self.ytab[a]
                ys.append(kernels.multiply(ys[-1], self._y[a]))
                # H_e = x^(e-1) + y * H_(e-1)
                h = kernels.multiply(self._y[a], self.htab[a][-1])
                xp = {(e - 1) << (kernels.BITS * a): 1}
                kernels.add_into(h, xp)
                self.htab[a].append(h)
        self.maxdeg = max(self.maxdeg, deg)

    def _degree(self, P):
        return max((sum(kernels.unpack(k, self.rank)) for k in P), default=0)

    def reflect(self, a: int, P: dict) -> dict:
        """``s_a`` on a packed polynomial (0-based ``a``)."""
        self.ensure(max(((k >> (kernels.BITS * a)) & kernels.MASK for k in P), default=0))
        return kernels.apply_table(P, a, self.ytab[a])

    def delta(self, a: int, P: dict) -> dict:
        self.ensure(max(((k >> (kernels.BITS * a)) & kernels.MASK for k in P), default=0))
        return kernels.apply_table(P, a, self.htab[a])


@lru_cache(maxsize=None)
def weyl_operators(system: RootSystem) -> WeylOperators:
    return WeylOperators(system)


def _system(system) -> RootSystem:
    if isinstance(system, RootSystem):
        return system
    return build_root_system(system)


def _check_index(system, i):
    if not 1 <= i <= system.rank:
        raise ValueError(f"simple index {i} out of range 1..{system.rank}")


def _check_nvars(system, p):
    if p.nvars != system.rank:
        raise ValueError(f"polynomial in {p.nvars} variables used with rank {system.rank}")


def weyl_generator_action(system, i: int, p: Polynomial) -> Polynomial:
    """``s_i(p)``: substitute ``w_i -> w_i - alpha_i``."""
    system = _system(system)
    _check_index(system, i)
    _check_nvars(system, p)
    P, den = p.to_packed()
    return Polynomial.from_packed(p.nvars, weyl_operators(system).reflect(i - 1, P), den)


def divided_difference(system, i: int, p: Polynomial) -> Polynomial:
    """``Delta_i(p) = (p - s_i p) / alpha_i``."""
    system = _system(system)
    _check_index(system, i)
    _check_nvars(system, p)
    P, den = p.to_packed()
    return Polynomial.from_packed(p.nvars, weyl_operators(system).delta(i - 1, P), den)


def divided_difference_by_division(system, i: int, p: Polynomial) -> Polynomial:
    """Reference ``Delta_i`` by long division of ``p - s_i p`` by ``alpha_i``.

    ``alpha_i`` has coefficient 2 on ``w_i``, so division runs in ``w_i``
    over the other variables.  Raises ``ArithmeticError`` if the remainder
    is nonzero.
    """
    system = _system(system)
    _check_index(system, i)
    num = p - weyl_generator_action(system, i, p)
    alpha = system.simple_roots[i - 1].weight
    j = i - 1
    lead = Fraction(alpha[j])
    rest = Polynomial.linear_form(tuple(0 if k == j else c for k, c in enumerate(alpha)))
    quot = Polynomial(p.nvars)
    rem = num
    while rem:
        top = max(m[j] for m in rem.terms)
        if top == 0:
            break
        hi = Polynomial(p.nvars, {m[:j] + (m[j] - 1,) + m[j + 1:]: c for m, c in rem.terms.items() if m[j] == top})
        q = hi * (1 / lead)
        quot = quot + q
        rem = rem - q * (Polynomial.variable(p.nvars, i) * lead + rest)
    if rem:
        raise ArithmeticError(f"Delta_{i}: division by alpha_{i} left remainder {rem}")
    return quot


def delta_w(system, word: Iterable[int], p: Polynomial) -> Polynomial:
    """``Delta_{a1} o ... o Delta_{ak}`` for ``word = (a1, ..., ak)``; ``ak`` acts first."""
    system = _system(system)
    ops = weyl_operators(system)
    word = list(word)
    for a in word:
        _check_index(system, a)
    _check_nvars(system, p)
    P, den = p.to_packed()
    for a in reversed(word):
        if not P:
            break
        P = ops.delta(a - 1, P)
    return Polynomial.from_packed(p.nvars, P, den)


def _tree_arrays(tree):
    return tree.parent_list(), tree.letter_list(), tree.length_list()


def c_map(p: Polynomial, tree, check_invariance: bool = True) -> dict:
    """Coefficients of ``c(p)`` on the basis indexed by ``tree``.

    Parameters
    ----------
    p : Polynomial
        Homogeneous of degree ``k``.
    tree : CosetTree
        ``W^Theta`` as a breadth-first tree (:class:`chowcalc.weyl.CosetTree`).
    check_invariance : bool
        Require ``s_i p = p`` for ``i`` in ``Theta``.  That is the condition
        under which every coefficient outside the subring vanishes, so the
        returned coefficients are the whole of ``c(p)``.

    Returns
    -------
    dict
        node index -> Fraction, for nodes of length ``k``; zeros omitted.
    """
    if not p.is_homogeneous():
        raise ValueError("c_map needs a homogeneous polynomial")
    system = tree.system
    _check_nvars(system, p)
    if not p:
        return {}
    k = p.degree()
    if k > tree.dim:
        return {}
    if check_invariance:
        for i in tree.theta:
            if weyl_generator_action(system, i, p) != p:
                raise ValueError(f"polynomial is not invariant under s_{i}; c(p) leaves the subring")
    ops = weyl_operators(system)
    ops.ensure(k)
    P, den = p.to_packed()
    parent, letter, depth = _tree_arrays(tree)
    vals = kernels.delta_tree(P, parent, letter, ops.htab, k, depth)
    out = {}
    for node in tree.nodes_of_length(k):
        q = vals.get(node)
        if q:
            c = q.get(0, 0)
            if c:
                out[node] = Fraction(c, den)
    return out


def c_map_full(p: Polynomial, group) -> dict:
    """``c(p)`` in ``CH(G/B)``: ``{w: Delta_w(p)}`` over all ``w`` of length ``deg p``.

    Keys are :class:`~chowcalc.weyl.WeylElement`; the class attached to ``w``
    is ``[X_{w0 w}]``.  Small ranks only.
    """
    from .weyl import CosetTree, ParabolicSubset

    tree = CosetTree(group, ParabolicSubset(group.rank, frozenset()))
    coeffs = c_map(p, tree, check_invariance=False)
    return {tree.element(k): v for k, v in coeffs.items()}


def positive_root_product(system) -> Polynomial:
    """``d``, the product of all positive roots as linear forms in ``w``."""
    system = _system(system)
    d = Polynomial.constant(system.rank, 1)
    for r in system.positive_roots:
        d = d * Polynomial.linear_form(r.weight)
    return d


GIAMBELLI_MAX_RANK = 4


def giambelli_full(w) -> Polynomial:
    """``Delta_{w^-1}(d / |W|)`` with ``d`` the product of the positive roots.

    Only for rank at most 4; the top-degree polynomial grows too fast beyond.
    """
    from .weyl import WeylGroup

    system = w.system
    if system.rank > GIAMBELLI_MAX_RANK:
        raise ValueError(f"giambelli_full is limited to rank <= {GIAMBELLI_MAX_RANK}")
    order = WeylGroup(system.spec).order()
    top = positive_root_product(system) * Fraction(1, order)
    return delta_w(system, tuple(reversed(w.word)), top)


def leibniz_operator(f: Polynomial, tree) -> list:
    """Matrix of ``x -> c(f) x`` on the basis of ``tree``.

    ``rows[w][v]`` is the coefficient of ``sigma_w`` in ``c(f) sigma_v``.
    ``f`` must be homogeneous with ``c(f)`` in the subring, which holds
    for every preimage returned by :mod:`chowcalc.preimage`.  Full
    ``W_Theta``-invariance of ``f`` is not needed: minimal representatives
    are closed under suffixes, so only ``W^Theta`` coefficients of ``f``
    enter the recursion.
    """
    if not f.is_homogeneous():
        raise ValueError("leibniz_operator needs a homogeneous polynomial")
    system = tree.system
    _check_nvars(system, f)
    d = max(f.degree(), 0)
    ops = weyl_operators(system)
    ops.ensure(max(d, 1))
    F, den = f.to_packed()
    rows = kernels.leibniz_rows(F, d, tree.parent_list(), [max(a, 0) for a in tree.letter_list()],
                                tree.up_table(), ops.ytab, ops.htab)
    return [{v: Fraction(c, den) for v, c in r.items()} for r in rows]


def c_map_product(p: Polynomial, q: Polynomial, tree) -> dict:
    """``c(p q)`` from the operator of ``p`` applied to ``c(q)``."""
    rows = leibniz_operator(p, tree)
    cq = c_map(q, tree)
    out = {}
    for w, row in enumerate(rows):
        s = sum((row.get(v, 0) * c for v, c in cq.items()), Fraction(0))
        if s:
            out[w] = s
    return out


# -- text format -------------------------------------------------------------

def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_monomial(exps, var="w") -> str:
    parts = []
    for i, e in enumerate(exps):
        if e == 1:
            parts.append(f"{var}[{i + 1}]")
        elif e:
            parts.append(f"{var}[{i + 1}]^{e}")
    return "*".join(parts)


def format_polynomial(p: Polynomial, var: str = "w") -> str:
    """Render as ``3*w[1]^2 - 1/2*w[1]*w[2] + 5`` in decreasing grevlex order."""
    if not p.terms:
        return "0"
    out = []
    for k, c in p.sorted_terms():
        sign = "-" if c < 0 else "+"
        a = abs(c)
        mono = format_monomial(k, var)
        if not mono:
            body = _fmt_coeff(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_fmt_coeff(a)}*{mono}"
        out.append((sign, body))
    s = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        s += f" {sign} {body}"
    return s


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<var>[wx](?:\[\s*\d+\s*\]|_?\d+))|(?P<op>\*\*|[-+*/^()]))"
)


def parse_polynomial(text: str, nvars: int) -> Polynomial:
    """Parse text such as ``"w[1]^2 - 1/2*w[1]*w[2] + 3"``.

    Variables are written ``w[i]``, ``w_i`` or ``wi`` (1-based); ``^`` and
    ``**`` both denote powers; division is allowed by constants only.
    """
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {text[pos:pos + 12]!r}")
        pos = m.end()
        if m.group("num"):
            toks.append(("num", int(m.group("num"))))
        elif m.group("var"):
            idx = int(re.sub(r"\D", "", m.group("var")))
            toks.append(("var", idx))
        else:
            op = m.group("op")
            toks.append(("op", "^" if op == "**" else op))
    toks.append(("end", None))
    i = 0

    def peek():
        return toks[i]

    def take():
        nonlocal i
        t = toks[i]
        i += 1
        return t

    def expr():
        r = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            t = term()
            r = r + t if op == "+" else r - t
        return r

    def term():
        r = unary()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            t = unary()
            if op == "*":
                r = r * t
            else:
                if t.degree() > 0 or not t:
                    raise ValueError("division by a non-constant or zero polynomial")
                r = r / t
        return r

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power():
        b = atom()
        if peek() == ("op", "^"):
            take()
            kind, val = take()
            if kind != "num":
                raise ValueError("exponent must be a nonnegative integer")
            return b ** val
        return b

    def atom():
        kind, val = take()
        if kind == "num":
            return Polynomial.constant(nvars, val)
        if kind == "var":
            return Polynomial.variable(nvars, val)
        if (kind, val) == ("op", "("):
            r = expr()
            if take() != ("op", ")"):
                raise ValueError("unbalanced parentheses")
            return r
        raise ValueError(f"unexpected token {val!r}")

    result = expr()
    if peek()[0] != "end":
        raise ValueError(f"trailing input at token {peek()[1]!r}")
    return result
