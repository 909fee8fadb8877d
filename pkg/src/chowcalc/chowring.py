"""
Schubert bases, Pieri graphs and products in ``CH(G/P_Theta)``.

Conventions
-----------
The basis is indexed by the minimal coset representatives ``u`` in
``W^Theta`` (the nodes of a :class:`~chowcalc.weyl.CosetTree`).  The class
``sigma_u`` has codimension ``l(u)`` and is the image under ``c`` of any
polynomial ``p`` with ``Delta_u p = 1`` and ``Delta_v p = 0`` for the other
``v`` of the same length; in the notation ``[X_w]`` it is
``[X_{w0 u w_Theta}]``.

Labels ``g_{i,j}`` follow the word-table convention: the label word of
``g_{i,j}`` is a reduced word of the minimal representative ``v`` of length
``dim - i``, written as the sequence of simple reflections applied to
``lambda_Theta`` one after the other.  ``g_{i,j}`` is then ``sigma_u`` for
the node ``u`` with ``u(lambda_Theta) = w0 v(lambda_Theta)``.  For E7/P7
the bundled word table fixes ``j``; elsewhere the classes of one
codimension are ordered by the lexicographically least label word.

Products
--------
``h_a = sigma_{s_a}`` (``a`` not in Theta) acts by the Chevalley-Pieri rule

    h_a sigma_u = sum <gamma^vee, u(omega_a)> sigma_{s_gamma u}

over positive roots ``gamma`` with ``s_gamma u`` in ``W^Theta`` of length
``l(u) + 1``.  Other products go through a polynomial preimage of one
factor and the Leibniz operator of :func:`chowcalc.polyops.leibniz_operator`,
through Poincare duality, or through preimages of both factors.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Iterable, Mapping

import numpy as np

from .cache import frac_to_str, str_to_frac
from .polyops import Polynomial, c_map, leibniz_operator
from .preimage import preimage_of
from .rootdata import DynkinSpec
from .weyl import CosetTree, ParabolicSubset, WeylGroup

log = logging.getLogger(__name__)

ROUTES = ("auto", "pieri", "duality", "leibniz", "polynomial", "generators")
TABLE_FORMAT_KEYS = ("type", "parabolic", "dim", "basis", "products")


# -- value types -----------------------------------------------------------------

@dataclass(frozen=True, order=True)
class SchubertClass:
    """A basis class ``g_{codim,index}`` with its label word."""

    codim: int
    index: int
    word: tuple = field(compare=False)

    @property
    def label(self) -> str:
        return f"g_{{{self.codim},{self.index}}}"

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class PieriEdge:
    """``target`` occurs in ``h * source`` with coefficient ``weight``.

    ``letter`` is the simple reflection with ``target = s_letter source``
    when there is one, else 0; ``root`` gives ``gamma`` in simple-root
    coordinates.  Hasse skeletons carry ``weight=None``.
    """

    source: SchubertClass
    target: SchubertClass
    letter: int
    root: tuple
    weight: int | None


class PieriGraph:
    """Basis classes grouped by codimension, with weighted covering edges."""

    def __init__(self, ring: "ChowRing", edges: list, weighted: bool):
        self.ring = ring
        self.nodes = sorted(ring.classes)
        self.edges = sorted(edges, key=lambda e: (e.source, e.target))
        self.weighted = weighted

    def by_codim(self) -> list:
        out = [[] for _ in range(self.ring.dim + 1)]
        for c in self.nodes:
            out[c.codim].append(c)
        return out

    def counts(self) -> list:
        return [len(x) for x in self.by_codim()]

    def is_palindromic(self) -> bool:
        c = self.counts()
        return c == c[::-1]

    def weights(self) -> set:
        return {e.weight for e in self.edges}

    def out_edges(self, cls: SchubertClass) -> list:
        return [e for e in self.edges if e.source == cls]

    def is_self_dual(self) -> bool:
        """The edge ``x -> y`` of weight ``m`` has the dual edge ``D(y) -> D(x)`` of weight ``m``."""
        dual = self.ring.dual_class
        have = {(e.source, e.target): e.weight for e in self.edges}
        return all(have.get((dual(t), dual(s))) == m for (s, t), m in have.items())

    def to_json(self) -> dict:
        r = self.ring
        return {
            "type": str(r.spec),
            "parabolic": r.theta.label(),
            "dim": r.dim,
            "nodes": [{"codim": c.codim, "index": c.index, "word": list(c.word)} for c in self.nodes],
            "edges": [
                {"source": e.source.label, "target": e.target.label, "letter": e.letter,
                 "root": list(e.root), "weight": e.weight}
                for e in self.edges
            ],
        }

    def to_dot(self) -> str:
        r = self.ring
        name = f"{r.spec}/{r.theta.label()}"
        lines = [f'digraph "{name}" {{', "  rankdir=LR;", '  node [shape=box, fontname="Helvetica"];']
        for k, layer in enumerate(self.by_codim()):
            ids = " ".join(f'"{c.label}";' for c in layer)
            lines.append(f"  {{ rank=same; {ids} }}  // codim {k}")
        for e in self.edges:
            if self.weighted:
                attr = f'label="{e.weight}"'
                if e.weight != 1:
                    attr += ", penwidth=2"
            else:
                attr = f'label="s{e.letter}"'
            lines.append(f'  "{e.source.label}" -> "{e.target.label}" [{attr}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


class ChowClass:
    """A rational combination of basis classes of one ring."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: "ChowRing", terms: Mapping[int, object] | None = None):
        self.ring = ring
        self.terms = {}
        for u, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[int(u)] = c

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, ChowClass):
            return self.ring is other.ring and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def codims(self) -> set:
        return {self.ring.tree.length[u] for u in self.terms}

    @property
    def codim(self) -> int | None:
        """Codimension of a homogeneous class, ``None`` if mixed or zero."""
        c = self.codims()
        return c.pop() if len(c) == 1 else None

    def is_homogeneous(self) -> bool:
        return len(self.codims()) <= 1

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.terms.values())

    def homogeneous_part(self, k: int) -> "ChowClass":
        return ChowClass(self.ring, {u: c for u, c in self.terms.items() if self.ring.tree.length[u] == k})

    def coefficient(self, cls) -> Fraction:
        return self.terms.get(self.ring.node(cls), Fraction(0))

    def items(self) -> list:
        """``(SchubertClass, coeff)`` pairs in basis order."""
        cl = self.ring.classes
        return sorted(((cl[u], c) for u, c in self.terms.items()), key=lambda t: t[0])

    def _check(self, other):
        if not isinstance(other, ChowClass) or other.ring is not self.ring:
            raise TypeError("classes live in different rings")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)) and other == 0:
            return self
        self._check(other)
        t = dict(self.terms)
        for u, c in other.terms.items():
            t[u] = t.get(u, 0) + c
        return ChowClass(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return ChowClass(self.ring, {u: -c for u, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ChowClass(self.ring, {u: c * other for u, c in self.terms.items()})
        if isinstance(other, SchubertClass):
            other = self.ring.basis_class(other)
        self._check(other)
        return self.ring.multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        out = self.ring.fundamental_class()
        for _ in range(e):
            out = self.ring.multiply(self, out)
        return out

    def format(self, words: bool = False) -> str:
        if not self.terms:
            return "0"
        parts = []
        for cls, c in self.items():
            name = cls.label
            if words:
                name += "[" + ",".join(map(str, cls.word)) + "]"
            if c == 1:
                parts.append(("+", name))
            elif c == -1:
                parts.append(("-", name))
            else:
                s = "-" if c < 0 else "+"
                parts.append((s, f"{frac_to_str(abs(c))}*{name}"))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, t in parts[1:]:
            out += f" {s} {t}"
        return out

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"ChowClass({self.format()})"


# -- small exact linear algebra ---------------------------------------------------

class _Span:
    """Incremental row echelon form over Q with a record of combinations."""

    def __init__(self):
        self.rows = []     # (pivot, vec, combo)
        self.tags = []

    def __len__(self):
        return len(self.rows)

    def _reduce(self, vec, combo):
        vec = dict(vec)
        combo = dict(combo)
        for piv, rv, rc in self.rows:
            c = vec.get(piv)
            if c:
                for k, x in rv.items():
                    y = vec.get(k, 0) - c * x
                    if y:
                        vec[k] = y
                    else:
                        vec.pop(k, None)
                for k, x in rc.items():
                    y = combo.get(k, 0) - c * x
                    if y:
                        combo[k] = y
                    else:
                        combo.pop(k, None)
        return vec, combo

    def add(self, vec: Mapping, tag) -> bool:
        t = len(self.tags)
        vec, combo = self._reduce(vec, {t: Fraction(1)})
        if not vec:
            return False
        self.tags.append(tag)
        piv = min(vec)
        inv = 1 / Fraction(vec[piv])
        vec = {k: x * inv for k, x in vec.items()}
        combo = {k: x * inv for k, x in combo.items()}
        # keep the echelon form fully reduced
        new_rows = []
        for p, rv, rc in self.rows:
            c = rv.get(piv)
            if c:
                rv = {k: rv.get(k, 0) - c * vec.get(k, 0) for k in set(rv) | set(vec)}
                rv = {k: x for k, x in rv.items() if x}
                rc = {k: rc.get(k, 0) - c * combo.get(k, 0) for k in set(rc) | set(combo)}
                rc = {k: x for k, x in rc.items() if x}
            new_rows.append((p, rv, rc))
        new_rows.append((piv, vec, combo))
        self.rows = new_rows
        return True

    def express(self, vec: Mapping):
        """``{tag: coeff}`` with ``sum coeff * added[tag] = vec``, or None."""
        rest, combo = self._reduce(vec, {})
        if rest:
            return None
        out = {}
        for t, c in combo.items():
            if c:
                out[self.tags[t]] = -c
        return out


class MultiplicationOperator:
    """``x -> g x`` for a fixed homogeneous class ``g`` of codimension ``degree``.

    ``cols[v]`` is ``g sigma_v`` as a dict node -> Fraction.
    """

    def __init__(self, degree: int, cols: list):
        self.degree = degree
        self.cols = cols

    @classmethod
    def from_rows(cls, degree: int, rows: list):
        cols = [dict() for _ in rows]
        for w, row in enumerate(rows):
            for v, c in row.items():
                if c:
                    cols[v][w] = Fraction(c)
        return cls(degree, cols)

    def apply(self, vec: Mapping) -> dict:
        out = {}
        for v, c in vec.items():
            for w, x in self.cols[v].items():
                y = out.get(w, 0) + c * x
                if y:
                    out[w] = y
                else:
                    out.pop(w, None)
        return out


@dataclass
class Generator:
    name: str
    codim: int
    cls: "ChowClass"
    operator: MultiplicationOperator
    source: str  # "pieri" or "preimage"


@dataclass
class Presentation:
    """Algebra generators with every basis class written in them.

    ``gaps`` lists the codimensions where products of earlier generators
    do not span ``CH^k`` and new generators (with preimages) were added.
    ``expressions[node]`` maps generator monomials (exponent tuples) to
    coefficients.
    """

    generators: list
    gaps: list
    expressions: list
    span_sizes: list

    def generator_names(self) -> list:
        return [g.name for g in self.generators]


# -- the ring ---------------------------------------------------------------------

def _load_word_table(spec, theta):
    if (str(spec), theta.label()) != ("E7", "P7"):
        return None
    text = resources.files("chowcalc").joinpath("data/e7_p7_words.json").read_text()
    return json.loads(text)["basis"]


class ChowRing:
    """``CH(G/P_Theta) (x) Q`` with its Schubert basis.

    Parameters
    ----------
    spec : DynkinSpec or str
    parabolic : ParabolicSubset, str or iterable of omitted indices
        ``"P7"`` is the maximal parabolic omitting ``alpha_7``; default is
        the Borel subgroup.
    variant : {"invariance", "delta"}
        Constraint family used for preimages.
    reduce : bool
        Groebner-reduce preimages modulo the W-invariant ideal.
    cache : chowcalc.cache.Cache, optional
    progress : callable, optional
        Receives one-line progress messages.
    """

    def __init__(self, spec, parabolic=None, variant: str = "invariance", reduce: bool = False,
                 cache=None, progress: Callable | None = None):
        if isinstance(spec, str):
            spec = DynkinSpec.parse(spec)
        self.spec = spec
        self.group = WeylGroup(spec)
        self.system = self.group.system
        n = spec.rank
        if parabolic is None:
            theta = ParabolicSubset.omitting(n, range(1, n + 1))
        elif isinstance(parabolic, ParabolicSubset):
            theta = parabolic
        elif isinstance(parabolic, str):
            theta = ParabolicSubset.parse(n, parabolic)
        else:
            theta = ParabolicSubset.omitting(n, parabolic)
        self.group._check(theta)
        self.theta = theta
        if variant not in ("invariance", "delta"):
            raise ValueError(f"unknown constraint variant {variant!r}")
        self.variant = variant
        self.reduce = reduce
        self.cache = cache
        self.progress = progress
        self.tree = tree = CosetTree(self.group, theta)
        self.dim = tree.dim
        self.size = len(tree)
        w0 = self.group.longest_element()
        self._dual = [tree.index[w0.act(mu)] for mu in tree.weights]
        self._label_nodes()
        self._pieri_cols = {}
        self._ops = {}
        self._preimages = {}
        self._hspan = None
        self._presentation = None
        self._gb = {}

    def __repr__(self):
        return f"ChowRing({self.spec}/{self.theta.label()})"

    def _say(self, msg):
        log.info(msg)
        if self.progress:
            self.progress(msg)

    # -- labels ---------------------------------------------------------

    def _lexleast_paths(self):
        tree = self.tree
        best = [None] * self.size
        best[0] = ()
        for u in range(self.size):
            for a, t in enumerate(tree.up[u]):
                if t >= 0:
                    cand = best[u] + (a + 1,)
                    if best[t] is None or cand < best[t]:
                        best[t] = cand
        return best

    def _label_nodes(self):
        tree = self.tree
        dim = self.dim
        table = _load_word_table(self.spec, self.theta)
        classes = [None] * self.size
        if table is not None:
            lam = self.theta.dominant_weight()
            for entry in table:
                mu = lam
                for a in entry["word"]:
                    if mu[a - 1] <= 0:
                        raise ValueError(f"word table entry {entry} is not a reduced path")
                    mu = self.system.simple_reflection(a, mu)
                v = tree.index[mu]
                if tree.length[v] != dim - entry["codim"]:
                    raise ValueError(f"word table entry {entry} has the wrong length")
                u = self._dual[v]
                if classes[u] is not None:
                    raise ValueError(f"word table labels node {u} twice")
                classes[u] = SchubertClass(entry["codim"], entry["index"], tuple(entry["word"]))
            if any(c is None for c in classes):
                raise ValueError("word table does not cover the basis")
        else:
            paths = self._lexleast_paths()
            for k in range(dim + 1):
                nodes = sorted(tree.nodes_of_length(k), key=lambda u: paths[self._dual[u]])
                for j, u in enumerate(nodes, 1):
                    classes[u] = SchubertClass(k, j, paths[self._dual[u]])
        self.classes = classes
        self._node_of = {c: u for u, c in enumerate(classes)}
        self._by_label = {(c.codim, c.index): u for u, c in enumerate(classes)}

    # -- lookups --------------------------------------------------------

    def node(self, cls) -> int:
        """Tree node of a SchubertClass, a ``(codim, index)`` pair or a label string."""
        if isinstance(cls, SchubertClass):
            return self._node_of[cls]
        if isinstance(cls, (int, np.integer)):
            return int(cls)
        if isinstance(cls, str):
            cls = parse_label(cls)
        key = tuple(cls)
        if key not in self._by_label:
            raise KeyError(f"no basis class g_{{{key[0]},{key[1]}}} in {self}")
        return self._by_label[key]

    def schubert(self, codim: int, index: int) -> SchubertClass:
        return self.classes[self.node((codim, index))]

    def basis(self) -> list:
        return sorted(self.classes)

    def basis_class(self, cls) -> ChowClass:
        return ChowClass(self, {self.node(cls): 1})

    def class_of_word(self, word: Iterable[int]) -> SchubertClass:
        """Basis class whose label word (a path from ``lambda_Theta``) is ``word``."""
        mu = self.theta.dominant_weight()
        for a in word:
            if not 1 <= a <= self.spec.rank or mu[a - 1] <= 0:
                raise ValueError(f"{list(word)} is not a reduced label word")
            mu = self.system.simple_reflection(a, mu)
        return self.classes[self._dual[self.tree.index[mu]]]

    def resolve(self, text: str) -> SchubertClass:
        """``g_{i,j}``, ``g5,1``, ``5,1`` or a bracketed word such as ``[7,6]`` / ``[]``."""
        t = text.strip()
        if t.startswith("["):
            inner = t.strip("[]").strip()
            word = [int(x) for x in inner.replace(" ", ",").split(",") if x] if inner else []
            return self.class_of_word(word)
        return self.classes[self.node(parse_label(t))]

    def fundamental_class(self) -> ChowClass:
        return ChowClass(self, {0: 1})

    def point_class(self) -> ChowClass:
        return ChowClass(self, {self.size - 1: 1})

    def counts(self) -> list:
        return [len(self.tree.nodes_of_length(k)) for k in range(self.dim + 1)]

    def dual_node(self, u: int) -> int:
        """The node paired with ``u``: weight ``w0 u(lambda_Theta)``."""
        return self._dual[u]

    def dual_class(self, cls: SchubertClass) -> SchubertClass:
        return self.classes[self._dual[self._node_of[cls]]]

    def hyperplane_letters(self) -> tuple:
        return self.theta.omitted

    def hyperplane(self, a: int | None = None) -> ChowClass:
        """``h_a = sigma_{s_a}``; ``a`` defaults to the omitted node of a maximal parabolic."""
        a = self._letter(a)
        return ChowClass(self, {self.tree.up[0][a - 1]: 1})

    def _letter(self, a):
        om = self.theta.omitted
        if a is None:
            if len(om) != 1:
                raise ValueError("several hyperplane classes; pass the simple-root index")
            return om[0]
        if a not in om:
            raise ValueError(f"s_{a} lies in W_Theta; there is no codimension-one class for it")
        return a

    # -- Hasse and Pieri graphs -----------------------------------------

    def build_hasse(self) -> PieriGraph:
        edges = []
        cl = self.classes
        for u in range(self.size):
            for a, t in enumerate(self.tree.up[u]):
                if t >= 0:
                    root = tuple(int(i == a) for i in range(self.spec.rank))
                    edges.append(PieriEdge(cl[u], cl[t], a + 1, root, None))
        return PieriGraph(self, edges, weighted=False)

    def _pieri_column(self, a: int, u: int) -> dict:
        """``h_a sigma_u`` as node -> coefficient, cached."""
        key = (a, u)
        col = self._pieri_cols.get(key)
        if col is not None:
            return col
        tree = self.tree
        sysm = self.system
        if not hasattr(self, "_pair"):
            self._coroots = sysm.coroot_matrix
            # pair[b, g] = <beta_b^vee, gamma_g>
            self._pair = self._coroots @ sysm.root_weights.T
        mat = np.array(tree.matrices[u], dtype=np.int64)
        omega = mat[:, a - 1]
        lam_u = np.array(tree.weights[u], dtype=np.int64)
        rho_u = mat @ np.array(sysm.rho, dtype=np.int64)
        p_omega = self._coroots @ omega
        p_lam = self._coroots @ lam_u
        p_rho = self._coroots @ rho_u
        target_len = tree.length[u] + 1
        col = {}
        for g in np.nonzero(p_omega > 0)[0]:
            # s_gamma u must be a minimal representative one step up
            nu = tuple(int(x) for x in lam_u - p_lam[g] * sysm.root_weights[g])
            t = tree.index.get(nu)
            if t is None or tree.length[t] != target_len:
                continue
            refl = p_rho - p_rho[g] * self._pair[:, g]
            if int(np.count_nonzero(refl < 0)) != target_len:
                continue
            col[t] = col.get(t, 0) + int(p_omega[g])
        self._pieri_cols[key] = col
        return col

    def _pieri_root(self, u, t):
        lam_u = np.array(self.tree.weights[u])
        diff = lam_u - np.array(self.tree.weights[t])
        for g, r in enumerate(self.system.positive_roots):
            w = np.array(r.weight)
            # diff = <gamma^vee, lam_u> gamma
            c = int(self._coroots[g] @ lam_u)
            if c and np.array_equal(diff, c * w):
                return r.simple
        raise AssertionError("no root realises the covering")

    def build_pieri_graph(self, a: int | None = None) -> PieriGraph:
        a = self._letter(a)
        edges = []
        cl = self.classes
        for u in range(self.size):
            for t, m in sorted(self._pieri_column(a, u).items()):
                root = self._pieri_root(u, t)
                letter = next((b + 1 for b, x in enumerate(self.tree.up[u]) if x == t), 0)
                edges.append(PieriEdge(cl[u], cl[t], letter, tuple(root), m))
        return PieriGraph(self, edges, weighted=True)

    def pieri_operator(self, a: int | None = None) -> MultiplicationOperator:
        a = self._letter(a)
        return MultiplicationOperator(1, [dict(self._pieri_column(a, u)) for u in range(self.size)])

    def pieri_multiply(self, a, x) -> ChowClass:
        """``h_a x`` by the Pieri rule."""
        a = self._letter(a)
        x = self._coerce(x)
        out = {}
        for u, c in x.terms.items():
            for t, m in self._pieri_column(a, u).items():
                out[t] = out.get(t, 0) + c * m
        return ChowClass(self, out)

    # -- duality --------------------------------------------------------

    def poincare_pair(self, x, y) -> Fraction:
        """Coefficient of the point class in ``x y`` for complementary codimensions."""
        if isinstance(x, SchubertClass) and isinstance(y, SchubertClass):
            if x.codim + y.codim != self.dim:
                raise ValueError(f"codimensions {x.codim} and {y.codim} are not complementary")
            return Fraction(int(self._dual[self._node_of[x]] == self._node_of[y]))
        x, y = self._coerce(x), self._coerce(y)
        if x.codim is not None and y.codim is not None and x.codim + y.codim != self.dim:
            raise ValueError(f"codimensions {x.codim} and {y.codim} are not complementary")
        return sum((c * y.terms.get(self._dual[u], 0) for u, c in x.terms.items()), Fraction(0))

    def pairing_matrix(self, k: int) -> list:
        """``M[i][j] = pair(g_{k,i+1}, g_{dim-k,j+1})``."""
        left = [c for c in self.basis() if c.codim == k]
        right = [c for c in self.basis() if c.codim == self.dim - k]
        return [[int(self.poincare_pair(x, y)) for y in right] for x in left]

    # -- preimages and Leibniz operators ------------------------------------

    def _coerce(self, x) -> ChowClass:
        if isinstance(x, ChowClass):
            if x.ring is not self:
                raise TypeError("class belongs to another ring")
            return x
        if isinstance(x, (SchubertClass, tuple, str)):
            return self.basis_class(x)
        if isinstance(x, int) and x == 0:
            return ChowClass(self)
        raise TypeError(f"cannot interpret {x!r} as a class of {self}")

    def _key(self, x: ChowClass) -> str:
        return ";".join(f"{u}:{frac_to_str(c)}" for u, c in sorted(x.terms.items()))

    def _cache_name(self, kind: str, x: ChowClass, extra: str = "") -> str:
        h = hashlib.sha256((self._key(x) + extra).encode()).hexdigest()[:16]
        return f"{kind}/{self.spec}_{self.theta.label().replace(',', '-')}_{x.codim}_{h}.json"

    def groebner_basis(self, degree: int):
        """Groebner basis of the invariant ideal, exact through ``degree``."""
        from .invariants import invariant_ideal_basis

        gb = self._gb.get(degree)
        if gb is None:
            gb = invariant_ideal_basis(self.spec, degree, self.cache, self.progress)
            self._gb[degree] = gb
        return gb

    def preimage(self, x) -> Polynomial:
        """A polynomial ``p`` with ``c(p) = x`` (cached)."""
        x = self._coerce(x)
        if not x:
            return Polynomial.zero(self.spec.rank)
        k = x.codim
        if k is None:
            raise ValueError("preimage needs a homogeneous class")
        key = self._key(x)
        p = self._preimages.get(key)
        if p is not None:
            return p
        name = self._cache_name("preimages", x, self.variant + str(self.reduce))
        if self.cache is not None:
            doc = self.cache.load(name)
            if doc is not None:
                p = Polynomial(self.spec.rank, {tuple(m): str_to_frac(c) for m, c in doc["terms"]})
                if c_map(p, self.tree, check_invariance=False) == x.terms:
                    self._preimages[key] = p
                    return p
        reducer = None
        if self.reduce and k > 0:
            gb = self.groebner_basis(k)
            reducer = gb.reduce
        self._say(f"{self}: preimage of {x} (codim {k}, {self.variant} constraints)")
        p = preimage_of(self.tree, x.terms, k, self.variant, reducer, self.progress)
        self._preimages[key] = p
        if self.cache is not None:
            self.cache.store(name, {"format": "chowcalc.preimage.v1", "type": str(self.spec),
                                    "parabolic": self.theta.label(), "class": x.format(),
                                    "variant": self.variant,
                                    "terms": [[list(m), frac_to_str(c)] for m, c in p.sorted_terms()]})
        return p

    def operator(self, x) -> MultiplicationOperator:
        """Multiplication by ``x`` through a preimage and the Leibniz rule."""
        x = self._coerce(x)
        key = self._key(x)
        op = self._ops.get(key)
        if op is not None:
            return op
        k = x.codim
        name = self._cache_name("operators", x)
        if self.cache is not None:
            doc = self.cache.load(name)
            if doc is not None and len(doc["cols"]) == self.size:
                cols = [{int(w): str_to_frac(c) for w, c in col} for col in doc["cols"]]
                op = MultiplicationOperator(k, cols)
        if op is None:
            p = self.preimage(x)
            self._say(f"{self}: Leibniz operator for {x}")
            op = MultiplicationOperator.from_rows(k, leibniz_operator(p, self.tree))
            if self.cache is not None:
                self.cache.store(name, {"format": "chowcalc.operator.v1", "class": x.format(),
                                        "cols": [[[w, frac_to_str(c)] for w, c in sorted(col.items())]
                                                 for col in op.cols]})
        self._ops[key] = op
        return op

    # -- spans of hyperplane monomials ----------------------------------------

    def _hyperplane_spans(self):
        """Per codimension, the span of monomials in the hyperplane classes."""
        if self._hspan is not None:
            return self._hspan
        letters = self.hyperplane_letters()
        spans = [_Span() for _ in range(self.dim + 1)]
        spans[0].add({0: Fraction(1)}, ())
        vecs = [{(): {0: Fraction(1)}}]
        for k in range(1, self.dim + 1):
            layer = {}
            for m, vec in vecs[k - 1].items():
                for a in letters:
                    if m and a < m[-1]:
                        continue
                    out = {}
                    for u, c in vec.items():
                        for t, x in self._pieri_column(a, u).items():
                            out[t] = out.get(t, 0) + c * x
                    out = {t: c for t, c in out.items() if c}
                    if out and spans[k].add(out, m + (a,)):
                        layer[m + (a,)] = out
            vecs.append(layer)
        self._hspan = (spans, vecs)
        return self._hspan

    def hyperplane_expression(self, x) -> dict | None:
        """``x`` as a combination of monomials in the ``h_a`` (letter tuples), or None."""
        x = self._coerce(x)
        k = x.codim
        if k is None:
            return {} if not x else None
        spans, _ = self._hyperplane_spans()
        return spans[k].express(x.terms)

    def _apply_hyperplane_monomial(self, m, vec):
        for a in m:
            out = {}
            for u, c in vec.items():
                for t, x in self._pieri_column(a, u).items():
                    y = out.get(t, 0) + c * x
                    if y:
                        out[t] = y
                    else:
                        out.pop(t, None)
            vec = out
        return vec

    # -- products -------------------------------------------------------

    def multiply(self, x, y, route: str = "auto") -> ChowClass:
        """The product ``x y``.

        ``route`` picks the method: ``"pieri"`` (one factor is a polynomial
        in hyperplane classes), ``"duality"`` (complementary codimensions),
        ``"leibniz"`` (preimage of one factor and its Leibniz operator,
        preferring a factor whose operator is known, then the smaller codimension),
        ``"polynomial"`` (preimages of both factors), ``"generators"``
        (the presentation from :meth:`generate`) or ``"auto"``.

        Raises
        ------
        ArithmeticError
            If integral factors give a non-integral product.
        """
        if route not in ROUTES:
            raise ValueError(f"unknown route {route!r}; choose from {ROUTES}")
        x, y = self._coerce(x), self._coerce(y)
        if not x or not y:
            return ChowClass(self)
        if not (x.is_homogeneous() and y.is_homogeneous()):
            out = ChowClass(self)
            for i in sorted(x.codims()):
                for j in sorted(y.codims()):
                    out = out + self.multiply(x.homogeneous_part(i), y.homogeneous_part(j), route)
            return out
        if x.codim + y.codim > self.dim:
            return ChowClass(self)
        if route == "auto":
            route = self._choose_route(x, y)
        if route == "pieri":
            res = self._multiply_pieri(x, y)
        elif route == "duality":
            if x.codim + y.codim != self.dim:
                raise ValueError("duality route needs complementary codimensions")
            res = ChowClass(self, {self.size - 1: self.poincare_pair(x, y)})
        elif route == "leibniz":
            if self._key(x) not in self._ops and (self._key(y) in self._ops or y.codim < x.codim):
                x, y = y, x
            res = ChowClass(self, self.operator(x).apply(y.terms))
        elif route == "polynomial":
            p = self.preimage(x) * self.preimage(y)
            res = ChowClass(self, c_map(p, self.tree, check_invariance=False))
        else:
            res = self._multiply_generators(x, y)
        if x.is_integral() and y.is_integral() and not res.is_integral():
            raise ArithmeticError(f"non-integral structure constant in {x} * {y} = {res}")
        if res and res.codim != x.codim + y.codim:
            raise ArithmeticError(f"product {x} * {y} left codimension {x.codim + y.codim}")
        return res

    def _choose_route(self, x, y):
        if self.hyperplane_expression(x) is not None or self.hyperplane_expression(y) is not None:
            return "pieri"
        if x.codim + y.codim == self.dim:
            return "duality"
        if self._presentation is not None:
            return "generators"
        return "leibniz"

    def _multiply_pieri(self, x, y):
        expr = self.hyperplane_expression(x)
        other = y
        if expr is None:
            expr = self.hyperplane_expression(y)
            other = x
        if expr is None:
            raise ValueError("neither factor is a polynomial in the hyperplane classes")
        out = {}
        for m, c in expr.items():
            for t, v in self._apply_hyperplane_monomial(m, other.terms).items():
                out[t] = out.get(t, 0) + c * v
        return ChowClass(self, out)

    # -- generators and the Pieri table ---------------------------------------

    def generate(self, threads: int = 1) -> Presentation:
        """Find algebra generators codimension by codimension.

        Start from the hyperplane classes (Pieri operators).  In each
        codimension the products of generators with the already spanned
        lower parts are collected; where they fall short of ``CH^k`` the
        first basis classes outside the span become new generators, with
        operators from preimages.  The codimensions where that happens are
        the gaps.
        """
        if self._presentation is not None:
            return self._presentation
        gens = []
        for a in self.hyperplane_letters():
            name = "h" if len(self.hyperplane_letters()) == 1 else f"h{a}"
            gens.append(Generator(name, 1, self.hyperplane(a), self.pieri_operator(a), "pieri"))
        spans = [_Span() for _ in range(self.dim + 1)]
        vecs = [dict() for _ in range(self.dim + 1)]
        zero = ()
        spans[0].add({0: Fraction(1)}, zero)
        vecs[0][zero] = {0: Fraction(1)}
        gaps = []
        counts = self.counts()
        order = {u: self.classes[u] for u in range(self.size)}

        def grow(m, gi):
            m = list(m) + [0] * (len(gens) - len(m))
            m[gi] += 1
            return tuple(m)

        for k in range(1, self.dim + 1):
            for gi, g in enumerate(gens):
                if g.codim > k or len(spans[k]) == counts[k]:
                    continue
                for m, vec in list(vecs[k - g.codim].items()):
                    if len(spans[k]) == counts[k]:
                        break
                    out = g.operator.apply(vec)
                    mm = grow(m, gi)
                    if out and spans[k].add(out, mm):
                        vecs[k][mm] = out
            if len(spans[k]) < counts[k]:
                gaps.append(k)
                nodes = sorted(self.tree.nodes_of_length(k), key=lambda u: order[u])
                for u in nodes:
                    if len(spans[k]) == counts[k]:
                        break
                    if spans[k].express({u: Fraction(1)}) is not None:
                        continue
                    cls = ChowClass(self, {u: 1})
                    self._say(f"{self}: codim {k} not spanned; adding generator {cls}")
                    op = self.operator(cls)
                    gens.append(Generator(self.classes[u].label, k, cls, op, "preimage"))
                    mm = grow((), len(gens) - 1)
                    spans[k].add({u: Fraction(1)}, mm)
                    vecs[k][mm] = {u: Fraction(1)}
        ng = len(gens)
        pad = lambda m: tuple(m) + (0,) * (ng - len(m))
        expressions = []
        for u in range(self.size):
            e = spans[self.tree.length[u]].express({u: Fraction(1)})
            expressions.append({pad(m): c for m, c in e.items()})
        self._monomial_vecs = {pad(m): v for layer in vecs for m, v in layer.items()}
        self._presentation = Presentation(gens, gaps, expressions, [len(s) for s in spans])
        self._monomial_cache = {}
        return self._presentation

    def _apply_monomial(self, m, u):
        """``(monomial m) * sigma_u`` using the generator operators."""
        key = (m, u)
        got = self._monomial_cache.get(key)
        if got is not None:
            return got
        gens = self._presentation.generators
        gi = next((i for i, e in enumerate(m) if e), None)
        if gi is None:
            res = {u: Fraction(1)}
        else:
            rest = list(m)
            rest[gi] -= 1
            res = gens[gi].operator.apply(self._apply_monomial(tuple(rest), u))
        self._monomial_cache[key] = res
        return res

    def _multiply_generators(self, x, y):
        pres = self.generate()
        out = {}
        for u, c in x.terms.items():
            for m, e in pres.expressions[u].items():
                for v, d in y.terms.items():
                    for t, z in self._apply_monomial(m, v).items():
                        out[t] = out.get(t, 0) + c * e * d * z
        return ChowClass(self, out)

    def pieri_table(self) -> "PieriTable":
        """Products reachable from hyperplane powers, and the gap codimensions."""
        spans, vecs = self._hyperplane_spans()
        pres = self.generate()
        powers = {}
        for k in range(self.dim + 1):
            for m, v in vecs[k].items():
                powers[m] = ChowClass(self, v)
        return PieriTable(self, powers, [len(s) for s in spans], list(pres.gaps))

    # -- full multiplication table --------------------------------------------

    def full_table(self, threads: int = 1) -> dict:
        """``{(left, right): ChowClass}`` for basis pairs ``left <= right`` with codim sum <= dim."""
        self.generate()
        basis = self.basis()
        pairs = [(x, y) for i, x in enumerate(basis) for y in basis[i:] if x.codim + y.codim <= self.dim]

        def work(pair):
            x, y = pair
            return self.multiply(self.basis_class(x), self.basis_class(y), route="generators")

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(work, pairs))
        else:
            results = [work(p) for p in pairs]
        table = {}
        for (x, y), r in zip(pairs, results):
            if r and r.codim != x.codim + y.codim:
                raise ArithmeticError(f"grading violated in {x} * {y}")
            if not r.is_integral():
                raise ArithmeticError(f"non-integral structure constant in {x} * {y}")
            table[(x, y)] = r
        return table

    def table_json(self, table: Mapping | None = None, threads: int = 1) -> dict:
        if table is None:
            table = self.full_table(threads)
        basis = self.basis()
        doc = {
            "type": str(self.spec),
            "parabolic": self.theta.label(),
            "dim": self.dim,
            "basis": [{"codim": c.codim, "index": c.index, "word": list(c.word)} for c in basis],
            "products": [],
        }
        for (x, y), r in table.items():
            doc["products"].append({
                "left": x.label,
                "right": y.label,
                "terms": [{"class": c.label, "coeff": _json_number(v)} for c, v in r.items()],
            })
        return doc


def _json_number(c: Fraction):
    return c.numerator if c.denominator == 1 else frac_to_str(c)


def dump_json(doc) -> str:
    """Deterministic serialisation used for table and graph artifacts."""
    return json.dumps(doc, indent=1, ensure_ascii=True) + "\n"


@dataclass
class PieriTable:
    """Hyperplane monomials with their classes; ``span_sizes[k]`` out of ``counts[k]``."""

    ring: ChowRing
    powers: dict
    span_sizes: list
    gaps: list

    @property
    def counts(self) -> list:
        return self.ring.counts()

    def unreachable_codims(self) -> list:
        """Codimensions not spanned by hyperplane monomials alone."""
        return [k for k, (s, c) in enumerate(zip(self.span_sizes, self.counts)) if s < c]


def parse_label(text: str) -> tuple:
    """``"g_{5,1}"``, ``"g5,1"``, ``"g[5,1]"`` or ``"5,1"`` -> ``(5, 1)``."""
    t = text.strip()
    if t[:1] in ("g", "G"):
        t = t[1:]
    t = t.strip("_{}[]() ")
    parts = [p for p in t.replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise ValueError(f"cannot parse class label {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"cannot parse class label {text!r}") from None
