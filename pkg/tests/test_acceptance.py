"""Acceptance criteria 1-7.  Each test prints one PASS/FAIL line."""

import json
import random
import re
from fractions import Fraction
from itertools import product
from pathlib import Path

import pytest

from chowcalc.cache import str_to_frac
from chowcalc.polyops import (
    Polynomial,
    c_map,
    c_map_full,
    delta_w,
    divided_difference,
    divided_difference_by_division,
    giambelli_full,
    monomials_of_degree,
)
from chowcalc.preimage import GenericPolynomial, LinearSystem, build_system, preimage_of, solve
from chowcalc.rootdata import DynkinSpec, build_root_system
from chowcalc.weyl import CosetTree, ParabolicSubset, WeylGroup, compose

from _labels import match_pieri_lines, published_key, powers, signature_match
from conftest import report

DATA = Path(__file__).parent / "data"


def _load(name):
    return json.loads((DATA / name).read_text())


def _by_codim(ring):
    out = {}
    for c in ring.basis():
        out.setdefault(c.codim, []).append(c)
    return out


# -- 1. E7/P7 golden table ----------------------------------------------------

def test_criterion_1_e7_p7_golden_table(e7p7):
    ring = e7p7
    g5 = ring.basis_class(ring.schubert(5, 1))
    g9 = ring.basis_class(ring.schubert(9, 1))
    p5, p9 = powers(ring, g5, 5), powers(ring, g9, 3)
    bad = []
    for f in _load("e7_p7_structure.json")["products"]:
        a, b = f["g5"], f["g9"]
        if a and b:
            got = ring.multiply(p5[a - 1], p9[b - 1])
        else:
            got = p5[a - 1] if a else p9[b - 1]
        want = {ring.schubert(*published_key(k)): Fraction(v) for k, v in f["terms"].items()}
        if dict(got.items()) != want:
            bad.append((a, b, got.format()))
    ok = not bad
    report(1, ok, "10 formulas exact" if ok else f"mismatches {bad}")
    assert ok


# -- 2. E8/P8 codim-28 Pieri lines -------------------------------------------

def _pieri_lines():
    doc = _load("e8_p8_structure.json")
    return [(published_key(l["source"]), {published_key(k): v for k, v in l["terms"].items()})
            for l in doc["pieri_codim28"]]


def test_criterion_2_e8_p8_pieri_lines(e8p8):
    lines = _pieri_lines()
    found = match_pieri_lines(lines, e8p8, e8p8.hyperplane())
    ok = found is not None
    report(2, ok, "eight lines under one relabeling of codims 28, 29" if ok else "no consistent relabeling")
    assert ok


# -- 3. E8/P8 structure constants ---------------------------------------------

def _e8_formulas():
    return [(f["g6"], f["g10"], {published_key(k): v for k, v in f["terms"].items()})
            for f in _load("e8_p8_structure.json")["products"]]


def _e8_search(ring, gating_only):
    byc = _by_codim(ring)
    forms = _e8_formulas()
    if gating_only:
        forms = [f for f in forms if f[0] * f[1] == 0]
    for x6 in byc[6]:
        p6 = powers(ring, ring.basis_class(x6), 9)
        for x10 in byc[10]:
            p10 = powers(ring, ring.basis_class(x10), 5)
            ours = []
            for a, b, _ in forms:
                if a and b:
                    ours.append(ring.multiply(p6[a - 1], p10[b - 1], route="generators"))
                else:
                    ours.append(p6[a - 1] if a else p10[b - 1])
            m = signature_match([f[2] for f in forms], ours, byc)
            if m is not None:
                return x6, x10, m, ours
    return None


def test_criterion_3_e8_p8_powers(e8p8):
    found = _e8_search(e8p8, gating_only=True)
    ok = found is not None
    if ok:
        x6, x10, mapping, ours = found
        gated = [f for f in _e8_formulas() if f[0] * f[1] == 0]
        top = ours[next(i for i, f in enumerate(gated) if (f[0], f[1]) == (9, 0))]
        ok = top.coefficient(e8p8.schubert(54, 1)) == 60757113768
        detail = (f"g6^2..9 and g10^2..5 under one labeling (g_(6,1) -> {x6.label}, "
                  f"g_(10,1) -> {x10.label}); g6^9 = 60757113768 g_(54,1)")
    else:
        detail = "no consistent labeling"
    report(3, ok, detail)
    assert ok


def test_e8_p8_full_product_table_extended(e8p8):
    """All 32 published products, plus codim 28 jointly with the Pieri lines."""
    found = _e8_search(e8p8, gating_only=False)
    assert found is not None
    x6, x10, mapping, ours = found
    forms = _e8_formulas()
    i = next(i for i, f in enumerate(forms) if (f[0], f[1]) == (3, 1))
    joint = match_pieri_lines(_pieri_lines(), e8p8, e8p8.hyperplane(), extra=[(forms[i][2], ours[i])])
    assert joint is not None
    print(f"extended: 32 products and the codim-28 lines consistent (g6 -> {x6.label}, g10 -> {x10.label})")


# -- 4. F4/P1 degree-2 constraint system --------------------------------------

DISPLAYED = """
a[0,0,1,1] + a[0,0,2,0] = 0
a[1,0,0,1] = 0
a[0,1,1,0] + a[0,2,0,0] = 0
a[0,1,0,1] = 0
a[1,1,0,0] + a[0,2,0,0] = 0
a[1,0,1,0] = 0
a[0,1,1,0] + 2a[0,0,2,0] = 0
a[0,0,0,2] + a[0,0,1,1] = 0
a[2,0,0,0] + a[1,1,0,0] - 1 = 0
"""

TERM = re.compile(r"([+-]?)\s*(\d*)\s*(a\[[\d,]+\]|\d+)")


def _parse_system(text, gen):
    system = LinearSystem(gen)
    names = {gen.name(j): j for j in range(len(gen))}
    for line in text.strip().splitlines():
        lhs = line.split("=")[0]
        row, rhs = {}, 0
        for sign, coeff, body in TERM.findall(lhs):
            s = -1 if sign == "-" else 1
            if body.startswith("a["):
                row[names[body]] = s * int(coeff or 1)
            else:
                rhs -= s * int(body)
        system.add(row, rhs)
    return system


def test_criterion_4_f4_p1_degree_two(f4p1):
    tree = f4p1.tree
    u = f4p1.node(f4p1.schubert(2, 1))
    gen = GenericPolynomial(4, 2)
    shown = _parse_system(DISPLAYED, gen)
    delta = build_system(tree, 2, {u: 1}, "delta")
    same_rows = delta.canonical_rows() == shown.canonical_rows() and len(shown) == 9

    a = {m: j for j, m in enumerate(gen.monomials)}
    base = [Fraction(0)] * len(gen)
    base[a[(2, 0, 0, 0)]] = 1
    step = [Fraction(0)] * len(gen)
    for m, c in {(2, 0, 0, 0): 2, (1, 1, 0, 0): -2, (0, 2, 0, 0): 2, (0, 1, 1, 0): -2,
                 (0, 0, 2, 0): 1, (0, 0, 1, 1): -1, (0, 0, 0, 2): 1}.items():
        step[a[m]] = Fraction(c)

    families = []
    for variant in ("delta", "invariance"):
        sol = solve(build_system(tree, 2, {u: 1}, variant))
        fam_ok = sol.free_params == 1 and sol.contains(base) and all(
            sol.contains([b + t * s for b, s in zip(base, step)]) for t in (1, -3, Fraction(1, 2)))
        families.append(fam_ok)
    p0 = preimage_of(tree, {u: 1}, 2, "delta")
    t0_ok = p0 == Polynomial(4, {(2, 0, 0, 0): 1})
    ok = same_rows and all(families) and t0_ok
    report(4, ok, f"rows match={same_rows}, family (delta, invariance)={families}, t=0 gives w1^2={t0_ok}")
    assert ok


# -- 5. gap detection ---------------------------------------------------------

def test_criterion_5_e8_p8_gaps(e8p8):
    gaps = e8p8.pieri_table().gaps
    ok = gaps == [6, 10]
    report(5, ok, f"preimage codims {gaps}")
    assert ok


# -- 6. property suites -------------------------------------------------------

def _table_product(table, ring, x, y):
    key = (x, y) if (x.codim, x.index) <= (y.codim, y.index) else (y, x)
    if x.codim + y.codim > ring.dim:
        return {}
    return dict(table[key].items())


def _combine(ring, table, vec, z):
    out = {}
    for c, v in vec.items():
        for t, w in _table_product(table, ring, c, z).items():
            out[t] = out.get(t, 0) + v * w
    return {t: v for t, v in out.items() if v}


def _ring_axioms_exhaustive(ring):
    table = ring.full_table()
    basis = ring.basis()
    for x in basis:
        for y in basis:
            if x.codim + y.codim > ring.dim:
                continue
            other = ring.multiply(ring.basis_class(y), ring.basis_class(x), route="leibniz")
            if dict(other.items()) != _table_product(table, ring, x, y):
                return False
    for x, y, z in product(basis, repeat=3):
        if x.codim + y.codim + z.codim > ring.dim:
            continue
        left = _combine(ring, table, _table_product(table, ring, x, y), z)
        right = _combine(ring, table, _table_product(table, ring, y, z), x)
        if left != right:
            return False
    return True


def _ring_axioms_sampled(ring, n, seed):
    rng = random.Random(seed)
    basis = ring.basis()
    done = 0
    while done < n:
        x, y, z = (rng.choice(basis) for _ in range(3))
        if x.codim + y.codim + z.codim > ring.dim:
            continue
        X, Y, Z = (ring.basis_class(c) for c in (x, y, z))
        if ring.multiply(X, Y, route="generators") != ring.multiply(Y, X, route="generators"):
            return False
        left = ring.multiply(ring.multiply(X, Y, route="generators"), Z, route="generators")
        right = ring.multiply(X, ring.multiply(Y, Z, route="generators"), route="generators")
        if left != right:
            return False
        done += 1
    return True


def _pairing_is_permutation(ring):
    for k in range(ring.dim + 1):
        m = ring.pairing_matrix(k)
        if any(sorted(row) != [0] * (len(row) - 1) + [1] for row in m):
            return False
        if any(sorted(col) != [0] * (len(col) - 1) + [1] for col in zip(*m)):
            return False
    return True


def _delta_relations(spec):
    system = build_root_system(DynkinSpec.parse(spec))
    n = system.rank
    a = system.cartan
    monos = [Polynomial(n, {m: 1}) for d in range(1, 5) for m in monomials_of_degree(n, d)]
    order = {0: 2, 1: 3, 2: 4, 3: 6}
    for p in monos:
        for i in range(1, n + 1):
            if divided_difference(system, i, p) != divided_difference_by_division(system, i, p):
                return False
            if divided_difference(system, i, divided_difference(system, i, p)):
                return False
            for j in range(i + 1, n + 1):
                m = order[a[i - 1][j - 1] * a[j - 1][i - 1]]
                w1 = tuple(i if t % 2 == 0 else j for t in range(m))
                w2 = tuple(j if t % 2 == 0 else i for t in range(m))
                if delta_w(system, w1, p) != delta_w(system, w2, p):
                    return False
    return True


def _giambelli(spec, max_length):
    group = WeylGroup(DynkinSpec.parse(spec))
    w0 = group.longest_element()
    for k in range(min(max_length, group.system.num_positive) + 1):
        for w in group.elements_of_length(k):
            if c_map_full(giambelli_full(w), group) != {compose(w0, w): 1}:
                return False
    return True


def _betti(spec):
    group = WeylGroup(DynkinSpec.parse(spec))
    for j in range(1, group.rank + 1):
        theta = ParabolicSubset.omitting(group.rank, [j])
        tree = CosetTree(group, theta)
        counts = [len(tree.nodes_of_length(k)) for k in range(tree.dim + 1)]
        if counts != group.quotient_poincare_polynomial(theta):
            return False
    return True


def _round_trips(rings):
    n = 0
    for ring in rings:
        for key, p in ring._preimages.items():
            target = {int(u): str_to_frac(c) for u, c in (t.split(":") for t in key.split(";"))}
            if c_map(p, ring.tree, check_invariance=False) != target:
                return False, n
            n += 1
    return True, n


def _integral_tables(rings):
    for ring in rings:
        for r in ring.full_table().values():
            if not r.is_integral():
                return False
    return True


@pytest.mark.parametrize("part", ["a", "b", "c", "d", "e", "f", "g"])
def test_criterion_6_properties(part, f4p1, f4p4, e6p1, e7p7):
    rings = [f4p1, f4p4, e6p1, e7p7]
    if part == "a":
        ok = (_ring_axioms_exhaustive(f4p1) and _ring_axioms_exhaustive(f4p4)
              and _ring_axioms_sampled(e6p1, 500, 1) and _ring_axioms_sampled(e7p7, 500, 2))
        detail = "commutativity and associativity"
    elif part == "b":
        ok = all(_pairing_is_permutation(r) for r in rings)
        detail = "pairing matrices are permutations"
    elif part == "c":
        for r in rings:
            r.generate()
        ok, n = _round_trips(rings)
        ok = ok and n > 0
        detail = f"c(preimage) round trip on {n} preimages"
    elif part == "d":
        specs = ["A1", "A2", "A3", "B2", "B3", "C3", "G2"]
        ok = all(_delta_relations(s) for s in specs)
        detail = "nilpotency, braid relations, closed form vs division, ranks <= 3"
    elif part == "e":
        ok = _giambelli("A2", 3) and _giambelli("B2", 4) and _giambelli("F4", 6)
        detail = "Giambelli for A2, B2 and F4 length <= 6"
    elif part == "f":
        ok = all(_betti(s) for s in ("F4", "E6", "E7", "E8"))
        detail = "Betti counts for all maximal parabolics of F4, E6, E7, E8"
    else:
        ok = _integral_tables([f4p1, f4p4, e6p1])
        detail = "integral structure constants"
    report(f"6{part}", ok, detail)
    assert ok


# -- 7. E6/P1 self-consistency ------------------------------------------------

def test_criterion_7_e6_p1(e6p1):
    ring = e6p1
    basis = ring.basis()
    size_ok = len(basis) == 27
    table = ring.full_table()
    disagreements = 0
    checked = 0
    for (x, y), r in table.items():
        X, Y = ring.basis_class(x), ring.basis_class(y)
        routes = ["leibniz"]
        if ring.hyperplane_expression(X) is not None or ring.hyperplane_expression(Y) is not None:
            routes.append("pieri")
        if x.codim + y.codim == ring.dim:
            routes.append("duality")
        if max(x.codim, y.codim) <= ring.dim // 2:
            routes.append("polynomial")
        for route in routes:
            checked += 1
            if ring.multiply(X, Y, route=route) != r:
                disagreements += 1
    closed = all(set(r.codims()) <= {x.codim + y.codim} for (x, y), r in table.items())
    perfect = _pairing_is_permutation(ring)
    ok = size_ok and closed and disagreements == 0 and perfect
    report(7, ok, f"27 classes={size_ok}, {checked} cross-route checks, "
                  f"{disagreements} disagreements, perfect pairing={perfect}")
    assert ok
