import itertools
import random

import pytest

from chowcalc.cache import Cache
from chowcalc.rootdata import DynkinSpec
from chowcalc.weyl import (
    CosetTree,
    ParabolicSubset,
    WeylGroup,
    compose,
    degrees_from_poincare,
    macdonald_poincare,
)


def group(name):
    return WeylGroup(DynkinSpec.parse(name))


def all_parabolics(rank):
    for k in range(rank + 1):
        for sub in itertools.combinations(range(1, rank + 1), k):
            yield ParabolicSubset(rank, frozenset(sub))


def test_identity_and_involution():
    g = group("B3")
    s1 = g.simple_reflection(1)
    w = g.from_word([1, 2, 3, 2])
    assert compose(w, g.identity()) == w
    assert compose(s1, s1).is_identity()
    assert g.identity().word == ()


def test_a2_compose_word_and_length():
    g = group("A2")
    w = compose(g.simple_reflection(1), g.simple_reflection(2))
    assert w.length == 2 and w.word == (1, 2)


def test_a2_brute_force_table():
    # six elements; products of words agree with the matrix product
    g = group("A2")
    elems = g.elements()
    assert len(elems) == 6
    for u, v in itertools.product(elems, repeat=2):
        assert compose(u, v) == g.from_word(u.word + v.word)
        assert u.act(v.act((1, 1))) == compose(u, v).act((1, 1))


@pytest.mark.parametrize("name, l0", [("F4", 24), ("E7", 63), ("E8", 120), ("G2", 6)])
def test_longest_element_length(name, l0):
    g = group(name)
    assert g.longest_element().length == l0
    assert len(g.longest_element().word) == l0


def test_longest_element_of_empty_subset_is_identity():
    g = group("F4")
    w = g.longest_element(ParabolicSubset(4, frozenset()))
    assert w.is_identity() and w.length == 0


def test_e7_p7_cosets():
    g = group("E7")
    reps = g.minimal_coset_reps(ParabolicSubset.omitting(7, [7]))
    assert len(reps) == 56
    assert max(w.length for w in reps) == 27


def test_e8_p8_cosets():
    g = group("E8")
    reps = g.minimal_coset_reps(ParabolicSubset.omitting(8, [8]))
    assert len(reps) == 240
    assert max(w.length for w in reps) == 120 - 63


def test_degenerate_parabolics():
    g = group("B3")
    everything = ParabolicSubset(3, frozenset({1, 2, 3}))
    assert [w.word for w in g.minimal_coset_reps(everything)] == [()]
    nothing = ParabolicSubset(3, frozenset())
    assert set(g.minimal_coset_reps(nothing)) == set(g.elements())
    assert set(g.maximal_coset_reps(nothing)) == set(g.elements())


@pytest.mark.parametrize("name", ["A3", "B3", "F4"])
def test_coset_counts_all_parabolics(name):
    g = group(name)
    order = len(g.elements())
    assert order == g.order()
    for theta in all_parabolics(g.rank):
        reps = g.minimal_coset_reps(theta)
        assert len(reps) * sum(g.poincare_polynomial(theta)) == order
        lengths = [w.length for w in reps]
        assert lengths == sorted(lengths)


@pytest.mark.parametrize("name, omitted", [("F4", [1]), ("B3", [2]), ("A3", [1, 3])])
def test_minimal_reps_membership(name, omitted):
    g = group(name)
    theta = ParabolicSubset.omitting(g.rank, omitted)
    lt = g.longest_element(theta).length
    for v, w in zip(g.minimal_coset_reps(theta), g.maximal_coset_reps(theta)):
        assert g.is_minimal_rep(v, theta)
        assert w.length == v.length + lt


@pytest.mark.parametrize("k, count", [(0, 1), (1, 2), (2, 2), (3, 1)])
def test_a2_elements_of_length(k, count):
    assert len(group("A2").elements_of_length(k)) == count


def test_elements_of_length_matches_poincare():
    g = group("F4")
    poly = g.poincare_polynomial()
    for k in range(25):
        assert len(g.elements_of_length(k)) == poly[k]
    with pytest.raises(ValueError):
        g.elements_of_length(25)


def test_simple_reflections_are_length_one():
    g = group("E6")
    ones = g.elements_of_length(1)
    assert set(ones) == {g.simple_reflection(i) for i in range(1, 7)}


def test_reflection_of_root():
    g = group("A2")
    system = g.system
    assert g.reflection_of_root(system.simple_roots[0]) == g.simple_reflection(1)
    s = g.reflection_of_root(system.highest_root)
    assert s == g.from_word([1, 2, 1])
    assert compose(s, s).is_identity()


@pytest.mark.parametrize("name", ["B3", "G2", "F4"])
def test_reflection_action_matches_reflect(name):
    g = group(name)
    lam = tuple(range(1, g.rank + 1))
    for beta in g.system.positive_roots:
        assert g.reflection_of_root(beta).act(lam) == g.system.reflect(beta, lam)


@pytest.mark.parametrize("name", ["A3", "B3", "G2"])
def test_words_reproduce_elements(name):
    g = group(name)
    for w in g.elements():
        assert g.from_word(w.word) == w
        assert len(w.word) == w.length


@pytest.mark.parametrize("name", ["A3", "C3", "G2"])
def test_deletion_exchange(name):
    g = group(name)
    for w in g.elements():
        for i in range(1, g.rank + 1):
            d = compose(g.simple_reflection(i), w).length - w.length
            assert d in (1, -1)


def _reduced_words(g, w):
    if w.is_identity():
        return [()]
    out = []
    for i in range(1, g.rank + 1):
        v = compose(g.simple_reflection(i), w)
        if v.length < w.length:
            out.extend((i,) + rest for rest in _reduced_words(g, v))
    return out


@pytest.mark.parametrize("name", ["A3", "B3"])
def test_all_reduced_words_agree(name):
    g = group(name)
    rng = random.Random(7)
    for w in rng.sample(g.elements(), 10):
        words = _reduced_words(g, w)
        assert len(words) >= 1
        assert {g.from_word(x) for x in words} == {w}


def test_inverse():
    g = group("F4")
    w = g.from_word([1, 2, 3, 4, 3, 2])
    assert compose(w, w.inverse()).is_identity()


def test_rejects_bad_input():
    g = group("A2")
    with pytest.raises(ValueError):
        g.simple_reflection(3)
    with pytest.raises(ValueError):
        ParabolicSubset.omitting(2, [3])
    with pytest.raises(ValueError):
        compose(g.identity(), group("B2").identity())
    with pytest.raises(ValueError):
        g.minimal_coset_reps(ParabolicSubset(3, frozenset({1})))


def test_parabolic_parsing():
    assert ParabolicSubset.parse(7, "P7") == ParabolicSubset.omitting(7, [7])
    assert ParabolicSubset.parse(4, "1,3").omitted == (1, 3)
    assert ParabolicSubset.parse(4, "B").label() == "B"
    assert ParabolicSubset.omitting(8, [8]).dominant_weight() == (0,) * 7 + (1,)


@pytest.mark.parametrize("name, degrees", [("F4", [2, 6, 8, 12]), ("E6", [2, 5, 6, 8, 9, 12]),
                                           ("E8", [2, 8, 12, 14, 18, 20, 24, 30]), ("G2", [2, 6])])
def test_degrees_from_poincare(name, degrees):
    g = group(name)
    assert degrees_from_poincare(g.poincare_polynomial(), g.rank) == degrees
    assert g.poincare_polynomial() == macdonald_poincare([r.height for r in g.system.positive_roots])


def test_coset_tree_layout():
    g = group("E7")
    tree = CosetTree(g, ParabolicSubset.omitting(7, [7]))
    assert len(tree) == 56 and tree.dim == 27
    for k in range(1, len(tree)):
        parent = tree.parent_list()[k]
        assert tree.length[k] == tree.length[parent] + 1
        assert tree.element(k) == compose(g.simple_reflection(tree.letter[k]), tree.element(parent))
        assert tree.node_of(tree.element(k)) == k


def test_coset_reps_cache_roundtrip(tmp_path):
    g = group("F4")
    theta = ParabolicSubset.omitting(4, [2])
    cache = Cache(tmp_path)
    first = g.minimal_coset_reps(theta, cache=cache)
    assert cache.entries()
    again = g.minimal_coset_reps(theta, cache=cache)
    assert first == again
