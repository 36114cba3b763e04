import random

import pytest
from hypothesis import given, settings, strategies as st

from locdiv.algebra import Morphism, cyclic_group, is_unit, syntactic_morphism
from locdiv.corpus import random_morphism, random_transformation_monoid, random_word
from locdiv.forest import (
    Empty, ForestError, Leaf, Node, build_forest, build_group_forest, derived_morphism, format_tree,
    height, height_bound, lift_forest, prefix_set, stats, to_json, validate,
)

AB = ("a", "b")


def leaves(f, w):
    return [Leaf(a, f.image(a)) for a in w]


def test_height_examples(u1):
    f = Morphism(AB, u1, (1, 0))
    a, b = leaves(f, "ab")
    assert height(a) == 0
    assert height(Node("binary", (a, b), 1)) == 1
    assert height(Node("idempotent", (a, a, a, a), 1)) == 1
    assert height(Empty(0)) == 0


def test_validate_accepts_and_rejects(u1, z3):
    f = Morphism(AB, u1, (1, 0))
    a, b = leaves(f, "ab")
    assert validate(f, "a", a).valid
    assert validate(f, "aaa", Node("idempotent", (a, a, a), 1)).valid
    assert not validate(f, "ab", a).valid  # wrong word
    assert not validate(f, "ab", Node("binary", (a, b), 0)).valid  # wrong cached image
    assert not validate(f, "a", Leaf("a", 0)).valid
    assert not validate(f, "bab", Node("binary", (b, a, b), 1)).valid  # arity 3 must be idempotent
    assert not validate(f, "a", Node("binary", (a, Empty(0)), 1)).valid
    g = Morphism(AB, z3, (1, 0))
    x = Leaf("a", 1)
    report = validate(g, "aaa", Node("idempotent", (x, x, x), 0))
    assert not report.valid
    assert any("not idempotent" in v for v in report.violations)


def test_trivial_words(u1):
    f = Morphism(AB, u1, (1, 0))
    assert build_forest(f, ()).kind == "empty"
    assert build_forest(f, "a") == Leaf("a", 1)
    assert build_group_forest(Morphism(AB, cyclic_group(2), (1, 0)), "a").height == 0


def test_z2_power_of_generator():
    f = Morphism(("a",), cyclic_group(2), (1,))
    t = build_group_forest(f, "a" * 8)
    assert validate(f, "a" * 8, t).valid
    assert t.height <= 6


def test_z3_group_bound():
    f = Morphism(AB, cyclic_group(3), (1, 2))
    r = random.Random(7)
    for n in range(1, 101):
        w = random_word(r, AB, n)
        t = build_group_forest(f, w)
        assert validate(f, w, t).valid
        assert t.height <= 3 * len(prefix_set(f, w)) <= 9


def test_group_forest_needs_units(u1):
    with pytest.raises(ForestError):
        build_group_forest(Morphism(AB, u1, (1, 0)), "ab")


def test_prefix_set():
    f = Morphism(("a",), cyclic_group(3), (1,))
    assert prefix_set(f, "aaaa") == {1, 2, 0}
    assert prefix_set(f, "a") == frozenset()


def test_lift_single_block(u1):
    f = Morphism(AB, u1, (1, 0))
    g = derived_morphism(f, "a")
    t = lift_forest(f, "a", ("b",), Leaf("b", g.image("b")))
    assert t.word == ("a", "b") and t.height == 1
    assert validate(f, "ab", t).valid


def test_lift_binary_maps_to_binary(u1):
    f = Morphism(AB, u1, (1, 0))
    g = derived_morphism(f, "a")
    x, y = Leaf("b", g.image("b")), Leaf("a", g.image("a"))
    tc = Node("binary", (x, y), g.monoid.mul(x.image, y.image))
    t = lift_forest(f, "a", ("b", "a"), tc)
    assert t.kind == "binary"
    assert [k.word for k in t.children] == [("a", "b"), ("a", "a")]


def test_lift_rejects_invalid_input(u1):
    f = Morphism(AB, u1, (1, 0))
    with pytest.raises(ForestError):
        lift_forest(f, "a", ("b",), Leaf("a", 0))


def random_tree(g, w, r):
    """Some valid tree for w under g: random cuts, idempotent runs where they exist."""
    m = g.monoid
    if len(w) == 1:
        return Leaf(w[0], g.image(w[0]))
    if len(w) >= 3 and r.random() < 0.5:
        k = r.randint(3, len(w))
        cuts = sorted(r.sample(range(1, len(w)), k - 1))
        parts = [w[i:j] for i, j in zip([0] + cuts, cuts + [len(w)])]
        images = {g(p) for p in parts}
        if len(images) == 1 and m.is_idempotent(images.pop()):
            kids = tuple(random_tree(g, p, r) for p in parts)
            return Node("idempotent", kids, g(w))
    i = r.randint(1, len(w) - 1)
    return Node("binary", (random_tree(g, w[:i], r), random_tree(g, w[i:], r)), g(w))


def test_random_lifts_meet_bound():
    r = random.Random(11)
    done = 0
    while done < 60:
        m = random_transformation_monoid(r, max_points=3, max_gens=2, max_size=10)
        f = random_morphism(r, m, AB)
        c = r.choice(AB)
        if is_unit(m, f.image(c)):
            continue
        g = derived_morphism(f, c)
        if g.monoid.size > 3:
            continue
        wc = random_word(r, AB, r.randint(1, 30))
        tc = random_tree(g, wc, r) if r.random() < 0.5 else build_forest(g, wc)
        assert validate(g, wc, tc).valid
        t = lift_forest(f, c, wc, tc)
        w = tuple(x for b in wc for x in (c, b))
        assert validate(f, w, t).valid
        assert t.height <= 4 * m.size * tc.height + 1
        done += 1


def test_u1_heights_do_not_grow(u1):
    f = Morphism(AB, u1, (1, 0))
    r = random.Random(5)
    seen = set()
    for n in range(50, 501, 50):
        for _ in range(10):
            w = random_word(r, AB, n)
            t = build_forest(f, w)
            assert validate(f, w, t).valid
            seen.add(t.height)
    assert max(seen) <= height_bound(2, 2)
    assert len(seen) <= 2


def test_ab_star_sweep(ab_star):
    f, _ = syntactic_morphism(ab_star)
    assert f.monoid.size == 6
    r = random.Random(9)
    for n in (1, 2, 10, 100, 500):
        for _ in range(5):
            w = random_word(r, AB, n)
            t = build_forest(f, w)
            assert validate(f, w, t).valid
            assert t.height <= height_bound(6, 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 60))
def test_random_morphisms_give_valid_trees(seed, n):
    r = random.Random(seed)
    m = random_transformation_monoid(r, max_points=3, max_gens=3, max_size=20)
    f = random_morphism(r, m, ("a", "b", "c"))
    w = random_word(r, f.alphabet, n)
    t = build_forest(f, w)
    assert validate(f, w, t).valid
    assert t.height <= height_bound(m.size, len(set(f.images)))


def test_height_bound_recurrence():
    assert height_bound(1, 0) == 0
    assert height_bound(1, 2) == 3
    assert height_bound(2, 5) == height_bound(2, 2)
    for m in range(2, 6):
        for a in range(1, m + 1):
            assert height_bound(m, a) >= max(3 * m, height_bound(m, a - 1))
    with pytest.raises(ValueError):
        height_bound(0, 1)


def test_reporting(u1):
    f = Morphism(AB, u1, (1, 0))
    t = build_forest(f, "bbabbb")
    s = stats(t)
    assert s.length == 6 and s.height == t.height
    j = to_json(t)
    assert j["image"] == 1 and j["kind"] in ("binary", "idempotent")
    lines = format_tree(t).splitlines()
    assert lines[0] == "binary [1] bbabbb"
    assert len(lines) == s.nodes + s.length
