import random

import numpy as np
import pytest

from locdiv.algebra import Morphism, NotAperiodicError, cyclic_group, make_monoid, syntactic_morphism
from locdiv.automata import all_words
from locdiv.corpus import random_morphism, random_transformation_monoid
from locdiv.localizer import LEFT, RIGHT, choose_letter, middle_block, preimages, synthesize
from locdiv.ltl import LtlBuilder, WordBatch
from locdiv.sd import SdBuilder, compile_expr

from conftest import corpus_homs

AB = ("a", "b")
U1 = make_monoid([[0, 1], [1, 1]], 0)  # 1 is absorbing


def members(builder, expr, alphabet, maxlen):
    words = list(all_words(alphabet, maxlen))
    if builder.direction == LEFT:
        hits = WordBatch(words, alphabet).cltl(expr)
    else:
        d = compile_expr(expr, alphabet)
        hits = np.array([d.accepts(w) for w in words])
    return {w for w, x in zip(words, hits) if x}


BUILDERS = [LtlBuilder, SdBuilder]


@pytest.mark.parametrize("make", BUILDERS)
def test_trivial_image_gives_everything(make):
    h = Morphism(AB, make_monoid([[0]], 0), (0, 0))
    b = make()
    assert members(b, synthesize(h, 0, b), AB, 5) == set(all_words(AB, 5))


@pytest.mark.parametrize("make", BUILDERS)
def test_words_containing_a(make):
    h = Morphism(AB, U1, (1, 0))
    b = make()
    got = members(b, synthesize(h, 1, b), AB, 8)
    assert got == {w for w in all_words(AB, 8) if "a" in w}


@pytest.mark.parametrize("make", BUILDERS)
def test_ab_star_classes(make, ab_star):
    h, _ = syntactic_morphism(ab_star)
    assert h.monoid.size == 6
    b = make()
    p = h(("a", "b"))
    got = members(b, synthesize(h, p, b), AB, 8)
    assert got == {w for w in all_words(AB, 8) if h(w) == p}


def test_choose_letter():
    assert choose_letter(Morphism(AB, U1, (0, 1))) == "b"
    assert choose_letter(Morphism(AB, U1, (1, 1))) == "a"
    with pytest.raises(ValueError):
        choose_letter(Morphism(AB, U1, (0, 0)))


def test_group_input_is_rejected_with_witness():
    h = Morphism(AB, cyclic_group(3), (1, 0))
    with pytest.raises(NotAperiodicError) as info:
        preimages(h, LtlBuilder())
    assert info.value.witness in (1, 2)


def test_builder_direction_mismatch():
    h = Morphism(AB, U1, (1, 0))
    with pytest.raises(ValueError):
        synthesize(h, 0, LtlBuilder(), direction=RIGHT)


@pytest.mark.parametrize("make", BUILDERS)
def test_middle_block(make):
    h = Morphism(AB, U1, (1, 0))
    b = make()
    got = members(b, middle_block(h, "a", 1, b), AB, 6)
    assert {("a",), ("a", "a"), ("a", "b", "a")} <= got
    assert got == {w for w in all_words(AB, 6) if w and w[0] == "a" and w[-1] == "a"}
    with pytest.raises(ValueError):
        middle_block(h, "a", 0, b)


def test_single_c_is_in_its_own_block():
    m = make_monoid([[0, 1, 2], [1, 2, 2], [2, 2, 2]], 0)
    h = Morphism(AB, m, (1, 0))
    for make in BUILDERS:
        b = make()
        assert ("a",) in members(b, middle_block(h, "a", 1, b), AB, 3)


@pytest.mark.parametrize("make", BUILDERS)
def test_preimages_partition_words(make):
    r = random.Random(3)
    b = make()
    done = 0
    while done < 12:
        m = random_transformation_monoid(r, max_points=3, max_gens=2, max_size=12)
        h = random_morphism(r, m, AB)
        try:
            found = preimages(h, b)
        except NotAperiodicError:
            continue
        words = set(all_words(AB, 7))
        seen = set()
        for p, e in found.items():
            got = members(b, e, AB, 7)
            assert got == {w for w in words if h(w) == p}
            assert not (seen & got)
            seen |= got
        assert seen == words
        done += 1


def test_corpus_sample_left_and_right():
    homs = corpus_homs()
    for h in homs[::17]:
        for make in BUILDERS:
            b = make()
            words = list(all_words(h.alphabet, 6))
            for p, e in preimages(h, b).items():
                assert members(b, e, h.alphabet, 6) == {w for w in words if h(w) == p}
