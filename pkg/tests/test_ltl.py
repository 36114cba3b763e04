import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from locdiv.algebra import NotAperiodicError
from locdiv.automata import Dfa, all_words
from locdiv.ltl import (
    EMPTY, FULL, FALSE, TRUE, Atom, WordBatch, compl, cltl_to_ltl, cuntil, cunion, denote_cltl,
    epsilon_only, eval_ltl, eventually, format_ltl, free_of, has_epsilon, lor, ltl_language_contains,
    neg, nxt, parse_ltl, prefix, synth_ltl, until,
)

AB = ("a", "b")
A, B = Atom("a"), Atom("b")


def w(s):
    return tuple(s)


def test_eval_atoms_and_next():
    assert eval_ltl(A, w("ab"), 1)
    assert not eval_ltl(A, w("ab"), 2)
    assert eval_ltl(nxt(B), w("ab"), 1)
    assert not eval_ltl(nxt(TRUE), w("ab"), 2)  # strict next fails at the end
    with pytest.raises(ValueError):
        eval_ltl(A, w("ab"), 3)


def test_eval_until_is_strict_about_the_witness_position():
    f = until(A, B)
    assert eval_ltl(f, w("aab"), 1)
    assert eval_ltl(f, w("b"), 1)
    assert not eval_ltl(f, w("aaa"), 1)
    assert eval_ltl(eventually(B), w("aab"), 1)
    assert not eval_ltl(eventually(B), w("aaa"), 1)


def test_language_excludes_empty_word():
    assert not ltl_language_contains(TRUE, ())
    assert ltl_language_contains(TRUE, w("a"))
    assert not ltl_language_contains(FALSE, w("a"))


def test_parse_and_format_round_trip():
    for text in ["'a'", "X 'b'", "('a' U 'b')", "F !'a'", "('a' | X 'b')", "('a' & 'b')", "true", "false"]:
        f = parse_ltl(text)
        assert parse_ltl(format_ltl(f)) is f
    assert parse_ltl("'a' U 'b' U 'a'") is until(A, until(B, A))
    with pytest.raises(ValueError):
        parse_ltl("('a'")
    with pytest.raises(ValueError):
        parse_ltl("'a' 'b'")


def test_hash_consing_shares_nodes():
    assert lor(A, B) is lor(A, B)
    assert neg(neg(A)) is A


def test_denote_cltl_examples():
    assert denote_cltl(FULL, ())
    assert not denote_cltl(EMPTY, ())
    assert denote_cltl(epsilon_only(AB), ())
    assert not denote_cltl(epsilon_only(AB), w("a"))
    # a.(anything)
    e = prefix("a", FULL)
    assert denote_cltl(e, w("ab")) and not denote_cltl(e, w("ba")) and not denote_cltl(e, ())
    # K U L with K = words starting with a, L = epsilon: all of a*
    u = cuntil(prefix("a", FULL), epsilon_only(AB))
    assert denote_cltl(u, ()) and denote_cltl(u, w("aaa")) and not denote_cltl(u, w("ab"))
    nf = free_of("a")
    assert denote_cltl(nf, w("bbb")) and not denote_cltl(nf, w("bab"))
    with pytest.raises(ValueError):
        denote_cltl(FULL, w("c"), AB)


def test_has_epsilon():
    assert has_epsilon(FULL)
    assert not has_epsilon(EMPTY)
    assert not has_epsilon(prefix("a", FULL))
    assert has_epsilon(compl(prefix("a", FULL)))


cltl_exprs = st.recursive(
    st.sampled_from([EMPTY, FULL]),
    lambda kids: st.one_of(
        kids.map(compl),
        st.tuples(kids, kids).map(lambda p: cunion(*p)),
        st.tuples(st.sampled_from(AB), kids).map(lambda p: prefix(*p)),
        st.tuples(kids, kids).map(lambda p: cuntil(*p)),
    ),
    max_leaves=8,
)


@settings(max_examples=80, deadline=None)
@given(cltl_exprs)
def test_cltl_to_ltl_matches_on_nonempty_words(e):
    words = [x for x in all_words(AB, 5) if x]
    f = cltl_to_ltl(e)
    for x in words:
        assert denote_cltl(e, x) == eval_ltl(f, x, 1), x


@settings(max_examples=60, deadline=None)
@given(cltl_exprs)
def test_word_batch_matches_direct_semantics(e):
    words = list(all_words(AB, 5))
    batch = WordBatch(words, AB)
    got = batch.cltl(e)
    assert list(got) == [denote_cltl(e, x) for x in words]
    f = cltl_to_ltl(e)
    nonempty = [x for x in words if x]
    assert list(WordBatch(nonempty, AB).ltl(f)) == [eval_ltl(f, x, 1) for x in nonempty]


def test_synth_contains_a(contains_a):
    f = synth_ltl(contains_a)
    for x in all_words(AB, 8):
        if x:
            assert eval_ltl(f, x, 1) == ("a" in x)


def test_synth_ab_star(ab_star):
    f = synth_ltl(ab_star)
    words = [x for x in all_words(AB, 10) if x]
    got = WordBatch(words, AB).ltl(f)
    assert np.array_equal(got, WordBatch(words, AB).dfa(ab_star))


def test_synth_rejects_groups():
    parity = Dfa(AB, ((1, 0), (0, 1)), 0, {0})
    with pytest.raises(NotAperiodicError):
        synth_ltl(parity)


def test_synth_needs_accepting_set_for_morphisms(contains_a):
    from locdiv.algebra import syntactic_morphism
    h, acc = syntactic_morphism(contains_a)
    with pytest.raises(ValueError):
        synth_ltl(h)
    f = synth_ltl(h, acc)
    assert eval_ltl(f, w("ba"), 1)
