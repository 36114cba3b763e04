import functools

import pytest

from locdiv.algebra import cyclic_group, make_monoid
from locdiv.automata import Dfa
from locdiv.corpus import aperiodic_dfas, corpus_morphisms


@functools.lru_cache(maxsize=None)
def corpus_dfas():
    return tuple(aperiodic_dfas(4))


@functools.lru_cache(maxsize=None)
def corpus_homs():
    return tuple(corpus_morphisms(corpus_dfas()))


@pytest.fixture
def u1():
    # identity 0, absorbing 1
    return make_monoid([[0, 1], [1, 1]], 0)


@pytest.fixture
def z3():
    return cyclic_group(3)


@pytest.fixture
def contains_a():
    return Dfa(("a", "b"), ((1, 0), (1, 1)), 0, {1})


@pytest.fixture
def ab_star():
    return Dfa(("a", "b"), ((1, 2), (2, 0), (2, 2)), 0, {0})
