"""Test corpora: small minimal DFAs, small monoid tables, random monoids and words.

Randomized corpora draw from ``random.Random(seed)`` where the seed defaults
to the ``LOCDIV_SEED`` environment variable (0 when unset).
"""

from __future__ import annotations

import itertools
import os
import random
from typing import Iterator, Sequence

from .algebra import Monoid, Morphism, is_aperiodic, make_monoid, transition_monoid
from .automata import Dfa


def default_seed() -> int:
    return int(os.environ.get("LOCDIV_SEED", "0"))


def rng(seed: int | None = None) -> random.Random:
    return random.Random(default_seed() if seed is None else seed)


def _bfs_canonical(n: int, delta: Sequence[Sequence[int]]) -> bool:
    order, seen, i = [0], {0}, 0
    while i < len(order):
        for t in delta[order[i]]:
            if t not in seen:
                seen.add(t)
                order.append(t)
        i += 1
    return order == list(range(n))


def _is_minimal(n: int, delta, accepting: frozenset) -> bool:
    part = [int(s in accepting) for s in range(n)]
    blocks = len(set(part))
    while True:
        sigs: dict = {}
        part = [sigs.setdefault((part[s],) + tuple(part[t] for t in delta[s]), len(sigs)) for s in range(n)]
        if len(sigs) == blocks:
            return blocks == n
        blocks = len(sigs)


def minimal_dfas(max_states: int, alphabet: Sequence = ("a", "b")) -> Iterator[Dfa]:
    """Every minimal complete DFA with at most ``max_states`` states, each once.

    States are numbered in BFS order from the initial state 0, which makes
    the representation of each language unique.
    """
    k = len(alphabet)
    for n in range(1, max_states + 1):
        for flat in itertools.product(range(n), repeat=n * k):
            delta = tuple(tuple(flat[s * k:(s + 1) * k]) for s in range(n))
            if not _bfs_canonical(n, delta):
                continue
            for r in range(n + 1):
                for acc in itertools.combinations(range(n), r):
                    acc = frozenset(acc)
                    if _is_minimal(n, delta, acc):
                        yield Dfa(tuple(alphabet), delta, 0, acc)


def aperiodic_dfas(max_states: int = 4, alphabet: Sequence = ("a", "b")) -> list[Dfa]:
    cache: dict = {}
    out = []
    for d in minimal_dfas(max_states, alphabet):
        if d.delta not in cache:
            cache[d.delta] = is_aperiodic(transition_monoid(d)[0])
        if cache[d.delta]:
            out.append(d)
    return out


def corpus_morphisms(dfas: Sequence[Dfa]) -> list[Morphism]:
    """Distinct canonical transition morphisms of the given DFAs, in first-seen order."""
    seen: dict = {}
    for d in dfas:
        _, h = transition_monoid(d)
        canon, _ = h.canonical()
        seen.setdefault(canon.signature, canon)
    return list(seen.values())


def all_monoids(size: int) -> Iterator[Monoid]:
    """Every associative table on {0..size-1} with identity 0 (not up to isomorphism)."""
    n = size
    free = [(x, y) for x in range(1, n) for y in range(1, n)]
    table = [[y if x == 0 else (x if y == 0 else None) for y in range(n)] for x in range(n)]

    def consistent() -> bool:
        for x in range(1, n):
            for y in range(1, n):
                xy = table[x][y]
                if xy is None:
                    continue
                for z in range(1, n):
                    yz = table[y][z]
                    if yz is None:
                        continue
                    left, right = table[xy][z], table[x][yz]
                    if left is not None and right is not None and left != right:
                        return False
        return True

    def fill(i: int):
        if i == len(free):
            yield make_monoid([row[:] for row in table], 0)
            return
        x, y = free[i]
        for v in range(n):
            table[x][y] = v
            if consistent():
                yield from fill(i + 1)
        table[x][y] = None

    yield from fill(0)


def random_transformation_monoid(r: random.Random, max_points: int = 4, max_gens: int = 3,
                                 max_size: int = 40) -> Monoid:
    """Monoid generated by random maps on a few points; retried until small enough."""
    while True:
        n = r.randint(1, max_points)
        gens = [tuple(r.randrange(n) for _ in range(n)) for _ in range(r.randint(1, max_gens))]
        ident = tuple(range(n))
        order, seen, i = [ident], {ident}, 0
        while i < len(order) and len(order) <= max_size:
            x = order[i]
            i += 1
            for g in gens:
                y = tuple(g[x[s]] for s in range(n))
                if y not in seen:
                    seen.add(y)
                    order.append(y)
        if len(order) > max_size:
            continue
        pos = {x: k for k, x in enumerate(order)}
        return make_monoid([[pos[tuple(y[x[s]] for s in range(n))] for y in order] for x in order], 0)


def random_morphism(r: random.Random, m: Monoid, alphabet: Sequence = ("a", "b")) -> Morphism:
    return Morphism(tuple(alphabet), m, tuple(r.randrange(m.size) for _ in alphabet))


def random_word(r: random.Random, alphabet: Sequence, length: int) -> tuple:
    return tuple(r.choice(alphabet) for _ in range(length))
