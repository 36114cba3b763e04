"""Synthesis of expressions for h^-1(p) by induction over local divisors.

Given a homomorphism ``h`` onto a finite aperiodic monoid, every preimage
``h^-1(p)`` is assembled from three kinds of smaller problems: the
restriction of ``h`` to the alphabet without a letter ``c``, and a
homomorphism from a derived alphabet ``T = h(B*)`` into the local divisor
at ``h(c)``.  Words are cut at their first and last ``c``:

    h^-1(p) = g^-1(p)  u  U_{q r s = p}  g^-1(q) . (h^-1(r) & cA* & A*c) . g^-1(s)

The target language class is abstracted by a :class:`ClassBuilder`; the
same recursion produces LTL-style expressions (left builder) and
synchronization-delay expressions (right builder).
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from typing import Hashable, Mapping, Sequence

from .algebra import Morphism, NotAperiodicError, aperiodicity_witness, is_unit, local_divisor

LEFT = "left"
RIGHT = "right"


class ClassBuilder(ABC):
    """Constructors of a localizable language class.

    Expressions are opaque to the localizer.  ``alphabet`` arguments are
    tuples of letters; ``c`` is always a letter of ``alphabet`` and ``B``
    stands for ``alphabet`` without ``c``.
    """

    direction: str = LEFT

    def __init__(self):
        self.memo: dict = {}
        self.lock = threading.RLock()

    @abstractmethod
    def empty(self, alphabet): ...

    @abstractmethod
    def full(self, alphabet): ...

    @abstractmethod
    def union(self, exprs: Sequence, alphabet): ...

    @abstractmethod
    def epsilon(self, alphabet):
        """The language {empty word}."""

    @abstractmethod
    def lift(self, expr, c, alphabet):
        """Read an expression over B as one over the alphabet."""

    @abstractmethod
    def c_block(self, before, c, after, alphabet):
        """``K c L``.

        Left classes take K over the alphabet and L over B; right
        classes take K over B and L over the alphabet.
        """

    @abstractmethod
    def c_side_concat(self, first, second, c, alphabet):
        """``K L`` where the c-side operand is confined to cA* (left) or A*c (right).

        Left: K over B, L over the alphabet with L in cA*.
        Right: K over the alphabet with K in A*c, L over B.
        """

    @abstractmethod
    def sigma_preimage(self, expr, c, g_table: Mapping, derived: Sequence, alphabet):
        """Preimage of an expression over the derived alphabet ``derived``.

        ``g_table[t]`` is an expression over B for g^-1(t).  Left classes
        decode words of (cB*)*, right classes words of (B*c)*.
        """


def choose_letter(h: Morphism):
    """A letter whose image is not the identity, preferring non-units.

    Ties are broken by alphabet order.
    """
    m = h.monoid
    candidates = [a for a in h.alphabet if h.image(a) != m.identity]
    if not candidates:
        raise ValueError("every letter maps to the identity; no letter to split on")
    for a in candidates:
        if not is_unit(m, h.image(a)):
            return a
    return candidates[0]


def preimages(h: Morphism, builder: ClassBuilder) -> dict[int, object]:
    """Map every element p of h(A*) to an expression for h^-1(p).

    Elements outside h(A*) have empty preimage and are omitted.
    """
    canon, embed = h.canonical()
    with builder.lock:
        found = _preimages(canon, builder, None)
    return {embed[p]: e for p, e in found.items()}


def synthesize(h: Morphism, p: int, builder: ClassBuilder, direction: str | None = None):
    """Expression denoting exactly h^-1(p)."""
    if direction is not None and direction != builder.direction:
        raise ValueError(f"builder is {builder.direction}-localizable, not {direction}")
    if not 0 <= p < h.monoid.size:
        raise ValueError(f"element {p} out of range")
    found = preimages(h, builder)
    return found.get(p, builder.empty(h.alphabet))


def _check_aperiodic(h: Morphism):
    w = aperiodicity_witness(h.monoid)
    if w is not None:
        raise NotAperiodicError(w)


def _preimages(h: Morphism, builder: ClassBuilder, parent: tuple | None) -> dict[int, object]:
    """``h`` must already be canonical (onto, shortlex-numbered)."""
    measure = (h.monoid.size, len(h.alphabet))
    if parent is not None and not measure < parent:
        raise AssertionError(f"recursion measure did not decrease: {measure} >= {parent}")
    key = ("preimages", h.signature)
    if key in builder.memo:
        return builder.memo[key]
    m = h.monoid
    alphabet = h.alphabet
    if all(x == m.identity for x in h.images):
        result = {m.identity: builder.full(alphabet)}
        builder.memo[key] = result
        return result
    _check_aperiodic(h)

    c = choose_letter(h)
    hc = h.image(c)
    sub = h.restrict(a for a in alphabet if a != c)
    sub_canon, sub_embed = sub.canonical()
    g_found = _preimages(sub_canon, builder, measure)
    g_table = {sub_embed[q]: e for q, e in g_found.items()}
    derived = tuple(sorted(g_table))  # T = h(B*) as an alphabet

    ld = local_divisor(m, hc)
    f = Morphism(derived, ld.quotient, tuple(ld.index(m.mul(m.mul(hc, t), hc)) for t in derived))
    f_canon, f_embed = f.canonical()
    f_found = _preimages(f_canon, builder, measure)
    # K = f^-1(r) for r in the carrier, keyed by base elements
    k_table = {ld.embed(f_embed[r]): e for r, e in f_found.items()}
    sigma = {
        r: builder.sigma_preimage(k, c, g_table, derived, alphabet)
        for r, k in sorted(k_table.items())
    }

    result = {}
    image = set(h.image_submonoid())
    for p in sorted(image):
        parts = []
        if p in g_table:
            parts.append(builder.lift(g_table[p], c, alphabet))
        parts.extend(_middle_terms(builder, m, c, sigma, g_table, derived, p, alphabet))
        result[p] = builder.union(parts, alphabet)
    builder.memo[key] = result
    return result


def _middle_terms(builder, m, c, sigma, g_table, derived, p, alphabet):
    out = []
    if builder.direction == LEFT:
        for r in sorted(sigma):
            for s in derived:
                qs = [q for q in derived if m.mul(m.mul(q, r), s) == p]
                if not qs:
                    continue
                block = _cached(builder, ("lblock", sigma[r], c, g_table[s], alphabet),
                                lambda: builder.c_block(sigma[r], c, g_table[s], alphabet))
                head = builder.union([g_table[q] for q in qs], _drop(alphabet, c))
                out.append(builder.c_side_concat(head, block, c, alphabet))
    else:
        for r in sorted(sigma):
            for q in derived:
                ss = [s for s in derived if m.mul(m.mul(q, r), s) == p]
                if not ss:
                    continue
                block = _cached(builder, ("rblock", g_table[q], c, sigma[r], alphabet),
                                lambda: builder.c_block(g_table[q], c, sigma[r], alphabet))
                tail = builder.union([g_table[s] for s in ss], _drop(alphabet, c))
                out.append(builder.c_side_concat(block, tail, c, alphabet))
    return out


def middle_block(h: Morphism, c, r: int, builder: ClassBuilder):
    """Expression for h^-1(r) & cA* & A*c.

    ``r`` must lie in h(c)M & Mh(c).
    """
    m = h.monoid
    hc = h.image(c)
    ld = local_divisor(m, hc)
    if r not in ld:
        raise ValueError(f"element {r} is not in h(c)M & Mh(c)")
    alphabet = h.alphabet
    B = _drop(alphabet, c)
    sub = h.restrict(B)
    with builder.lock:
        sub_canon, sub_embed = sub.canonical()
        g_table = {sub_embed[q]: e for q, e in _preimages(sub_canon, builder, None).items()}
        derived = tuple(sorted(g_table))
        f = Morphism(derived, ld.quotient, tuple(ld.index(m.mul(m.mul(hc, t), hc)) for t in derived))
        f_canon, f_embed = f.canonical()
        found = {ld.embed(f_embed[x]): e for x, e in _preimages(f_canon, builder, None).items()}
        if r not in found:
            return builder.empty(alphabet)
        sig = builder.sigma_preimage(found[r], c, g_table, derived, alphabet)
        eps = builder.epsilon(B)
        if builder.direction == LEFT:
            return builder.c_block(sig, c, eps, alphabet)
        return builder.c_block(eps, c, sig, alphabet)


def _drop(alphabet: tuple, c: Hashable) -> tuple:
    return tuple(a for a in alphabet if a != c)


def _cached(builder, key, make):
    try:
        return builder.memo[key]
    except KeyError:
        value = builder.memo[key] = make()
        return value
