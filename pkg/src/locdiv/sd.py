"""SD expressions: rational expressions whose stars range over prefix codes
of bounded synchronization delay, plus their star-free counterparts.

Every star node records the delay ``d`` it claims.  A prefix code K has
synchronization delay d when ``uvw in K*`` and ``v in K^d`` force
``uv in K*``.  The right-localizable builder below only ever introduces a
star through the preimage of a derived-alphabet expression, which bumps
the claimed delay by one.
"""

from __future__ import annotations

import heapq
import re
import weakref
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .algebra import Morphism, syntactic_morphism
from .automata import (
    Dfa,
    complement,
    concat,
    empty_dfa,
    epsilon_dfa,
    full_dfa,
    intersection,
    is_empty,
    letter_dfa,
    power,
    star,
    union as dfa_union,
)
from .localizer import RIGHT, ClassBuilder, preimages
from .terms import Term, postorder


class UncertifiedStarError(ValueError):
    pass


# -- SD expressions ---------------------------------------------------------------


class Sd(Term):
    __slots__ = ()


class SEmpty(Sd):
    __slots__ = ()


class SLetter(Sd):
    __slots__ = ()
    fields = ("letter",)


class SUnion(Sd):
    __slots__ = ()
    fields = ("left", "right")


class SConcat(Sd):
    __slots__ = ()
    fields = ("left", "right")


class SStar(Sd):
    """``arg*`` with its claimed synchronization delay (None when uncertified)."""

    __slots__ = ()
    fields = ("arg", "delay")


S_EMPTY = SEmpty()
S_EPSILON = SStar(S_EMPTY, 0)


def s_union(k: Sd, l: Sd) -> Sd:
    if k is S_EMPTY or k is l:
        return l
    if l is S_EMPTY:
        return k
    return SUnion(k, l)


def s_union_all(parts: Iterable[Sd]) -> Sd:
    out = S_EMPTY
    for p in parts:
        out = s_union(out, p)
    return out


def s_concat(*parts: Sd) -> Sd:
    out = S_EPSILON
    for p in parts:
        if p is S_EMPTY or out is S_EMPTY:
            return S_EMPTY
        if p is S_EPSILON:
            continue
        out = p if out is S_EPSILON else SConcat(out, p)
    return out


def s_star(k: Sd, delay: int | None) -> Sd:
    if k is S_EMPTY:
        return S_EPSILON
    return SStar(k, delay)


def letters_star(letters: Iterable) -> Sd:
    """``B*`` for a set of letters; any letter set is a prefix code of delay 0."""
    return s_star(s_union_all(SLetter(a) for a in letters), 0)


def sd_letters(e: Sd) -> set:
    return {n.letter for n in postorder(e) if isinstance(n, SLetter)}


def stars(e: Sd) -> list[SStar]:
    return [n for n in postorder(e) if isinstance(n, SStar)]


def is_complement_free(e: Sd) -> bool:
    """Structural scan: only the five SD node kinds occur."""
    return all(isinstance(n, (SEmpty, SLetter, SUnion, SConcat, SStar)) for n in postorder(e))


# -- star-free expressions -------------------------------------------------------


class StarFree(Term):
    __slots__ = ()


class FEmpty(StarFree):
    __slots__ = ()


class FLetter(StarFree):
    __slots__ = ()
    fields = ("letter",)


class FUnion(StarFree):
    __slots__ = ()
    fields = ("left", "right")


class FConcat(StarFree):
    __slots__ = ()
    fields = ("left", "right")


class FCompl(StarFree):
    __slots__ = ()
    fields = ("arg",)


F_EMPTY = FEmpty()
F_FULL = FCompl(F_EMPTY)


def f_union(k, l):
    if k is F_EMPTY or k is l:
        return l
    if l is F_EMPTY:
        return k
    if k is F_FULL or l is F_FULL:
        return F_FULL
    return FUnion(k, l)


def f_compl(k):
    return k.arg if isinstance(k, FCompl) else FCompl(k)


def f_concat(k, l):
    if k is F_EMPTY or l is F_EMPTY:
        return F_EMPTY
    return FConcat(k, l)


def f_minus(k, l):
    return f_compl(f_union(f_compl(k), l))


# -- compilation to automata ------------------------------------------------------

_dfa_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def compile_expr(e: Sd | StarFree, alphabet: Sequence) -> Dfa:
    """Minimal DFA of an SD or star-free expression over ``alphabet``."""
    alphabet = tuple(alphabet)
    memo_of = lambda n: _dfa_cache.setdefault(n, {})
    for node in postorder(e, _Compiled(alphabet)):
        kids = [_dfa_cache[k][alphabet] for k in node.kids]
        if isinstance(node, (SEmpty, FEmpty)):
            d = empty_dfa(alphabet)
        elif isinstance(node, (SLetter, FLetter)):
            d = letter_dfa(node.letter, alphabet)
        elif isinstance(node, (SUnion, FUnion)):
            d = dfa_union(*kids)
        elif isinstance(node, (SConcat, FConcat)):
            d = concat(*kids)
        elif isinstance(node, SStar):
            d = epsilon_dfa(alphabet) if node.arg is S_EMPTY else star(kids[0])
        elif isinstance(node, FCompl):
            d = complement(kids[0])
        else:
            raise TypeError(node)
        memo_of(node)[alphabet] = d
    return _dfa_cache[e][alphabet]


class _Compiled:
    def __init__(self, alphabet):
        self.alphabet = alphabet

    def __contains__(self, node):
        return self.alphabet in _dfa_cache.get(node, ())


def _default_alphabet(e, word=()):
    letters = {n.letter for n in postorder(e) if isinstance(n, (SLetter, FLetter))}
    return tuple(sorted(letters | set(word), key=str))


def sd_membership(e: Sd, word: Sequence, alphabet: Sequence | None = None) -> bool:
    word = tuple(word)
    alphabet = tuple(alphabet) if alphabet is not None else _default_alphabet(e, word)
    return compile_expr(e, alphabet).accepts(word)


def starfree_membership(e: StarFree, word: Sequence, alphabet: Sequence) -> bool:
    return compile_expr(e, alphabet).accepts(tuple(word))


# -- certificates -----------------------------------------------------------------


def is_prefix_code(e: Sd, alphabet: Sequence | None = None) -> bool:
    """True iff the empty word is not in K and K & K A+ is empty."""
    alphabet = tuple(alphabet) if alphabet is not None else _default_alphabet(e)
    k = compile_expr(e, alphabet)
    if k.initial in k.accepting:
        return False
    if not alphabet:
        return True
    plus = concat(k, concat(full_dfa(alphabet), _any_letter(alphabet)))
    return is_empty(intersection(k, plus))


def _any_letter(alphabet):
    out = empty_dfa(alphabet)
    for a in alphabet:
        out = dfa_union(out, letter_dfa(a, alphabet))
    return out


@dataclass(frozen=True)
class DelayCheck:
    """Outcome of a synchronization-delay check.

    ``witness`` is a triple (u, v, w) with uvw in K*, v in K^d and uv not
    in K*, of minimal total length.
    """

    holds: bool
    delay: int
    maxlen: int | None
    witness: tuple | None = None

    def __bool__(self):
        return self.holds


def delay_witness(e: Sd, d: int, alphabet: Sequence | None = None) -> tuple | None:
    """A shortest triple refuting delay d for the code K, or None if K has delay d.

    Searches the product of the K* and K^d automata: u drives K* to some
    state, v is read in both automata from there and from the start of K^d,
    and w must lead K* to acceptance.
    """
    alphabet = tuple(alphabet) if alphabet is not None else _default_alphabet(e)
    k = compile_expr(e, alphabet)
    ks = star(k)
    kd = power(k, d)
    n_letters = len(alphabet)

    # shortest u reaching each K* state, and shortest w from each state to acceptance
    reach = {ks.initial: ()}
    queue = [ks.initial]
    for s in queue:
        for a in range(n_letters):
            t = ks.delta[s][a]
            if t not in reach:
                reach[t] = reach[s] + (alphabet[a],)
                queue.append(t)
    finish = _shortest_to_accept(ks)

    dist: dict = {}
    parent: dict = {}
    heap = []
    for s, u in reach.items():
        start = (s, kd.initial)
        dist[start] = len(u)
        parent[start] = None
        heapq.heappush(heap, (len(u), start))
    best = None
    while heap:
        cost, node = heapq.heappop(heap)
        if cost > dist[node]:
            continue
        if best is not None and cost >= best[0]:
            break
        p, q = node
        if q in kd.accepting and p not in ks.accepting and p in finish:
            total = cost + len(finish[p])
            if best is None or total < best[0]:
                best = (total, node)
        for a in range(n_letters):
            nxt = (ks.delta[p][a], kd.delta[q][a])
            if cost + 1 < dist.get(nxt, float("inf")):
                dist[nxt] = cost + 1
                parent[nxt] = (node, alphabet[a])
                heapq.heappush(heap, (cost + 1, nxt))
    if best is None:
        return None
    node = best[1]
    v = []
    while parent[node] is not None:
        node, a = parent[node]
        v.append(a)
    return reach[node[0]], tuple(reversed(v)), finish[best[1][0]]


def _shortest_to_accept(d: Dfa) -> dict:
    preds: dict = {}
    for s, row in enumerate(d.delta):
        for a, t in enumerate(row):
            preds.setdefault(t, []).append((s, d.alphabet[a]))
    out = {s: () for s in d.accepting}
    queue = list(d.accepting)
    for t in queue:
        for s, a in preds.get(t, ()):
            if s not in out:
                out[s] = (a,) + out[t]
                queue.append(s)
    return out


def check_sync_delay(e: Sd, d: int, maxlen: int | None = None,
                     alphabet: Sequence | None = None) -> DelayCheck:
    """Check that K has synchronization delay d.

    With ``maxlen`` the check covers triples with |uvw| <= maxlen; without
    it the answer covers all triples.  Both come from the same shortest
    witness search, so the bounded answer is exact for its bound.
    """
    if d < 0:
        raise ValueError("delay must be nonnegative")
    w = delay_witness(e, d, alphabet)
    if w is not None and (maxlen is None or sum(map(len, w)) <= maxlen):
        return DelayCheck(False, d, maxlen, w)
    return DelayCheck(True, d, maxlen, None)


def brute_force_delay_witness(e: Sd, d: int, maxlen: int, alphabet: Sequence | None = None):
    """Enumerate every triple with |uvw| <= maxlen; the reference for ``check_sync_delay``."""
    from .automata import all_words

    alphabet = tuple(alphabet) if alphabet is not None else _default_alphabet(e)
    k = compile_expr(e, alphabet)
    ks, kd = star(k), power(k, d)
    for x in all_words(alphabet, maxlen):
        if not ks.accepts(x):
            continue
        for i in range(len(x) + 1):
            for j in range(i, len(x) + 1):
                if kd.accepts(x[i:j]) and not ks.accepts(x[:j]):
                    return x[:i], x[i:j], x[j:]
    return None


@dataclass(frozen=True)
class StarReport:
    star: SStar
    prefix_code: bool
    delay: DelayCheck


def certify(e: Sd, alphabet: Sequence, maxlen: int | None = None) -> list[StarReport]:
    """Check every star of e; ``maxlen`` defaults to 3(d+2) per star."""
    out = []
    for s in stars(e):
        if s.arg is S_EMPTY:
            out.append(StarReport(s, True, DelayCheck(True, s.delay or 0, 0)))
            continue
        if s.delay is None:
            raise UncertifiedStarError(f"star without delay certificate: {format_sd(s)}")
        bound = 3 * (s.delay + 2) if maxlen is None else maxlen
        out.append(StarReport(s, is_prefix_code(s.arg, alphabet), check_sync_delay(s.arg, s.delay, bound, alphabet)))
    return out


# -- translation to star-free and the aperiodicity index -------------------------


def sd_to_starfree(e: Sd, alphabet: Sequence) -> StarFree:
    """Equivalent star-free expression; each star K*{d} becomes the complement of
    ``A* K^d (AA* - KA*)  +  sum_{i<d} (K^i AA* - K^{i+1} A*)``."""
    alphabet = tuple(alphabet)
    nonempty = F_EMPTY
    for a in alphabet:
        nonempty = f_union(nonempty, f_concat(FLetter(a), F_FULL))
    out: dict = {}
    for node in postorder(e):
        if isinstance(node, SEmpty):
            r = F_EMPTY
        elif isinstance(node, SLetter):
            r = FLetter(node.letter)
        elif isinstance(node, SUnion):
            r = f_union(out[node.left], out[node.right])
        elif isinstance(node, SConcat):
            r = f_concat(out[node.left], out[node.right])
        elif isinstance(node, SStar):
            if node.delay is None:
                raise UncertifiedStarError(f"star without delay certificate: {format_sd(node)}")
            k = out[node.arg]
            d = node.delay

            def then(i, rest):
                for _ in range(i):
                    rest = f_concat(k, rest)
                return rest

            bad = f_concat(F_FULL, then(d, f_minus(nonempty, f_concat(k, F_FULL))))
            for i in range(d):
                bad = f_union(bad, f_minus(then(i, nonempty), then(i + 1, F_FULL)))
            r = f_compl(bad)
        else:
            raise TypeError(node)
        out[node] = r
    return out[e]


def aperiodicity_index(e: StarFree) -> int:
    """n(e) with p u^n q in L(e) iff p u^(n+1) q in L(e) for all words p, u, q."""
    n: dict = {}
    for node in postorder(e):
        if isinstance(node, FEmpty):
            v = 0
        elif isinstance(node, FLetter):
            v = 2
        elif isinstance(node, FUnion):
            v = max(n[node.left], n[node.right])
        elif isinstance(node, FCompl):
            v = n[node.arg]
        elif isinstance(node, FConcat):
            v = n[node.left] + n[node.right] + 1
        else:
            raise TypeError(node)
        n[node] = v
    return n[e]


# -- text syntax --------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:'([^']*)'|\*\{(\d+)\}|([0()+.*~]))")


def _tokens(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unexpected input at position {pos}: {text[pos:pos + 10]!r}")
        if m.group(1) is not None:
            out.append(("letter", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append(("star", int(m.group(2)), m.start()))
        else:
            out.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    return out


def _parse(text: str, starfree: bool):
    tokens = _tokens(text)
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else (None, None, len(text))

    def expect(op):
        nonlocal i
        kind, val, at = peek()
        if (kind, val) != ("op", op):
            raise ValueError(f"expected {op!r} at position {at}")
        i += 1

    def expr():
        nonlocal i
        kind, val, at = peek()
        if kind == "letter":
            i += 1
            node = FLetter(val) if starfree else SLetter(val)
        elif (kind, val) == ("op", "0"):
            i += 1
            node = F_EMPTY if starfree else S_EMPTY
        elif starfree and (kind, val) == ("op", "~"):
            i += 1
            return f_compl(expr())
        elif (kind, val) == ("op", "("):
            i += 1
            node = expr()
            kind, op, at = peek()
            if (kind, op) not in (("op", "+"), ("op", ".")):
                raise ValueError(f"expected '+' or '.' at position {at}")
            while peek()[:2] == ("op", op):
                i += 1
                rhs = expr()
                if starfree:
                    node = f_union(node, rhs) if op == "+" else f_concat(node, rhs)
                else:
                    node = s_union(node, rhs) if op == "+" else s_concat(node, rhs)
            expect(")")
        else:
            raise ValueError(f"unexpected token at position {at}")
        while not starfree:
            kind, val, _ = peek()
            if kind == "star":
                i += 1
                node = s_star(node, val)
            elif (kind, val) == ("op", "*"):
                i += 1
                node = s_star(node, None)
            else:
                break
        return node

    node = expr()
    if i != len(tokens):
        raise ValueError(f"trailing input at position {peek()[2]}")
    return node


def parse_sd(text: str) -> Sd:
    """Parse ``0, 'a', (e + e), (e . e), e*{d}``; a bare ``e*`` is an uncertified star."""
    return _parse(text, starfree=False)


def parse_starfree(text: str) -> StarFree:
    """Parse ``0, 'a', (e + e), (e . e), ~e``."""
    return _parse(text, starfree=True)


def format_sd(e: Sd) -> str:
    out: dict = {}
    for node in postorder(e):
        if isinstance(node, SEmpty):
            s = "0"
        elif isinstance(node, SLetter):
            s = f"'{node.letter}'"
        elif isinstance(node, SUnion):
            s = f"({out[node.left]} + {out[node.right]})"
        elif isinstance(node, SConcat):
            s = f"({out[node.left]} . {out[node.right]})"
        elif isinstance(node, SStar):
            s = out[node.arg] + ("*" if node.delay is None else f"*{{{node.delay}}}")
        out[node] = s
    return out[e]


def format_starfree(e: StarFree) -> str:
    out: dict = {}
    for node in postorder(e):
        if isinstance(node, FEmpty):
            s = "0"
        elif isinstance(node, FLetter):
            s = f"'{node.letter}'"
        elif isinstance(node, FUnion):
            s = f"({out[node.left]} + {out[node.right]})"
        elif isinstance(node, FConcat):
            s = f"({out[node.left]} . {out[node.right]})"
        elif isinstance(node, FCompl):
            s = f"~{out[node.arg]}"
        out[node] = s
    return out[e]


# -- the right-localizable builder -----------------------------------------------


class SdBuilder(ClassBuilder):
    """SD constructors; concatenations are plain and stars only arise in preimages."""

    direction = RIGHT

    def empty(self, alphabet):
        return S_EMPTY

    def full(self, alphabet):
        return letters_star(alphabet)

    def epsilon(self, alphabet):
        return S_EPSILON

    def union(self, exprs, alphabet):
        return s_union_all(exprs)

    def lift(self, expr, c, alphabet):
        return expr

    def c_block(self, before, c, after, alphabet):
        return s_concat(before, SLetter(c), after)

    def c_side_concat(self, first, second, c, alphabet):
        return s_concat(first, second)

    def sigma_preimage(self, expr, c, g_table: Mapping, derived: Sequence, alphabet):
        derived_set = set(derived)
        frame = ("sigma", c, tuple(sorted(g_table.items(), key=lambda kv: kv[0])))
        memo = self.memo.setdefault(frame, {})
        for node in postorder(expr, memo):
            if isinstance(node, SEmpty):
                r = S_EMPTY
            elif isinstance(node, SLetter):
                if node.letter not in derived_set:
                    raise ValueError(f"letter {node.letter!r} is not in the derived alphabet")
                r = s_concat(g_table[node.letter], SLetter(c))
            elif isinstance(node, SUnion):
                r = s_union(memo[node.left], memo[node.right])
            elif isinstance(node, SConcat):
                r = s_concat(memo[node.left], memo[node.right])
            elif isinstance(node, SStar):
                if node.delay is None:
                    raise UncertifiedStarError("cannot star an uncertified expression")
                r = s_star(memo[node.arg], node.delay + 1)
            else:
                raise TypeError(node)
            memo[node] = r
        return memo[expr]


_default_builder = SdBuilder()


def synth_sd(source: Dfa | Morphism, accepting: Iterable[int] | None = None,
             builder: SdBuilder | None = None) -> Sd:
    """SD expression for the language of a DFA, or of a morphism with accepted elements."""
    if isinstance(source, Dfa):
        h, accepted = syntactic_morphism(source)
    else:
        if accepting is None:
            raise ValueError("a morphism needs an accepting set")
        h, accepted = source, accepting
    found = preimages(h, builder or _default_builder)
    return s_union_all(found[p] for p in sorted(set(accepted)) if p in found)
