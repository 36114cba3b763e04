"""Linear temporal logic over finite words and the cLTL language class.

cLTL is the class of languages built from the empty set by complement
(relative to A*), union, letter prefixing ``aL`` and the language-level
until ``K U L = {vw : w in L, qw in K for every nonempty suffix q of v}``.
A cLTL language L yields an LTL formula defining L minus the empty word,
and cLTL is left-localizable, so every aperiodic language gets a formula.
"""

from __future__ import annotations

import re
import weakref
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import Morphism, syntactic_morphism
from .automata import Dfa
from .localizer import LEFT, ClassBuilder, preimages
from .terms import Term, postorder


# -- LTL formulas ---------------------------------------------------------------


class Ltl(Term):
    __slots__ = ()


class Top(Ltl):
    __slots__ = ()


class Atom(Ltl):
    __slots__ = ()
    fields = ("letter",)


class Not(Ltl):
    __slots__ = ()
    fields = ("arg",)


class Or(Ltl):
    __slots__ = ()
    fields = ("left", "right")


class Next(Ltl):
    __slots__ = ()
    fields = ("arg",)


class Until(Ltl):
    __slots__ = ()
    fields = ("left", "right")


TRUE = Top()
FALSE = Not(TRUE)


def neg(f: Ltl) -> Ltl:
    return f.arg if isinstance(f, Not) else Not(f)


def lor(f: Ltl, g: Ltl) -> Ltl:
    if f is FALSE or f is g:
        return g
    if g is FALSE:
        return f
    if f is TRUE or g is TRUE:
        return TRUE
    return Or(f, g)


def land(f: Ltl, g: Ltl) -> Ltl:
    return neg(lor(neg(f), neg(g)))


def nxt(f: Ltl) -> Ltl:
    return FALSE if f is FALSE else Next(f)


def until(f: Ltl, g: Ltl) -> Ltl:
    return FALSE if g is FALSE else Until(f, g)


def eventually(f: Ltl) -> Ltl:
    return until(TRUE, f)


def any_of(letters: Iterable) -> Ltl:
    out = FALSE
    for a in letters:
        out = lor(out, Atom(a))
    return out


def _positions_direct(f: Ltl, word: tuple) -> dict:
    """Truth of every subformula at every position, straight from the definitions."""
    n = len(word)
    val: dict = {}
    for node in postorder(f):
        if isinstance(node, Top):
            v = [True] * n
        elif isinstance(node, Atom):
            v = [a == node.letter for a in word]
        elif isinstance(node, Not):
            v = [not x for x in val[node.arg]]
        elif isinstance(node, Or):
            v = [x or y for x, y in zip(val[node.left], val[node.right])]
        elif isinstance(node, Next):
            inner = val[node.arg]
            v = [i + 1 < n and inner[i + 1] for i in range(n)]
        elif isinstance(node, Until):
            phi, psi = val[node.left], val[node.right]
            v = [any(psi[k] and all(phi[j] for j in range(i, k)) for k in range(i, n)) for i in range(n)]
        else:
            raise TypeError(node)
        val[node] = v
    return val


def eval_ltl(f: Ltl, word: Sequence, i: int = 1) -> bool:
    """``word, i |= f`` with positions numbered from 1."""
    word = tuple(word)
    if not 1 <= i <= len(word):
        raise ValueError(f"position {i} out of range for a word of length {len(word)}")
    return _positions_direct(f, word)[f][i - 1]


def ltl_language_contains(f: Ltl, word: Sequence) -> bool:
    word = tuple(word)
    return bool(word) and eval_ltl(f, word, 1)


class WordBatch:
    """A fixed set of words, evaluated against many expressions with shared memo tables.

    Words are padded into one integer array so that each node of an
    expression costs a handful of vectorised operations.  The memo tables
    are dropped between calls once they exceed ``budget`` bytes.
    """

    def __init__(self, words: Iterable[Sequence], alphabet: Sequence, budget: int = 1 << 29):
        self.alphabet = tuple(alphabet)
        self.code = {a: k for k, a in enumerate(self.alphabet)}
        self.words = [tuple(w) for w in words]
        lengths = np.array([len(w) for w in self.words], dtype=np.int64)
        width = int(lengths.max()) if len(self.words) else 0
        self.arr = np.full((len(self.words), width), -1, dtype=np.int16)
        for i, w in enumerate(self.words):
            self.arr[i, :len(w)] = [self.code[a] for a in w]
        cols = np.arange(width + 1)
        self.inside = cols[None, :] < lengths[:, None]  # position holds a letter
        self.budget = budget
        self._ltl: dict = {}
        self._cltl: dict = {}

    def _trim(self, memo: dict, row_bytes: int):
        if len(memo) * row_bytes > self.budget:
            memo.clear()

    def dfa(self, d: Dfa) -> np.ndarray:
        """Acceptance of every word by a DFA over the same alphabet."""
        delta = np.array(d.delta, dtype=np.int64)
        col = np.array([d.letter_index[a] for a in self.alphabet], dtype=np.int64)
        state = np.full(len(self.words), d.initial, dtype=np.int64)
        for j in range(self.arr.shape[1]):
            live = self.inside[:, j]
            state[live] = delta[state[live], col[self.arr[live, j]]]
        return np.isin(state, sorted(d.accepting))

    def ltl(self, f: Ltl) -> np.ndarray:
        """Truth of f at position 1 for every word (False for the empty word)."""
        N, n = self.arr.shape
        if n == 0:
            return np.zeros(N, dtype=bool)
        memo = self._ltl
        self._trim(memo, N * n)
        inside = self.inside[:, :n]
        for node in postorder(f, memo):
            if isinstance(node, Top):
                v = inside
            elif isinstance(node, Atom):
                k = self.code.get(node.letter)
                v = self.arr == k if k is not None else np.zeros((N, n), dtype=bool)
            elif isinstance(node, Not):
                v = ~memo[node.arg] & inside
            elif isinstance(node, Or):
                v = memo[node.left] | memo[node.right]
            elif isinstance(node, Next):
                v = np.zeros((N, n), dtype=bool)
                v[:, :-1] = memo[node.arg][:, 1:]
            elif isinstance(node, Until):
                phi, psi = memo[node.left], memo[node.right]
                v = psi.copy()
                for j in range(n - 2, -1, -1):
                    v[:, j] |= phi[:, j] & v[:, j + 1]
            else:
                raise TypeError(node)
            memo[node] = v
        return memo[f][:, 0].copy()

    def cltl(self, e: "Cltl") -> np.ndarray:
        """Membership of every word in the cLTL language e."""
        # column i holds membership of the suffix starting at i; columns past
        # the word length carry junk that never reaches column 0
        N, n = self.arr.shape
        memo = self._cltl
        self._trim(memo, N * (n + 1))
        for node in postorder(e, memo):
            if isinstance(node, CEmpty):
                v = np.zeros((N, n + 1), dtype=bool)
            elif isinstance(node, CCompl):
                v = ~memo[node.arg]
            elif isinstance(node, CUnion):
                v = memo[node.left] | memo[node.right]
            elif isinstance(node, CPrefix):
                v = np.zeros((N, n + 1), dtype=bool)
                k = self.code.get(node.letter)
                if k is not None and n:
                    v[:, :n] = (self.arr == k) & memo[node.arg][:, 1:]
            elif isinstance(node, CUntil):
                K, L = memo[node.left], memo[node.right]
                v = L.copy()
                step = K & self.inside
                for j in range(n - 1, -1, -1):
                    v[:, j] |= step[:, j] & v[:, j + 1]
            else:
                raise TypeError(node)
            memo[node] = v
        return memo[e][:, 0].copy()


# -- text syntax ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(true|false)\b|'([^']*)'|(\|\||&&|[!()|&XFU]))")


def parse_ltl(text: str) -> Ltl:
    """Parse ``true, false, 'a', !f, f | g, f & g, X f, f U g, F f`` with parentheses."""
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unexpected input at position {pos}: {text[pos:pos + 10]!r}")
        if m.group(1):
            tokens.append(("kw", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("letter", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3)[0], m.start(3)))
        pos = m.end()
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else (None, None, len(text))

    def take(op):
        nonlocal i
        if peek()[:2] == ("op", op):
            i += 1
            return True
        return False

    def disj():
        f = conj()
        while take("|"):
            f = lor(f, conj())
        return f

    def conj():
        f = untl()
        while take("&"):
            f = land(f, untl())
        return f

    def untl():
        f = unary()
        if take("U"):
            return until(f, untl())
        return f

    def unary():
        nonlocal i
        if take("!"):
            return neg(unary())
        if take("X"):
            return nxt(unary())
        if take("F"):
            return eventually(unary())
        kind, val, at = peek()
        if kind == "kw":
            i += 1
            return TRUE if val == "true" else FALSE
        if kind == "letter":
            i += 1
            return Atom(val)
        if take("("):
            f = disj()
            if not take(")"):
                raise ValueError(f"expected ')' at position {peek()[2]}")
            return f
        raise ValueError(f"unexpected token at position {at}")

    f = disj()
    if i != len(tokens):
        raise ValueError(f"trailing input at position {peek()[2]}")
    return f


def format_ltl(f: Ltl) -> str:
    out: dict = {}
    for node in postorder(f):
        if node is FALSE:
            s = "false"
        elif isinstance(node, Top):
            s = "true"
        elif isinstance(node, Atom):
            s = f"'{node.letter}'"
        elif isinstance(node, Not):
            inner = node.arg
            if isinstance(inner, Or) and isinstance(inner.left, Not) and isinstance(inner.right, Not):
                s = f"({_fmt_operand(out, inner.left.arg)} & {_fmt_operand(out, inner.right.arg)})"
            else:
                s = f"!{out[inner]}"
        elif isinstance(node, Or):
            s = f"({out[node.left]} | {out[node.right]})"
        elif isinstance(node, Next):
            s = f"X {out[node.arg]}"
        elif isinstance(node, Until):
            if node.left is TRUE:
                s = f"F {out[node.right]}"
            else:
                s = f"({out[node.left]} U {out[node.right]})"
        else:
            raise TypeError(node)
        out[node] = s
    return out[f]


def _fmt_operand(out, node):
    if node not in out:
        out[node] = format_ltl(node)
    return out[node]


# -- cLTL expressions -------------------------------------------------------------


class Cltl(Term):
    __slots__ = ()


class CEmpty(Cltl):
    __slots__ = ()


class CCompl(Cltl):
    """A* minus the argument."""

    __slots__ = ()
    fields = ("arg",)


class CUnion(Cltl):
    __slots__ = ()
    fields = ("left", "right")


class CPrefix(Cltl):
    __slots__ = ()
    fields = ("letter", "arg")


class CUntil(Cltl):
    __slots__ = ()
    fields = ("left", "right")


EMPTY = CEmpty()
FULL = CCompl(EMPTY)


def compl(e: Cltl) -> Cltl:
    return e.arg if isinstance(e, CCompl) else CCompl(e)


def cunion(k: Cltl, l: Cltl) -> Cltl:
    if k is EMPTY or k is l:
        return l
    if l is EMPTY:
        return k
    if k is FULL or l is FULL:
        return FULL
    return CUnion(k, l)


def cunion_all(parts: Iterable[Cltl]) -> Cltl:
    out = EMPTY
    for p in parts:
        out = cunion(out, p)
    return out


def intersect(k: Cltl, l: Cltl) -> Cltl:
    if k is EMPTY or l is EMPTY:
        return EMPTY
    return compl(cunion(compl(k), compl(l)))


def minus(k: Cltl, l: Cltl) -> Cltl:
    return intersect(k, compl(l))


def prefix(a, e: Cltl) -> Cltl:
    return EMPTY if e is EMPTY else CPrefix(a, e)


def cuntil(k: Cltl, l: Cltl) -> Cltl:
    return EMPTY if l is EMPTY else CUntil(k, l)


def letters_then_anything(letters: Iterable) -> Cltl:
    """``B A*`` for a set of letters B."""
    return cunion_all(prefix(b, FULL) for b in letters)


def epsilon_only(alphabet: Iterable) -> Cltl:
    return compl(letters_then_anything(alphabet))


def free_of(c) -> Cltl:
    """Words avoiding the letter c: complement of A* U cA*."""
    return compl(cuntil(FULL, prefix(c, FULL)))


_eps_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def has_epsilon(e: Cltl) -> bool:
    if e in _eps_cache:
        return _eps_cache[e]
    for node in postorder(e, _eps_cache):
        if node in _eps_cache:
            continue
        if isinstance(node, CEmpty):
            v = False
        elif isinstance(node, CCompl):
            v = not _eps_cache[node.arg]
        elif isinstance(node, CUnion):
            v = _eps_cache[node.left] or _eps_cache[node.right]
        elif isinstance(node, CPrefix):
            v = False
        elif isinstance(node, CUntil):
            v = _eps_cache[node.right]
        else:
            raise TypeError(node)
        _eps_cache[node] = v
    return _eps_cache[e]


def denote_cltl(e: Cltl, word: Sequence, alphabet: Sequence | None = None) -> bool:
    """Membership straight from the inductive definition.

    Every subexpression is only ever asked about suffixes of ``word``; the
    until case scans every split and every nonempty suffix of its left part.
    """
    word = tuple(word)
    if alphabet is not None:
        bad = set(word) - set(alphabet)
        if bad:
            raise ValueError(f"letters {sorted(map(str, bad))} not in alphabet")
    n = len(word)
    val: dict = {}
    for node in postorder(e):
        if isinstance(node, CEmpty):
            v = [False] * (n + 1)
        elif isinstance(node, CCompl):
            v = [not x for x in val[node.arg]]
        elif isinstance(node, CUnion):
            v = [x or y for x, y in zip(val[node.left], val[node.right])]
        elif isinstance(node, CPrefix):
            inner = val[node.arg]
            v = [i < n and word[i] == node.letter and inner[i + 1] for i in range(n + 1)]
        elif isinstance(node, CUntil):
            K, L = val[node.left], val[node.right]
            v = [any(L[j] and all(K[m] for m in range(i, j)) for j in range(i, n + 1)) for i in range(n + 1)]
        else:
            raise TypeError(node)
        val[node] = v
    return val[e][0]


_ltl_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def cltl_to_ltl(e: Cltl) -> Ltl:
    """An LTL formula defining the language of e minus the empty word."""
    if e in _ltl_cache:
        return _ltl_cache[e]
    for node in postorder(e, _ltl_cache):
        if node in _ltl_cache:
            continue
        if isinstance(node, CEmpty):
            f = FALSE
        elif isinstance(node, CCompl):
            f = neg(_ltl_cache[node.arg])
        elif isinstance(node, CUnion):
            f = lor(_ltl_cache[node.left], _ltl_cache[node.right])
        elif isinstance(node, CPrefix):
            inner = _ltl_cache[node.arg]
            if has_epsilon(node.arg):
                f = land(Atom(node.letter), lor(neg(nxt(TRUE)), nxt(inner)))
            else:
                f = land(Atom(node.letter), nxt(inner))
        elif isinstance(node, CUntil):
            f1, f2 = _ltl_cache[node.left], _ltl_cache[node.right]
            f = until(f1, f2)
            if has_epsilon(node.right):
                f = lor(f, neg(eventually(neg(f1))))
        else:
            raise TypeError(node)
        _ltl_cache[node] = f
    return _ltl_cache[e]


def format_cltl(e: Cltl) -> str:
    out: dict = {}
    for node in postorder(e):
        if node is FULL:
            s = "A*"
        elif isinstance(node, CEmpty):
            s = "0"
        elif isinstance(node, CCompl):
            s = f"~{out[node.arg]}"
        elif isinstance(node, CUnion):
            s = f"({out[node.left]} + {out[node.right]})"
        elif isinstance(node, CPrefix):
            s = f"'{node.letter}'{out[node.arg]}"
        elif isinstance(node, CUntil):
            s = f"({out[node.left]} U {out[node.right]})"
        else:
            raise TypeError(node)
        out[node] = s
    return out[e]


# -- the left-localizable builder ------------------------------------------------


class LtlBuilder(ClassBuilder):
    """cLTL constructors realising the closure properties of a left-localizable class."""

    direction = LEFT

    def empty(self, alphabet):
        return EMPTY

    def full(self, alphabet):
        return FULL

    def epsilon(self, alphabet):
        return epsilon_only(alphabet)

    def union(self, exprs, alphabet):
        return cunion_all(exprs)

    def lift(self, expr, c, alphabet):
        memo = self.memo.setdefault(("lift", c), {})
        b_star = free_of(c)
        for node in postorder(expr, memo):
            if node in memo:
                continue
            if isinstance(node, CEmpty):
                r = EMPTY
            elif isinstance(node, CCompl):
                r = intersect(compl(memo[node.arg]), b_star)
            elif isinstance(node, CUnion):
                r = cunion(memo[node.left], memo[node.right])
            elif isinstance(node, CPrefix):
                r = prefix(node.letter, memo[node.arg])
            elif isinstance(node, CUntil):
                r = cuntil(memo[node.left], memo[node.right])
            else:
                raise TypeError(node)
            memo[node] = r
        return memo[expr]

    def c_block(self, before, c, after, alphabet):
        # KcL = A*cL & KcB*, the last c of a word being unique
        if before is EMPTY or after is EMPTY:
            return EMPTY
        tail = cuntil(FULL, prefix(c, self.lift(after, c, alphabet)))
        return intersect(tail, self._then_c_b_star(before, c))

    def _then_c_b_star(self, expr, c):
        """K c B* for K over A, by structural induction on K."""
        memo = self.memo.setdefault(("KcB*", c), {})
        any_c_b_star = cuntil(FULL, prefix(c, free_of(c)))
        for node in postorder(expr, memo):
            if node in memo:
                continue
            if isinstance(node, CEmpty):
                r = EMPTY
            elif isinstance(node, CCompl):
                r = minus(any_c_b_star, memo[node.arg])
            elif isinstance(node, CUnion):
                r = cunion(memo[node.left], memo[node.right])
            elif isinstance(node, CPrefix):
                r = prefix(node.letter, memo[node.arg])
            elif isinstance(node, CUntil):
                r = cuntil(memo[node.left], memo[node.right])
            else:
                raise TypeError(node)
            memo[node] = r
        return memo[expr]

    def c_side_concat(self, first, second, c, alphabet):
        # KL = B*L & KcA* for K over B and L inside cA*
        if first is EMPTY or second is EMPTY:
            return EMPTY
        b_any = letters_then_anything(a for a in alphabet if a != c)
        return intersect(cuntil(b_any, second), self._then_c_a_star(first, c, alphabet))

    def _then_c_a_star(self, expr, c, alphabet):
        """K c A* for K over B, by structural induction on K."""
        memo = self.memo.setdefault(("KcA*", c, alphabet), {})
        b_any = letters_then_anything(a for a in alphabet if a != c)
        b_star_c_any = cuntil(b_any, prefix(c, FULL))
        for node in postorder(expr, memo):
            if node in memo:
                continue
            if isinstance(node, CEmpty):
                r = EMPTY
            elif isinstance(node, CCompl):
                r = minus(b_star_c_any, memo[node.arg])
            elif isinstance(node, CUnion):
                r = cunion(memo[node.left], memo[node.right])
            elif isinstance(node, CPrefix):
                r = prefix(node.letter, memo[node.arg])
            elif isinstance(node, CUntil):
                # the left operand must stay inside B* before the first c
                r = cuntil(intersect(memo[node.left], b_any), memo[node.right])
            else:
                raise TypeError(node)
            memo[node] = r
        return memo[expr]

    def sigma_preimage(self, expr, c, g_table: Mapping, derived: Sequence, alphabet):
        derived_set = set(derived)
        frame = ("sigma", c, alphabet, tuple(sorted(g_table.items(), key=lambda kv: kv[0])))
        memo = self.memo.setdefault(frame, {})
        b_any = letters_then_anything(a for a in alphabet if a != c)
        c_any = prefix(c, FULL)
        decodable = cunion(epsilon_only(alphabet), c_any)  # (cB*)* = {e} + cA*
        for node in postorder(expr, memo):
            if node in memo:
                continue
            if isinstance(node, CEmpty):
                r = EMPTY
            elif isinstance(node, CCompl):
                r = minus(decodable, memo[node.arg])
            elif isinstance(node, CUnion):
                r = cunion(memo[node.left], memo[node.right])
            elif isinstance(node, CPrefix):
                t = node.letter
                if t not in derived_set:
                    raise ValueError(f"letter {t!r} is not in the derived alphabet")
                rest = memo[node.arg]
                g_t = g_table[t]
                body = self.c_side_concat(g_t, intersect(rest, c_any), c, alphabet)
                if has_epsilon(node.arg):
                    body = cunion(body, self.lift(g_t, c, alphabet))
                r = prefix(c, body)
            elif isinstance(node, CUntil):
                left = cunion(memo[node.left], b_any)
                r = intersect(cuntil(left, memo[node.right]), decodable)
            else:
                raise TypeError(node)
            memo[node] = r
        return memo[expr]


_default_builder = LtlBuilder()


def synth_cltl(h: Morphism, accepting: Iterable[int], builder: LtlBuilder | None = None) -> Cltl:
    builder = builder or _default_builder
    found = preimages(h, builder)
    return cunion_all(found[p] for p in sorted(set(accepting)) if p in found)


def synth_ltl(source: Dfa | Morphism, accepting: Iterable[int] | None = None,
              builder: LtlBuilder | None = None) -> Ltl:
    """LTL formula for the language, minus the empty word.

    ``source`` is a DFA, or a morphism together with the accepted elements.
    Raises NotAperiodicError when the syntactic monoid has a nontrivial group.
    """
    if isinstance(source, Dfa):
        h, accepted = syntactic_morphism(source)
    else:
        if accepting is None:
            raise ValueError("a morphism needs an accepting set")
        h, accepted = source, accepting
    return cltl_to_ltl(synth_cltl(h, accepted, builder))
