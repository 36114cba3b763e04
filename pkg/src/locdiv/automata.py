"""Regular-language plumbing: regex parsing, Thompson NFAs, complete DFAs.

All DFAs are complete (an explicit sink is kept) so that products and
complements are total.  ``minimize`` numbers states in BFS order from the
initial state, which makes minimal automata canonical.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Hashable, Iterable, Iterator, Sequence


class AlphabetError(ValueError):
    pass


class RegexSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


# -- regex syntax ------------------------------------------------------------


@dataclass(frozen=True)
class Regex:
    pass


@dataclass(frozen=True)
class REmpty(Regex):
    pass


@dataclass(frozen=True)
class REpsilon(Regex):
    pass


@dataclass(frozen=True)
class RLetter(Regex):
    letter: Hashable


@dataclass(frozen=True)
class RUnion(Regex):
    left: Regex
    right: Regex


@dataclass(frozen=True)
class RConcat(Regex):
    left: Regex
    right: Regex


@dataclass(frozen=True)
class RStar(Regex):
    body: Regex


def parse_regex(text: str, alphabet: Iterable[str]) -> Regex:
    """Parse ``expr := term ('+' term)*; term := factor+; factor := atom '*'*``.

    Atoms are single letters, parenthesised expressions, ``0`` (empty
    language) and ``1`` (empty word).  Whitespace is ignored.
    """
    alphabet = set(alphabet)
    src = [(i, ch) for i, ch in enumerate(text) if not ch.isspace()]
    pos = 0

    def peek():
        return src[pos][1] if pos < len(src) else None

    def where():
        return src[pos][0] if pos < len(src) else len(text)

    def expr():
        nonlocal pos
        node = term()
        while peek() == "+":
            pos += 1
            node = RUnion(node, term())
        return node

    def term():
        node = factor()
        while peek() is not None and peek() not in "+)":
            node = RConcat(node, factor())
        return node

    def factor():
        nonlocal pos
        node = atom()
        while peek() == "*":
            pos += 1
            node = RStar(node)
        return node

    def atom():
        nonlocal pos
        ch = peek()
        if ch is None:
            raise RegexSyntaxError("unexpected end of input", where())
        if ch == "(":
            pos += 1
            node = expr()
            if peek() != ")":
                raise RegexSyntaxError("expected ')'", where())
            pos += 1
            return node
        if ch == "0":
            pos += 1
            return REmpty()
        if ch == "1":
            pos += 1
            return REpsilon()
        if ch in "+*)":
            raise RegexSyntaxError(f"unexpected {ch!r}", where())
        if ch not in alphabet:
            raise RegexSyntaxError(f"letter {ch!r} not in alphabet", where())
        pos += 1
        return RLetter(ch)

    if not src:
        raise RegexSyntaxError("empty regular expression", 0)
    result = expr()
    if pos != len(src):
        raise RegexSyntaxError(f"unexpected {peek()!r}", where())
    return result


def regex_matches(r: Regex, word: Sequence) -> bool:
    """Direct recursive matcher over spans; independent of any automaton."""
    word = tuple(word)
    n = len(word)
    memo: dict = {}

    def m(node, i, j):
        key = (id(node), i, j)
        if key in memo:
            return memo[key]
        if isinstance(node, REmpty):
            res = False
        elif isinstance(node, REpsilon):
            res = i == j
        elif isinstance(node, RLetter):
            res = j == i + 1 and word[i] == node.letter
        elif isinstance(node, RUnion):
            res = m(node.left, i, j) or m(node.right, i, j)
        elif isinstance(node, RConcat):
            res = any(m(node.left, i, k) and m(node.right, k, j) for k in range(i, j + 1))
        elif isinstance(node, RStar):
            res = i == j or any(m(node.body, i, k) and m(node, k, j) for k in range(i + 1, j + 1))
        else:
            raise TypeError(node)
        memo[key] = res
        return res

    return m(r, 0, n)


# -- automata ------------------------------------------------------------------


@dataclass(frozen=True)
class Dfa:
    """Complete deterministic automaton; ``delta[state][k]`` reads ``alphabet[k]``."""

    alphabet: tuple
    delta: tuple[tuple[int, ...], ...]
    initial: int
    accepting: frozenset

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "delta", tuple(tuple(int(t) for t in row) for row in self.delta))
        object.__setattr__(self, "accepting", frozenset(int(s) for s in self.accepting))
        n = len(self.delta)
        if n == 0:
            raise ValueError("a DFA needs at least one state")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet letters must be distinct")
        for s, row in enumerate(self.delta):
            if len(row) != len(self.alphabet):
                raise ValueError(f"state {s}: transition function is not total")
            if any(not 0 <= t < n for t in row):
                raise ValueError(f"state {s}: transition to a nonexistent state")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        if any(not 0 <= s < n for s in self.accepting):
            raise ValueError("accepting state out of range")

    @property
    def states(self) -> int:
        return len(self.delta)

    @cached_property
    def letter_index(self) -> dict:
        return {a: k for k, a in enumerate(self.alphabet)}

    def step(self, state: int, letter) -> int:
        try:
            return self.delta[state][self.letter_index[letter]]
        except KeyError:
            raise AlphabetError(f"unknown letter {letter!r}") from None

    def run(self, word: Iterable, state: int | None = None) -> int:
        s = self.initial if state is None else state
        idx = self.letter_index
        delta = self.delta
        try:
            for a in word:
                s = delta[s][idx[a]]
        except KeyError as exc:
            raise AlphabetError(f"unknown letter {exc.args[0]!r}") from None
        return s

    def accepts(self, word: Iterable) -> bool:
        return self.run(word) in self.accepting

    __contains__ = accepts

    @cached_property
    def live(self) -> frozenset:
        """States from which some accepting state is reachable."""
        preds = [set() for _ in range(self.states)]
        for s, row in enumerate(self.delta):
            for t in row:
                preds[t].add(s)
        live = set(self.accepting)
        stack = list(live)
        while stack:
            t = stack.pop()
            for s in preds[t]:
                if s not in live:
                    live.add(s)
                    stack.append(s)
        return frozenset(live)

    def to_json(self) -> dict:
        return {
            "states": self.states,
            "alphabet": list(self.alphabet),
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "delta": [list(r) for r in self.delta],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Dfa":
        d = cls(tuple(data["alphabet"]), tuple(map(tuple, data["delta"])), data["initial"], frozenset(data["accepting"]))
        if "states" in data and data["states"] != d.states:
            raise ValueError(f"declared {data['states']} states but delta has {d.states} rows")
        return d


def load_dfa(path) -> Dfa:
    return Dfa.from_json(json.loads(Path(path).read_text()))


class Nfa:
    """Mutable NFA with epsilon moves, used only while building DFAs."""

    def __init__(self, alphabet: Sequence):
        self.alphabet = tuple(alphabet)
        self.eps: list[set[int]] = []
        self.trans: list[dict] = []
        self.initial: set[int] = set()
        self.accepting: set[int] = set()

    def add_state(self) -> int:
        self.eps.append(set())
        self.trans.append({})
        return len(self.eps) - 1

    def add(self, s: int, letter, t: int):
        self.trans[s].setdefault(letter, set()).add(t)

    def closure(self, states: Iterable[int]) -> frozenset:
        out = set(states)
        stack = list(out)
        while stack:
            s = stack.pop()
            for t in self.eps[s]:
                if t not in out:
                    out.add(t)
                    stack.append(t)
        return frozenset(out)

    def determinize(self) -> Dfa:
        start = self.closure(self.initial)
        index = {start: 0}
        order = [start]
        delta = []
        i = 0
        while i < len(order):
            cur = order[i]
            i += 1
            row = []
            for a in self.alphabet:
                nxt = self.closure(t for s in cur for t in self.trans[s].get(a, ()))
                if nxt not in index:
                    index[nxt] = len(order)
                    order.append(nxt)
                row.append(index[nxt])
            delta.append(tuple(row))
        accepting = frozenset(k for k, st in enumerate(order) if st & self.accepting)
        return Dfa(self.alphabet, tuple(delta), 0, accepting)


def thompson(r: Regex, alphabet: Sequence) -> Nfa:
    nfa = Nfa(alphabet)
    letters = set(alphabet)

    def build(node) -> tuple[int, int]:
        s, t = nfa.add_state(), nfa.add_state()
        if isinstance(node, REmpty):
            pass
        elif isinstance(node, REpsilon):
            nfa.eps[s].add(t)
        elif isinstance(node, RLetter):
            if node.letter not in letters:
                raise AlphabetError(f"letter {node.letter!r} not in alphabet")
            nfa.add(s, node.letter, t)
        elif isinstance(node, RUnion):
            for part in (node.left, node.right):
                a, b = build(part)
                nfa.eps[s].add(a)
                nfa.eps[b].add(t)
        elif isinstance(node, RConcat):
            a1, b1 = build(node.left)
            a2, b2 = build(node.right)
            nfa.eps[s].add(a1)
            nfa.eps[b1].add(a2)
            nfa.eps[b2].add(t)
        elif isinstance(node, RStar):
            a, b = build(node.body)
            nfa.eps[s].update((a, t))
            nfa.eps[b].update((a, t))
        else:
            raise TypeError(node)
        return s, t

    s, t = build(r)
    nfa.initial = {s}
    nfa.accepting = {t}
    return nfa


def compile_regex(r: Regex, alphabet: Sequence) -> Dfa:
    """Complete DFA for ``r`` via Thompson's construction and subsets."""
    return thompson(r, alphabet).determinize()


def minimize(d: Dfa) -> Dfa:
    """Minimal complete DFA, states numbered in BFS order from the initial state."""
    k = len(d.alphabet)
    reach = [d.initial]
    seen = {d.initial}
    for s in reach:
        for t in d.delta[s]:
            if t not in seen:
                seen.add(t)
                reach.append(t)
    block = {s: int(s in d.accepting) for s in reach}
    count = len(set(block.values()))
    while True:
        sigs = {}
        new = {}
        for s in reach:
            sig = (block[s],) + tuple(block[d.delta[s][a]] for a in range(k))
            new[s] = sigs.setdefault(sig, len(sigs))
        block = new
        if len(sigs) == count:
            break
        count = len(sigs)
    # canonical BFS numbering of the blocks
    rep = {}
    for s in reach:
        rep.setdefault(block[s], s)
    number = {block[d.initial]: 0}
    order = [block[d.initial]]
    for b in order:
        for a in range(k):
            nb = block[d.delta[rep[b]][a]]
            if nb not in number:
                number[nb] = len(order)
                order.append(nb)
    delta = tuple(tuple(number[block[d.delta[rep[b]][a]]] for a in range(k)) for b in order)
    accepting = frozenset(number[b] for b in order if rep[b] in d.accepting)
    return Dfa(d.alphabet, delta, 0, accepting)


def _check_alphabets(d1: Dfa, d2: Dfa):
    if d1.alphabet != d2.alphabet:
        raise AlphabetError(f"alphabet mismatch: {d1.alphabet} vs {d2.alphabet}")


def product(d1: Dfa, d2: Dfa, op: Callable[[bool, bool], bool]) -> Dfa:
    _check_alphabets(d1, d2)
    k = len(d1.alphabet)
    start = (d1.initial, d2.initial)
    index = {start: 0}
    order = [start]
    delta = []
    for p, q in order:
        row = []
        for a in range(k):
            nxt = (d1.delta[p][a], d2.delta[q][a])
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        delta.append(tuple(row))
    accepting = frozenset(i for i, (p, q) in enumerate(order) if op(p in d1.accepting, q in d2.accepting))
    return Dfa(d1.alphabet, tuple(delta), 0, accepting)


def complement(d: Dfa) -> Dfa:
    return Dfa(d.alphabet, d.delta, d.initial, frozenset(range(d.states)) - d.accepting)


def intersection(d1: Dfa, d2: Dfa) -> Dfa:
    return product(d1, d2, lambda x, y: x and y)


def union(d1: Dfa, d2: Dfa) -> Dfa:
    return product(d1, d2, lambda x, y: x or y)


def difference(d1: Dfa, d2: Dfa) -> Dfa:
    return product(d1, d2, lambda x, y: x and not y)


def shortest_word(d: Dfa) -> tuple | None:
    """A shortest accepted word (length-lex least), or None if the language is empty."""
    parent = {d.initial: None}
    queue = [d.initial]
    for s in queue:
        if s in d.accepting:
            word = []
            while parent[s] is not None:
                s, a = parent[s]
                word.append(d.alphabet[a])
            return tuple(reversed(word))
        for a, t in enumerate(d.delta[s]):
            if t not in parent:
                parent[t] = (s, a)
                queue.append(t)
    return None


def is_empty(d: Dfa) -> bool:
    return shortest_word(d) is None


def is_subset(d1: Dfa, d2: Dfa) -> bool:
    return is_empty(difference(d1, d2))


def equivalent(d1: Dfa, d2: Dfa) -> bool:
    return counterexample(d1, d2) is None


def counterexample(d1: Dfa, d2: Dfa) -> tuple | None:
    """A shortest word in the symmetric difference, if any."""
    return shortest_word(product(d1, d2, lambda x, y: x != y))


def all_words(alphabet: Sequence, maxlen: int, minlen: int = 0) -> Iterator[tuple]:
    """All words of length minlen..maxlen in length-lexicographic order."""
    for n in range(minlen, maxlen + 1):
        yield from itertools.product(alphabet, repeat=n)


def enumerate_words(d: Dfa, maxlen: int) -> list[tuple]:
    """Accepted words of length <= maxlen in length-lexicographic order."""
    live = d.live
    out = []
    level = [((), d.initial)] if d.initial in live else []
    for n in range(maxlen + 1):
        out.extend(w for w, s in level if s in d.accepting)
        if n == maxlen:
            break
        level = [
            (w + (a,), t)
            for w, s in level
            for a, t in zip(d.alphabet, d.delta[s])
            if t in live
        ]
    return out


# -- language constructors on minimal DFAs -------------------------------------


def empty_dfa(alphabet: Sequence) -> Dfa:
    return Dfa(tuple(alphabet), (tuple(0 for _ in alphabet),), 0, frozenset())


def full_dfa(alphabet: Sequence) -> Dfa:
    return Dfa(tuple(alphabet), (tuple(0 for _ in alphabet),), 0, frozenset({0}))


def epsilon_dfa(alphabet: Sequence) -> Dfa:
    return minimize(Dfa(tuple(alphabet), (tuple(1 for _ in alphabet), tuple(1 for _ in alphabet)), 0, frozenset({0})))


def letter_dfa(letter, alphabet: Sequence) -> Dfa:
    alphabet = tuple(alphabet)
    if letter not in alphabet:
        raise AlphabetError(f"letter {letter!r} not in alphabet")
    row0 = tuple(1 if a == letter else 2 for a in alphabet)
    sink = tuple(2 for _ in alphabet)
    return minimize(Dfa(alphabet, (row0, sink, sink), 0, frozenset({1})))


def concat(d1: Dfa, d2: Dfa) -> Dfa:
    """Minimal DFA for the concatenation, by a direct subset construction."""
    _check_alphabets(d1, d2)
    k = len(d1.alphabet)

    def norm(p, rest):
        rest = set(rest)
        if p in d1.accepting:
            rest.add(d2.initial)
        return (p, frozenset(rest))

    start = norm(d1.initial, ())
    index = {start: 0}
    order = [start]
    delta = []
    for p, rest in order:
        row = []
        for a in range(k):
            nxt = norm(d1.delta[p][a], (d2.delta[q][a] for q in rest))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        delta.append(tuple(row))
    accepting = frozenset(i for i, (_, rest) in enumerate(order) if rest & d2.accepting)
    return minimize(Dfa(d1.alphabet, tuple(delta), 0, accepting))


def star(d: Dfa) -> Dfa:
    """Minimal DFA for the Kleene star."""
    k = len(d.alphabet)

    def norm(states):
        states = set(states)
        if states & d.accepting:
            states.add(d.initial)
        return frozenset(states)

    start = None  # the fresh accepting start state
    index = {start: 0}
    order = [start]
    delta = []
    for cur in order:
        src = {d.initial} if cur is None else cur
        row = []
        for a in range(k):
            nxt = norm(d.delta[s][a] for s in src)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        delta.append(tuple(row))
    accepting = frozenset(i for i, st in enumerate(order) if st is None or st & d.accepting)
    return minimize(Dfa(d.alphabet, tuple(delta), 0, accepting))


def power(d: Dfa, k: int) -> Dfa:
    out = epsilon_dfa(d.alphabet)
    for _ in range(k):
        out = concat(out, d)
    return out
