"""Weighted semi-Thue systems and finite Church-Rosser systems for aperiodic morphisms.

Words are tuples of letters.  Normal forms are computed in one left-to-right
pass: letters are pushed on a stack that also records the state of an
Aho-Corasick automaton over the left-hand sides, and whenever a left-hand
side ends on top of the stack it is popped and the right-hand side is fed
back into the input.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .algebra import Morphism, NotAperiodicError, aperiodicity_witness, local_divisor
from .automata import all_words
from .localizer import choose_letter


class RewriteError(ValueError):
    pass


class SystemFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = f"{source or '<system>'}:{line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class WeightedAlphabet:
    letters: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if len(self.letters) != len(self.weights):
            raise ValueError("one weight per letter is required")
        if len(set(self.letters)) != len(self.letters):
            raise ValueError("letters must be distinct")
        bad = [a for a, w in zip(self.letters, self.weights) if w <= 0]
        if bad:
            raise ValueError(f"weights must be positive; offending letters {bad}")

    @classmethod
    def unit(cls, letters: Iterable) -> "WeightedAlphabet":
        letters = tuple(letters)
        return cls(letters, (1,) * len(letters))

    @classmethod
    def of(cls, weights: Mapping) -> "WeightedAlphabet":
        return cls(tuple(weights), tuple(weights.values()))

    @cached_property
    def table(self) -> dict:
        return dict(zip(self.letters, self.weights))

    def weight(self, word: Iterable) -> int:
        t = self.table
        try:
            return sum(t[a] for a in word)
        except KeyError as exc:
            raise RewriteError(f"unknown letter {exc.args[0]!r}") from None

    def restrict(self, letters: Iterable) -> "WeightedAlphabet":
        keep = set(letters)
        pairs = [(a, w) for a, w in zip(self.letters, self.weights) if a in keep]
        return WeightedAlphabet(tuple(a for a, _ in pairs), tuple(w for _, w in pairs))


Rule = tuple  # (lhs, rhs), both tuples of letters


@dataclass(frozen=True)
class SemiThueSystem:
    alphabet: WeightedAlphabet
    rules: tuple

    def __post_init__(self):
        rules = tuple(sorted({(tuple(l), tuple(r)) for l, r in self.rules}, key=_rule_key))
        object.__setattr__(self, "rules", rules)
        known = set(self.alphabet.letters)
        for lhs, rhs in rules:
            if not lhs:
                raise ValueError("a rule needs a nonempty left-hand side")
            stray = (set(lhs) | set(rhs)) - known
            if stray:
                raise ValueError(f"rule {format_rule((lhs, rhs))} uses letters outside the alphabet: {sorted(map(str, stray))}")

    @cached_property
    def _matcher(self) -> "_Matcher":
        return _Matcher(self.alphabet.letters, [l for l, _ in self.rules])

    @cached_property
    def _reducing(self) -> bool:
        w = self.alphabet.weight
        return all(w(l) > w(r) for l, r in self.rules)

    def is_weight_reducing(self) -> bool:
        return self._reducing

    def normal_form(self, word: Iterable) -> tuple:
        """An irreducible descendant of ``word``; the unique one when the system is confluent."""
        if not self._reducing:
            raise RewriteError("normal forms need a weight-reducing system")
        m = self._matcher
        delta, match, rules = m.delta, m.match, self.rules
        letters: list = []
        states = [0]
        pending = list(reversed(tuple(word)))
        while pending:
            x = pending.pop()
            try:
                s = delta[states[-1]][x]
            except KeyError:
                raise RewriteError(f"unknown letter {x!r}") from None
            letters.append(x)
            states.append(s)
            k = match[s]
            if k >= 0:
                lhs, rhs = rules[k]
                del letters[-len(lhs):]
                del states[-len(lhs):]
                pending.extend(reversed(rhs))
        return tuple(letters)

    def is_irreducible(self, word: Iterable) -> bool:
        m = self._matcher
        s = 0
        for x in word:
            s = m.delta[s][x]
            if m.match[s] >= 0:
                return False
        return True

    def with_weights(self, alphabet: WeightedAlphabet) -> "SemiThueSystem":
        return SemiThueSystem(alphabet, self.rules)


def _rule_key(rule):
    lhs, rhs = rule
    return (len(lhs), tuple(map(str, lhs)), len(rhs), tuple(map(str, rhs)))


class _Matcher:
    """Aho-Corasick automaton with a complete transition table.

    ``match[s]`` is the index of the longest pattern that is a suffix of
    the text read to reach ``s``, or -1.
    """

    def __init__(self, letters: Sequence, patterns: Sequence[tuple]):
        goto: list[dict] = [{}]
        own = [-1]
        for k, p in enumerate(patterns):
            s = 0
            for x in p:
                if x not in goto[s]:
                    goto[s][x] = len(goto)
                    goto.append({})
                    own.append(-1)
                s = goto[s][x]
            if own[s] < 0:
                own[s] = k
        n = len(goto)
        fail = [0] * n
        delta: list[dict] = [dict() for _ in range(n)]
        match = [-1] * n
        order = deque([0])
        while order:
            s = order.popleft()
            match[s] = own[s] if own[s] >= 0 else (match[fail[s]] if s else -1)
            for x in letters:
                if x in goto[s]:
                    t = goto[s][x]
                    fail[t] = delta[fail[s]][x] if s else 0
                    delta[s][x] = t
                    order.append(t)
                else:
                    delta[s][x] = delta[fail[s]][x] if s else 0
        self.delta = delta
        self.match = match


# -- confluence --------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalPair:
    """A peak ``left <= peak => right`` and the normal forms of both sides."""

    peak: tuple
    left: tuple
    right: tuple
    left_nf: tuple
    right_nf: tuple

    @property
    def joinable(self) -> bool:
        return self.left_nf == self.right_nf


@dataclass(frozen=True)
class ConfluenceReport:
    confluent: bool
    pairs_checked: int
    failures: tuple = ()

    def __bool__(self):
        return self.confluent

    @property
    def witness(self) -> CriticalPair | None:
        return self.failures[0] if self.failures else None


def critical_pairs(system: SemiThueSystem) -> Iterable[tuple[tuple, tuple, tuple]]:
    """All peaks from overlapping or nested left-hand sides."""
    rules = system.rules
    for i, (l1, r1) in enumerate(rules):
        for j, (l2, r2) in enumerate(rules):
            # l2 inside l1
            if len(l2) <= len(l1) and (i != j):
                for p in range(len(l1) - len(l2) + 1):
                    if l1[p:p + len(l2)] == l2:
                        yield l1, r1, l1[:p] + r2 + l1[p + len(l2):]
            # a proper suffix of l1 is a proper prefix of l2
            for k in range(1, min(len(l1), len(l2))):
                if l1[-k:] == l2[:k]:
                    yield l1 + l2[k:], r1 + l2[k:], l1[:-k] + r2


def check_confluence(system: SemiThueSystem, stop_at_first: bool = False) -> ConfluenceReport:
    """Local confluence of all critical pairs, which suffices for terminating systems."""
    if not system.is_weight_reducing():
        raise RewriteError("confluence check needs a weight-reducing system")
    nf = system.normal_form
    failures = []
    seen = set()
    count = 0
    for peak, left, right in critical_pairs(system):
        if (peak, left, right) in seen:
            continue
        seen.add((peak, left, right))
        count += 1
        a, b = nf(left), nf(right)
        if a != b:
            failures.append(CriticalPair(peak, left, right, a, b))
            if stop_at_first:
                break
    return ConfluenceReport(not failures, count, tuple(failures))


def is_confluent(system: SemiThueSystem) -> bool:
    return check_confluence(system, stop_at_first=True).confluent


# -- irreducible words and the quotient monoid ---------------------------------------


@dataclass(frozen=True)
class IrreducibleWords:
    """Irreducible words in length-lex order; ``complete`` is False when a cap was hit."""

    words: tuple
    complete: bool
    max_length: int

    def __bool__(self):
        return self.complete


def enumerate_irreducible(system: SemiThueSystem, max_words: int = 10_000, max_length: int = 64,
                          letters: Sequence | None = None) -> IrreducibleWords:
    m = system._matcher
    letters = tuple(system.alphabet.letters if letters is None else letters)
    out = [()]
    level = [((), 0)]
    longest = 0
    for n in range(1, max_length + 2):
        nxt = []
        for w, s in level:
            for x in letters:
                t = m.delta[s][x]
                if m.match[t] < 0:
                    nxt.append((w + (x,), t))
        if not nxt:
            return IrreducibleWords(tuple(out), True, longest)
        if n > max_length or len(out) + len(nxt) > max_words:
            return IrreducibleWords(tuple(out), False, longest)
        out.extend(w for w, _ in nxt)
        longest = n
        level = nxt
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class IrreducibleCount:
    """Exact size of IRR(A*) and its longest word, or ``finite=False``."""

    finite: bool
    count: int
    max_length: int

    def __bool__(self):
        return self.finite


def count_irreducible(system: SemiThueSystem, letters: Sequence | None = None) -> IrreducibleCount:
    """Count irreducible words without listing them.

    Irreducible words are the paths from the root of the matcher that
    never enter a state completing a left-hand side.  The set is finite
    iff no cycle is reachable through such states; then path counts and
    the longest path come from one pass in topological order.
    """
    m = system._matcher
    letters = tuple(system.alphabet.letters if letters is None else letters)
    succ = {}
    order = []
    colour = {0: 1}
    stack = [(0, iter(letters))]
    while stack:
        s, it = stack[-1]
        for x in it:
            t = m.delta[s][x]
            if m.match[t] >= 0:
                continue
            succ.setdefault(s, []).append(t)
            c = colour.get(t, 0)
            if c == 1:
                return IrreducibleCount(False, -1, -1)
            if c == 0:
                colour[t] = 1
                stack.append((t, iter(letters)))
                break
        else:
            stack.pop()
            colour[s] = 2
            order.append(s)
    # order is a postorder: successors come first
    paths: dict = {}
    depth: dict = {}
    for s in order:
        nxt = succ.get(s, ())
        paths[s] = 1 + sum(paths[t] for t in nxt)
        depth[s] = max((1 + depth[t] for t in nxt), default=0)
    return IrreducibleCount(True, paths[0], depth[0])


@dataclass(frozen=True)
class CongruenceIndex:
    """The monoid of congruence classes, indexed by irreducible representatives."""

    system: SemiThueSystem
    irreducibles: tuple
    table: tuple

    @cached_property
    def class_of(self) -> dict:
        return {w: i for i, w in enumerate(self.irreducibles)}

    def __len__(self):
        return len(self.irreducibles)

    @property
    def max_length(self) -> int:
        return max(map(len, self.irreducibles))

    def index(self, word: Iterable) -> int:
        return self.class_of[self.system.normal_form(word)]


def class_index(system: SemiThueSystem, max_words: int = 10_000, max_length: int = 64,
                with_table: bool = True) -> CongruenceIndex:
    """Classes of a confluent weight-reducing system of finite index.

    Raises RewriteError when the enumeration cap is reached, since the
    index may then be infinite.
    """
    irr = enumerate_irreducible(system, max_words, max_length)
    if not irr.complete:
        raise RewriteError(
            f"possibly infinite index: more than {max_words} irreducible words or length above {max_length}")
    table = ()
    if with_table:
        pos = {w: i for i, w in enumerate(irr.words)}
        nf = system.normal_form
        table = tuple(tuple(pos[nf(u + v)] for v in irr.words) for u in irr.words)
    return CongruenceIndex(system, irr.words, table)


def congruence_classes(system: SemiThueSystem, max_words: int = 10_000,
                       max_length: int = 64) -> list[tuple]:
    """Blocks of irreducible words that are congruent modulo the system.

    For a confluent system every block is a singleton.  Otherwise the
    blocks are the least equivalence that identifies the normal forms of
    both sides of every critical pair and is stable under multiplying by
    a letter on either side; every class of a terminating system contains
    an irreducible word, so this counts the classes exactly.
    """
    irr = enumerate_irreducible(system, max_words, max_length)
    if not irr.complete:
        raise RewriteError("possibly infinite index: irreducible words exceed the caps")
    words = irr.words
    pos = {w: i for i, w in enumerate(words)}
    parent = list(range(len(words)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def merge(i, j):
        i, j = find(i), find(j)
        if i == j:
            return False
        parent[max(i, j)] = min(i, j)
        return True

    nf = system.normal_form
    for f in check_confluence(system).failures:
        merge(pos[f.left_nf], pos[f.right_nf])
    letters = system.alphabet.letters
    right = [[pos[nf(w + (x,))] for x in letters] for w in words]
    left = [[pos[nf((x,) + w)] for x in letters] for w in words]
    changed = True
    while changed:
        changed = False
        seen: dict = {}
        for i in range(len(words)):
            r = find(i)
            for k in range(len(letters)):
                for side, table in ((0, right), (1, left)):
                    key = (r, k, side)
                    target = find(table[i][k])
                    if key in seen:
                        changed |= merge(seen[key], target)
                    else:
                        seen[key] = target
    blocks: dict = {}
    for i, w in enumerate(words):
        blocks.setdefault(find(i), []).append(w)
    return [tuple(b) for _, b in sorted(blocks.items())]


# -- factorization of a morphism through a system -----------------------------------


@dataclass(frozen=True)
class FactorizationCheck:
    holds: bool
    witness: object = None

    def __bool__(self):
        return self.holds


def factorizes_through(h: Morphism, system: SemiThueSystem, maxlen: int = 10,
                       context: int = 2) -> FactorizationCheck:
    """Check that rewriting never changes the image under h.

    Every rule is tested in all contexts p, q with |p|, |q| <= ``context``,
    and h(w) = h(nf(w)) is tested for every word up to ``maxlen``.
    """
    letters = h.alphabet
    for lhs, rhs in system.rules:
        for p in all_words(letters, context):
            for q in all_words(letters, context):
                if h(p + lhs + q) != h(p + rhs + q):
                    return FactorizationCheck(False, (lhs, rhs))
    nf = system.normal_form
    for w in all_words(letters, maxlen):
        if h(w) != h(nf(w)):
            return FactorizationCheck(False, w)
    return FactorizationCheck(True)


# -- construction for aperiodic morphisms --------------------------------------------


@dataclass(frozen=True)
class CrsResult:
    """A system together with the bookkeeping used to check its length bound.

    ``inner_bound`` is m, the longest irreducible length over B;
    ``outer_bound`` is k, the longest irreducible length of the derived
    system over K; ``letter`` is the split letter c (None in the base case).
    ``collapsed`` holds rules ``a -> b`` sending a letter to a lighter
    letter with the same image.
    """

    system: SemiThueSystem
    letter: object = None
    lower: "CrsResult | None" = None
    derived: "CrsResult | None" = None
    lifted_rules: tuple = ()
    inner_bound: int = 0
    outer_bound: int = 0
    collapsed: tuple = ()

    @property
    def length_bound(self) -> int:
        if self.letter is None:
            return 0
        k, m = self.outer_bound, self.inner_bound
        return (k + 2) * m + k + 1


def build_crs(h: Morphism, weights: WeightedAlphabet | None = None,
              max_words: int = 10_000, max_length: int = 64) -> SemiThueSystem:
    """A finite weighted Church-Rosser system of finite index through which h factorizes."""
    return crs_construction(h, weights, max_words, max_length).system


def crs_construction(h: Morphism, weights: WeightedAlphabet | None = None,
                     max_words: int = 10_000, max_length: int = 64) -> CrsResult:
    weights = weights or WeightedAlphabet.unit(h.alphabet)
    if set(weights.letters) != set(h.alphabet):
        raise ValueError("weights must cover exactly the alphabet of the morphism")
    return _construct(h, weights, {}, max_words, max_length)


def _construct(h: Morphism, weights: WeightedAlphabet, memo: dict, max_words, max_length) -> CrsResult:
    h, _ = h.canonical()
    key = (h.signature, weights)
    if key in memo:
        return memo[key]
    m = h.monoid
    if all(x == m.identity for x in h.images):
        system = SemiThueSystem(weights, tuple(((b,), ()) for b in h.alphabet))
        result = CrsResult(system)
        memo[key] = result
        return result
    w = aperiodicity_witness(m)
    if w is not None:
        raise NotAperiodicError(
            w, f"element {w} generates a nontrivial group; systems for group images are not constructed")

    # a letter sharing its image with a lighter letter rewrites to it
    lightest: dict = {}
    for a in h.alphabet:
        x = h.image(a)
        if x not in lightest or weights.weight((a,)) < weights.weight((lightest[x],)):
            lightest[x] = a
    collapsed = tuple(((a,), (lightest[h.image(a)],)) for a in h.alphabet
                      if weights.weight((a,)) > weights.weight((lightest[h.image(a)],)))
    if collapsed:
        keep = tuple(a for a in h.alphabet if (a,) not in {l for l, _ in collapsed})
        inner = _construct(h.restrict(keep), weights.restrict(keep), memo, max_words, max_length)
        result = replace(inner, system=SemiThueSystem(weights, inner.system.rules + collapsed),
                         collapsed=collapsed + inner.collapsed)
        memo[key] = result
        return result

    c = choose_letter(h)
    hc = h.image(c)
    rest = tuple(a for a in h.alphabet if a != c)
    lower = _construct(h.restrict(rest), weights.restrict(rest), memo, max_words, max_length)
    irr = enumerate_irreducible(lower.system, max_words, max_length, letters=rest)
    if not irr.complete:
        raise RewriteError("system over the smaller alphabet is not of finite index within the caps")

    # derived letters uc for every irreducible u over B
    tokens = tuple(u + (c,) for u in irr.words)
    token_weights = WeightedAlphabet(tokens, tuple(weights.weight(t) for t in tokens))
    ld = local_divisor(m, hc)
    g = Morphism(tokens, ld.quotient, tuple(ld.index(h((c,) + t)) for t in tokens))
    derived = _construct(g, token_weights, memo, max_words, max_length)

    def expand(word):
        return tuple(x for t in word for x in t)

    lifted = tuple(((c,) + expand(l), (c,) + expand(r)) for l, r in derived.system.rules)
    system = SemiThueSystem(weights, lower.system.rules + lifted)
    derived_irr = enumerate_irreducible(derived.system, max_words, max_length)
    result = CrsResult(
        system, c, lower, derived, lifted,
        inner_bound=irr.max_length,
        outer_bound=derived_irr.max_length if derived_irr.complete else max_length,
    )
    memo[key] = result
    return result


def check_non_overlap(result: CrsResult) -> bool:
    """Rules over B avoid c; lifted rules start and end with c and contain no lower left-hand side."""
    heavy = {l[0] for l, _ in result.collapsed}
    others = [r for r in result.system.rules if r not in set(result.collapsed)]
    if any(heavy & (set(l) | set(r)) for l, r in others):
        return False
    if result.letter is None:
        return True
    c = result.letter
    lower = result.lower.system
    if any(c in l for l, _ in lower.rules):
        return False
    for l, _ in result.lifted_rules:
        if l[0] != c or l[-1] != c:
            return False
        if not all(lower.is_irreducible(seg) for seg in _segments(l, c)):
            return False
    return True


def _segments(word, c):
    seg = []
    for x in word:
        if x == c:
            yield tuple(seg)
            seg = []
        else:
            seg.append(x)
    yield tuple(seg)


# -- text format -------------------------------------------------------------------


def _word_text(word: tuple) -> str:
    if not word:
        return "_"
    if all(isinstance(x, str) and len(x) == 1 for x in word):
        return "".join(word)
    return " ".join(map(str, word))


def format_rule(rule) -> str:
    return f"{_word_text(rule[0])} -> {_word_text(rule[1])}"


def format_system(system: SemiThueSystem) -> str:
    header = "weights " + " ".join(f"{a}={w}" for a, w in zip(system.alphabet.letters, system.alphabet.weights))
    return "\n".join([header] + [format_rule(r) for r in system.rules]) + "\n"


def _parse_word(text: str) -> tuple:
    text = text.strip()
    if text in ("_", ""):
        return ()
    if any(ch.isspace() for ch in text):
        return tuple(t for t in text.split() if t != "_")
    return tuple(text)


def parse_system(text: str, source: str | None = None) -> SemiThueSystem:
    """Read ``weights a=1 b=2`` (optional) followed by ``lhs -> rhs`` lines.

    ``_`` stands for the empty word and ``#`` starts a comment.  Without a
    header every letter that occurs gets weight 1.
    """
    weights: dict = {}
    rules = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("weights"):
            if rules or weights:
                raise SystemFormatError("the weights header must come first", no, source)
            for item in line.split()[1:]:
                name, sep, value = item.partition("=")
                if not sep or not value.strip().isdigit() or int(value) <= 0:
                    raise SystemFormatError(f"bad weight {item!r}", no, source)
                weights[name] = int(value)
            continue
        if "->" not in line:
            raise SystemFormatError("expected 'lhs -> rhs'", no, source)
        lhs_text, rhs_text = line.split("->", 1)
        lhs, rhs = _parse_word(lhs_text), _parse_word(rhs_text)
        if not lhs:
            raise SystemFormatError("empty left-hand side", no, source)
        if weights:
            stray = (set(lhs) | set(rhs)) - set(weights)
            if stray:
                raise SystemFormatError(f"letters without weight: {sorted(stray)}", no, source)
        rules.append((lhs, rhs))
    if weights:
        alphabet = WeightedAlphabet.of(weights)
    else:
        letters = sorted({x for l, r in rules for x in l + r})
        alphabet = WeightedAlphabet.unit(letters)
    return SemiThueSystem(alphabet, tuple(rules))


def load_system(path) -> SemiThueSystem:
    path = Path(path)
    return parse_system(path.read_text(), str(path))


DATA = Path(__file__).parent / "data"


def bundled_system(name: str) -> SemiThueSystem:
    """One of the shipped example systems, e.g. ``"L6-T"``."""
    return load_system(DATA / f"{name}.txt")
