"""Factorization forests built through local divisors.

A factorization tree splits a word of length at least two into factors.
Nodes with two children are unrestricted.  Nodes with three or more
children require every child to have the same image, and that image
must be idempotent.

The builders work over sequences of *items*: each item is already a
tree with a known image, and the builder only looks at the images.  A
block of the input is therefore just another item once its own tree
exists, which keeps grafting trivial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Hashable, Iterable, Sequence, Union

from .algebra import LocalDivisor, Monoid, Morphism, is_unit, local_divisor


class ForestError(ValueError):
    pass


@dataclass(frozen=True)
class Leaf:
    letter: Hashable
    image: int

    kind = "leaf"
    children: tuple = field(default=(), init=False, repr=False, compare=False)

    @property
    def word(self) -> tuple:
        return (self.letter,)

    @property
    def height(self) -> int:
        return 0


@dataclass(frozen=True)
class Node:
    kind: str  # "binary" or "idempotent"
    children: tuple
    image: int

    @cached_property
    def word(self) -> tuple:
        out: list = []
        for k in self.children:
            out.extend(k.word)
        return tuple(out)

    @cached_property
    def height(self) -> int:
        return 1 + max(k.height for k in self.children)


@dataclass(frozen=True)
class Empty:
    """The tree of the empty word."""

    image: int

    kind = "empty"
    children: tuple = field(default=(), init=False, repr=False, compare=False)
    word: tuple = field(default=(), init=False, repr=False, compare=False)
    height: int = field(default=0, init=False, repr=False, compare=False)


FactTree = Union[Leaf, Node, Empty]


def height(t: FactTree) -> int:
    return t.height


# -- construction helpers ------------------------------------------------------


def _binary(m: Monoid, left: FactTree, right: FactTree) -> Node:
    return Node("binary", (left, right), m.table[left.image][right.image])


def _join(m: Monoid, kids: Sequence[FactTree]) -> FactTree:
    """A node over ``kids``; three or more kids must share one idempotent image."""
    if len(kids) == 1:
        return kids[0]
    if len(kids) == 2:
        return _binary(m, kids[0], kids[1])
    e = kids[0].image
    if any(k.image != e for k in kids) or not m.is_idempotent(e):
        raise ForestError("children of a wide node must share an idempotent image")
    return Node("idempotent", tuple(kids), e)


def _uniform_idempotent(m: Monoid, kids: Sequence[FactTree]) -> bool:
    e = kids[0].image
    return m.is_idempotent(e) and all(k.image == e for k in kids)


def _balanced(m: Monoid, kids: Sequence[FactTree]) -> FactTree:
    if len(kids) == 1:
        return kids[0]
    mid = (len(kids) + 1) // 2
    return _binary(m, _balanced(m, kids[:mid]), _balanced(m, kids[mid:]))


@lru_cache(maxsize=4096)
def _divisor(m: Monoid, c: int) -> LocalDivisor:
    return local_divisor(m, c)


# -- group case ----------------------------------------------------------------


def _prefix_values(m: Monoid, items: Sequence[FactTree]) -> list[int]:
    acc, out = m.identity, []
    for x in items[:-1]:
        acc = m.table[acc][x.image]
        out.append(acc)
    return out


def _group_tree(m: Monoid, items: Sequence[FactTree]) -> FactTree:
    if len(items) == 1:
        return items[0]
    prefix = _prefix_values(m, items)
    p = prefix[0]
    cuts = [i + 1 for i, q in enumerate(prefix) if q == p]
    bounds = [0, *cuts, len(items)]
    parts = [_group_tree(m, items[bounds[j]:bounds[j + 1]]) for j in range(len(bounds) - 1)]
    t = len(cuts)
    if t == 1:
        return _binary(m, parts[0], parts[1])
    # the factors strictly between the first and last cut all map to the identity
    inner = _join(m, parts[1:t])
    return _binary(m, _binary(m, parts[0], inner), parts[t])


def prefix_set(f: Morphism, w: Sequence) -> frozenset[int]:
    """Images of the nonempty proper prefixes of ``w``."""
    return frozenset(_prefix_values(f.monoid, [Leaf(a, f.image(a)) for a in w]))


# -- lifting through a local divisor ------------------------------------------


def _simulate(m: Monoid, kids: Sequence[FactTree], values: Sequence[int]) -> FactTree:
    """Combine lifted children of a wide node into a valid tree over ``M``.

    ``kids[s]`` is a tree for ``c v_s`` and ``values[s]`` is the image of
    ``v_s``.  All ``c v_s c`` share one image, idempotent in the local
    divisor.  The recursion removes one repeated value per round.
    """
    r = len(kids)
    if r == 1:
        return kids[0]
    if _uniform_idempotent(m, kids):
        return _join(m, kids)
    counts: dict[int, int] = {}
    for v in values[:-1]:
        counts[v] = counts.get(v, 0) + 1
    repeated = [v for v in dict.fromkeys(values[:-1]) if counts[v] >= 2]
    if not repeated:
        return _balanced(m, kids)
    best = None
    for p in repeated:
        t = _split_at(m, kids, values, p)
        if best is None or t.height < best.height:
            best = t
    return best


def _split_at(m: Monoid, kids: Sequence[FactTree], values: Sequence[int], p: int) -> FactTree:
    r = len(kids)
    picks: list[int] = []
    for j in range(1, r):
        if values[j] == p and (not picks or j > picks[-1] + 1):
            picks.append(j)
    pairs, start = [], 0
    for j in picks:
        pairs.append(_binary(m, _simulate(m, kids[start:j], values[start:j]), kids[j]))
        start = j + 1
    body = _join(m, pairs)
    if start == r:
        return body
    return _binary(m, body, _simulate(m, kids[start:], values[start:]))


def _lift(m: Monoid, c: int, c_items: Sequence[FactTree], blocks: Sequence[FactTree | None],
          tc: FactTree) -> FactTree:
    """Translate ``tc`` (a tree over derived positions) into a tree over ``c b_1 ... c b_k``.

    ``c_items[i]`` is the item for the i-th ``c`` and ``blocks[i]`` the item
    for ``b_i`` (``None`` when that block is empty).
    """
    table = m.table
    values = [m.identity if b is None else b.image for b in blocks]
    position = 0

    def walk(t: FactTree) -> tuple[FactTree, int, int]:
        nonlocal position
        if t.kind == "leaf":
            i = position
            position += 1
            b = blocks[i]
            return (c_items[i] if b is None else _binary(m, c_items[i], b)), i, i
        parts = [walk(k) for k in t.children]
        kids = [p[0] for p in parts]
        lo, hi = parts[0][1], parts[-1][2]
        if t.kind == "binary":
            return _binary(m, kids[0], kids[1]), lo, hi
        vs = []
        for _, a, b in parts:
            acc = values[a]
            for i in range(a + 1, b + 1):
                acc = table[table[acc][c]][values[i]]
            vs.append(acc)
        # a pair (c w, c v) has image e f(v), so positions only need to agree on that
        e = table[table[c][vs[0]]][c]
        return _simulate(m, kids, [table[e][v] for v in vs]), lo, hi

    return walk(tc)[0]


def derived_morphism(f: Morphism, c) -> Morphism:
    """``b -> f(c b c)`` into the local divisor at ``f(c)``, over the alphabet of ``f``."""
    m, x = f.monoid, f.image(c)
    ld = _divisor(m, x)
    return Morphism(f.alphabet, ld.quotient, tuple(ld.index(m.mul(m.mul(x, y), x)) for y in f.images))


def lift_forest(f: Morphism, c, wc: Sequence, tc: FactTree) -> FactTree:
    """A tree for ``c b_1 c b_2 ... c b_k`` under ``f`` from a tree for ``b_1 ... b_k``.

    ``tc`` must be a valid tree for ``wc`` under :func:`derived_morphism`.
    """
    g = derived_morphism(f, c)
    report = validate(g, wc, tc)
    if not report.valid:
        raise ForestError("input tree is not valid for the derived morphism: " + report.violations[0])
    if not wc:
        raise ForestError("the derived word must be nonempty")
    cx = f.image(c)
    c_items = [Leaf(c, cx) for _ in wc]
    blocks = [Leaf(b, f.image(b)) for b in wc]
    return _lift(f.monoid, cx, c_items, blocks, tc)


# -- general case --------------------------------------------------------------


def _tree(m: Monoid, items: Sequence[FactTree]) -> FactTree | None:
    if not items:
        return None
    if len(items) == 1:
        return items[0]
    if _uniform_idempotent(m, items):
        return _join(m, items)
    present = sorted({x.image for x in items})
    candidates = [x for x in present if not is_unit(m, x)]
    if not candidates:
        return _group_tree(m, items)
    best = None
    for c in candidates:
        t = _split_on(m, items, c)
        if best is None or t.height < best.height:
            best = t
    return best


def _split_on(m: Monoid, items: Sequence[FactTree], c: int) -> FactTree:
    head: list[FactTree] = []
    c_items: list[FactTree] = []
    chunks: list[list[FactTree]] = []
    current = head
    for x in items:
        if x.image == c:
            c_items.append(x)
            current = []
            chunks.append(current)
        else:
            current.append(x)
    blocks = [_tree(m, chunk) for chunk in chunks]

    ld = _divisor(m, c)
    table = m.table
    derived = [
        Leaf(i, ld.index(table[table[c][m.identity if b is None else b.image]][c]))
        for i, b in enumerate(blocks)
    ]
    tc = _tree(ld.quotient, derived)
    body = _lift(m, c, c_items, blocks, tc)
    front = _tree(m, head)
    return body if front is None else _binary(m, front, body)


def build_forest(f: Morphism, w: Sequence) -> FactTree:
    """A factorization tree for ``w`` under ``f`` whose height depends only on ``f``."""
    items = [Leaf(a, f.image(a)) for a in w]
    t = _tree(f.monoid, items)
    return Empty(f.monoid.identity) if t is None else t


def build_group_forest(f: Morphism, w: Sequence) -> FactTree:
    """Tree of height at most three times the size of the prefix set of ``w``."""
    m = f.monoid
    bad = [a for a, x in zip(f.alphabet, f.images) if not is_unit(m, x)]
    if bad:
        raise ForestError(f"letters {bad!r} do not map to units")
    if not w:
        return Empty(m.identity)
    return _group_tree(m, [Leaf(a, f.image(a)) for a in w])


@lru_cache(maxsize=None)
def height_bound(m: int, a: int) -> int:
    """Height guaranteed by :func:`build_forest` for monoids of size ``m`` over ``a`` letter images."""
    if m < 1 or a < 0:
        raise ValueError("need m >= 1 and a >= 0")
    a = min(a, m)
    if a == 0:
        return 0
    if m == 1:
        return 3
    return max(3 * m, height_bound(m, a - 1) + 4 * m * height_bound(m - 1, m) + 2)


# -- checking and reporting ----------------------------------------------------


@dataclass(frozen=True)
class ForestReport:
    valid: bool
    violations: tuple[str, ...]


def _nodes(t: FactTree) -> Iterable[FactTree]:
    stack = [t]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(x.children))


def validate(f: Morphism, w: Sequence, t: FactTree, limit: int = 20) -> ForestReport:
    """Check ``t`` against ``w`` and ``f``; violations are collected, never raised."""
    m = f.monoid
    problems: list[str] = []
    w = tuple(w)
    if t.word != w:
        problems.append(f"tree spells {t.word!r}, expected {w!r}")
    if t.kind == "empty":
        if t.image != m.identity:
            problems.append("empty tree must carry the identity")
        return ForestReport(not problems, tuple(problems))
    for x in _nodes(t):
        if len(problems) >= limit:
            break
        if x.kind == "leaf":
            if x.letter not in f._image_of:
                problems.append(f"leaf letter {x.letter!r} is not in the alphabet")
            elif x.image != f.image(x.letter):
                problems.append(f"leaf {x.letter!r} caches image {x.image}, expected {f.image(x.letter)}")
            continue
        if x.kind == "empty":
            problems.append("empty factor inside a tree")
            continue
        kids = x.children
        if len(kids) < 2:
            problems.append(f"{x.kind} node with {len(kids)} child")
            continue
        if any(k.kind == "empty" or not k.word for k in kids):
            problems.append("node has an empty factor")
        expected = m.product(k.image for k in kids)
        if x.image != expected:
            problems.append(f"node caches image {x.image}, expected {expected}")
        if len(kids) >= 3:
            images = {k.image for k in kids}
            if x.kind != "idempotent":
                problems.append(f"{len(kids)}-ary node must be idempotent, not {x.kind}")
            if len(images) != 1:
                problems.append(f"idempotent node children have images {sorted(images)}")
            elif not m.is_idempotent(kids[0].image):
                problems.append(f"shared image {kids[0].image} is not idempotent")
        elif x.kind != "binary":
            problems.append(f"two-child node has kind {x.kind}")
    return ForestReport(not problems, tuple(problems))


@dataclass(frozen=True)
class ForestStats:
    length: int
    height: int
    nodes: int
    idempotent_nodes: int
    widest: int


def stats(t: FactTree) -> ForestStats:
    nodes = idem = widest = 0
    for x in _nodes(t):
        if x.kind in ("binary", "idempotent"):
            nodes += 1
            widest = max(widest, len(x.children))
            idem += x.kind == "idempotent"
    return ForestStats(len(t.word), t.height, nodes, idem, widest)


def to_json(t: FactTree) -> dict:
    if t.kind == "leaf":
        return {"kind": "leaf", "letter": t.letter, "image": t.image}
    if t.kind == "empty":
        return {"kind": "empty", "image": t.image}
    return {"kind": t.kind, "image": t.image, "children": [to_json(k) for k in t.children]}


def format_tree(t: FactTree, indent: str = "  ") -> str:
    lines: list[str] = []

    def emit(x: FactTree, depth: int) -> None:
        pad = indent * depth
        if x.kind == "leaf":
            lines.append(f"{pad}{x.letter} [{x.image}]")
        elif x.kind == "empty":
            lines.append(f"{pad}(empty) [{x.image}]")
        else:
            lines.append(f"{pad}{x.kind} [{x.image}] {''.join(map(str, x.word))}")
            for k in x.children:
                emit(k, depth + 1)

    emit(t, 0)
    return "\n".join(lines)
