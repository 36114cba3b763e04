"""Finite monoids given by multiplication tables, homomorphisms and local divisors."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np


class MonoidError(ValueError):
    pass


class NotAperiodicError(ValueError):
    """Raised when a construction needs an aperiodic monoid.

    ``witness`` is an element x with x^w != x^(w+1).
    """

    def __init__(self, witness: int, message: str | None = None):
        self.witness = witness
        super().__init__(message or f"monoid is not aperiodic: element {witness} satisfies x^w != x^(w+1)")


@dataclass(frozen=True)
class Monoid:
    """A finite monoid on ``0..n-1``; ``table[x][y]`` is the product ``x*y``."""

    table: tuple[tuple[int, ...], ...]
    identity: int = 0

    def __post_init__(self):
        table = tuple(tuple(int(v) for v in row) for row in self.table)
        object.__setattr__(self, "table", table)
        n = len(table)
        if n == 0:
            raise MonoidError("a monoid needs at least one element")
        if any(len(row) != n for row in table):
            raise MonoidError("multiplication table must be square")
        if not 0 <= self.identity < n:
            raise MonoidError(f"identity {self.identity} out of range")
        arr = self.array
        if arr.min() < 0 or arr.max() >= n:
            raise MonoidError("table entries must be element indices")
        e = self.identity
        for x in range(n):
            if table[e][x] != x or table[x][e] != x:
                raise MonoidError(f"{e} is not an identity: violated at element {x}")
        for x in range(n):
            lhs = arr[arr[x]]  # (x*y)*z over all y, z
            rhs = arr[x][arr]  # x*(y*z)
            bad = np.argwhere(lhs != rhs)
            if len(bad):
                y, z = map(int, bad[0])
                raise MonoidError(f"not associative: ({x}*{y})*{z} != {x}*({y}*{z})")

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    @property
    def size(self) -> int:
        return len(self.table)

    def __len__(self):
        return len(self.table)

    def mul(self, x: int, y: int) -> int:
        return self.table[x][y]

    def product(self, elements: Iterable[int]) -> int:
        acc = self.identity
        for x in elements:
            acc = self.table[acc][x]
        return acc

    def power(self, x: int, k: int) -> int:
        acc = self.identity
        for _ in range(k):
            acc = self.table[acc][x]
        return acc

    def index_period(self, x: int) -> tuple[int, int]:
        """Smallest i >= 1 and p >= 1 with x^i = x^(i+p)."""
        seen = {}
        acc, k = x, 1
        while acc not in seen:
            seen[acc] = k
            acc = self.table[acc][x]
            k += 1
        i = seen[acc]
        return i, k - i

    def is_idempotent(self, x: int) -> bool:
        return self.table[x][x] == x

    def to_json(self) -> dict:
        return {"size": self.size, "identity": self.identity, "table": [list(r) for r in self.table]}

    @classmethod
    def from_json(cls, data: dict) -> "Monoid":
        m = make_monoid(data["table"], data.get("identity", 0))
        if "size" in data and data["size"] != m.size:
            raise MonoidError(f"declared size {data['size']} but table has {m.size} rows")
        return m


def make_monoid(table: Sequence[Sequence[int]], identity: int = 0) -> Monoid:
    return Monoid(tuple(tuple(r) for r in table), identity)


def trivial_monoid() -> Monoid:
    return Monoid(((0,),), 0)


def cyclic_group(n: int) -> Monoid:
    return Monoid(tuple(tuple((x + y) % n for y in range(n)) for x in range(n)), 0)


def idempotent_power(m: Monoid) -> int:
    """Least w >= 1 such that x^w is idempotent for every x."""
    indices, periods = zip(*(m.index_period(x) for x in range(m.size)))
    step = math.lcm(*periods)
    return step * max(1, -(-max(indices) // step))


def is_unit(m: Monoid, x: int) -> bool:
    row, col = m.table[x], [m.table[y][x] for y in range(m.size)]
    return m.identity in row and m.identity in col


def units(m: Monoid) -> list[int]:
    return [x for x in range(m.size) if is_unit(m, x)]


def aperiodicity_witness(m: Monoid) -> int | None:
    w = idempotent_power(m)
    for x in range(m.size):
        xw = m.power(x, w)
        if m.mul(xw, x) != xw:
            return x
    return None


def is_aperiodic(m: Monoid) -> bool:
    return aperiodicity_witness(m) is None


@dataclass(frozen=True)
class LocalDivisor:
    """The monoid on ``cM & Mc`` with product ``xc o cy = xcy`` and identity ``c``."""

    base: Monoid
    c: int
    carrier: tuple[int, ...]
    quotient: Monoid

    @cached_property
    def _position(self) -> dict[int, int]:
        return {z: i for i, z in enumerate(self.carrier)}

    def index(self, z: int) -> int:
        """Quotient index of the base element ``z``."""
        try:
            return self._position[z]
        except KeyError:
            raise ValueError(f"element {z} is not in cM & Mc for c={self.c}") from None

    def embed(self, i: int) -> int:
        return self.carrier[i]

    def __contains__(self, z: int) -> bool:
        return z in self._position


def local_divisor(m: Monoid, c: int) -> LocalDivisor:
    left = {m.mul(c, x) for x in range(m.size)}
    right = {m.mul(x, c) for x in range(m.size)}
    carrier = tuple(sorted(left & right))
    pos = {z: i for i, z in enumerate(carrier)}
    # a right factor y with c*y = z, for each z in the carrier
    right_factor = {}
    for y in range(m.size):
        right_factor.setdefault(m.mul(c, y), y)
    table = [[pos[m.mul(z1, right_factor[z2])] for z2 in carrier] for z1 in carrier]
    return LocalDivisor(m, c, carrier, make_monoid(table, pos[c]))


def small_local_divisor(m: Monoid, c: int) -> LocalDivisor:
    """The submonoid ``{c} | cMc`` of the local divisor at ``c``."""
    full = local_divisor(m, c)
    keep = sorted({c} | {m.mul(m.mul(c, x), c) for x in range(m.size)})
    pos = {z: i for i, z in enumerate(keep)}
    table = [[pos[full.embed(full.quotient.mul(full.index(x), full.index(y)))] for y in keep] for x in keep]
    return LocalDivisor(m, c, tuple(keep), make_monoid(table, pos[c]))


def generated_submonoid(m: Monoid, generators: Iterable[int]) -> list[int]:
    """Elements reachable from the identity by right multiplication, in discovery order."""
    gens = list(dict.fromkeys(generators))
    order = [m.identity]
    seen = {m.identity}
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        for g in gens:
            y = m.mul(x, g)
            if y not in seen:
                seen.add(y)
                order.append(y)
    return order


def submonoid(m: Monoid, elements: Sequence[int]) -> Monoid:
    """Re-index a multiplicatively closed subset containing the identity."""
    pos = {z: i for i, z in enumerate(elements)}
    if m.identity not in pos:
        raise MonoidError("submonoid must contain the identity")
    try:
        table = [[pos[m.mul(x, y)] for y in elements] for x in elements]
    except KeyError:
        raise MonoidError("subset is not closed under multiplication") from None
    return make_monoid(table, pos[m.identity])


@dataclass(frozen=True)
class Morphism:
    """A homomorphism from the free monoid over ``alphabet`` into ``monoid``."""

    alphabet: tuple[Hashable, ...]
    monoid: Monoid
    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "images", tuple(int(x) for x in self.images))
        if len(self.alphabet) != len(self.images):
            raise ValueError("one image per letter is required")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet letters must be distinct")
        for a, x in zip(self.alphabet, self.images):
            if not 0 <= x < self.monoid.size:
                raise ValueError(f"image {x} of letter {a!r} is not an element of the monoid")

    @cached_property
    def _image_of(self) -> dict:
        return dict(zip(self.alphabet, self.images))

    def image(self, letter) -> int:
        try:
            return self._image_of[letter]
        except KeyError:
            raise ValueError(f"letter {letter!r} not in alphabet") from None

    def __call__(self, word: Iterable) -> int:
        table = self.monoid.table
        acc = self.monoid.identity
        images = self._image_of
        for a in word:
            acc = table[acc][images[a]]
        return acc

    def restrict(self, letters: Iterable) -> "Morphism":
        keep = set(letters)
        alpha = tuple(a for a in self.alphabet if a in keep)
        return Morphism(alpha, self.monoid, tuple(self._image_of[a] for a in alpha))

    def image_submonoid(self) -> list[int]:
        return generated_submonoid(self.monoid, self.images)

    def canonical(self) -> tuple["Morphism", tuple[int, ...]]:
        """Corestrict to ``h(A*)`` with elements numbered in shortlex discovery order.

        Returns the new morphism and the embedding of its elements into
        the original monoid.  Two morphisms with isomorphic images (as
        morphisms) get identical canonical forms.
        """
        order = tuple(self.image_submonoid())
        m = submonoid(self.monoid, order)
        pos = {z: i for i, z in enumerate(order)}
        return Morphism(self.alphabet, m, tuple(pos[x] for x in self.images)), order

    @cached_property
    def signature(self) -> tuple:
        return (self.alphabet, self.monoid.table, self.monoid.identity, self.images)

    def to_json(self) -> dict:
        return {"alphabet": list(self.alphabet), "images": list(self.images), "monoid": self.monoid.to_json()}

    @classmethod
    def from_json(cls, data: dict, base: Path | None = None) -> "Morphism":
        mon = data["monoid"]
        if isinstance(mon, str):
            path = Path(mon) if base is None else base / mon
            mon = json.loads(path.read_text())
        return cls(tuple(data["alphabet"]), Monoid.from_json(mon), tuple(data["images"]))


def submonoid_image(h: Morphism, letters: Iterable) -> list[int]:
    """Sorted elements of h(B*) for the given letters B."""
    letters = set(letters)
    unknown = letters - set(h.alphabet)
    if unknown:
        raise ValueError(f"letters {sorted(map(str, unknown))} not in alphabet")
    return sorted(generated_submonoid(h.monoid, [h.image(a) for a in h.alphabet if a in letters]))


def _transformations(dfa) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    n = dfa.states
    gens = [tuple(dfa.delta[s][k] for s in range(n)) for k in range(len(dfa.alphabet))]
    ident = tuple(range(n))
    order = [ident]
    seen = {ident}
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        for g in gens:
            y = tuple(g[x[s]] for s in range(n))
            if y not in seen:
                seen.add(y)
                order.append(y)
    return order, gens


def transition_monoid(dfa) -> tuple[Monoid, Morphism]:
    """Monoid of state transformations of a complete DFA, with its letter morphism.

    Elements are numbered in the order they are reached from the identity
    by appending letters; ``x*y`` means "apply x, then y".
    """
    order, gens = _transformations(dfa)
    n = dfa.states
    pos = {x: i for i, x in enumerate(order)}
    table = [[pos[tuple(y[x[s]] for s in range(n))] for y in order] for x in order]
    m = make_monoid(table, 0)
    return m, Morphism(dfa.alphabet, m, tuple(pos[g] for g in gens))


def syntactic_morphism(dfa) -> tuple[Morphism, frozenset[int]]:
    """Syntactic morphism of the DFA's language and the elements it accepts."""
    from .automata import minimize

    d = minimize(dfa)
    _, h = transition_monoid(d)
    order, _ = _transformations(d)
    accepted = frozenset(i for i, x in enumerate(order) if x[d.initial] in d.accepting)
    return h, accepted


def load_monoid(path) -> Monoid:
    return Monoid.from_json(json.loads(Path(path).read_text()))


def load_morphism(path) -> Morphism:
    path = Path(path)
    return Morphism.from_json(json.loads(path.read_text()), base=path.parent)
