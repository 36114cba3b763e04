"""Hash-consed syntax trees.

Synthesized expressions are DAGs with heavy sharing, so every node is
interned: structurally equal nodes are the same object.  Equality and
hashing are therefore identity based and O(1), and memo tables keyed by
nodes stay cheap no matter how deep the expression is.
"""

from __future__ import annotations

import threading
import weakref
from typing import Iterator


class Term:
    __slots__ = ("args", "kids", "__weakref__")
    fields: tuple[str, ...] = ()

    _pool: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
    _lock = threading.Lock()

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        for i, name in enumerate(cls.__dict__.get("fields", ())):
            setattr(cls, name, property(lambda self, i=i: self.args[i]))

    def __new__(cls, *args):
        if len(args) != len(cls.fields):
            raise TypeError(f"{cls.__name__} expects {len(cls.fields)} arguments")
        key = (cls,) + tuple(id(a) if isinstance(a, Term) else a for a in args)
        with Term._lock:
            node = Term._pool.get(key)
            if node is None:
                node = object.__new__(cls)
                node.args = args
                node.kids = tuple(a for a in args if isinstance(a, Term))
                Term._pool[key] = node
        return node

    def children(self) -> tuple["Term", ...]:
        return self.kids

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self.args))})"

    def __reduce__(self):
        return (type(self), self.args)


def postorder(root: Term, done=()) -> Iterator[Term]:
    """Yield each distinct node of the DAG once, children before parents.

    Nodes found in ``done`` (typically a memo table) are neither yielded
    nor descended into.
    """
    if root in done:
        return
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for child in reversed(node.kids):
            if child not in seen and child not in done:
                stack.append((child, False))


def dag_size(root: Term) -> int:
    return sum(1 for _ in postorder(root))


def tree_size(root: Term) -> int:
    """Size of the expression when written out without sharing."""
    sizes: dict[Term, int] = {}
    for node in postorder(root):
        sizes[node] = 1 + sum(sizes[c] for c in node.children())
    return sizes[root]
