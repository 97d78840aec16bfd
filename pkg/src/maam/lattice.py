"""Immutable finite maps and structural join/order on the analysis carriers.

Everything the transformer tower carries is built from a handful of shapes:
frozensets (powersets, joined by union), :class:`FrozenMap` (joined pointwise),
tuples (joined componentwise) and domain values that know their own ``join``
and ``leq``.  Plain data that is not a lattice element (expressions, labels,
environments) only joins with itself.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from typing import Any


class FrozenMap(Mapping):
    """A hashable mapping with persistent-style update methods."""

    __slots__ = ("_items", "_hash")

    def __init__(self, items: Mapping | Iterable[tuple[Any, Any]] = ()):
        self._items = dict(items)
        self._hash = None

    def __getitem__(self, key):
        return self._items[key]

    def __iter__(self) -> Iterator:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, key) -> bool:
        return key in self._items

    def get(self, key, default=None):
        return self._items.get(key, default)

    def keys(self):
        return self._items.keys()

    def values(self):
        return self._items.values()

    def items(self):
        return self._items.items()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._items.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if isinstance(other, FrozenMap):
            if self._hash is not None and other._hash is not None and self._hash != other._hash:
                return False
            return self._items == other._items
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k!r}: {v!r}" for k, v in self._items.items())
        return "{" + inner + "}"

    def set(self, key, value) -> FrozenMap:
        items = dict(self._items)
        items[key] = value
        return FrozenMap(items)

    def join_at(self, key, value) -> FrozenMap:
        """Weak update: join ``value`` into whatever is already at ``key``."""
        if key in self._items:
            value = join(self._items[key], value)
        return self.set(key, value)

    def restrict(self, keys) -> FrozenMap:
        return FrozenMap({k: v for k, v in self._items.items() if k in keys})


EMPTY = FrozenMap()


def join(a, b):
    """Least upper bound of two carrier values of the same shape."""
    if a is b:
        return a
    if isinstance(a, frozenset):
        return a | b
    if isinstance(a, FrozenMap):
        if not a:
            return b
        if not b:
            return a
        items = dict(a._items)
        for k, v in b._items.items():
            items[k] = join(items[k], v) if k in items else v
        return FrozenMap(items)
    if isinstance(a, tuple):
        if len(a) != len(b):
            raise TypeError(f"cannot join tuples of different arity: {a!r} / {b!r}")
        return tuple(join(x, y) for x, y in zip(a, b))
    method = None if isinstance(a, (str, bytes)) else getattr(a, "join", None)
    if method is not None:
        return method(b)
    if a == b:
        return a
    raise TypeError(f"no join for {a!r} and {b!r}")


def leq(a, b) -> bool:
    """The order induced by :func:`join`: ``leq(a, b)`` iff ``join(a, b) == b``."""
    if a is b:
        return True
    if isinstance(a, frozenset):
        return a <= b
    if isinstance(a, FrozenMap):
        return all(k in b and leq(v, b[k]) for k, v in a.items())
    if isinstance(a, tuple):
        return len(a) == len(b) and all(leq(x, y) for x, y in zip(a, b))
    method = getattr(a, "leq", None)
    if method is not None:
        return method(b)
    return a == b


def join_all(values: Iterable, bottom):
    """Join ``bottom`` with many values of its shape at once."""
    distinct = []
    seen = set()
    for v in values:
        if v is bottom or id(v) in seen:
            continue
        seen.add(id(v))
        distinct.append(v)
    if not distinct:
        return bottom
    if len(distinct) == 1:
        return join(bottom, distinct[0])
    if isinstance(bottom, frozenset):
        return bottom.union(*distinct)
    if isinstance(bottom, FrozenMap):
        base = max(distinct, key=len)
        items = dict(base._items)
        for m in (bottom, *distinct):
            if m is base:
                continue
            for k, v in m._items.items():
                current = items.get(k)
                if current is None:
                    items[k] = v
                elif current is not v:
                    items[k] = join(current, v)
        return FrozenMap(items)
    if isinstance(bottom, tuple):
        return tuple(join_all([v[i] for v in distinct], b) for i, b in enumerate(bottom))
    out = bottom
    for v in distinct:
        out = join(out, v)
    return out
