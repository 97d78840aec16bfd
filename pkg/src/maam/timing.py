"""Abstract time: the call-site history that addresses and stack frames are keyed on.

A time is a sequence of ``(label, kaddr)`` entries, most recent first, where
``kaddr`` is a stack address or the halt token.  Concrete time grows by one
entry per tick.  ``k``-bounded time keeps the ``k`` most recent entries; the
nested stack addresses are cut to depth ``k - 1`` so that the set of reachable
times stays finite.

Stack frames are allocated either at the current time itself or at a
:class:`StackAddr` pairing the current time with the label of the
subexpression the frame is waiting on.  The second choice keeps returns from
distinct subexpressions apart even when time carries no context at all.
"""

from __future__ import annotations

import weakref
from typing import Callable, NamedTuple, Union


class _Halt:
    """The stack address of the empty continuation."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "halt"

    def __reduce__(self):
        return (_Halt, ())


HALT = _Halt()


class Time:
    """An interned history: equal entry sequences are the same object.

    Entries nest earlier times inside stack addresses, so structural equality
    between independently built times would revisit shared histories over and
    over.  Interning makes equality of nested times an identity check.
    """

    __slots__ = ("entries", "_hash", "__weakref__")
    _interned: "weakref.WeakValueDictionary[tuple, Time]" = weakref.WeakValueDictionary()

    def __new__(cls, entries: tuple = ()):
        t = cls._interned.get(entries)
        if t is None:
            t = super().__new__(cls)
            t.entries = entries
            t._hash = hash(entries)
            cls._interned[entries] = t
        return t

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Time):
            return NotImplemented
        return False

    def __reduce__(self):
        return (Time, (self.entries,))

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return "[" + ", ".join(f"({label}, {kaddr!r})" for label, kaddr in self.entries) + "]"


EMPTY_TIME = Time()


class StackAddr(NamedTuple):
    time: Time
    target: int

    def __repr__(self) -> str:
        return f"{self.time!r}@{self.target}"


KAddr = Union[Time, StackAddr, _Halt]
Tick = Callable[[int, KAddr, Time], Time]

SITE, TIME_ONLY = "site", "time"
STACK_ALLOCATORS = (SITE, TIME_ONLY)


def stack_allocator(kind: str) -> Callable[[Time, int], KAddr]:
    """How ``push`` turns the current time and the frame's target label into an address."""
    if kind == SITE:
        return StackAddr
    if kind == TIME_ONLY:
        return lambda time, target: time
    raise ValueError(f"unknown stack allocation {kind!r} (expected site or time)")


def tick_concrete(label: int, kaddr: KAddr, time: Time) -> Time:
    return Time(((label, kaddr),) + time.entries)


def truncate(time: Time, k: int) -> Time:
    if k <= 0:
        return EMPTY_TIME
    return Time(tuple((label, truncate_kaddr(kaddr, k - 1)) for label, kaddr in time.entries[:k]))


def truncate_kaddr(kaddr: KAddr, k: int) -> KAddr:
    if kaddr is HALT:
        return kaddr
    if isinstance(kaddr, StackAddr):
        return StackAddr(truncate(kaddr.time, k), kaddr.target)
    return truncate(kaddr, k)


def tick_k(k: int) -> Tick:
    if k < 0:
        raise ValueError("call-site depth must be non-negative")

    def tick(label: int, kaddr: KAddr, time: Time) -> Time:
        if k == 0:
            return EMPTY_TIME
        return truncate(Time(((label, kaddr),) + time.entries[: k - 1]), k)

    tick.k = k
    return tick
