"""Value domains: the concrete powerset, signs, and bounded constant sets.

Each domain is an object exposing the same vocabulary: introduction and
elimination forms (``int_intro``, ``clo_intro``, ``clo_elim``, ``if0_elim``),
primitive arithmetic (``delta``), the lattice operations, ``refine`` for
path conditions, and ``alpha`` from concrete value sets.

Values of the sign and constant domains pair an integer component with a set
of closures.  Both classes implement ``join``/``leq`` themselves so that the
generic lattice helpers can fold them into stores.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable

from .machine import Clo
from .oracle import delta_c
from .syntax import Op

WIDTH = 16

NEG, ZERO, POS = "-", "0", "+"
SIGNS = frozenset({NEG, ZERO, POS})


def sign_of(i: int) -> str:
    return NEG if i < 0 else ZERO if i == 0 else POS


def _no_app(op: Op):
    if op is Op.APP:
        raise ValueError("application is not a primitive operation")


class Domain:
    """Interface shared by the three value domains."""

    name: str

    def bot(self): ...

    def join(self, a, b):
        return a.join(b)

    def leq(self, a, b) -> bool:
        return a.leq(b)

    def is_bot(self, v) -> bool:
        return v == self.bot()

    def int_intro(self, i: int): ...

    def clo_intro(self, c: Clo): ...

    def clo_elim(self, v) -> frozenset[Clo]: ...

    def if0_elim(self, v) -> frozenset[bool]: ...

    def delta(self, op: Op, v1, v2): ...

    def unknown(self):
        """The denotation of ``input``."""

    def refine(self, v, is_zero: bool):
        """Meet ``v`` with the zero (``True``) or nonzero (``False``) integers."""

    def alpha(self, cval: Iterable, clo_alpha: Callable[[Clo], Clo] = lambda c: c): ...

    def ints_in(self, v, universe: Iterable[int]) -> frozenset[int]:
        """Integers of ``universe`` that ``v`` describes."""

    def describe(self, v): ...


def _describe_clos(clos) -> list[int]:
    return sorted(c.lam.label for c in clos)


def _combine(ints_desc, clos):
    if not clos:
        return ints_desc
    if ints_desc is None:
        return {"clo": _describe_clos(clos)}
    return {"int": ints_desc, "clo": _describe_clos(clos)}


# -- concrete -----------------------------------------------------------------


class ConcreteDomain(Domain):
    """Finite sets of integers and closures, ordered by inclusion."""

    name = "concrete"

    def __init__(self, input: int | None = None):
        self.input = input

    def bot(self):
        return frozenset()

    def join(self, a, b):
        return a | b

    def leq(self, a, b):
        return a <= b

    def int_intro(self, i):
        return frozenset({i})

    def clo_intro(self, c):
        return frozenset({c})

    def clo_elim(self, v):
        return frozenset(x for x in v if isinstance(x, Clo))

    def if0_elim(self, v):
        return frozenset(x == 0 for x in v if isinstance(x, int))

    def delta(self, op, v1, v2):
        _no_app(op)
        ints1 = [x for x in v1 if isinstance(x, int)]
        ints2 = [x for x in v2 if isinstance(x, int)]
        return frozenset(delta_c(op, a, b) for a in ints1 for b in ints2)

    def unknown(self):
        if self.input is None:
            raise ValueError("a concrete run of a program using `input` needs an input value")
        return frozenset({self.input})

    def refine(self, v, is_zero):
        return frozenset(x for x in v if not isinstance(x, int) or (x == 0) == is_zero)

    def alpha(self, cval, clo_alpha=lambda c: c):
        return frozenset(clo_alpha(x) if isinstance(x, Clo) else x for x in cval)

    def ints_in(self, v, universe):
        return frozenset(i for i in universe if i in v)

    def describe(self, v):
        ints = sorted(x for x in v if isinstance(x, int))
        clos = [x for x in v if isinstance(x, Clo)]
        return _combine({"fin": ints} if ints or not clos else None, clos)


# -- signs --------------------------------------------------------------------


@dataclass(frozen=True)
class SignVal:
    ints: frozenset = frozenset()
    clos: frozenset = frozenset()

    def join(self, other: SignVal) -> SignVal:
        if self is other:
            return self
        return SignVal(self.ints | other.ints, self.clos | other.clos)

    def leq(self, other: SignVal) -> bool:
        return self.ints <= other.ints and self.clos <= other.clos

    def __repr__(self) -> str:
        parts = sorted(self.ints) + [repr(c) for c in self.clos]
        return "{" + ",".join(parts) + "}"


def _sign_add(s1: frozenset, s2: frozenset) -> frozenset:
    out = set()
    if ZERO in s1:
        out |= s2
    if ZERO in s2:
        out |= s1
    if POS in s1 and POS in s2:
        out.add(POS)
    if NEG in s1 and NEG in s2:
        out.add(NEG)
    if (POS in s1 and NEG in s2) or (NEG in s1 and POS in s2):
        out |= SIGNS
    return frozenset(out)


# Signs of a - b for every pair of operand signs.
SIGN_SUB = {
    (POS, POS): SIGNS,
    (POS, ZERO): frozenset({POS}),
    (POS, NEG): frozenset({POS}),
    (ZERO, POS): frozenset({NEG}),
    (ZERO, ZERO): frozenset({ZERO}),
    (ZERO, NEG): frozenset({POS}),
    (NEG, POS): frozenset({NEG}),
    (NEG, ZERO): frozenset({NEG}),
    (NEG, NEG): SIGNS,
}


def _sign_sub(s1: frozenset, s2: frozenset) -> frozenset:
    out = set()
    for a in s1:
        for b in s2:
            out |= SIGN_SUB[a, b]
    return frozenset(out)


class SignDomain(Domain):
    name = "sign"
    _BOT = SignVal()

    def bot(self):
        return self._BOT

    def int_intro(self, i):
        return SignVal(frozenset({sign_of(i)}))

    def clo_intro(self, c):
        return SignVal(clos=frozenset({c}))

    def clo_elim(self, v):
        return v.clos

    def if0_elim(self, v):
        out = set()
        if ZERO in v.ints:
            out.add(True)
        if NEG in v.ints or POS in v.ints:
            out.add(False)
        return frozenset(out)

    def delta(self, op, v1, v2):
        _no_app(op)
        fn = _sign_add if op is Op.ADD else _sign_sub
        return SignVal(fn(v1.ints, v2.ints))

    def unknown(self):
        return SignVal(SIGNS)

    def refine(self, v, is_zero):
        keep = frozenset({ZERO}) if is_zero else frozenset({NEG, POS})
        return SignVal(v.ints & keep, v.clos)

    def alpha(self, cval, clo_alpha=lambda c: c):
        ints = frozenset(sign_of(x) for x in cval if isinstance(x, int))
        clos = frozenset(clo_alpha(x) for x in cval if isinstance(x, Clo))
        return SignVal(ints, clos)

    def ints_in(self, v, universe):
        return frozenset(i for i in universe if sign_of(i) in v.ints)

    def describe(self, v):
        order = [NEG, ZERO, POS]
        ints = {"sign": [s for s in order if s in v.ints]} if v.ints or not v.clos else None
        return _combine(ints, v.clos)


# -- bounded constant sets ----------------------------------------------------


class Wide(enum.Enum):
    """Integer abstractions beyond a finite set: all nonzero, or all integers."""

    NZ = "nz"
    TOP = "top"

    def __repr__(self) -> str:
        return self.value


NZ, TOP = Wide.NZ, Wide.TOP


def fin(values: Iterable[int], width: int = WIDTH):
    """A finite constant set, widened once it grows past ``width``."""
    s = frozenset(values)
    if len(s) <= width:
        return s
    return TOP if 0 in s else NZ


def iabs_join(a, b, width: int = WIDTH):
    if a is TOP or b is TOP:
        return TOP
    if a is NZ and b is NZ:
        return NZ
    if a is NZ or b is NZ:
        s = b if a is NZ else a
        return TOP if 0 in s else NZ
    return fin(a | b, width)


def iabs_leq(a, b) -> bool:
    if b is TOP:
        return True
    if a is TOP:
        return False
    if b is NZ:
        return a is NZ or 0 not in a
    if a is NZ:
        return False
    return a <= b


def iabs_has_zero(a) -> bool:
    return a is TOP or (a is not NZ and 0 in a)


def iabs_has_nonzero(a) -> bool:
    return a is TOP or a is NZ or any(x != 0 for x in a)


@dataclass(frozen=True)
class ConstVal:
    ints: object = frozenset()
    clos: frozenset = frozenset()

    def join(self, other: ConstVal) -> ConstVal:
        if self is other:
            return self
        return ConstVal(iabs_join(self.ints, other.ints), self.clos | other.clos)

    def leq(self, other: ConstVal) -> bool:
        return iabs_leq(self.ints, other.ints) and self.clos <= other.clos

    def __repr__(self) -> str:
        ints = repr(self.ints) if isinstance(self.ints, Wide) else "{" + ",".join(map(str, sorted(self.ints))) + "}"
        if not self.clos:
            return ints
        return f"{ints}+{sorted(self.clos, key=lambda c: c.lam.label)}"


class ConstDomain(Domain):
    """Finite constant sets of at most ``width`` elements, then ``nz`` or ``top``."""

    name = "const"
    _BOT = ConstVal()

    def __init__(self, width: int = WIDTH):
        self.width = width

    def bot(self):
        return self._BOT

    def int_intro(self, i):
        return ConstVal(frozenset({i}))

    def clo_intro(self, c):
        return ConstVal(clos=frozenset({c}))

    def clo_elim(self, v):
        return v.clos

    def if0_elim(self, v):
        out = set()
        if iabs_has_zero(v.ints):
            out.add(True)
        if iabs_has_nonzero(v.ints):
            out.add(False)
        return frozenset(out)

    def delta(self, op, v1, v2):
        _no_app(op)
        a, b = v1.ints, v2.ints
        if a == frozenset() or b == frozenset():
            return self._BOT
        if isinstance(a, frozenset) and isinstance(b, frozenset):
            return ConstVal(fin((delta_c(op, x, y) for x in a for y in b), self.width))
        # x + 0, x - 0 and 0 - x are nonzero whenever x is.
        if a is NZ and b == frozenset({0}):
            return ConstVal(NZ)
        if b is NZ and a == frozenset({0}):
            return ConstVal(NZ)
        return ConstVal(TOP)

    def unknown(self):
        return ConstVal(TOP)

    def refine(self, v, is_zero):
        a = v.ints
        if is_zero:
            ints = frozenset({0}) if iabs_has_zero(a) else frozenset()
        elif a is TOP or a is NZ:
            ints = NZ
        else:
            ints = a - {0}
        return ConstVal(ints, v.clos)

    def alpha(self, cval, clo_alpha=lambda c: c):
        ints = fin((x for x in cval if isinstance(x, int)), self.width)
        clos = frozenset(clo_alpha(x) for x in cval if isinstance(x, Clo))
        return ConstVal(ints, clos)

    def ints_in(self, v, universe):
        a = v.ints
        if a is TOP:
            return frozenset(universe)
        if a is NZ:
            return frozenset(i for i in universe if i != 0)
        return frozenset(i for i in universe if i in a)

    def describe(self, v):
        a = v.ints
        if isinstance(a, Wide):
            ints = a.value
        elif a or not v.clos:
            ints = {"fin": sorted(a)}
        else:
            ints = None
        return _combine(ints, v.clos)


def make_domain(name: str, input: int | None = None) -> Domain:
    if name == "sign":
        return SignDomain()
    if name == "const":
        return ConstDomain()
    if name == "concrete":
        return ConcreteDomain(input)
    raise ValueError(f"unknown domain {name!r} (expected sign or const)")
