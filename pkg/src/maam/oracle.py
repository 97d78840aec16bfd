"""Reference small-step machine, garbage collection and collecting semantics.

This is a literal transcription of the six-rule relation over states
``⟨e, ρ, σ, κl, κσ, τ⟩`` and is used as ground truth by the test-suite.  Values
are finite sets (singletons in practice), the continuation store is
single-valued, and time is an integer counter by default.  A
:class:`SequenceClock` can be swapped in so that times are call-site
histories, which is what abstraction by ``k``-truncation needs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Protocol

from .lattice import EMPTY, FrozenMap
from .machine import ArgHole, Clo, FunHole, IfHole
from .syntax import Atomic, BinOp, Exp, If0, Input, Int, Lam, Op, Ref, Value, free_vars, lam_free_vars
from .timing import EMPTY_TIME, HALT, SITE, stack_allocator, tick_concrete

INT64_MIN, INT64_MAX = -(2**63), 2**63 - 1


class Clock(Protocol):
    initial: object

    def advance(self, label: int, kaddr, time) -> tuple[object, object]:
        """Return ``(allocation time, successor time)`` for one transition."""

    def stack_addr(self, alloc, target: int):
        """The address a frame waiting on ``target`` is pushed at."""


class CounterClock:
    """``τ`` is allocated and the machine moves on to ``τ + 1``."""

    initial = 1

    def advance(self, label, kaddr, time):
        return time, time + 1

    def stack_addr(self, alloc, target):
        return alloc


class SequenceClock:
    """Times are ``(label, kaddr)`` histories; each step conses its own entry."""

    initial = EMPTY_TIME

    def __init__(self, stack_alloc: str = SITE):
        self.stack_addr = stack_allocator(stack_alloc)

    def advance(self, label, kaddr, time):
        t = tick_concrete(label, kaddr, time)
        return t, t


@dataclass(frozen=True)
class CState:
    exp: Exp
    env: FrozenMap
    store: FrozenMap
    kaddr: object
    kstore: FrozenMap
    time: object


def atom_denote(atom, env: FrozenMap, store: FrozenMap, input: int | None = None):
    """Denote an atom as a value set, or ``None`` when it is undefined."""
    if isinstance(atom, Int):
        return frozenset({atom.value})
    if isinstance(atom, Ref):
        addr = env.get(atom.name)
        return None if addr is None else store.get(addr)
    if isinstance(atom, Lam):
        return frozenset({Clo(atom, env)})
    if isinstance(atom, Input):
        return None if input is None else frozenset({input})
    if isinstance(atom, Value):
        return atom.value
    raise TypeError(f"not an atom: {atom!r}")


def delta_c(op: Op, i1: int, i2: int) -> int:
    if op is Op.ADD:
        result = i1 + i2
    elif op is Op.SUB:
        result = i1 - i2
    else:
        raise ValueError("application has no arithmetic denotation")
    if not INT64_MIN <= result <= INT64_MAX:
        raise OverflowError(f"{i1} {op.value} {i2} overflows 64-bit integers")
    return result


def _ints(v) -> list[int]:
    return [x for x in v if isinstance(x, int)]


def step_c(s: CState, input: int | None = None, clock: Clock = CounterClock()) -> frozenset[CState]:
    e = s.exp
    alloc, nxt = clock.advance(e.label, s.kaddr, s.time)
    if isinstance(e, BinOp):
        frame = ArgHole(e.op, e.rhs, s.env, e.label)
        kaddr = clock.stack_addr(alloc, e.lhs.label)
        kstore = s.kstore.set(kaddr, (frame, s.kaddr))
        return frozenset({CState(e.lhs, s.env, s.store, kaddr, kstore, nxt)})
    if isinstance(e, If0):
        frame = IfHole(e.then, e.orelse, s.env)
        kaddr = clock.stack_addr(alloc, e.cond.label)
        kstore = s.kstore.set(kaddr, (frame, s.kaddr))
        return frozenset({CState(e.cond, s.env, s.store, kaddr, kstore, nxt)})

    v = atom_denote(e.atom, s.env, s.store, input)
    if v is None or s.kaddr is HALT or s.kaddr not in s.kstore:
        return frozenset()
    frame, link = s.kstore[s.kaddr]
    out = set()
    if isinstance(frame, ArgHole):
        kaddr = clock.stack_addr(alloc, frame.arg.label)
        kstore = s.kstore.set(kaddr, (FunHole(frame.op, v, frame.site), link))
        out.add(CState(frame.arg, frame.env, s.store, kaddr, kstore, nxt))
    elif isinstance(frame, FunHole) and frame.op is Op.APP:
        for clo in frame.val:
            if not isinstance(clo, Clo):
                continue
            addr = (clo.lam.param, alloc)
            env = clo.env.set(clo.lam.param, addr)
            out.add(CState(clo.lam.body, env, s.store.set(addr, v), link, s.kstore, nxt))
    elif isinstance(frame, FunHole):
        for i1 in _ints(frame.val):
            for i2 in _ints(v):
                result = Atomic(frame.site, Value(frozenset({delta_c(frame.op, i1, i2)})))
                out.add(CState(result, s.env, s.store, link, s.kstore, nxt))
    else:
        for i in _ints(v):
            branch = frame.then if i == 0 else frame.orelse
            out.add(CState(branch, frame.env, s.store, link, s.kstore, nxt))
    return frozenset(out)


def is_final(s: CState) -> bool:
    return isinstance(s.exp, Atomic) and s.kaddr is HALT


def final_value(s: CState, input: int | None = None):
    return atom_denote(s.exp.atom, s.env, s.store, input)


# -- garbage collection -------------------------------------------------------


def reachable_kaddrs(kaddr, kstore: FrozenMap) -> frozenset:
    seen = {kaddr}
    todo = [kaddr]
    while todo:
        entry = kstore.get(todo.pop())
        if entry is not None and entry[1] not in seen:
            seen.add(entry[1])
            todo.append(entry[1])
    return frozenset(seen)


def _env_roots(env: FrozenMap, names) -> set:
    return {env[x] for x in names if x in env}


def _value_roots(v) -> set:
    roots = set()
    for c in v:
        if isinstance(c, Clo):
            roots |= _env_roots(c.env, lam_free_vars(c.lam))
    return roots


def _frame_roots(frame) -> set:
    if isinstance(frame, ArgHole):
        return _env_roots(frame.env, free_vars(frame.arg))
    if isinstance(frame, FunHole):
        return _value_roots(frame.val)
    return _env_roots(frame.env, free_vars(frame.then) | free_vars(frame.orelse))


def reachable_addrs(e: Exp, env: FrozenMap, store: FrozenMap, kaddr, kstore: FrozenMap) -> frozenset:
    roots = _env_roots(env, free_vars(e))
    for k in reachable_kaddrs(kaddr, kstore):
        if k in kstore:
            roots |= _frame_roots(kstore[k][0])
    seen = set(roots)
    todo = list(roots)
    while todo:
        v = store.get(todo.pop())
        if v is None:
            continue
        for addr in _value_roots(v):
            if addr not in seen:
                seen.add(addr)
                todo.append(addr)
    return frozenset(seen)


def gc_c(s: CState) -> CState:
    live = reachable_addrs(s.exp, s.env, s.store, s.kaddr, s.kstore)
    klive = reachable_kaddrs(s.kaddr, s.kstore)
    return CState(s.exp, s.env, s.store.restrict(live), s.kaddr, s.kstore.restrict(klive), s.time)


# -- collecting semantics -----------------------------------------------------


@dataclass
class Collected:
    states: frozenset[CState]
    exhausted: bool = False
    steps: int = 0
    finals: frozenset[CState] = field(default_factory=frozenset)


def inject_c(e0: Exp, clock: Clock = CounterClock()) -> CState:
    return CState(e0, EMPTY, EMPTY, HALT, EMPTY, clock.initial)


def collect(
    e0: Exp,
    input: int | None = None,
    gc: bool = False,
    fuel: int = 100_000,
    clock: Clock | None = None,
) -> Collected:
    """All states reachable from the initial state, within ``fuel`` transitions."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    clock = clock or CounterClock()
    start = inject_c(e0, clock)
    seen = {start}
    frontier = deque([start])
    steps = 0
    while frontier:
        if steps >= fuel:
            return Collected(frozenset(seen), exhausted=True, steps=steps)
        s = frontier.popleft()
        steps += 1
        for nxt in step_c(s, input, clock):
            if gc:
                nxt = gc_c(nxt)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    states = frozenset(seen)
    return Collected(states, steps=steps, finals=frozenset(s for s in states if is_final(s)))
