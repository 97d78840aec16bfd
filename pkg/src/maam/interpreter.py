"""The generic monadic small-step interpreter.

:class:`Interpreter` is written only against the effect vocabulary of a
:class:`~maam.transformers.MonadImpl`: ``unit``/``bind``, ``mzero``/``mplus``
and ``get``/``put`` on the cells ``env``, ``store``, ``kaddr``, ``kstore`` and
``time``.  Whether a cell is path-sensitive, flow-sensitive or shared is a
property of the monad it runs in, never of this code.
"""

from __future__ import annotations

from typing import NamedTuple

from .domains import Domain
from .lattice import FrozenMap
from .machine import ArgHole, Clo, FunHole, IfHole
from .syntax import Atomic, BinOp, Exp, If0, Input, Int, Lam, Op, Ref, Value, free_vars, lam_free_vars
from .timing import SITE, Tick, stack_allocator

ENV, STORE, KADDR, KSTORE, TIME = "env", "store", "kaddr", "kstore", "time"


class Shared(NamedTuple):
    """Store key recording that ``addr`` has been bound more than once.

    A refinement may only narrow an address that stands for a single
    binding; once two bindings share it, narrowing one would forget the other.
    """

    addr: object

    def __repr__(self) -> str:
        return f"shared({self.addr!r})"


def bind(store: FrozenMap, addr, value) -> FrozenMap:
    """Weakly update ``addr``, counting a second binding as sharing."""
    if addr in store:
        store = store.join_at(Shared(addr), True)
    return store.join_at(addr, value)


def with_marks(live) -> frozenset:
    return frozenset(live) | {Shared(a) for a in live}


# -- reachability over set-valued continuation stores ------------------------


def reachable_kaddrs(kaddr, kstore: FrozenMap) -> frozenset:
    seen = {kaddr}
    todo = [kaddr]
    while todo:
        for _, link in kstore.get(todo.pop(), ()):
            if link not in seen:
                seen.add(link)
                todo.append(link)
    return frozenset(seen)


def _env_roots(env, names):
    return {env[x] for x in names if x in env}


def _value_roots(domain: Domain, v) -> set:
    roots = set()
    for c in domain.clo_elim(v):
        roots |= _env_roots(c.env, lam_free_vars(c.lam))
    return roots


def _frame_roots(domain: Domain, frame) -> set:
    if isinstance(frame, ArgHole):
        return _env_roots(frame.env, free_vars(frame.arg))
    if isinstance(frame, FunHole):
        return _value_roots(domain, frame.val)
    return _env_roots(frame.env, free_vars(frame.then) | free_vars(frame.orelse))


def reachable_addrs(domain: Domain, e: Exp, env, store: FrozenMap, kaddr, kstore: FrozenMap) -> frozenset:
    roots = _env_roots(env, free_vars(e))
    if isinstance(e, Atomic) and isinstance(e.atom, Value):
        roots |= _value_roots(domain, e.atom.value)
    for k in reachable_kaddrs(kaddr, kstore):
        for frame, _ in kstore.get(k, ()):
            roots |= _frame_roots(domain, frame)
    seen = set(roots)
    todo = list(roots)
    while todo:
        v = store.get(todo.pop())
        if v is None:
            continue
        for addr in _value_roots(domain, v):
            if addr not in seen:
                seen.add(addr)
                todo.append(addr)
    return frozenset(seen)


# -- the interpreter ----------------------------------------------------------


class Interpreter:
    def __init__(self, monad, domain: Domain, tick: Tick, gc: bool = False, stack_alloc: str = SITE):
        self.m = monad
        self.domain = domain
        self.tick = tick
        self.gc_enabled = gc
        self.stack_addr = stack_allocator(stack_alloc)

    # small helpers so the definitions below read like do-blocks
    def _get(self, cell):
        return self.m.get(cell)

    def _put(self, cell, value):
        return self.m.put(cell, value)

    def denote(self, atom):
        """``A^m⟦a⟧``."""
        m, d = self.m, self.domain
        if isinstance(atom, Int):
            return m.unit(d.int_intro(atom.value))
        if isinstance(atom, Value):
            return m.unit(atom.value)
        if isinstance(atom, Input):
            return m.unit(d.unknown())
        if isinstance(atom, Lam):
            return m.bind(self._get(ENV), lambda env: m.unit(d.clo_intro(Clo(atom, env))))
        if isinstance(atom, Ref):

            def lookup(env):
                if atom.name not in env:
                    return m.unit(d.bot())
                return m.bind(self._get(STORE), lambda store: m.unit(store.get(env[atom.name], d.bot())))

            return m.bind(self._get(ENV), lookup)
        raise TypeError(f"not an atom: {atom!r}")

    def push(self, frame, target: Exp):
        """Push ``frame`` while ``target`` is evaluated."""
        m = self.m

        def allocate(kaddr, kstore, time):
            fresh = self.stack_addr(time, target.label)
            return m.seq(
                self._put(KSTORE, kstore.join_at(fresh, frozenset({(frame, kaddr)}))),
                self._put(KADDR, fresh),
            )

        def with_kaddr(kaddr):
            return m.bind(
                self._get(KSTORE),
                lambda kstore: m.bind(self._get(TIME), lambda time: allocate(kaddr, kstore, time)),
            )

        return m.bind(self._get(KADDR), with_kaddr)

    def pop(self):
        m = self.m

        def with_kaddr(kaddr):
            return m.bind(
                self._get(KSTORE),
                lambda kstore: m.bind(
                    m.lift_pow(kstore.get(kaddr, ())),
                    lambda entry: m.seq(self._put(KADDR, entry[1]), m.unit(entry[0])),
                ),
            )

        return m.bind(self._get(KADDR), with_kaddr)

    def refine(self, atom, is_zero: bool):
        m = self.m
        if not isinstance(atom, Ref):
            return m.unit(())

        def with_env(env):
            if atom.name not in env:
                return m.unit(())
            addr = env[atom.name]

            def narrow(store):
                if Shared(addr) in store:
                    return m.unit(())
                return self._put(STORE, store.set(addr, self.domain.refine(store.get(addr, self.domain.bot()), is_zero)))

            return m.bind(self._get(STORE), narrow)

        return m.bind(self._get(ENV), with_env)

    def tick_m(self, e: Exp):
        m = self.m
        return m.bind(
            self._get(TIME),
            lambda time: m.bind(self._get(KADDR), lambda kaddr: self._put(TIME, self.tick(e.label, kaddr, time))),
        )

    def gc(self, e: Exp):
        m = self.m
        if not self.gc_enabled:
            return m.unit(())

        def collect(env, store, kaddr, kstore):
            live = with_marks(reachable_addrs(self.domain, e, env, store, kaddr, kstore))
            klive = reachable_kaddrs(kaddr, kstore)
            return m.seq(self._put(KSTORE, kstore.restrict(klive)), self._put(STORE, store.restrict(live)))

        return m.bind(
            self._get(ENV),
            lambda env: m.bind(
                self._get(STORE),
                lambda store: m.bind(
                    self._get(KADDR),
                    lambda kaddr: m.bind(self._get(KSTORE), lambda kstore: collect(env, store, kaddr, kstore)),
                ),
            ),
        )

    def step(self, e: Exp):
        """``step^m(e)``: one transition from ``e``, returning the next expression."""
        m = self.m
        return m.seq(
            self.tick_m(e),
            m.bind(
                self._get(ENV),
                lambda env: m.bind(self._dispatch(e, env), lambda nxt: m.seq(self.gc(nxt), m.unit(nxt))),
            ),
        )

    def _dispatch(self, e: Exp, env):
        m = self.m
        if isinstance(e, BinOp):
            return m.seq(self.push(ArgHole(e.op, e.rhs, env, e.label), e.lhs), m.unit(e.lhs))
        if isinstance(e, If0):
            return m.seq(self.push(IfHole(e.then, e.orelse, env), e.cond), m.unit(e.cond))
        return m.bind(self.denote(e.atom), lambda v: m.bind(self.pop(), lambda fr: self._on_frame(fr, e.atom, v)))

    def _on_frame(self, frame, atom, v):
        m, d = self.m, self.domain
        if isinstance(frame, ArgHole):
            return m.seq(
                self._put(ENV, frame.env),
                m.seq(self.push(FunHole(frame.op, v, frame.site), frame.arg), m.unit(frame.arg)),
            )
        if isinstance(frame, FunHole) and frame.op is Op.APP:

            def apply(time, store, clo):
                addr = (clo.lam.param, time)
                return m.seq(
                    self._put(ENV, clo.env.set(clo.lam.param, addr)),
                    m.seq(self._put(STORE, bind(store, addr, v)), m.unit(clo.lam.body)),
                )

            return m.bind(
                self._get(TIME),
                lambda time: m.bind(
                    self._get(STORE),
                    lambda store: m.bind(m.lift_pow(d.clo_elim(frame.val)), lambda clo: apply(time, store, clo)),
                ),
            )
        if isinstance(frame, FunHole):
            return m.unit(Atomic(frame.site, Value(d.delta(frame.op, frame.val, v))))
        return m.seq(
            self._put(ENV, frame.env),
            m.bind(
                m.lift_pow(d.if0_elim(v)),
                lambda b: m.seq(self.refine(atom, b), m.unit(frame.then if b else frame.orelse)),
            ),
        )


def denote_config(domain: Domain, atom, env, store):
    """Evaluate an atom against one configuration's cells outside the monad."""
    if isinstance(atom, Int):
        return domain.int_intro(atom.value)
    if isinstance(atom, Value):
        return atom.value
    if isinstance(atom, Input):
        return domain.unknown()
    if isinstance(atom, Lam):
        return domain.clo_intro(Clo(atom, env))
    addr = env.get(atom.name)
    return domain.bot() if addr is None else store.get(addr, domain.bot())
