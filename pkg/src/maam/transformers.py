"""Galois transformer layers and the finite-instance Galois property harness.

A monad here is an operation table (:class:`MonadImpl`).  Monadic values are
plain Python data for the identity base and functions from the layer's state
for state-bearing layers:

* ``make_id()``                    -- ``ID(A) = A``
* ``make_state_layer(cell, m)``    -- ``s -> m(A × s)``
* ``make_nondet_layer(m)``         -- ``m(P(A))``
* ``make_flow_layer(cell, m)``     -- ``s -> m([A ↦ s])``

Each table also knows the transition system its stack induces: ``gamma`` turns
a monadic step ``A -> m(B)`` into a function over ``Σ(A)``; ``alpha`` goes back.
``inject`` builds the ``Σ`` element for one value and one set of layer states;
``flatten`` lists the ``(value, cells)`` configurations a ``Σ`` element holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Iterable, Sequence

from .lattice import EMPTY, FrozenMap, join, join_all, leq


@dataclass(frozen=True)
class Cell:
    """The state carried by one layer: one or more named fields.

    With a single field the state is the field's value itself; with several it
    is a tuple in field order.  ``bottom`` is present when the state is a
    join-semilattice.
    """

    fields: tuple[str, ...]
    bottom: Any = None
    name: str | None = None

    @property
    def whole(self) -> str:
        return self.name or "/".join(self.fields)

    @property
    def is_lattice(self) -> bool:
        return self.bottom is not None

    def read(self, state, name):
        if len(self.fields) == 1:
            return state
        return state[self.fields.index(name)]

    def write(self, state, name, value):
        if len(self.fields) == 1:
            return value
        i = self.fields.index(name)
        return state[:i] + (value,) + state[i + 1 :]

    def as_dict(self, state) -> dict:
        if len(self.fields) == 1:
            return {self.fields[0]: state}
        return dict(zip(self.fields, state))


@dataclass
class MonadImpl:
    name: str
    unit: Callable
    bind: Callable
    gets: dict[str, Any]
    puts: dict[str, Callable]
    alpha: Callable
    gamma: Callable
    inject: Callable
    flatten: Callable
    run: Callable
    lift: Callable | None = None
    mzero: Any = None
    mplus: Callable | None = None
    join: Callable | None = None
    bot: Callable | None = None
    joins: Callable | None = None
    state_cells: tuple[Cell, ...] = ()
    inner: "MonadImpl | None" = None
    layers: tuple[str, ...] = field(default=())

    @property
    def nondeterministic(self) -> bool:
        return self.mplus is not None

    @property
    def join_functor(self) -> bool:
        return self.join is not None

    def get(self, cell: str):
        return self.gets[cell]

    def put(self, cell: str, value):
        return self.puts[cell](value)

    def seq(self, first, second):
        return self.bind(first, lambda _: second)

    def lift_pow(self, items: Iterable):
        """Alternation of ``return(x)`` over ``items``; ``mzero`` when empty."""
        items = list(items)
        if not items:
            return self.mzero
        out = self.unit(items[0])
        for x in items[1:]:
            out = self.mplus(out, self.unit(x))
        return out


# -- identity ----------------------------------------------------------------


def make_id() -> MonadImpl:
    ident = lambda f: f
    return MonadImpl(
        name="ID",
        unit=lambda x: x,
        bind=lambda m, f: f(m),
        gets={},
        puts={},
        alpha=ident,
        gamma=ident,
        inject=lambda x, states=(): x,
        flatten=lambda sigma: [(sigma, {})],
        run=lambda m, states=(): m,
        join=join,
        bot=lambda carried_bot: carried_bot,
        joins=join_all,
        layers=("ID",),
    )


# -- state -------------------------------------------------------------------


def make_state_layer(cell: Cell, inner: MonadImpl) -> MonadImpl:
    """``S[s](m)(A) = s -> m(A × s)``."""
    iunit, ibind = inner.unit, inner.bind

    def unit(x):
        return lambda s: iunit((x, s))

    def bind(m, f):
        return lambda s: ibind(m(s), lambda xs: f(xs[0])(xs[1]))

    gets, puts = {}, {}
    whole = cell.whole
    gets[whole] = lambda s: iunit((s, s))
    puts[whole] = lambda new: (lambda s: iunit(((), new)))
    for name in cell.fields:
        gets[name] = (lambda name: lambda s: iunit((cell.read(s, name), s)))(name)
        puts[name] = (lambda name: lambda v: lambda s: iunit(((), cell.write(s, name, v))))(name)

    def lift(m):
        return lambda s: ibind(m, lambda x: iunit((x, s)))

    for name, g in inner.gets.items():
        gets[name] = lift(g)
    for name, p in inner.puts.items():
        puts[name] = (lambda p: lambda v: lift(p(v)))(p)

    mzero = mplus = None
    if inner.nondeterministic:
        izero, iplus = inner.mzero, inner.mplus
        mzero = lambda s: izero
        mplus = lambda a, b: (lambda s: iplus(a(s), b(s)))

    mjoin = bot = joins = None
    if inner.join_functor and cell.is_lattice:
        ijoin, ibot, ijoins = inner.join, inner.bot, inner.joins
        mjoin = lambda a, b: (lambda s: ijoin(a(s), b(s)))
        bot = lambda carried_bot: (lambda s: ibot((carried_bot, cell.bottom)))
        joins = lambda ms, carried_bot: (lambda s: ijoins([m(s) for m in ms], (carried_bot, cell.bottom)))

    def gamma(f):
        return inner.gamma(lambda xs: f(xs[0])(xs[1]))

    def alpha(g):
        ig = inner.alpha(g)
        return lambda x: (lambda s: ig((x, s)))

    def inject(x, states):
        return inner.inject((x, states[0]), states[1:])

    def flatten(sigma):
        out = []
        for (x, s), cells in inner.flatten(sigma):
            merged = dict(cells)
            merged.update(cell.as_dict(s))
            out.append((x, merged))
        return out

    def run(m, states):
        return inner.run(m(states[0]), states[1:])

    return MonadImpl(
        name=f"S[{whole}]({inner.name})",
        unit=unit,
        bind=bind,
        gets=gets,
        puts=puts,
        alpha=alpha,
        gamma=gamma,
        inject=inject,
        flatten=flatten,
        run=run,
        lift=lift,
        mzero=mzero,
        mplus=mplus,
        join=mjoin,
        bot=bot,
        joins=joins,
        state_cells=(cell,) + inner.state_cells,
        inner=inner,
        layers=(f"S[{whole}]",) + inner.layers,
    )


# -- nondeterminism ----------------------------------------------------------


def _require_join(inner: MonadImpl, layer: str):
    if not inner.join_functor:
        raise TypeError(f"{layer} needs an inner monad that is a join-semilattice functor, got {inner.name}")


def make_nondet_layer(inner: MonadImpl) -> MonadImpl:
    """``P(m)(A) = m(P(A))``."""
    _require_join(inner, "the nondeterminism layer")
    iunit, ibind, ijoin, ibot, ijoins = inner.unit, inner.bind, inner.join, inner.bot, inner.joins
    empty = frozenset()

    def collapse(results):
        return ijoins(list(results), empty)

    def unit(x):
        return iunit(frozenset((x,)))

    def bind(m, f):
        return ibind(m, lambda xs: collapse(f(x) for x in xs))

    def lift(m):
        return ibind(m, lambda x: iunit(frozenset((x,))))

    gets = {name: lift(g) for name, g in inner.gets.items()}
    puts = {name: (lambda p: lambda v: lift(p(v)))(p) for name, p in inner.puts.items()}

    def gamma(f):
        return inner.gamma(lambda xs: collapse(f(x) for x in xs))

    def alpha(g):
        ig = inner.alpha(g)
        return lambda x: ig(frozenset((x,)))

    def inject(x, states):
        return inner.inject(frozenset((x,)), states)

    def flatten(sigma):
        return [(x, cells) for xs, cells in inner.flatten(sigma) for x in xs]

    return MonadImpl(
        name=f"P({inner.name})",
        unit=unit,
        bind=bind,
        gets=gets,
        puts=puts,
        alpha=alpha,
        gamma=gamma,
        inject=inject,
        flatten=flatten,
        run=inner.run,
        lift=lift,
        mzero=ibot(empty),
        mplus=ijoin,
        join=ijoin,
        bot=lambda carried_bot: ibot(empty),
        joins=lambda ms, carried_bot: ijoins(ms, empty),
        state_cells=inner.state_cells,
        inner=inner,
        layers=("P",) + inner.layers,
    )


# -- flow sensitivity --------------------------------------------------------


def make_flow_layer(cell: Cell, inner: MonadImpl) -> MonadImpl:
    """``F[s](m)(A) = s -> m([A ↦ s])``."""
    _require_join(inner, "the flow layer")
    if not cell.is_lattice:
        raise TypeError("the flow layer needs a join-semilattice state")
    iunit, ibind, ijoin, ibot, ijoins = inner.unit, inner.bind, inner.join, inner.bot, inner.joins

    def collapse(results):
        return ijoins(list(results), EMPTY)

    def unit(x):
        return lambda s: iunit(FrozenMap({x: s}))

    def bind(m, f):
        return lambda s: ibind(m(s), lambda mp: collapse(f(x)(s2) for x, s2 in mp.items()))

    gets, puts = {}, {}
    whole = cell.whole
    gets[whole] = lambda s: iunit(FrozenMap({s: s}))
    puts[whole] = lambda new: (lambda s: iunit(FrozenMap({(): new})))
    for name in cell.fields:
        gets[name] = (lambda name: lambda s: iunit(FrozenMap({cell.read(s, name): s})))(name)
        puts[name] = (lambda name: lambda v: lambda s: iunit(FrozenMap({(): cell.write(s, name, v)})))(name)

    def lift(m):
        return lambda s: ibind(m, lambda x: iunit(FrozenMap({x: s})))

    for name, g in inner.gets.items():
        gets[name] = lift(g)
    for name, p in inner.puts.items():
        puts[name] = (lambda p: lambda v: lift(p(v)))(p)

    mzero = lambda s: ibot(EMPTY)
    mjoin = lambda a, b: (lambda s: ijoin(a(s), b(s)))

    def gamma(f):
        return inner.gamma(lambda mp: collapse(f(x)(s) for x, s in mp.items()))

    def alpha(g):
        ig = inner.alpha(g)
        return lambda x: (lambda s: ig(FrozenMap({x: s})))

    def inject(x, states):
        return inner.inject(FrozenMap({x: states[0]}), states[1:])

    def flatten(sigma):
        out = []
        for mp, cells in inner.flatten(sigma):
            for x, s in mp.items():
                merged = dict(cells)
                merged.update(cell.as_dict(s))
                out.append((x, merged))
        return out

    def run(m, states):
        return inner.run(m(states[0]), states[1:])

    return MonadImpl(
        name=f"F[{whole}]({inner.name})",
        unit=unit,
        bind=bind,
        gets=gets,
        puts=puts,
        alpha=alpha,
        gamma=gamma,
        inject=inject,
        flatten=flatten,
        run=run,
        lift=lift,
        mzero=mzero,
        mplus=mjoin,
        join=mjoin,
        bot=lambda carried_bot: mzero,
        joins=lambda ms, carried_bot: (lambda s: ijoins([m(s) for m in ms], EMPTY)),
        state_cells=(cell,) + inner.state_cells,
        inner=inner,
        layers=(f"F[{whole}]",) + inner.layers,
    )


def sigma_gamma(stack: MonadImpl) -> Callable:
    """``(A -> m(B)) -> (Σ(A) -> Σ(B))`` for the whole tower."""
    return stack.gamma


def sigma_alpha(stack: MonadImpl) -> Callable:
    """``(Σ(A) -> Σ(B)) -> (A -> m(B))`` for the whole tower."""
    return stack.alpha


# -- recipes -----------------------------------------------------------------

DATA_STORES = ("path", "flow", "flow-insen")
STACK_STORES = ("path", "flow-insen")
RECIPES = tuple((d, k) for d in DATA_STORES for k in STACK_STORES)


def assemble(data_store: str, stack_store: str, psi: Cell, store: Cell, kstore: Cell | None = None) -> MonadImpl:
    """Compose the tower for one sensitivity recipe.

    ``psi`` holds the always path-sensitive context.  When the stack store is
    path-sensitive it must be one of ``psi``'s fields and ``kstore`` is
    ``None``; otherwise ``kstore`` becomes an innermost state layer shared by
    every branch.
    """
    if data_store not in DATA_STORES:
        raise ValueError(f"unknown data-store sensitivity {data_store!r}")
    if stack_store not in STACK_STORES:
        raise ValueError(f"unknown stack-store sensitivity {stack_store!r}")
    if (stack_store == "path") != (kstore is None):
        raise ValueError("a flow-insensitive stack store needs its own cell, a path-sensitive one lives in psi")

    base = make_id()
    if kstore is not None:
        base = make_state_layer(kstore, base)
    if data_store == "path":
        m = make_state_layer(store, make_nondet_layer(base))
    elif data_store == "flow":
        m = make_flow_layer(store, base)
    else:
        m = make_nondet_layer(make_state_layer(store, base))
    return make_state_layer(psi, m)


# -- Galois harness ----------------------------------------------------------


@dataclass
class Failure:
    check: str
    witness: Any

    def __str__(self) -> str:
        return f"{self.check}: {self.witness!r}"


@dataclass
class GaloisReport:
    failures: list[Failure]
    checked: int

    @property
    def ok(self) -> bool:
        return not self.failures

    def kinds(self) -> set[str]:
        return {f.check for f in self.failures}


@dataclass(frozen=True)
class Universe:
    """Finite posets on both sides of a Galois connection."""

    concrete: Sequence
    abstract: Sequence
    concrete_leq: Callable[[Any, Any], bool] = leq
    abstract_leq: Callable[[Any, Any], bool] = leq


@dataclass(frozen=True)
class Commute:
    """A law ``lhs(x) R rhs(x)`` for every ``x`` in ``points``, with R one of ``eq``/``leq``."""

    name: str
    lhs: Callable
    rhs: Callable
    points: Sequence
    relation: str = "eq"
    order: Callable[[Any, Any], bool] = leq


def check_galois(
    pair: tuple[Callable, Callable],
    universe: Universe,
    commutes: Iterable[Commute] = (),
    max_failures: int = 20,
) -> GaloisReport:
    """Check monotonicity, extensiveness, reductiveness and commuting laws.

    Every failure records which check broke and the offending point(s).
    """
    alpha, gamma = pair
    cs, as_ = list(universe.concrete), list(universe.abstract)
    cleq, aleq = universe.concrete_leq, universe.abstract_leq
    failures: list[Failure] = []
    checked = 0

    def fail(check, witness):
        if len(failures) < max_failures:
            failures.append(Failure(check, witness))

    alphas = [alpha(c) for c in cs]
    gammas = [gamma(a) for a in as_]
    for i, c1 in enumerate(cs):
        for j, c2 in enumerate(cs):
            if cleq(c1, c2):
                checked += 1
                if not aleq(alphas[i], alphas[j]):
                    fail("alpha-monotone", (c1, c2))
    for i, a1 in enumerate(as_):
        for j, a2 in enumerate(as_):
            if aleq(a1, a2):
                checked += 1
                if not cleq(gammas[i], gammas[j]):
                    fail("gamma-monotone", (a1, a2))
    for c, a in zip(cs, alphas):
        checked += 1
        if not cleq(c, gamma(a)):
            fail("extensive", c)
    for a, g in zip(as_, gammas):
        checked += 1
        if not aleq(alpha(g), a):
            fail("reductive", a)
    for law in commutes:
        for x in law.points:
            checked += 1
            lhs, rhs = law.lhs(x), law.rhs(x)
            ok = lhs == rhs if law.relation == "eq" else law.order(lhs, rhs)
            if not ok:
                fail(law.name, (x, lhs, rhs))
    return GaloisReport(failures, checked)


def all_states(stack: MonadImpl, universes: dict[str, Sequence]) -> list[tuple]:
    """Every combination of layer states, outermost layer first."""
    per_layer = []
    for cell in stack.state_cells:
        if len(cell.fields) == 1:
            per_layer.append(list(universes[cell.fields[0]]))
        else:
            per_layer.append(list(product(*(universes[f] for f in cell.fields))))
    return list(product(*per_layer))


def observe(stack: MonadImpl, m, states: Sequence[tuple]) -> tuple:
    """Extensional view of a monadic value: its result from every start state."""
    return tuple(stack.run(m, s) for s in states)
