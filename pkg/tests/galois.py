"""Galois-connection instances checked by the harness.

Value level: concrete integer sets over a small range against the sign and
constant domains.  Transition-system level: each recipe's ``alpha``/``gamma``
between monadic arrows and functions on ``Σ``, over enumerated mini-universes.
"""

from __future__ import annotations

from functools import cache
from itertools import chain, combinations

from maam.domains import ConstDomain, SignDomain, SIGNS, TOP, NZ, ConstVal, SignVal
from maam.lattice import join, leq
from maam.transformers import RECIPES, Cell, Commute, Universe, all_states, assemble, check_galois, observe

RANGE = tuple(range(-3, 4))


def subsets(items):
    items = list(items)
    return [frozenset(c) for c in chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))]


# -- values -------------------------------------------------------------------


def value_universe(domain) -> Universe:
    if isinstance(domain, SignDomain):
        abstract = [SignVal(s) for s in subsets(SIGNS)]
    else:
        abstract = [ConstVal(s) for s in subsets(RANGE)] + [ConstVal(NZ), ConstVal(TOP)]
    return Universe(subsets(RANGE), abstract, lambda a, b: a <= b, domain.leq)


def value_pair(domain, alpha=None):
    alpha = alpha or domain.alpha
    return alpha, lambda a: domain.ints_in(a, RANGE)


def value_commutes(domain) -> list[Commute]:
    """``δ`` and ``if0`` elimination against their concrete counterparts."""
    from maam.oracle import delta_c
    from maam.syntax import Op

    pairs = [(a, b) for a in subsets(range(-2, 3)) for b in subsets(range(-1, 2))]
    out = []
    for op in (Op.ADD, Op.SUB):
        out.append(
            Commute(
                f"delta {op.value} sound",
                lambda ab, op=op: domain.alpha(frozenset(delta_c(op, x, y) for x in ab[0] for y in ab[1])),
                lambda ab, op=op: domain.delta(op, domain.alpha(ab[0]), domain.alpha(ab[1])),
                pairs,
                relation="leq",
                order=domain.leq,
            )
        )
    out.append(
        Commute(
            "if0 sound",
            lambda s: frozenset(x == 0 for x in s),
            lambda s: domain.if0_elim(domain.alpha(s)),
            subsets(RANGE),
            relation="leq",
            order=lambda a, b: a <= b,
        )
    )
    return out


def dropping_alpha(domain):
    """A broken abstraction that forgets negative integers."""
    return lambda s: domain.alpha(frozenset(x for x in s if x >= 0))


def value_reports():
    return {d.name: check_galois(value_pair(d), value_universe(d), value_commutes(d)) for d in (SignDomain(), ConstDomain())}


# -- transition systems -------------------------------------------------------

PAYLOAD = (0, 1)
STORES = (frozenset(), frozenset({1}))
KSTORES = (frozenset(), frozenset({"a"}))
MINI = {"env": ("e",), "kaddr": ("k",), "time": ("t",), "store": STORES, "kstore": KSTORES}


def mini_stack(recipe):
    data_store, stack_store = recipe
    fields = ("env", "kaddr", "kstore", "time") if stack_store == "path" else ("env", "kaddr", "time")
    kstore = None if stack_store == "path" else Cell(("kstore",), bottom=frozenset())
    return assemble(data_store, stack_store, Cell(fields, name="psi"), Cell(("store",), bottom=frozenset()), kstore)


def mini_arrows(m):
    return [
        m.unit,
        lambda x: m.unit(1 - x),
        lambda x: m.mzero,
        lambda x: m.mzero if x == 0 else m.unit(x),
        lambda x: m.mplus(m.unit(0), m.unit(1)),
        lambda x: m.seq(m.put("store", STORES[1]), m.unit(x)),
        lambda x: m.bind(m.get("store"), lambda s: m.seq(m.put("store", s | {1}), m.unit(x))),
        lambda x: m.bind(m.get("kstore"), lambda k: m.seq(m.put("kstore", k | {"a"}), m.unit(x))),
    ]


class SigmaInstance:
    def __init__(self, recipe):
        self.recipe = recipe
        self.m = mini_stack(recipe)
        self.states = all_states(self.m, MINI)
        singles = [self.m.inject(x, s) for x in PAYLOAD for s in self.states]
        pairs = [join(a, b) for a, b in combinations(singles, 2)]
        self.bottom = self.m.gamma(lambda x: self.m.mzero)(singles[0])
        self.sigmas = list(dict.fromkeys([self.bottom] + singles + pairs))

    def arrow_leq(self, f, g) -> bool:
        return all(leq(observe(self.m, f(x), self.states), observe(self.m, g(x), self.states)) for x in PAYLOAD)

    def fun_leq(self, f, g) -> bool:
        return all(leq(f(s), g(s)) for s in self.sigmas)

    def sigma_functions(self):
        out = [self.m.gamma(g) for g in mini_arrows(self.m)] + [lambda s: s]
        for c in self.sigmas[1:3]:
            out.append(lambda s, c=c: s if s == self.bottom else join(s, c))
        return out

    def universe(self) -> Universe:
        return Universe(self.sigma_functions(), mini_arrows(self.m), self.fun_leq, self.arrow_leq)

    def closed_form(self) -> list[Commute]:
        """γ against the closed forms of the path-sensitive and flow-insensitive shapes."""
        m = self.m
        data_store, stack_store = self.recipe
        out = []
        arrows = mini_arrows(m)
        if self.recipe == ("path", "path"):
            points = [(g, x, s) for g in arrows for x in PAYLOAD for s in self.states]
            out.append(
                Commute(
                    "gamma closed form (path)",
                    lambda p: m.gamma(p[0])(frozenset({((p[1], p[2][0]), p[2][1])})),
                    lambda p: m.run(p[0](p[1]), p[2]),
                    points,
                )
            )
        if self.recipe == ("flow-insen", "path"):
            psis = sorted({s[0] for s in self.states}, key=repr)
            points = [(g, psis, store) for g in arrows for store in STORES]
            out.append(
                Commute(
                    "gamma closed form (flow-insensitive)",
                    lambda p: m.gamma(p[0])((frozenset((x, psi) for x in PAYLOAD for psi in p[1]), p[2])),
                    lambda p: join_many(m.run(p[0](x), (psi, p[2])) for x in PAYLOAD for psi in p[1]),
                    points,
                )
            )
        out.append(
            Commute(
                "alpha gamma round trip",
                lambda g: observe(m, m.alpha(m.gamma(g))(0), self.states),
                lambda g: observe(m, g(0), self.states),
                arrows,
            )
        )
        return out


def join_many(values):
    values = list(values)
    out = values[0]
    for v in values[1:]:
        out = join(out, v)
    return out


def sigma_report(recipe, alpha=None):
    inst = SigmaInstance(recipe)
    pair = (alpha or inst.m.alpha, inst.m.gamma)
    return check_galois(pair, inst.universe(), inst.closed_form())


@cache
def sigma_reports():
    return {r: sigma_report(r) for r in RECIPES}


def broken_sigma_alpha(m):
    """An abstraction that forgets every result but the first branch's payload 0."""

    def alpha(f):
        g = m.alpha(f)
        return lambda x: m.unit(0) if x == 0 else g(x)

    return alpha
