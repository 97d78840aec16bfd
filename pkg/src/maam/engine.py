"""Analysis configurations, the fixpoint driver, and fact extraction.

A :class:`Config` picks a value domain, a call-site depth and where the data
store and continuation store live.  :func:`build_stack` turns that choice into
a transformer tower, :func:`run_fixpoint` iterates the transition system the
tower induces from the interpreter's step, and :func:`report` reads variable
values per program point back out of the result.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .domains import ConcreteDomain, Domain, make_domain
from .interpreter import Interpreter, denote_config
from .lattice import EMPTY, FrozenMap, join_all, leq
from .machine import ArgHole, Clo, FunHole, IfHole
from .oracle import CState
from .syntax import Atomic, BinOp, Exp, Lam, Op, Value, uses_input
from .oracle import SequenceClock
from .timing import EMPTY_TIME, HALT, SITE, STACK_ALLOCATORS, tick_concrete, tick_k, truncate, truncate_kaddr
from .transformers import DATA_STORES, STACK_STORES, Cell, MonadImpl, assemble

CONCRETE = "concrete"
DEFAULT_FUEL = 100_000


class FuelExhausted(Exception):
    def __init__(self, result: "FixpointResult"):
        super().__init__(f"fixpoint not reached within {result.iterations} iterations")
        self.result = result


@dataclass(frozen=True)
class Config:
    domain: str = "const"
    k: int | str = 0
    data_store: str = "path"
    stack_store: str = "path"
    gc: bool = False
    input: int | None = None
    fuel: int = DEFAULT_FUEL
    stack_alloc: str = SITE

    def __post_init__(self):
        if self.stack_alloc not in STACK_ALLOCATORS:
            raise ValueError(f"unknown stack allocation {self.stack_alloc!r}")
        if self.fuel <= 0:
            raise ValueError("fuel must be positive")
        if self.data_store not in DATA_STORES:
            raise ValueError(f"unknown data-store sensitivity {self.data_store!r}")
        if self.stack_store not in STACK_STORES:
            raise ValueError(f"unknown stack-store sensitivity {self.stack_store!r}")
        if self.concrete:
            if self.domain != CONCRETE or (self.data_store, self.stack_store) != ("path", "path"):
                raise ValueError("concrete execution uses the concrete domain with path-sensitive stores")
        elif self.domain == CONCRETE:
            raise ValueError("the concrete domain needs concrete time")
        elif self.domain not in ("sign", "const"):
            raise ValueError(f"unknown domain {self.domain!r}")
        elif isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 0:
            raise ValueError(f"call-site depth must be a non-negative integer, got {self.k!r}")

    @classmethod
    def concrete_run(
        cls, input: int | None = None, gc: bool = False, fuel: int = DEFAULT_FUEL, stack_alloc: str = SITE
    ) -> Config:
        return cls(domain=CONCRETE, k=CONCRETE, gc=gc, input=input, fuel=fuel, stack_alloc=stack_alloc)

    @property
    def concrete(self) -> bool:
        return self.k == CONCRETE

    @property
    def kstore_in_psi(self) -> bool:
        return self.stack_store == "path"

    def describe(self) -> dict:
        return {
            "domain": self.domain,
            "k": self.k,
            "data_store": self.data_store,
            "stack_store": self.stack_store,
            "gc": self.gc,
            "input": self.input,
            "fuel": self.fuel,
            "stack_alloc": self.stack_alloc,
        }


def oracle_clock(cfg: Config) -> SequenceClock:
    """A reference-machine clock whose times and stack addresses match ``cfg``'s."""
    return SequenceClock(cfg.stack_alloc)


def make_tick(cfg: Config):
    return tick_concrete if cfg.concrete else tick_k(cfg.k)


def make_value_domain(cfg: Config) -> Domain:
    return ConcreteDomain(cfg.input) if cfg.concrete else make_domain(cfg.domain)


def psi_fields(cfg: Config) -> tuple[str, ...]:
    return ("env", "kaddr", "kstore", "time") if cfg.kstore_in_psi else ("env", "kaddr", "time")


def build_stack(cfg: Config) -> MonadImpl:
    psi = Cell(psi_fields(cfg), name="psi")
    store = Cell(("store",), bottom=EMPTY)
    kstore = None if cfg.kstore_in_psi else Cell(("kstore",), bottom=EMPTY)
    return assemble(cfg.data_store, cfg.stack_store, psi, store, kstore)


def initial_psi(cfg: Config) -> tuple:
    if cfg.kstore_in_psi:
        return (EMPTY, HALT, EMPTY, EMPTY_TIME)
    return (EMPTY, HALT, EMPTY_TIME)


def inject(e0: Exp, cfg: Config, stack: MonadImpl | None = None):
    stack = stack or build_stack(cfg)
    states = (initial_psi(cfg), EMPTY) if cfg.kstore_in_psi else (initial_psi(cfg), EMPTY, EMPTY)
    return stack.inject(e0, states)


@dataclass
class Analysis:
    """Everything needed to iterate one configuration."""

    cfg: Config
    stack: MonadImpl
    domain: Domain
    interpreter: Interpreter

    @classmethod
    def build(cls, cfg: Config) -> Analysis:
        stack = build_stack(cfg)
        domain = make_value_domain(cfg)
        return cls(cfg, stack, domain, Interpreter(stack, domain, make_tick(cfg), cfg.gc, cfg.stack_alloc))

    def transfer(self):
        return self.stack.gamma(self.interpreter.step)


def transfer(cfg: Config):
    """The induced transition function on Σ for ``cfg``."""
    return Analysis.build(cfg).transfer()


def split_sigma(sigma) -> list:
    """Split Σ into single-configuration pieces whose join is Σ.

    The outermost collection (the set of configurations or the map from
    configurations to stores) is split; global components such as a
    flow-insensitive store are copied into every piece.
    """
    if isinstance(sigma, frozenset):
        return [frozenset((x,)) for x in sigma]
    if isinstance(sigma, FrozenMap):
        return [FrozenMap({k: v}) for k, v in sigma.items()]
    head, *rest = sigma
    return [(piece, *rest) for piece in split_sigma(head)]


def sigma_bottom(sigma):
    if isinstance(sigma, frozenset):
        return frozenset()
    if isinstance(sigma, FrozenMap):
        return EMPTY
    return tuple(sigma_bottom(c) if i == 0 else EMPTY for i, c in enumerate(sigma))


class MemoTransfer:
    """``γ(step)`` evaluated piecewise, remembering each piece's successors.

    The induced transition function distributes over the configuration
    collection, so this computes exactly the same value as applying it to the
    whole of Σ.
    """

    def __init__(self, step):
        self.step = step
        self.cache: dict = {}

    def __call__(self, sigma):
        out = []
        cache = self.cache
        for piece in split_sigma(sigma):
            successors = cache.get(piece)
            if successors is None:
                successors = cache[piece] = self.step(piece)
            out.append(successors)
        return join_all(out, sigma_bottom(sigma))


@dataclass
class FixpointResult:
    sigma: object
    iterations: int
    exhausted: bool
    cfg: Config
    flattened: list = field(default_factory=list, repr=False)

    def configurations(self) -> list[tuple[Exp, dict]]:
        if not self.flattened:
            self.flattened = build_stack(self.cfg).flatten(self.sigma)
        return self.flattened


def _check_program(e0: Exp, cfg: Config):
    if cfg.concrete and cfg.input is None and uses_input(e0):
        raise ValueError("this program reads `input`; concrete execution needs an input value")


def iterate(e0: Exp, cfg: Config, check_monotone: bool = True, memo: bool = True):
    """Yield the iterates ``X₀ = ς₀, X₁, ...`` of ``X ↦ X ⊔ ς₀ ⊔ step(X)``."""
    _check_program(e0, cfg)
    analysis = Analysis.build(cfg)
    step = MemoTransfer(analysis.transfer()) if memo else analysis.transfer()
    start = inject(e0, cfg, analysis.stack)
    current = start
    yield current
    while True:
        nxt = join_all([start, step(current)], current)
        if check_monotone:
            assert leq(current, nxt), "fixpoint iterates must be increasing"
        yield nxt
        if nxt == current:
            return
        current = nxt


def run_fixpoint(
    e0: Exp, cfg: Config, raise_on_fuel: bool = False, check_monotone: bool = True, memo: bool = True
) -> FixpointResult:
    """Least fixpoint of ``X ↦ X ⊔ ς₀ ⊔ γ(step)(X)``, by naive iteration.

    One unit of fuel is one application of the transition function.  When the
    fuel runs out the last iterate is returned with ``exhausted`` set (or
    :class:`FuelExhausted` is raised).
    """
    iterations = 0
    last = None
    for sigma in iterate(e0, cfg, check_monotone, memo):
        if sigma == last:
            return FixpointResult(sigma, iterations, False, cfg)
        if iterations >= cfg.fuel:
            result = FixpointResult(sigma, iterations, True, cfg)
            if raise_on_fuel:
                raise FuelExhausted(result)
            return result
        last = sigma
        iterations += 1
    return FixpointResult(last, iterations, False, cfg)


# -- facts --------------------------------------------------------------------


def is_value_exp(e: Exp) -> bool:
    return isinstance(e, Atomic) and isinstance(e.atom, Value)


def body_label(e0: Exp) -> int:
    """The label of the innermost ``let`` body: the program's final expression."""
    e = e0
    while isinstance(e, BinOp) and e.op is Op.APP and isinstance(e.lhs, Atomic) and isinstance(e.lhs.atom, Lam):
        e = e.lhs.atom.body
    return e.label


@dataclass(frozen=True)
class LabelFacts:
    vars: FrozenMap  # name -> joined abstract value
    worlds: frozenset  # distinct per-configuration valuations, as frozensets of (name, value)
    configs: int


@dataclass(frozen=True)
class Facts:
    labels: FrozenMap  # label -> LabelFacts
    halt_values: object  # join of the values reaching the empty continuation

    def at(self, label: int) -> LabelFacts | None:
        return self.labels.get(label)


def _valuation(domain: Domain, env, store) -> dict:
    out = {}
    for name, addr in env.items():
        v = store.get(addr)
        if v is not None and not domain.is_bot(v):
            out[name] = v
    return out


def collect_facts(configurations, domain: Domain) -> Facts:
    """Per-label variable facts from ``(exp, cells)`` pairs, joined per label."""
    joined: dict[int, dict] = defaultdict(dict)
    worlds: dict[int, set] = defaultdict(set)
    counts: dict[int, int] = defaultdict(int)
    halt = domain.bot()
    for e, cells in configurations:
        env, store = cells["env"], cells["store"]
        if cells["kaddr"] is HALT and isinstance(e, Atomic):
            halt = domain.join(halt, denote_config(domain, e.atom, env, store))
        if is_value_exp(e):
            continue
        valuation = _valuation(domain, env, store)
        slot = joined[e.label]
        for name, v in valuation.items():
            slot[name] = domain.join(slot[name], v) if name in slot else v
        worlds[e.label].add(frozenset(valuation.items()))
        counts[e.label] += 1
    labels = FrozenMap(
        {
            label: LabelFacts(FrozenMap(joined[label]), frozenset(worlds[label]), counts[label])
            for label in sorted(counts)
        }
    )
    return Facts(labels, halt)


def report(result: FixpointResult, domain: Domain | None = None) -> Facts:
    """Per-label variable facts, joined over every configuration at that label."""
    return collect_facts(result.configurations(), domain or make_value_domain(result.cfg))


def oracle_facts(states, input: int | None = None) -> Facts:
    """Facts over reference-machine states, read with the concrete domain."""
    configs = ((s.exp, {"env": s.env, "store": s.store, "kaddr": s.kaddr}) for s in states)
    return collect_facts(configs, ConcreteDomain(input))


def analyze(e0: Exp, cfg: Config) -> tuple[FixpointResult, Facts]:
    result = run_fixpoint(e0, cfg)
    return result, report(result)


# -- abstraction of concrete states and the soundness check ------------------


class StateAbstraction:
    """``α`` from reference-machine states (with history clocks) to abstract configurations."""

    def __init__(self, cfg: Config, domain: Domain | None = None):
        self.k = cfg.k
        self.domain = domain or make_value_domain(cfg)
        self._time_cache: dict = {}
        self._frame_cache: dict = {}
        self._state_cache: dict = {}

    def time(self, t):
        if t is HALT:
            return HALT
        out = self._time_cache.get(t)
        if out is None:
            out = self._time_cache[t] = truncate(t, self.k)
        return out

    def kaddr(self, kaddr):
        out = self._time_cache.get(kaddr)
        if out is None:
            out = self._time_cache[kaddr] = truncate_kaddr(kaddr, self.k)
        return out

    def addr(self, addr):
        name, t = addr
        return (name, self.time(t))

    def env(self, env: FrozenMap) -> FrozenMap:
        return FrozenMap({x: self.addr(a) for x, a in env.items()})

    def clo(self, c: Clo) -> Clo:
        return Clo(c.lam, self.env(c.env))

    def value(self, v):
        return self.domain.alpha(v, self.clo)

    def exp(self, e: Exp) -> Exp:
        if is_value_exp(e):
            return Atomic(e.label, Value(self.value(e.atom.value)))
        return e

    def frame(self, fr):
        out = self._frame_cache.get(fr)
        if out is None:
            if isinstance(fr, ArgHole):
                out = ArgHole(fr.op, fr.arg, self.env(fr.env), fr.site)
            elif isinstance(fr, FunHole):
                out = FunHole(fr.op, self.value(fr.val), fr.site)
            else:
                out = IfHole(fr.then, fr.orelse, self.env(fr.env))
            self._frame_cache[fr] = out
        return out

    def store(self, store: FrozenMap) -> FrozenMap:
        out: dict = {}
        for a, v in store.items():
            key, val = self.addr(a), self.value(v)
            out[key] = self.domain.join(out[key], val) if key in out else val
        return FrozenMap(out)

    def kstore(self, kstore: FrozenMap) -> FrozenMap:
        out: dict = defaultdict(set)
        for ka, (fr, link) in kstore.items():
            out[self.kaddr(ka)].add((self.frame(fr), self.kaddr(link)))
        return FrozenMap({ka: frozenset(entries) for ka, entries in out.items()})

    def state(self, s: CState) -> tuple[Exp, dict]:
        out = self._state_cache.get(s)
        if out is None:
            out = self._state_cache[s] = self.exp(s.exp), {
                "env": self.env(s.env),
                "store": self.store(s.store),
                "kaddr": self.kaddr(s.kaddr),
                "kstore": self.kstore(s.kstore),
                "time": self.time(s.time),
            }
        return out


def _frame_leq(domain: Domain, a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, FunHole):
        return a.op is b.op and a.site == b.site and domain.leq(a.val, b.val)
    return a == b


def _store_leq(domain: Domain, small: FrozenMap, big: FrozenMap) -> bool:
    for a, v in small.items():
        w = big.get(a)
        if w is None:
            if not domain.is_bot(v):
                return False
        elif not domain.leq(v, w):
            return False
    return True


def _kstore_leq(domain: Domain, small: FrozenMap, big: FrozenMap) -> bool:
    for ka, entries in small.items():
        available = big.get(ka, frozenset())
        for fr, link in entries:
            if (fr, link) in available:
                continue
            if not any(l2 == link and _frame_leq(domain, fr, f2) for f2, l2 in available):
                return False
    return True


def _exp_leq(domain: Domain, a: Exp, b: Exp) -> bool:
    if is_value_exp(a) and is_value_exp(b):
        return a.label == b.label and domain.leq(a.atom.value, b.atom.value)
    return a == b


def _index_key(e: Exp, cells: dict):
    return (e.label, is_value_exp(e), cells["env"], cells["kaddr"], cells["time"])


@dataclass
class SoundnessReport:
    checked: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def check_covers(
    result: FixpointResult,
    concrete_states,
    abstraction: StateAbstraction | None = None,
    max_violations: int = 5,
) -> SoundnessReport:
    """Does every abstracted concrete state lie below some abstract configuration?

    ``abstraction`` may be shared between results with the same domain and
    depth so that each concrete state is abstracted only once.
    """
    abstraction = abstraction or StateAbstraction(result.cfg)
    domain = abstraction.domain
    index: dict = defaultdict(list)
    for e, cells in result.configurations():
        index[_index_key(e, cells)].append((e, cells))
    violations = []
    checked = 0
    for s in concrete_states:
        checked += 1
        e, cells = abstraction.state(s)
        candidates = index.get(_index_key(e, cells), ())
        if not any(
            _exp_leq(domain, e, e2)
            and _store_leq(domain, cells["store"], c2["store"])
            and _kstore_leq(domain, cells["kstore"], c2["kstore"])
            for e2, c2 in candidates
        ):
            violations.append(s)
            if len(violations) >= max_violations:
                break
    return SoundnessReport(checked, violations)


def powerset_kstore(kstore: FrozenMap) -> FrozenMap:
    """Embed a single-valued continuation store into the set-valued shape."""
    return FrozenMap({ka: frozenset({entry}) for ka, entry in kstore.items()})


def concrete_configurations(result: FixpointResult) -> frozenset:
    """The concrete stack's Σ as ``(exp, env, store, kaddr, kstore, time)`` tuples."""
    return frozenset(
        (e, c["env"], c["store"], c["kaddr"], c["kstore"], c["time"]) for e, c in result.configurations()
    )


def embed_oracle_state(s: CState) -> tuple:
    return (s.exp, s.env, s.store, s.kaddr, powerset_kstore(s.kstore), s.time)
