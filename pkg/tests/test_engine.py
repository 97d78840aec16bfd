from __future__ import annotations

import pytest

from maam.domains import ConstDomain, ConstVal
from maam.engine import (
    Config,
    FuelExhausted,
    body_label,
    check_covers,
    concrete_configurations,
    inject,
    iterate,
    oracle_clock,
    oracle_facts,
    report,
    run_fixpoint,
    transfer,
)
from maam.lattice import leq
from maam.oracle import collect
from maam.syntax import parse_program
from maam.timing import TIME_ONLY
from maam.transformers import RECIPES

from support import program


@pytest.mark.parametrize(
    "kwargs",
    [
        {"domain": "interval"},
        {"k": -1},
        {"k": True},
        {"data_store": "weird"},
        {"stack_store": "flow"},
        {"fuel": 0},
        {"stack_alloc": "nope"},
        {"domain": "concrete"},
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ValueError):
        Config(**kwargs)


def test_concrete_config():
    cfg = Config.concrete_run(3)
    assert cfg.concrete and cfg.domain == "concrete"
    with pytest.raises(ValueError):
        Config("concrete", "concrete", "flow")


@pytest.mark.parametrize("recipe", RECIPES)
def test_inject_and_bottom(recipe):
    cfg = Config("const", 0, *recipe)
    sigma = inject(program("literal"), cfg)
    step = transfer(cfg)
    bottom = step(sigma)
    assert leq(bottom, bottom)
    # 42 at the halt continuation has no successor
    assert step(step(sigma)) == step(bottom)


def test_identity_concrete_fixpoint():
    e0 = parse_program("(lam (x) x) @ 2")
    result = run_fixpoint(e0, Config.concrete_run())
    assert not result.exhausted
    assert len(result.configurations()) == len(collect(e0).states) == 4
    assert report(result).halt_values == {2}


@pytest.mark.parametrize("recipe", RECIPES)
def test_memo_matches_plain_iteration(recipe):
    for name in ("compose", "psens", "const_fn"):
        cfg = Config("sign", 0, *recipe, gc=True)
        a = run_fixpoint(program(name), cfg, memo=True)
        b = run_fixpoint(program(name), cfg, memo=False)
        assert a.sigma == b.sigma and a.iterations == b.iterations


@pytest.mark.parametrize("recipe", RECIPES)
def test_result_is_a_post_fixpoint(recipe):
    cfg = Config("const", 1, *recipe)
    e0 = program("select_fn")
    result = run_fixpoint(e0, cfg)
    step = transfer(cfg)
    assert leq(step(result.sigma), result.sigma)
    assert leq(inject(e0, cfg), result.sigma)


def test_iterates_increase():
    xs = list(iterate(program("twice"), Config("const", 1)))
    assert all(leq(a, b) for a, b in zip(xs, xs[1:]))
    assert xs[-1] == xs[-2]


def test_fuel_exhaustion():
    cfg = Config("const", 0, fuel=3)
    result = run_fixpoint(program("compose"), cfg)
    assert result.exhausted and result.iterations == 3
    with pytest.raises(FuelExhausted):
        run_fixpoint(program("compose"), cfg, raise_on_fuel=True)


def test_concrete_omega_runs_out():
    assert run_fixpoint(program("omega"), Config.concrete_run(fuel=40)).exhausted


def test_concrete_needs_input():
    with pytest.raises(ValueError):
        run_fixpoint(program("branch_input"), Config.concrete_run())


def test_concrete_stack_matches_oracle_states():
    e0 = program("kcfa")
    cfg = Config.concrete_run()
    oracle = collect(e0, None, False, 10_000, oracle_clock(cfg))
    assert len(concrete_configurations(run_fixpoint(e0, cfg))) == len(oracle.states)


def test_sensitivity_ordering():
    e0 = program("psens")
    facts = {}
    for recipe in RECIPES:
        lf = report(run_fixpoint(e0, Config("const", 0, *recipe, gc=True))).at(body_label(e0))
        facts[recipe] = lf
    d = ConstDomain()
    for s in ("path", "flow-insen"):
        for x in ("x", "y"):
            assert d.leq(facts["path", s].vars[x], facts["flow", s].vars[x])
            assert d.leq(facts["flow", s].vars[x], facts["flow-insen", s].vars[x])


def test_time_only_stack_addresses_lose_precision():
    # with continuations addressed by time alone, k=0 has a single stack address
    e0 = parse_program("1 + 2")
    site = report(run_fixpoint(e0, Config("const", 0))).halt_values
    merged = report(run_fixpoint(e0, Config("const", 0, stack_alloc=TIME_ONLY))).halt_values
    assert site == ConstVal(frozenset({3}))
    assert merged == ConstVal(frozenset({3, 4}))


def test_collect_facts_worlds():
    e0 = program("psens")
    lf = report(run_fixpoint(e0, Config("const", 0, gc=True))).at(body_label(e0))
    assert lf.configs >= len(lf.worlds) == 2


def test_oracle_facts():
    e0 = program("psens")
    facts = oracle_facts(collect(e0, 0, True).states, 0)
    assert facts.at(body_label(e0)).vars["x"] == {1}
    assert facts.halt_values == {6}


def test_body_label():
    e0 = parse_program("let a := 1 in let b := 2 in a + b")
    assert body_label(e0) == e0.lhs.atom.body.lhs.atom.body.label
    assert body_label(parse_program("3")) == 0


def test_check_covers_detects_missing_states():
    e0 = program("arith")
    states = collect(e0, None, False, 1000, oracle_clock(Config())).states
    good = run_fixpoint(e0, Config("sign", 0))
    assert check_covers(good, states).ok
    truncated = run_fixpoint(e0, Config("sign", 0, fuel=2))
    rep = check_covers(truncated, states)
    assert not rep.ok and rep.violations


def test_sum_to_soundness_regression():
    e0 = program("sum_to")
    for inp in (0, 1, 3):
        states = collect(e0, inp, False, 2000, oracle_clock(Config())).states
        for domain in ("sign", "const"):
            result = run_fixpoint(e0, Config(domain, 0))
            assert check_covers(result, states).ok


@pytest.mark.parametrize("recipe", RECIPES)
def test_kcfa_merge_depends_on_store_placement(recipe):
    # 2+2 needs the first call to see the second binding of z, which only a
    # store shared by every path allows
    got = report(run_fixpoint(program("kcfa"), Config("const", 0, *recipe))).halt_values
    expected = {2, 3, 4} if recipe[0] == "flow-insen" else {2, 3}
    assert got == ConstVal(frozenset(expected))
    assert report(run_fixpoint(program("kcfa"), Config("const", 1, *recipe))).halt_values == ConstVal(frozenset({3}))
