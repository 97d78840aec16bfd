from __future__ import annotations

import pytest

from maam.engine import Config, build_stack
from maam.transformers import RECIPES, check_galois

from galois import broken_sigma_alpha, mini_stack, sigma_report, sigma_reports
from laws import all_laws, failing

SHARING = [r for r in RECIPES if r != ("path", "path")]


@pytest.mark.parametrize(
    "recipe,layers",
    [
        (("path", "path"), ("S[psi]", "S[store]", "P", "ID")),
        (("path", "flow-insen"), ("S[psi]", "S[store]", "P", "S[kstore]", "ID")),
        (("flow", "path"), ("S[psi]", "F[store]", "ID")),
        (("flow", "flow-insen"), ("S[psi]", "F[store]", "S[kstore]", "ID")),
        (("flow-insen", "path"), ("S[psi]", "P", "S[store]", "ID")),
        (("flow-insen", "flow-insen"), ("S[psi]", "P", "S[store]", "S[kstore]", "ID")),
    ],
)
def test_tower_shapes(recipe, layers):
    assert build_stack(Config("const", 0, *recipe)).layers == layers


def test_path_sensitive_tower_satisfies_every_law():
    results = all_laws(("path", "path"))
    assert sum(r.checked for r in results) > 3000
    assert failing(("path", "path")) == {}


@pytest.mark.parametrize("recipe", RECIPES)
def test_state_and_unit_laws_hold(recipe):
    broken = set(failing(recipe))
    assert broken <= {"associativity", "bind distributes"}


@pytest.mark.parametrize("recipe", SHARING)
def test_shared_stores_break_sequencing_laws(recipe):
    # a shared or flow-keyed store joins the branches of a choice before the
    # continuation reads it, so reassociating a bind can change the result
    assert set(failing(recipe)) == {"associativity", "bind distributes"}


@pytest.mark.parametrize("recipe", RECIPES)
def test_sigma_galois(recipe):
    report = sigma_reports()[recipe]
    assert report.ok, [str(f) for f in report.failures]
    assert report.checked > 0


@pytest.mark.parametrize("recipe", RECIPES)
def test_broken_sigma_alpha_is_detected(recipe):
    report = sigma_report(recipe, broken_sigma_alpha(mini_stack(recipe)))
    assert not report.ok


def test_check_galois_on_a_toy_pair():
    from maam.transformers import Universe

    evens = Universe([0, 1, 2, 3], ["e", "o", "t"], lambda a, b: a == b, lambda a, b: a == b or b == "t")
    alpha = lambda n: "e" if n % 2 == 0 else "o"
    gamma = {"e": 0, "o": 1, "t": 3}.get
    report = check_galois((alpha, gamma), evens)
    assert not report.ok and "extensive" in report.kinds()
