from __future__ import annotations

import pytest

from maam.syntax import (
    Atomic,
    BinOp,
    If0,
    Input,
    Int,
    Lam,
    Op,
    ParseError,
    Ref,
    SBin,
    SIf0,
    SInput,
    SInt,
    SLam,
    SLet,
    SVar,
    desugar,
    free_vars,
    free_vars_surface,
    parse,
    parse_program,
    pretty,
    subterms,
    uses_input,
)

from support import corpus, source


def test_parse_literal():
    assert parse("2") == SInt(2)


def test_parse_application_of_lambda():
    assert parse("(lam (x) x) @ 2") == SBin(SLam("x", SVar("x")), Op.APP, SInt(2))


def test_parse_let_input_if0_braced():
    expected = SLet("n", SInput(), SIf0(SVar("n"), SInt(1), SInt(2)))
    assert parse("let n := input in if0(n){1}{2}") == expected
    assert parse("(let n := input in (if0 n 1 2))") == expected


def test_parse_negative_literal_and_chains():
    assert parse("1 - -2") == SBin(SInt(1), Op.SUB, SInt(-2))
    assert parse("1 + 2 - 3") == SBin(SBin(SInt(1), Op.ADD, SInt(2)), Op.SUB, SInt(3))


def test_multi_binding_let_nests():
    assert parse("let a := 1; b := a in b") == SLet("a", SInt(1), SLet("b", SVar("a"), SVar("b")))


def test_comments_are_whitespace():
    assert parse(";; a comment\n  7 ;; trailing") == SInt(7)


@pytest.mark.parametrize(
    "text,line,column",
    [("(1 +", 1, 5), ("let x = 1 in x", 1, 7), ("(lam (in) in)", 1, 7), ("1 2", 1, 3), ("\n  )", 2, 3)],
)
def test_parse_errors_carry_location(text, line, column):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert (err.value.line, err.value.column) == (line, column)


def test_desugar_let_is_application():
    e = desugar(parse("let x := 1 in x"))
    assert isinstance(e, BinOp) and e.op is Op.APP
    assert isinstance(e.lhs.atom, Lam) and e.lhs.atom.param == "x"
    assert e.lhs.atom.body.atom == Ref("x")
    assert e.rhs.atom == Int(1)


def test_desugar_keeps_input():
    e = desugar(parse("input"))
    assert e == Atomic(0, Input())
    assert uses_input(e)


def test_nested_lets_keep_scope():
    e = parse_program("let x := 1 in let y := x in let x := 2 in x + y")
    assert free_vars(e) == frozenset()


def test_labels_are_preorder_and_unique():
    e = parse_program("(if0 1 (2 + 3) (lam (x) x))")
    labels = [n.label for n in subterms(e)]
    assert labels == sorted(labels) == list(range(len(labels)))
    assert isinstance(e, If0)


@pytest.mark.parametrize(
    "text,expected",
    [("lam (x) x", set()), ("x + y", {"x", "y"}), ("lam (x) x @ y", {"y"}), ("(if0 a b (lam (b) c))", {"a", "b", "c"})],
)
def test_free_vars(text, expected):
    assert free_vars(parse_program(text)) == frozenset(expected)
    assert free_vars_surface(parse(text)) == frozenset(expected)


@pytest.mark.parametrize("name", corpus())
def test_corpus_round_trips(name):
    e = parse_program(source(name))
    assert parse_program(pretty(e)) == e
    assert free_vars(e) == frozenset()
    labels = [n.label for n in subterms(e)]
    assert len(labels) == len(set(labels))


def test_keywords_are_not_variables():
    with pytest.raises(ParseError):
        parse("let in := 1 in 2")
