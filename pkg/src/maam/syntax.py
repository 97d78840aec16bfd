"""Surface syntax, desugaring and labelled core terms for the λIF language.

The core language has integers, variables, one-argument lambdas, the binary
operators ``+``, ``-`` and ``@`` (application) and ``if0``.  The surface adds
``let`` and an ``input`` atom standing for an integer that the analysis does
not know.

Canonical concrete syntax::

    e  ::= int | var | input
         | (lam (x) e) | (e op e) | (if0 e e e) | (let x := e in e)
    op ::= + | - | @

The parser is lenient in a few harmless ways: an unparenthesised chain
``e op e op e`` associates to the left, ``let`` and ``lam``/``λ`` may appear
without surrounding parentheses (their bodies extend as far as possible),
``let x := e1; y := e2 in body`` nests, and ``if0(c){t}{e}`` is accepted next
to the s-expression form.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cache
from typing import Union


class Op(enum.Enum):
    ADD = "+"
    SUB = "-"
    APP = "@"

    @property
    def is_arith(self) -> bool:
        return self is not Op.APP

    def __repr__(self) -> str:
        return self.value


# -- core atoms ---------------------------------------------------------------


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Lam:
    param: str
    body: "Exp"
    label: int


@dataclass(frozen=True)
class Input:
    pass


@dataclass(frozen=True)
class Value:
    """An already-computed value standing in expression position.

    Arithmetic returns its result as an atomic expression; this atom carries
    the result value (concrete or abstract) rather than a literal.
    """

    value: object


Atom = Union[Int, Ref, Lam, Input, Value]


# -- core expressions ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Exp:
    label: int

    # Labels are unique within a program, so they make a cheap hash; equality
    # still falls back to structure when two distinct objects share a label.
    def __hash__(self) -> int:
        return hash((type(self).__name__, self.label))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or self.label != other.label:
            return False
        return self.__dict__ == other.__dict__


@dataclass(frozen=True, eq=False)
class Atomic(Exp):
    atom: Atom


@dataclass(frozen=True, eq=False)
class BinOp(Exp):
    lhs: Exp
    op: Op
    rhs: Exp


@dataclass(frozen=True, eq=False)
class If0(Exp):
    cond: Exp
    then: Exp
    orelse: Exp


@cache
def free_vars(e: Exp) -> frozenset[str]:
    if isinstance(e, Atomic):
        a = e.atom
        if isinstance(a, Ref):
            return frozenset({a.name})
        if isinstance(a, Lam):
            return free_vars(a.body) - {a.param}
        return frozenset()
    if isinstance(e, BinOp):
        return free_vars(e.lhs) | free_vars(e.rhs)
    return free_vars(e.cond) | free_vars(e.then) | free_vars(e.orelse)


@cache
def lam_free_vars(lam: Lam) -> frozenset[str]:
    return free_vars(lam.body) - {lam.param}


def subterms(e: Exp):
    """Preorder traversal of every expression node, lambda bodies included."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Atomic):
            if isinstance(node.atom, Lam):
                stack.append(node.atom.body)
        elif isinstance(node, BinOp):
            stack.extend((node.rhs, node.lhs))
        else:
            stack.extend((node.orelse, node.then, node.cond))


def uses_input(e: Exp) -> bool:
    return any(isinstance(n, Atomic) and isinstance(n.atom, Input) for n in subterms(e))


def pretty(e: Exp) -> str:
    """Render a core expression in canonical concrete syntax."""
    if isinstance(e, Atomic):
        a = e.atom
        if isinstance(a, Int):
            return str(a.value)
        if isinstance(a, Ref):
            return a.name
        if isinstance(a, Input):
            return "input"
        if isinstance(a, Lam):
            return f"(lam ({a.param}) {pretty(a.body)})"
        return f"<{a.value!r}>"
    if isinstance(e, BinOp):
        return f"({pretty(e.lhs)} {e.op.value} {pretty(e.rhs)})"
    return f"(if0 {pretty(e.cond)} {pretty(e.then)} {pretty(e.orelse)})"


# -- surface syntax -----------------------------------------------------------

Pos = tuple[int, int]


@dataclass(frozen=True)
class SInt:
    value: int
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SVar:
    name: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SInput:
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SLam:
    param: str
    body: "Surface"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SBin:
    lhs: "Surface"
    op: Op
    rhs: "Surface"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SIf0:
    cond: "Surface"
    then: "Surface"
    orelse: "Surface"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SLet:
    name: str
    rhs: "Surface"
    body: "Surface"
    pos: Pos = field(default=(0, 0), compare=False)


Surface = Union[SInt, SVar, SInput, SLam, SBin, SIf0, SLet]


def free_vars_surface(s: Surface) -> frozenset[str]:
    if isinstance(s, SVar):
        return frozenset({s.name})
    if isinstance(s, (SInt, SInput)):
        return frozenset()
    if isinstance(s, SLam):
        return free_vars_surface(s.body) - {s.param}
    if isinstance(s, SBin):
        return free_vars_surface(s.lhs) | free_vars_surface(s.rhs)
    if isinstance(s, SIf0):
        return free_vars_surface(s.cond) | free_vars_surface(s.then) | free_vars_surface(s.orelse)
    return free_vars_surface(s.rhs) | (free_vars_surface(s.body) - {s.name})


def desugar(s: Surface) -> Exp:
    """Rewrite ``let`` into application and number nodes in preorder."""
    counter = iter(range(1 << 62))

    def go(s: Surface) -> Exp:
        if isinstance(s, SLet):
            s = SBin(SLam(s.name, s.body, s.pos), Op.APP, s.rhs, s.pos)
        label = next(counter)
        if isinstance(s, SInt):
            return Atomic(label, Int(s.value))
        if isinstance(s, SVar):
            return Atomic(label, Ref(s.name))
        if isinstance(s, SInput):
            return Atomic(label, Input())
        if isinstance(s, SLam):
            return Atomic(label, Lam(s.param, go(s.body), label))
        if isinstance(s, SBin):
            lhs = go(s.lhs)
            return BinOp(label, lhs, s.op, go(s.rhs))
        cond = go(s.cond)
        then = go(s.then)
        return If0(label, cond, then, go(s.orelse))

    return go(s)


# -- parser -------------------------------------------------------------------


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


KEYWORDS = {"lam", "λ", "if0", "let", "in", "input"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|;;[^\n]*)
  | (?P<int>\d+)
  | (?P<assign>:=)
  | (?P<punct>[()\{\}+\-@;.])
  | (?P<ident>λ|[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: Pos


def tokenize(text: str) -> list[Token]:
    tokens = []
    i, line, col = 0, 1, 1
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            if kind == "ident" and chunk in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, chunk, (line, col)))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        i = m.end()
    tokens.append(Token("eof", "", (line, col)))
    return tokens


_OPS = {"+": Op.ADD, "-": Op.SUB, "@": Op.APP}


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(message, *tok.pos)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "kw", "assign")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def var(self) -> str:
        tok = self.tok
        if tok.kind == "kw":
            self.fail(f"keyword {tok.text!r} cannot be used as a variable")
        if tok.kind != "ident":
            self.fail(f"expected a variable, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok.text

    def program(self) -> Surface:
        e = self.expr()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r} after expression")
        return e

    def expr(self) -> Surface:
        if self.at("let"):
            return self.let()
        if self.at("lam") or self.at("λ"):
            return self.lam()
        e = self.unary()
        while self.tok.kind == "punct" and self.tok.text in _OPS:
            pos = self.tok.pos
            op = _OPS[self.tok.text]
            self.i += 1
            rhs = self.lam() if (self.at("lam") or self.at("λ")) else self.unary()
            e = SBin(e, op, rhs, pos)
        return e

    def let(self) -> Surface:
        self.expect("let")
        bindings = [self.binding()]
        while self.at(";"):
            self.i += 1
            bindings.append(self.binding())
        self.expect("in")
        body = self.expr()
        for name, rhs, bpos in reversed(bindings):
            body = SLet(name, rhs, body, bpos)
        return body

    def binding(self):
        pos = self.tok.pos
        name = self.var()
        self.expect(":=")
        return name, self.expr(), pos

    def lam(self) -> Surface:
        pos = self.tok.pos
        self.i += 1
        if self.at("("):
            self.i += 1
            param = self.var()
            self.expect(")")
        else:
            param = self.var()
        if self.at("."):
            self.i += 1
        return SLam(param, self.expr(), pos)

    def unary(self) -> Surface:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return SInt(int(tok.text), tok.pos)
        if tok.text == "-" and tok.kind == "punct" and self.peek().kind == "int":
            self.i += 2
            return SInt(-int(self.tokens[self.i - 1].text), tok.pos)
        if tok.kind == "ident":
            self.i += 1
            return SVar(tok.text, tok.pos)
        if self.at("input"):
            self.i += 1
            return SInput(tok.pos)
        if self.at("if0"):
            self.i += 1
            return self.braced_if0(tok.pos)
        if self.at("("):
            return self.paren()
        if self.at("lam") or self.at("λ"):
            return self.lam()
        self.fail(f"unexpected {tok.text or 'end of input'!r}")

    def braced_if0(self, pos: Pos) -> Surface:
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        self.expect("{")
        then = self.expr()
        self.expect("}")
        self.expect("{")
        orelse = self.expr()
        self.expect("}")
        return SIf0(cond, then, orelse, pos)

    def paren(self) -> Surface:
        open_tok = self.expect("(")
        if self.at("lam") or self.at("λ"):
            e = self.lam()
        elif self.at("let"):
            e = self.let()
        elif self.at("if0"):
            pos = self.tok.pos
            self.i += 1
            start = self.i
            e = None
            if self.at("("):
                try:
                    e = self.braced_if0(pos)
                except ParseError:
                    self.i = start
                    e = None
            if e is None:
                e = SIf0(self.unary(), self.unary(), self.unary(), pos)
        else:
            e = self.expr()
        if not self.at(")"):
            self.fail(f"expected ')' to close '(' at {open_tok.pos[0]}:{open_tok.pos[1]}")
        self.i += 1
        return e


def parse(text: str) -> Surface:
    """Parse surface syntax, raising :class:`ParseError` with a line and column."""
    return _Parser(text).program()


def parse_program(text: str) -> Exp:
    return desugar(parse(text))
