"""State-space pieces shared by the reference machine and the monadic interpreter."""

from __future__ import annotations

from dataclasses import dataclass

from .lattice import FrozenMap
from .syntax import Exp, Lam, Op

# An address pairs a variable with the time it was bound at.
Addr = tuple  # (name, time)


@dataclass(frozen=True)
class Clo:
    lam: Lam
    env: FrozenMap

    def __repr__(self) -> str:
        return f"<clo {self.lam.label}>"


@dataclass(frozen=True)
class ArgHole:
    """``□ op arg``: the left operand is being evaluated."""

    op: Op
    arg: Exp
    env: FrozenMap
    site: int


@dataclass(frozen=True)
class FunHole:
    """``val op □``: the right operand is being evaluated."""

    op: Op
    val: object
    site: int


@dataclass(frozen=True)
class IfHole:
    then: Exp
    orelse: Exp
    env: FrozenMap


Frame = ArgHole | FunHole | IfHole
