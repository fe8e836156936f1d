"""The concrete choreography instance used by the compiler and the CLI.

Processes, values, and procedure names are naturals.  Every process has two
variables, xx and yy.  Expressions are `this` (the value at xx), `zero`,
and `succ` (the value at xx plus one); the single boolean expression
`compare` holds when a process's two variables agree.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .core import (
    Choreography,
    Com,
    Cond,
    Eta,
    GlobalState,
    Interaction,
    Language,
    LocalState,
)

XX = "xx"
YY = "yy"

THIS = "this"
ZERO = "zero"
SUCC = "succ"
EXPRESSIONS = (THIS, ZERO, SUCC)

COMPARE = "compare"


def eval_expr(expr: str, local: LocalState) -> int:
    if expr == THIS:
        return local(XX)
    if expr == ZERO:
        return 0
    if expr == SUCC:
        return local(XX) + 1
    raise ValueError(f"unknown expression {expr!r}")


def eval_bexpr(bexpr: str, local: LocalState) -> bool:
    if bexpr == COMPARE:
        return local(XX) == local(YY)
    raise ValueError(f"unknown boolean expression {bexpr!r}")


CONCRETE = Language(eval_expr, eval_bexpr)


def initial_state(xx_values: Mapping[int, int] | Iterable = (), default: int = 0) -> GlobalState:
    """State with the given xx values loaded; everything else is `default`."""
    return GlobalState(default, {(p, XX): v for p, v in dict(xx_values).items()})


def send(p: int, expr: str, q: int) -> Eta:
    """Communication of `expr` from p into q's xx."""
    if p == q:
        raise ValueError(f"process {p} cannot send to itself")
    return Com(p, expr, q, XX)


def if_eq(p: int, q: int, then_branch: Choreography, else_branch: Choreography) -> Choreography:
    """Compare the xx values of two processes: q ships its xx into p's yy,
    then p branches on whether its two variables agree."""
    if p == q:
        raise ValueError(f"process {p} cannot compare with itself")
    return Interaction(
        Com(q, THIS, p, YY), Cond(p, COMPARE, then_branch, else_branch)
    )
