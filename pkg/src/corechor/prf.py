"""Partial recursive functions: syntax, fueled evaluation, and a library.

The function class is generated from the unary constant zero, the unary
successor, and the projections, closed under composition, primitive
recursion, and minimisation.  Arity consistency is enforced at
construction time.

Evaluation is bounded: `eval_fn(f, steps, ns)` returns an optional natural.
The budget is consumed only by minimisation's search for a zero;
composition and recursion pass it through unchanged, and the base
functions ignore it entirely.  A function value depending on an undefined
argument is undefined, even when the argument is not used.

Surface syntax (whitespace-insensitive):

    Z | S | P[k/m] | C(g; f1, ..., fm) | R(g, h) | M(h)

Projections are written 1-based in the surface syntax and stored 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union


class ArityError(ValueError):
    """A function was built or applied with the wrong number of arguments."""


# ---------------------------------------------------------------------------
# Syntax


@dataclass(frozen=True, slots=True)
class Zero:
    """The unary constant 0."""


@dataclass(frozen=True, slots=True)
class Successor:
    """The unary successor."""


@dataclass(frozen=True, slots=True)
class Projection:
    """The `width`-ary function returning its argument at `index` (0-based)."""

    index: int
    width: int

    def __post_init__(self) -> None:
        if not 0 <= self.index < self.width:
            raise ArityError(
                f"projection index {self.index} out of range for width {self.width}"
            )


@dataclass(frozen=True, slots=True)
class Composition:
    """g(f1(xs), ..., fm(xs)).  All argument functions share one arity,
    which becomes the arity of the composite; an empty argument vector
    (legal when `outer` has arity 0) yields an arity-0 function."""

    outer: "PRFunction"
    args: tuple["PRFunction", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != arity(self.outer):
            raise ArityError(
                f"outer function has arity {arity(self.outer)} "
                f"but {len(self.args)} argument functions were given"
            )
        if self.args:
            k = arity(self.args[0])
            for f in self.args[1:]:
                if arity(f) != k:
                    raise ArityError("argument functions must all have the same arity")


@dataclass(frozen=True, slots=True)
class Recursion:
    """Primitive recursion on the first argument: the value at 0 is given by
    `base`, and `step` maps (counter, previous value, other args) to the
    next value."""

    base: "PRFunction"
    step: "PRFunction"

    def __post_init__(self) -> None:
        if arity(self.step) != arity(self.base) + 2:
            raise ArityError(
                f"step function must have arity {arity(self.base) + 2}, "
                f"got {arity(self.step)}"
            )


@dataclass(frozen=True, slots=True)
class Minimization:
    """Least n with body(xs, n) = 0, provided body(xs, i) is defined and
    positive for every i below it.  The only source of partiality."""

    body: "PRFunction"

    def __post_init__(self) -> None:
        if arity(self.body) < 1:
            raise ArityError("minimisation needs a function of arity at least 1")


PRFunction = Union[Zero, Successor, Projection, Composition, Recursion, Minimization]


def arity(f: PRFunction) -> int:
    if isinstance(f, (Zero, Successor)):
        return 1
    if isinstance(f, Projection):
        return f.width
    if isinstance(f, Composition):
        return arity(f.args[0]) if f.args else 0
    if isinstance(f, Recursion):
        return arity(f.base) + 1
    if isinstance(f, Minimization):
        return arity(f.body) - 1
    raise TypeError(f"not a partial recursive function: {f!r}")


def depth(f: PRFunction) -> int:
    """Height of the syntax tree; the three base functions have depth 0."""
    if isinstance(f, (Zero, Successor, Projection)):
        return 0
    if isinstance(f, Composition):
        return 1 + max([depth(f.outer)] + [depth(g) for g in f.args])
    if isinstance(f, Recursion):
        return 1 + max(depth(f.base), depth(f.step))
    if isinstance(f, Minimization):
        return 1 + depth(f.body)
    raise TypeError(f"not a partial recursive function: {f!r}")


# ---------------------------------------------------------------------------
# Evaluation

OptNat = Optional[int]


def find_zero_from(
    h: Callable[[Sequence[OptNat]], OptNat],
    ns: Sequence[OptNat],
    init: int,
    steps: int,
) -> OptNat:
    """Search for the least zero of `h` at or above `init`, probing the
    candidate as the last argument.  Each probe consumes one unit of the
    budget; an undefined probe makes the whole search undefined."""
    ns = tuple(ns)
    while steps > 0:
        r = h(ns + (init,))
        if r is None:
            return None
        if r == 0:
            return init
        init += 1
        steps -= 1
    return None


def eval_opt(f: PRFunction, steps: int, ns: Sequence[OptNat]) -> OptNat:
    """Bounded evaluation over optional arguments."""
    ns = tuple(ns)
    if len(ns) != arity(f):
        raise ArityError(f"expected {arity(f)} arguments, got {len(ns)}")
    if any(n is None for n in ns):
        return None
    if isinstance(f, Zero):
        return 0
    if isinstance(f, Successor):
        return ns[0] + 1
    if isinstance(f, Projection):
        return ns[f.index]
    if isinstance(f, Composition):
        mids = tuple(eval_opt(g, steps, ns) for g in f.args)
        return eval_opt(f.outer, steps, mids)
    if isinstance(f, Recursion):
        head, tail = ns[0], ns[1:]
        y = eval_opt(f.base, steps, tail)
        for x in range(head):
            y = eval_opt(f.step, steps, (x, y) + tail)
        return y
    if isinstance(f, Minimization):
        return find_zero_from(
            lambda args: eval_opt(f.body, steps, args), ns, 0, steps
        )
    raise TypeError(f"not a partial recursive function: {f!r}")


def eval_fn(f: PRFunction, steps: int, ns: Sequence[int]) -> OptNat:
    """Bounded evaluation on plain naturals."""
    return eval_opt(f, steps, tuple(ns))


def converges_within(
    f: PRFunction, ns: Sequence[int], fuel: int
) -> Optional[tuple[int, int]]:
    """The value of f at ns together with the least sufficient budget not
    exceeding `fuel`, or None if no budget up to `fuel` produces a value.

    Presence of a result is monotone in the budget (evaluation stability),
    so one probe at `fuel` settles absence and a binary search finds the
    least witness.
    """
    ns = tuple(ns)
    value = eval_fn(f, fuel, ns)
    if value is None:
        return None
    lo, hi = 0, fuel
    while lo < hi:
        mid = (lo + hi) // 2
        if eval_fn(f, mid, ns) is not None:
            hi = mid
        else:
            lo = mid + 1
    return value, lo


# ---------------------------------------------------------------------------
# Standard library (all entries are minimisation-free, so any budget works)

def constant(value: int, width: int) -> PRFunction:
    """The `width`-ary constant function."""
    f: PRFunction = Composition(Zero(), (Projection(0, width),))
    for _ in range(value):
        f = Composition(Successor(), (f,))
    return f


PR_ADD = Recursion(Projection(0, 1), Composition(Successor(), (Projection(1, 3),)))
PR_MUL = Recursion(Zero(), Composition(PR_ADD, (Projection(1, 3), Projection(2, 3))))

# pred(x) = F(x, x) with F(0, n) = 0 and F(m+1, n) = m.
_PRED2 = Recursion(Zero(), Projection(0, 3))
PR_PRED = Composition(_PRED2, (Projection(0, 1), Projection(0, 1)))

# G(n, m) = m - n (truncated), recursing on the subtrahend.
_SUB_SWAPPED = Recursion(Projection(0, 1), Composition(PR_PRED, (Projection(1, 3),)))
PR_SUB = Composition(_SUB_SWAPPED, (Projection(1, 2), Projection(0, 2)))

# sign(x) = F(x, x) with F(0, n) = 0 and F(m+1, n) = 1.
_SIGN2 = Recursion(Zero(), constant(1, 3))
PR_SIGN = Composition(_SIGN2, (Projection(0, 1), Projection(0, 1)))

PR_GT = Composition(PR_SIGN, (PR_SUB,))
PR_LT = Composition(PR_GT, (Projection(1, 2), Projection(0, 2)))
PR_EQ = Composition(
    PR_SUB, (constant(1, 2), Composition(PR_ADD, (PR_GT, PR_LT)))
)


def standard_library() -> dict[str, PRFunction]:
    """Named textbook functions.  Relations encode truth as 1 and falsity
    as 0."""
    return {
        "add": PR_ADD,
        "mul": PR_MUL,
        "pred": PR_PRED,
        "sub": PR_SUB,
        "sign": PR_SIGN,
        "gt": PR_GT,
        "lt": PR_LT,
        "eq": PR_EQ,
    }


# ---------------------------------------------------------------------------
# Surface syntax


class FunctionSyntaxError(ValueError):
    """Parse or arity failure in the surface syntax, with a source span."""

    def __init__(self, message: str, span: tuple[int, int]) -> None:
        super().__init__(f"{message} (at characters {span[0]}..{span[1]})")
        self.span = span


def parse_function(text: str) -> PRFunction:
    pos = 0

    def skip_ws() -> None:
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def expect(ch: str) -> None:
        nonlocal pos
        skip_ws()
        if pos >= len(text) or text[pos] != ch:
            raise FunctionSyntaxError(f"expected {ch!r}", (pos, pos + 1))
        pos += 1

    def parse_nat() -> int:
        nonlocal pos
        skip_ws()
        start = pos
        while pos < len(text) and text[pos].isdigit():
            pos += 1
        if pos == start:
            raise FunctionSyntaxError("expected a number", (start, start + 1))
        return int(text[start:pos])

    def parse_term() -> PRFunction:
        nonlocal pos
        skip_ws()
        start = pos
        if pos >= len(text):
            raise FunctionSyntaxError("unexpected end of input", (pos, pos + 1))
        head = text[pos]
        pos += 1
        try:
            if head == "Z":
                return Zero()
            if head == "S":
                return Successor()
            if head == "P":
                expect("[")
                k = parse_nat()
                expect("/")
                m = parse_nat()
                expect("]")
                if k < 1:
                    raise FunctionSyntaxError(
                        "projection indices are 1-based", (start, pos)
                    )
                return Projection(k - 1, m)
            if head == "C":
                expect("(")
                outer = parse_term()
                expect(";")
                args = [parse_term()]
                skip_ws()
                while pos < len(text) and text[pos] == ",":
                    pos += 1
                    args.append(parse_term())
                expect(")")
                return Composition(outer, tuple(args))
            if head == "R":
                expect("(")
                base = parse_term()
                expect(",")
                step = parse_term()
                expect(")")
                return Recursion(base, step)
            if head == "M":
                expect("(")
                body = parse_term()
                expect(")")
                return Minimization(body)
        except ArityError as exc:
            raise FunctionSyntaxError(str(exc), (start, pos)) from exc
        raise FunctionSyntaxError(f"unknown constructor {head!r}", (start, start + 1))

    result = parse_term()
    skip_ws()
    if pos != len(text):
        raise FunctionSyntaxError("trailing input", (pos, len(text)))
    return result


def format_function(f: PRFunction) -> str:
    if isinstance(f, Zero):
        return "Z"
    if isinstance(f, Successor):
        return "S"
    if isinstance(f, Projection):
        return f"P[{f.index + 1}/{f.width}]"
    if isinstance(f, Composition):
        args = ", ".join(format_function(g) for g in f.args)
        return f"C({format_function(f.outer)}; {args})"
    if isinstance(f, Recursion):
        return f"R({format_function(f.base)}, {format_function(f.step)})"
    if isinstance(f, Minimization):
        return f"M({format_function(f.body)})"
    raise TypeError(f"not a partial recursive function: {f!r}")
