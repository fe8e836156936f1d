"""Compiling partial recursive functions into choreographies.

A function of arity m becomes a program whose main choreography is
`call X0`: the inputs are read from the xx variables of m designated
processes, and on termination the result sits in the xx variable of the
output process.  Divergent inputs yield programs that never terminate.

Each syntax node is compiled into a block of consecutively numbered
procedures.  A block for `f` starting at procedure X owns exactly the
names [X, X + procedure_count(f)) and finishes by calling
X + procedure_count(f); auxiliary processes are allocated sequentially
from a base index, and a block started at base n stays below
n + process_count(f).  Recursion and minimisation implement their loops
through the procedure layer; a counter cannot send its own successor to
itself, so increments hop through a scratch process.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .concrete import (
    COMPARE,
    CONCRETE,
    SUCC,
    THIS,
    XX,
    YY,
    ZERO,
    if_eq,
    initial_state,
    send,
)
from .core import (
    END,
    Call,
    Choreography,
    Com,
    Cond,
    DefSet,
    Interaction,
    Program,
    RTCall,
    called_names,
    exact_annotations,
    sequence,
)
from .prf import (
    Composition,
    Minimization,
    PRFunction,
    Projection,
    Recursion,
    Successor,
    Zero,
    arity,
    converges_within,
    format_function,
)
from .semantics import OUT_OF_FUEL, TERMINATED, Configuration, run


def process_count(f: PRFunction) -> int:
    """Upper bound on the auxiliary processes a block for `f` consumes."""
    if isinstance(f, (Zero, Successor, Projection)):
        return 0
    if isinstance(f, Composition):
        return len(f.args) + sum(process_count(g) for g in f.args) + process_count(f.outer)
    if isinstance(f, Recursion):
        return 3 + process_count(f.base) + process_count(f.step)
    if isinstance(f, Minimization):
        return 2 + process_count(f.body)
    raise TypeError(f"not a partial recursive function: {f!r}")


def procedure_count(f: PRFunction) -> int:
    """Number of procedures a block for `f` defines."""
    if isinstance(f, (Zero, Successor, Projection)):
        return 1
    if isinstance(f, Composition):
        return sum(procedure_count(g) for g in f.args) + procedure_count(f.outer) + len(f.args)
    if isinstance(f, Recursion):
        return 3 + procedure_count(f.base) + procedure_count(f.step)
    if isinstance(f, Minimization):
        return 2 + procedure_count(f.body)
    raise TypeError(f"not a partial recursive function: {f!r}")


@dataclass(frozen=True, slots=True)
class EncodingContext:
    """Placement of one block: input processes, output process, first free
    process index, and first procedure name of the block."""

    inputs: tuple[int, ...]
    output: int
    next_process: int
    first_procedure: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if self.output in self.inputs:
            raise ValueError("output process collides with an input process")
        if self.next_process <= max(self.inputs + (self.output,)):
            raise ValueError("free process index overlaps the used processes")


def _block(
    f: PRFunction,
    inputs: tuple[int, ...],
    output: int,
    free: int,
    entry: int,
) -> dict[int, Choreography]:
    """Bodies for the procedures [entry, entry + procedure_count(f)); the
    last action taken is a call to entry + procedure_count(f)."""
    if isinstance(f, Zero):
        return {entry: sequence([send(inputs[0], ZERO, output)], Call(entry + 1))}
    if isinstance(f, Successor):
        return {entry: sequence([send(inputs[0], SUCC, output)], Call(entry + 1))}
    if isinstance(f, Projection):
        return {entry: sequence([send(inputs[f.index], THIS, output)], Call(entry + 1))}
    if isinstance(f, Composition):
        m = len(f.args)
        mids = tuple(range(free, free + m))
        bodies: dict[int, Choreography] = {}
        at = entry
        scratch = free + m
        for i, g in enumerate(f.args):
            bodies.update(_block(g, inputs, mids[i], scratch, at))
            at += procedure_count(g)
            scratch += process_count(g)
        bodies.update(_block(f.outer, mids, output, scratch, at))
        at += procedure_count(f.outer)
        # Pass-through chain keeping the block exactly procedure_count wide.
        for j in range(m):
            bodies[at + j] = Call(at + j + 1)
        return bodies
    if isinstance(f, Recursion):
        acc, ctr, scr = free, free + 1, free + 2
        bound, rest = inputs[0], inputs[1:]
        bodies = _block(f.base, rest, acc, free + 3, entry)
        after_base = entry + procedure_count(f.base)
        test = after_base + 1
        step_entry = after_base + 2
        after_step = step_entry + procedure_count(f.step)
        done = entry + procedure_count(f)
        bodies[after_base] = sequence([send(scr, ZERO, ctr)], Call(test))
        bodies[test] = if_eq(
            ctr,
            bound,
            sequence([send(acc, THIS, output)], Call(done)),
            Call(step_entry),
        )
        bodies.update(
            _block(
                f.step,
                (ctr, acc) + rest,
                acc,
                free + 3 + process_count(f.base),
                step_entry,
            )
        )
        bodies[after_step] = sequence(
            [send(ctr, SUCC, scr), send(scr, THIS, ctr)], Call(test)
        )
        return bodies
    if isinstance(f, Minimization):
        ctr, res = free, free + 1
        body_entry = entry + 1
        test = body_entry + procedure_count(f.body)
        done = entry + procedure_count(f)
        bodies = {entry: sequence([send(res, ZERO, ctr)], Call(body_entry))}
        bodies.update(_block(f.body, inputs + (ctr,), res, free + 2, body_entry))
        # Plant a zero in res.yy, then branch on whether res's own output
        # (in res.xx) reached it.
        bodies[test] = Interaction(
            Com(ctr, ZERO, res, YY),
            Cond(
                res,
                COMPARE,
                sequence([send(ctr, THIS, output)], Call(done)),
                sequence([send(ctr, SUCC, res), send(res, THIS, ctr)], Call(body_entry)),
            ),
        )
        return bodies
    raise TypeError(f"not a partial recursive function: {f!r}")


def procedure_body(f: PRFunction, ctx: EncodingContext, name: int) -> Choreography:
    """Body of one procedure of f's block.  `name` must lie inside the
    block; everything outside it belongs to the caller."""
    first = ctx.first_procedure
    if not first <= name < first + procedure_count(f):
        raise ValueError(
            f"procedure {name} is outside the block "
            f"[{first}, {first + procedure_count(f)})"
        )
    bodies = _block(f, ctx.inputs, ctx.output, ctx.next_process, first)
    return bodies[name]


def encode(f: PRFunction, inputs: Sequence[int], output: int) -> Program:
    """Compile `f` to a program reading inputs from the given processes and
    writing the result at `output`.  Main is `call 0`."""
    inputs = tuple(inputs)
    if len(inputs) != arity(f):
        raise ValueError(f"function has arity {arity(f)}, got {len(inputs)} input processes")
    if len(set(inputs)) != len(inputs):
        raise ValueError("input processes must be pairwise distinct")
    if output in inputs:
        raise ValueError("output process must not be an input process")
    base = max(inputs + (output,)) + 1
    bodies = _block(f, inputs, output, base, 0)
    exit_name = procedure_count(f)
    bodies[exit_name] = END
    anns = exact_annotations(bodies, pinned={exit_name: frozenset((output,))})
    return Program(DefSet({x: (anns[x], bodies[x]) for x in bodies}), Call(0))


def encode_default(f: PRFunction) -> Program:
    """Inputs at processes 1..arity, output at process 0."""
    return encode(f, tuple(range(1, arity(f) + 1)), 0)


# ---------------------------------------------------------------------------
# Static resource scan

def used_processes(program: Program) -> frozenset:
    """Every process id occurring in main or a defined body (annotations
    are derived from bodies and add nothing)."""
    out: set = set()
    todo = [program.main] + [body for _, (_, body) in program.procedures.items()]
    while todo:
        c = todo.pop()
        if isinstance(c, Interaction):
            out.add(c.eta.sender)
            out.add(c.eta.receiver)
            todo.append(c.cont)
        elif isinstance(c, Cond):
            out.add(c.process)
            todo.append(c.then_branch)
            todo.append(c.else_branch)
        elif isinstance(c, RTCall):
            out |= c.pending
            todo.append(c.cont)
    return frozenset(out)


def called_procedures(program: Program) -> frozenset:
    """Every procedure name called from main or a defined body."""
    out = set(called_names(program.main))
    for _, (_, body) in program.procedures.items():
        out |= called_names(body)
    return frozenset(out)


# ---------------------------------------------------------------------------
# The implementation harness


@dataclass(slots=True)
class RunOutcome:
    scheduler: str
    status: str
    output: Optional[int]


@dataclass(slots=True)
class InputVerdict:
    inputs: tuple[int, ...]
    expected: Optional[int]
    runs: list[RunOutcome]
    ok: bool


@dataclass(slots=True)
class ImplementsReport:
    function: str
    verdicts: list[InputVerdict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def to_json(self) -> str:
        return json.dumps(
            {
                "function": self.function,
                "inputs": [list(v.inputs) for v in self.verdicts],
                "verdicts": [
                    {
                        "input": list(v.inputs),
                        "expected": v.expected,
                        "ok": v.ok,
                        "runs": [
                            {"scheduler": r.scheduler, "status": r.status, "output": r.output}
                            for r in v.runs
                        ],
                    }
                    for v in self.verdicts
                ],
                "pass": self.passed,
            },
            indent=2,
        )


def check_implements(
    program: Program,
    f: PRFunction,
    inputs: Sequence[int],
    output: int,
    input_vectors: Iterable[Sequence[int]],
    fuel: int,
    run_seeds: Sequence[int] = (0, 1, 2),
) -> ImplementsReport:
    """Check that `program` computes `f` with the given input/output
    processes.  For each input vector the expected value comes from the
    bounded evaluator; a defined value must be reached by every scheduled
    run, an undefined one means no run may terminate within the budget."""
    inputs = tuple(inputs)
    if len(inputs) != arity(f):
        raise ValueError(f"function has arity {arity(f)}, got {len(inputs)} input processes")
    report = ImplementsReport(function=format_function(f))
    schedulers = ["first"] + [f"random:{seed}" for seed in run_seeds]
    for xs in input_vectors:
        xs = tuple(xs)
        if len(xs) != len(inputs):
            raise ValueError(f"input vector {xs!r} does not match arity {len(inputs)}")
        expected = converges_within(f, xs, fuel)
        value = expected[0] if expected is not None else None
        start = Configuration(program, initial_state(dict(zip(inputs, xs))))
        runs = []
        ok = True
        for sched in schedulers:
            result = run(CONCRETE, start, fuel, sched)
            out = result.config.state.get(output, XX) if result.status == TERMINATED else None
            runs.append(RunOutcome(sched, result.status, out))
            if value is not None:
                ok = ok and result.status == TERMINATED and out == value
            else:
                ok = ok and result.status == OUT_OF_FUEL
        report.verdicts.append(InputVerdict(xs, value, runs, ok))
    return report
