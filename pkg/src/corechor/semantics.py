"""Labelled-transition semantics for choreographies.

Transitions are derived by eleven rules: one for each head construct
(communication, selection, the two conditional branches, the four ways of
entering a procedure) plus three delay rules that let actions of processes
not involved in a prefix fire ahead of it.  Rich labels carry the full
detail of an action; observable labels forget the internals.

Transition enumeration returns one entry per derivation, in a fixed order
(rule number, then syntactic position, then ascending process id), which
makes the `first` scheduler and all seeded runs reproducible.  Resulting
states are always canonical, so extensional state equality can be checked
structurally.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Union

from .core import (
    Call,
    Choreography,
    Com,
    Cond,
    DefSet,
    End,
    Eta,
    GlobalState,
    Interaction,
    Label,
    Language,
    Pid,
    ProcName,
    Program,
    RTCall,
    Sel,
    Value,
    Var,
    states_ext_equal,
)


class NoSuchTransitionError(Exception):
    """The requested label is not enabled at this configuration."""


class MalformedTermError(Exception):
    """A runtime call term with an empty pending set was encountered."""


class SearchBudgetError(Exception):
    """State-space exploration exceeded its node budget."""


# ---------------------------------------------------------------------------
# Labels


@dataclass(frozen=True, slots=True)
class RCom:
    p: Pid
    v: Value
    q: Pid
    x: Var


@dataclass(frozen=True, slots=True)
class RSel:
    p: Pid
    q: Pid
    l: Label


@dataclass(frozen=True, slots=True)
class RCond:
    p: Pid


@dataclass(frozen=True, slots=True)
class RCall:
    name: ProcName
    p: Pid


RichLabel = Union[RCom, RSel, RCond, RCall]


@dataclass(frozen=True, slots=True)
class LCom:
    p: Pid
    v: Value
    q: Pid


@dataclass(frozen=True, slots=True)
class LSel:
    p: Pid
    q: Pid
    l: Label


@dataclass(frozen=True, slots=True)
class LTau:
    p: Pid


TransitionLabel = Union[LCom, LSel, LTau]


def forget(label: RichLabel) -> TransitionLabel:
    """Observable projection of a rich label.  Conditionals and procedure
    entries are local actions."""
    if isinstance(label, RCom):
        return LCom(label.p, label.v, label.q)
    if isinstance(label, RSel):
        return LSel(label.p, label.q, label.l)
    if isinstance(label, RCond):
        return LTau(label.p)
    if isinstance(label, RCall):
        return LTau(label.p)
    raise TypeError(f"not a rich label: {label!r}")


def label_processes(label: RichLabel) -> frozenset:
    if isinstance(label, (RCom, RSel)):
        return frozenset((label.p, label.q))
    return frozenset((label.p,))


def eta_processes(eta: Eta) -> frozenset:
    return frozenset((eta.sender, eta.receiver))


# ---------------------------------------------------------------------------
# Single steps


@dataclass(frozen=True, slots=True)
class Transition:
    rule: str
    label: RichLabel
    target: Choreography
    state: GlobalState
    # The label's process set, cached so the delay rules can filter without
    # recomputing it at every nesting level.
    procs: frozenset

    def __repr__(self) -> str:
        return (
            f"Transition(rule={self.rule!r}, label={self.label!r}, "
            f"target={self.target!r}, state={self.state!r})"
        )


@dataclass(frozen=True, slots=True)
class Configuration:
    program: Program
    state: GlobalState


def enumerate_transitions(
    lang: Language, defs: DefSet, chor: Choreography, state: GlobalState
) -> list[Transition]:
    """Every derivable single-step transition of `chor`, in the fixed
    enumeration order.  The input is assumed well-formed; a runtime call
    with an empty pending set raises MalformedTermError."""
    cls = type(chor)
    if cls is Interaction:
        eta = chor.eta
        if type(eta) is Com:
            v = lang.eval_expr(eta.expr, lambda x: state.get(eta.sender, x))
            out = [
                Transition(
                    "C_Com",
                    RCom(eta.sender, v, eta.receiver, eta.var),
                    chor.cont,
                    state.update(eta.receiver, eta.var, v),
                    frozenset((eta.sender, eta.receiver)),
                )
            ]
        else:
            out = [
                Transition(
                    "C_Sel",
                    RSel(eta.sender, eta.receiver, eta.label),
                    chor.cont,
                    state,
                    frozenset((eta.sender, eta.receiver)),
                )
            ]
        blocked = (eta.sender, eta.receiver)
        for t in enumerate_transitions(lang, defs, chor.cont, state):
            if t.procs.isdisjoint(blocked):
                out.append(
                    Transition(
                        "C_Delay_Eta",
                        t.label,
                        Interaction(eta, t.target),
                        t.state,
                        t.procs,
                    )
                )
        return out
    if cls is Cond:
        p = chor.process
        if lang.eval_bexpr(chor.test, lambda x: state.get(p, x)):
            out = [Transition("C_Then", RCond(p), chor.then_branch, state, frozenset((p,)))]
        else:
            out = [Transition("C_Else", RCond(p), chor.else_branch, state, frozenset((p,)))]
        # Both branches must offer the same action, with agreeing states,
        # for it to fire ahead of the conditional.
        else_by_label: Optional[dict] = None
        for t1 in enumerate_transitions(lang, defs, chor.then_branch, state):
            if p in t1.procs:
                continue
            if else_by_label is None:
                else_by_label = {
                    t.label: t
                    for t in enumerate_transitions(lang, defs, chor.else_branch, state)
                }
            t2 = else_by_label.get(t1.label)
            if t2 is not None and states_ext_equal(t1.state, t2.state):
                out.append(
                    Transition(
                        "C_Delay_Cond",
                        t1.label,
                        Cond(p, chor.test, t1.target, t2.target),
                        t1.state,
                        t1.procs,
                    )
                )
        return out
    if cls is Call:
        ann = defs.annotation(chor.name)
        body = defs.body(chor.name)
        if len(ann) == 1:
            (p,) = ann
            return [
                Transition("C_Call_Local", RCall(chor.name, p), body, state, frozenset((p,)))
            ]
        return [
            Transition(
                "C_Call_Start",
                RCall(chor.name, p),
                RTCall(chor.name, ann - {p}, body),
                state,
                frozenset((p,)),
            )
            for p in sorted(ann)
        ]
    if cls is RTCall:
        pending = chor.pending
        if not pending:
            raise MalformedTermError("runtime call with an empty pending set")
        out = [
            Transition(
                "C_Delay_Call",
                t.label,
                RTCall(chor.name, pending, t.target),
                t.state,
                t.procs,
            )
            for t in enumerate_transitions(lang, defs, chor.cont, state)
            if t.procs.isdisjoint(pending)
        ]
        if len(pending) == 1:
            (p,) = pending
            out.append(
                Transition("C_Call_Finish", RCall(chor.name, p), chor.cont, state, frozenset((p,)))
            )
        else:
            out.extend(
                Transition(
                    "C_Call_Enter",
                    RCall(chor.name, p),
                    RTCall(chor.name, pending - {p}, chor.cont),
                    state,
                    frozenset((p,)),
                )
                for p in sorted(pending)
            )
        return out
    return []  # End


def iter_transitions(
    lang: Language, defs: DefSet, chor: Choreography, state: GlobalState
) -> Iterator[Transition]:
    return iter(enumerate_transitions(lang, defs, chor, state))


def step(lang: Language, config: Configuration, label: RichLabel) -> Configuration:
    """Apply the (unique) transition carrying `label`."""
    program = config.program
    for t in iter_transitions(lang, program.procedures, program.main, config.state):
        if t.label == label:
            return Configuration(Program(program.procedures, t.target), t.state)
    raise NoSuchTransitionError(f"label {label!r} is not enabled")


# ---------------------------------------------------------------------------
# Multi-step execution

TERMINATED = "terminated"
STUCK = "stuck"
OUT_OF_FUEL = "out_of_fuel"

Scheduler = Union[str, Callable[[list[Transition]], Transition]]


def _resolve_scheduler(scheduler: Scheduler) -> Callable[[list[Transition]], Transition]:
    if scheduler == "first":
        return lambda ts: ts[0]
    if isinstance(scheduler, str):
        if scheduler.startswith("random:"):
            rng = random.Random(int(scheduler.split(":", 1)[1]))
            return lambda ts: rng.choice(ts)
        raise ValueError(f"unknown scheduler {scheduler!r}")
    return scheduler


def random_scheduler(seed: int) -> Callable[[list[Transition]], Transition]:
    rng = random.Random(seed)
    return lambda ts: rng.choice(ts)


@dataclass(slots=True)
class RunResult:
    config: Configuration
    trace: list[Transition]
    status: str

    @property
    def labels(self) -> list[RichLabel]:
        return [t.label for t in self.trace]


def run(
    lang: Language,
    config: Configuration,
    fuel: int,
    scheduler: Scheduler = "first",
) -> RunResult:
    """Execute up to `fuel` single steps under a scheduling policy.

    `scheduler` is "first" (always pick the first enabled transition),
    "random:SEED", or a callable choosing from the enabled list.  Stops
    with status `terminated` when main is End, `stuck` if nothing is
    enabled earlier (never happens for well-formed programs), or
    `out_of_fuel`.
    """
    choose = _resolve_scheduler(scheduler)
    defs = config.program.procedures
    main = config.program.main
    state = config.state
    trace: list[Transition] = []
    for _ in range(fuel):
        if type(main) is End:
            break
        enabled = enumerate_transitions(lang, defs, main, state)
        if not enabled:
            return RunResult(Configuration(Program(defs, main), state), trace, STUCK)
        t = choose(enabled)
        trace.append(t)
        main, state = t.target, t.state
    status = TERMINATED if type(main) is End else OUT_OF_FUEL
    return RunResult(Configuration(Program(defs, main), state), trace, status)


def reachable_terminals(
    lang: Language,
    config: Configuration,
    depth: int,
    max_nodes: int = 50_000,
) -> set[GlobalState]:
    """All states of terminated configurations reachable within `depth`
    steps, by exhaustive breadth-first exploration of the interleavings.
    Visited configurations are memoized structurally.  Raises
    SearchBudgetError when more than `max_nodes` configurations are seen."""
    defs = config.program.procedures
    start = (config.program.main, config.state)
    seen = {start}
    frontier = [start]
    terminals: set[GlobalState] = set()
    for _ in range(depth + 1):
        if not frontier:
            break
        next_frontier = []
        for main, state in frontier:
            if type(main) is End:
                terminals.add(state)
                continue
            for t in iter_transitions(lang, defs, main, state):
                node = (t.target, t.state)
                if node not in seen:
                    seen.add(node)
                    if len(seen) > max_nodes:
                        raise SearchBudgetError(
                            f"more than {max_nodes} configurations explored"
                        )
                    next_frontier.append(node)
        frontier = next_frontier
    return terminals


# ---------------------------------------------------------------------------
# Trace serialization

def label_json(label: RichLabel) -> dict:
    if isinstance(label, RCom):
        return {"kind": "com", "p": label.p, "v": label.v, "q": label.q, "x": label.x}
    if isinstance(label, RSel):
        return {"kind": "sel", "p": label.p, "q": label.q, "l": label.l.value}
    if isinstance(label, RCond):
        return {"kind": "cond", "p": label.p}
    if isinstance(label, RCall):
        return {"kind": "call", "X": label.name, "p": label.p}
    raise TypeError(f"not a rich label: {label!r}")


def transition_json(t: Transition) -> dict:
    return {"rule": t.rule, "label": label_json(t.label)}


def trace_lines(trace: Iterable[Transition]) -> Iterator[str]:
    """One JSON object per step, newline-delimited by the caller."""
    for t in trace:
        yield json.dumps(transition_json(t), default=str)
