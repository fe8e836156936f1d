"""Syntax, states, and well-formedness of core choreographies.

A choreography describes a protocol between named processes from a global
point of view: value communications (`p.e -> q.x`), label selections
(`p -> q[left]`), local conditionals, and calls to named procedures.
The module is generic over the types of process ids, variables, values,
expressions, and procedure names; everything that depends on the expression
language goes through a `Language` record holding the two evaluators.

Process ids must be hashable and mutually orderable (sorting gives the
deterministic iteration order used by the semantics).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, Optional, Union

Pid = Any
Var = Any
Value = Any
Expr = Any
BExpr = Any
ProcName = Any


class UnknownProcedureError(Exception):
    """A choreography calls a procedure name outside the allowed set."""


# ---------------------------------------------------------------------------
# Abstract syntax


class Label(Enum):
    LEFT = "left"
    RIGHT = "right"

    def __repr__(self) -> str:
        return f"Label.{self.name}"


@dataclass(frozen=True, slots=True)
class Com:
    """Value communication: sender evaluates `expr` locally, receiver stores
    the result in `var`."""

    sender: Pid
    expr: Expr
    receiver: Pid
    var: Var


@dataclass(frozen=True, slots=True)
class Sel:
    """Label selection: sender tells receiver which branch it has taken."""

    sender: Pid
    receiver: Pid
    label: Label


Eta = Union[Com, Sel]


@dataclass(frozen=True, slots=True)
class Interaction:
    eta: Eta
    cont: "Choreography"


@dataclass(frozen=True, slots=True)
class Cond:
    process: Pid
    test: BExpr
    then_branch: "Choreography"
    else_branch: "Choreography"


@dataclass(frozen=True, slots=True)
class Call:
    name: ProcName


@dataclass(frozen=True, slots=True)
class RTCall:
    """A procedure call in progress: the processes in `pending` have not yet
    entered the procedure, `cont` is what remains of its body.

    Runtime-only term; source programs never contain it.
    """

    name: ProcName
    pending: frozenset
    cont: "Choreography"

    def __post_init__(self) -> None:
        if type(self.pending) is not frozenset:
            object.__setattr__(self, "pending", frozenset(self.pending))


@dataclass(frozen=True, slots=True)
class End:
    pass


Choreography = Union[Interaction, Cond, Call, RTCall, End]

END = End()


def sequence(etas: Iterable[Eta], tail: Choreography) -> Choreography:
    """Chain interactions in front of `tail`."""
    chor = tail
    for eta in reversed(list(etas)):
        chor = Interaction(eta, chor)
    return chor


# ---------------------------------------------------------------------------
# Procedure definitions and programs

_DEFAULT_ENTRY = (frozenset(), END)


class DefSet:
    """Total map from procedure name to (annotation, body).

    Stored as a finite map; names without an explicit entry map to the
    default (empty annotation, terminated body).  Entries equal to the
    default are dropped, so structural equality of two DefSets coincides
    with extensional equality of the maps they denote.  Annotations are
    kept as frozensets: the semantics only ever tests membership, size,
    and removal.
    """

    __slots__ = ("_procs",)

    def __init__(
        self,
        procs: Mapping[ProcName, tuple[Iterable[Pid], Choreography]] = (),
    ) -> None:
        table = {}
        for name, (ann, body) in dict(procs).items():
            entry = (frozenset(ann), body)
            if entry != _DEFAULT_ENTRY:
                table[name] = entry
        self._procs = table

    def lookup(self, name: ProcName) -> tuple[frozenset, Choreography]:
        return self._procs.get(name, _DEFAULT_ENTRY)

    def annotation(self, name: ProcName) -> frozenset:
        return self.lookup(name)[0]

    def body(self, name: ProcName) -> Choreography:
        return self.lookup(name)[1]

    def defined_names(self) -> frozenset:
        return frozenset(self._procs)

    def items(self):
        return self._procs.items()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DefSet):
            return NotImplemented
        return self._procs == other._procs

    def __hash__(self) -> int:
        return hash(frozenset(self._procs.items()))

    def __repr__(self) -> str:
        return f"DefSet({self._procs!r})"


@dataclass(frozen=True, slots=True)
class Program:
    procedures: DefSet
    main: Choreography


# ---------------------------------------------------------------------------
# Global states

class GlobalState:
    """Total map from (process, variable) to a value.

    Realized as a finite map of overrides over a single default value.
    Overrides equal to the default are never stored, so two states over the
    same default agree at every key exactly when they are structurally
    equal.  Immutable; `update` returns a new state.
    """

    __slots__ = ("default", "_vals")

    def __init__(self, default: Value, entries: Mapping | Iterable = ()) -> None:
        self.default = default
        vals = {}
        for (p, x), v in dict(entries).items():
            if v != default:
                vals[(p, x)] = v
        self._vals = vals

    def get(self, p: Pid, x: Var) -> Value:
        return self._vals.get((p, x), self.default)

    def update(self, p: Pid, x: Var, v: Value) -> "GlobalState":
        new = GlobalState.__new__(GlobalState)
        new.default = self.default
        vals = dict(self._vals)
        if v == self.default:
            vals.pop((p, x), None)
        else:
            vals[(p, x)] = v
        new._vals = vals
        return new

    def overrides(self) -> dict:
        """The stored non-default entries, keyed by (process, variable)."""
        return dict(self._vals)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GlobalState):
            return NotImplemented
        return self.default == other.default and self._vals == other._vals

    def __hash__(self) -> int:
        return hash((self.default, frozenset(self._vals.items())))

    def __repr__(self) -> str:
        items = ", ".join(
            f"{p}.{x}={v}" for (p, x), v in sorted(self._vals.items(), key=repr)
        )
        return f"GlobalState(default={self.default!r}, {{{items}}})"


def update_state(s: GlobalState, p: Pid, x: Var, v: Value) -> GlobalState:
    return s.update(p, x, v)


def states_ext_equal(s1: GlobalState, s2: GlobalState) -> bool:
    """Pointwise equality of two states over the same default."""
    if s1.default != s2.default:
        raise ValueError("states compared over different default values")
    return s1._vals == s2._vals


# ---------------------------------------------------------------------------
# Expression evaluation interface

LocalState = Callable[[Var], Value]


@dataclass(frozen=True, slots=True)
class Language:
    """The two evaluators a concrete instance must provide.

    Both take an expression and the local state of the evaluating process
    (a function from variables to values) and must be deterministic:
    equal expressions over pointwise-equal local states give equal results.
    """

    eval_expr: Callable[[Expr, LocalState], Value]
    eval_bexpr: Callable[[BExpr, LocalState], bool]


def local_state(s: GlobalState, p: Pid) -> LocalState:
    return lambda x: s.get(p, x)


def eval_on_state(lang: Language, e: Expr, s: GlobalState, p: Pid) -> Value:
    return lang.eval_expr(e, local_state(s, p))


# ---------------------------------------------------------------------------
# Well-formedness

def choreography_wf(chor: Choreography) -> bool:
    """No self-communication anywhere, and no empty pending list in a
    runtime call term."""
    if isinstance(chor, Interaction):
        eta = chor.eta
        return eta.sender != eta.receiver and choreography_wf(chor.cont)
    if isinstance(chor, Cond):
        return choreography_wf(chor.then_branch) and choreography_wf(chor.else_branch)
    if isinstance(chor, RTCall):
        return bool(chor.pending) and choreography_wf(chor.cont)
    return True  # Call, End


def is_initial(chor: Choreography) -> bool:
    """True when no subterm is a runtime call."""
    if isinstance(chor, Interaction):
        return is_initial(chor.cont)
    if isinstance(chor, Cond):
        return is_initial(chor.then_branch) and is_initial(chor.else_branch)
    if isinstance(chor, RTCall):
        return False
    return True


def called_names(chor: Choreography) -> frozenset:
    """All procedure names invoked anywhere in the term."""
    out = set()
    stack = [chor]
    while stack:
        c = stack.pop()
        if isinstance(c, Interaction):
            stack.append(c.cont)
        elif isinstance(c, Cond):
            stack.append(c.then_branch)
            stack.append(c.else_branch)
        elif isinstance(c, Call):
            out.add(c.name)
        elif isinstance(c, RTCall):
            out.add(c.name)
            stack.append(c.cont)
    return frozenset(out)


def calls_within(chor: Choreography, names: Iterable[ProcName]) -> bool:
    return called_names(chor) <= frozenset(names)


def rt_annotations_consistent(chor: Choreography, defs: DefSet) -> bool:
    """Every runtime call's pending set is contained in the annotation of
    the procedure it belongs to."""
    if isinstance(chor, Interaction):
        return rt_annotations_consistent(chor.cont, defs)
    if isinstance(chor, Cond):
        return rt_annotations_consistent(chor.then_branch, defs) and \
            rt_annotations_consistent(chor.else_branch, defs)
    if isinstance(chor, RTCall):
        return chor.pending <= defs.annotation(chor.name) and \
            rt_annotations_consistent(chor.cont, defs)
    return True


def _syntactic_processes(chor: Choreography, ann_of: Callable[[ProcName], frozenset]) -> set:
    out: set = set()
    stack = [chor]
    while stack:
        c = stack.pop()
        if isinstance(c, Interaction):
            out.add(c.eta.sender)
            out.add(c.eta.receiver)
            stack.append(c.cont)
        elif isinstance(c, Cond):
            out.add(c.process)
            stack.append(c.then_branch)
            stack.append(c.else_branch)
        elif isinstance(c, Call):
            out |= ann_of(c.name)
        elif isinstance(c, RTCall):
            out |= c.pending
            stack.append(c.cont)
    return out


def chor_processes(chor: Choreography, defs: DefSet, known: Iterable[ProcName]) -> frozenset:
    """The set of processes a choreography uses, where a call to X counts as
    using the processes in X's annotation.  Raises UnknownProcedureError if
    a named procedure is outside `known`."""
    known = frozenset(known)

    def ann_of(name):
        if name not in known:
            raise UnknownProcedureError(f"procedure {name!r} is not in the universe")
        return defs.annotation(name)

    # Names inside runtime terms must be known too, even though only their
    # pending sets contribute processes.
    bad = called_names(chor) - known
    if bad:
        raise UnknownProcedureError(f"procedure {sorted(bad, key=repr)[0]!r} is not in the universe")
    return frozenset(_syntactic_processes(chor, ann_of))


def program_wf_violation(names: Iterable[ProcName], program: Program) -> Optional[str]:
    """First violated well-formedness clause, or None if none is."""
    names = list(names)
    name_set = frozenset(names)
    main = program.main
    defs = program.procedures
    if not choreography_wf(main):
        return "main is not well-formed"
    if not calls_within(main, name_set):
        return "main calls a procedure outside the declared names"
    if not rt_annotations_consistent(main, defs):
        return "a runtime call in main is annotated with processes outside its procedure's annotation"
    for x in names:
        ann, body = defs.lookup(x)
        if not choreography_wf(body):
            return f"body of procedure {x!r} is not well-formed"
        if not is_initial(body):
            return f"body of procedure {x!r} contains a runtime call term"
        if not ann:
            return f"procedure {x!r} has an empty annotation"
        if not calls_within(body, name_set):
            return f"body of procedure {x!r} calls a procedure outside the declared names"
    return None


def program_wf(names: Iterable[ProcName], program: Program) -> bool:
    return program_wf_violation(names, program) is None


def well_ann(program: Program, universe: Iterable[ProcName]) -> bool:
    """Every procedure in the universe uses only processes listed in its own
    annotation (over-annotation is fine)."""
    universe = list(universe)
    defs = program.procedures
    for x in universe:
        used = chor_processes(defs.body(x), defs, universe)
        if not used <= defs.annotation(x):
            return False
    return True


def reachable_procedures(program: Program) -> frozenset:
    """Call-graph closure of procedure names from main."""
    seen: set = set()
    frontier = set(called_names(program.main))
    while frontier:
        x = frontier.pop()
        if x in seen:
            continue
        seen.add(x)
        frontier |= set(called_names(program.procedures.body(x))) - seen
    return frozenset(seen)


def ccp_wf(program: Program, universe: Optional[Iterable[ProcName]] = None) -> bool:
    """Full program well-formedness over an explicit finite universe of
    procedure names.  When no universe is given, the call-graph closure
    from main is used."""
    if universe is None:
        universe = sorted(reachable_procedures(program), key=repr)
    else:
        universe = list(universe)
    return well_ann(program, universe) and program_wf(universe, program)


def exact_annotations(
    bodies: Mapping[ProcName, Choreography],
    pinned: Mapping[ProcName, frozenset] = (),
) -> dict:
    """Least fixpoint of the process-use equations over a call graph.

    `pinned` entries are lower bounds (seed processes forced into a name's
    annotation).  Every name called from a body must be a key of `bodies`
    or of `pinned`."""
    pinned = {x: frozenset(ps) for x, ps in dict(pinned).items()}
    anns: dict = {x: pinned.get(x, frozenset()) for x in set(bodies) | set(pinned)}
    for x, body in bodies.items():
        bad = called_names(body) - set(anns)
        if bad:
            raise UnknownProcedureError(
                f"body of {x!r} calls undefined procedure {sorted(bad, key=repr)[0]!r}"
            )
    changed = True
    while changed:
        changed = False
        for x, body in bodies.items():
            new = frozenset(_syntactic_processes(body, anns.__getitem__)) | anns[x]
            if new != anns[x]:
                anns[x] = new
                changed = True
    return anns
