"""Executable metatheory: random well-formed programs and the checks for
progress, deadlock-freedom, the diamond property, confluence, and
uniqueness of the terminal state.

The theory guarantees these properties universally; here they are checked
on generated instances.  Every check is deterministic in its seeds, and a
failing check hands back a replayable counterexample (the offending
program, its initial state, and the labels that were taken).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .concrete import COMPARE, CONCRETE, EXPRESSIONS, XX, YY
from .core import (
    END,
    Call,
    Choreography,
    Com,
    Cond,
    DefSet,
    GlobalState,
    Interaction,
    Label,
    Program,
    Sel,
    exact_annotations,
    states_ext_equal,
)
from .prf import (
    Composition,
    Minimization,
    PRFunction,
    Projection,
    Recursion,
    Successor,
    Zero,
)
from .semantics import (
    Configuration,
    RichLabel,
    SearchBudgetError,
    Transition,
    enumerate_transitions,
    iter_transitions,
    run,
)


@dataclass(frozen=True, slots=True)
class GenConfig:
    """Shape of generated programs.  Generation is a pure function of the
    seed."""

    seed: int = 0
    max_depth: int = 3
    num_processes: int = 5
    num_procedures: int = 2
    recursion_probability: float = 0.25

    def __post_init__(self) -> None:
        if self.num_processes < 2:
            raise ValueError("need at least two processes to communicate")
        if not 0.0 <= self.recursion_probability <= 1.0:
            raise ValueError("recursion probability must be in [0, 1]")


@dataclass(slots=True)
class Counterexample:
    program: Program
    state: GlobalState
    labels: list[RichLabel]
    message: str


@dataclass(slots=True)
class PropertyReport:
    name: str
    trials: int
    counterexample: Optional[Counterexample] = None
    inconclusive: int = 0

    @property
    def passed(self) -> bool:
        return self.counterexample is None


# ---------------------------------------------------------------------------
# Generators


def _gen_chor(
    rng: random.Random,
    depth: int,
    pids: Sequence[int],
    names: Sequence[int],
    rec_p: float,
) -> Choreography:
    def tail() -> Choreography:
        if names and rng.random() < rec_p:
            return Call(rng.choice(names))
        return END

    if depth <= 0:
        return tail()
    kind = rng.choices(("com", "sel", "cond", "tail"), weights=(5, 2, 2, 2))[0]
    if kind == "com":
        p, q = rng.sample(pids, 2)
        eta = Com(p, rng.choice(EXPRESSIONS), q, rng.choice((XX, YY)))
        return Interaction(eta, _gen_chor(rng, depth - 1, pids, names, rec_p))
    if kind == "sel":
        p, q = rng.sample(pids, 2)
        eta = Sel(p, q, rng.choice((Label.LEFT, Label.RIGHT)))
        return Interaction(eta, _gen_chor(rng, depth - 1, pids, names, rec_p))
    if kind == "cond":
        return Cond(
            rng.choice(pids),
            COMPARE,
            _gen_chor(rng, depth - 1, pids, names, rec_p),
            _gen_chor(rng, depth - 1, pids, names, rec_p),
        )
    return tail()


def gen_program(cfg: GenConfig) -> Program:
    """A random program that is well-formed over its own procedure names.
    Bodies are initial; annotations are the exact least fixpoint, with
    occasional deliberate over-annotation."""
    rng = random.Random(cfg.seed)
    pids = tuple(range(cfg.num_processes))
    names = tuple(range(cfg.num_procedures))
    bodies = {
        x: _gen_chor(rng, cfg.max_depth, pids, names, cfg.recursion_probability)
        for x in names
    }
    # Processes forced into annotations propagate through the call graph,
    # so inflating is done via pinned seeds and one more fixpoint.
    pinned: dict[int, frozenset] = {}
    anns = exact_annotations(bodies)
    for x in names:
        extra = set()
        if not anns[x]:
            extra.add(rng.choice(pids))
        if rng.random() < 0.25:
            extra.add(rng.choice(pids))
        if extra:
            pinned[x] = frozenset(extra)
    if pinned:
        anns = exact_annotations(bodies, pinned)
    main = _gen_chor(rng, cfg.max_depth, pids, names, cfg.recursion_probability)
    return Program(DefSet({x: (anns[x], bodies[x]) for x in names}), main)


def gen_state(rng: random.Random, num_processes: int, max_value: int = 9) -> GlobalState:
    s = GlobalState(0)
    for p in range(num_processes):
        s = s.update(p, XX, rng.randint(0, max_value))
        s = s.update(p, YY, rng.randint(0, max_value))
    return s


def gen_function(rng: random.Random, fn_arity: int, max_depth: int) -> PRFunction:
    """A random well-typed partial recursive function of the given arity."""
    if max_depth <= 0 or (fn_arity > 0 and rng.random() < 0.35):
        if fn_arity == 1:
            return rng.choice((Zero(), Successor(), Projection(0, 1)))
        if fn_arity >= 1:
            return Projection(rng.randrange(fn_arity), fn_arity)
        # No base function has arity 0; wrap a unary one.
        return Minimization(gen_function(rng, 1, max_depth - 1))
    kind = rng.choice(("comp", "rec", "min"))
    if kind == "comp":
        m = rng.randint(1, 3)
        outer = gen_function(rng, m, max_depth - 1)
        args = tuple(gen_function(rng, fn_arity, max_depth - 1) for _ in range(m))
        return Composition(outer, args)
    if kind == "rec" and fn_arity >= 1:
        base = gen_function(rng, fn_arity - 1, max_depth - 1)
        step = gen_function(rng, fn_arity + 1, max_depth - 1)
        return Recursion(base, step)
    return Minimization(gen_function(rng, fn_arity + 1, max_depth - 1))


# ---------------------------------------------------------------------------
# Single-instance checks


def check_progress(program: Program, state: GlobalState) -> PropertyReport:
    """A non-terminated well-formed program has at least one transition."""
    report = PropertyReport("progress", trials=1)
    if program.main == END:
        return report
    first = next(
        iter_transitions(CONCRETE, program.procedures, program.main, state), None
    )
    if first is None:
        report.counterexample = Counterexample(
            program, state, [], "no transition enabled at a non-terminated program"
        )
    return report


def check_deadlock_freedom(
    program: Program, state: GlobalState, fuel: int, seed: int = 0
) -> PropertyReport:
    """Under a random scheduler, every reachable non-terminated
    configuration can take a step."""
    report = PropertyReport("deadlock_freedom", trials=1)
    rng = random.Random(seed)
    defs = program.procedures
    main = program.main
    taken: list[RichLabel] = []
    for _ in range(fuel):
        if main == END:
            break
        enabled = enumerate_transitions(CONCRETE, defs, main, state)
        if not enabled:
            report.counterexample = Counterexample(
                program, state, taken, "stuck configuration reached"
            )
            return report
        t = rng.choice(enabled)
        taken.append(t.label)
        main, state = t.target, t.state
    return report


def check_diamond(defs: DefSet, chor: Choreography, state: GlobalState) -> PropertyReport:
    """Any two distinct enabled actions commute: both orders are enabled
    and meet in the same choreography and extensionally equal states."""
    report = PropertyReport("diamond", trials=1)
    program = Program(defs, chor)
    enabled = enumerate_transitions(CONCRETE, defs, chor, state)

    def after(t: Transition, label: RichLabel) -> Optional[Transition]:
        for u in iter_transitions(CONCRETE, defs, t.target, t.state):
            if u.label == label:
                return u
        return None

    for i, t1 in enumerate(enabled):
        for t2 in enabled[i + 1 :]:
            if t1.label == t2.label:
                continue
            u12 = after(t1, t2.label)
            u21 = after(t2, t1.label)
            if u12 is None or u21 is None:
                report.counterexample = Counterexample(
                    program,
                    state,
                    [t1.label, t2.label],
                    "second action not enabled after the first",
                )
                return report
            if u12.target != u21.target or not states_ext_equal(u12.state, u21.state):
                report.counterexample = Counterexample(
                    program,
                    state,
                    [t1.label, t2.label],
                    "the two orders do not meet in the same configuration",
                )
                return report
    return report


def _explore(
    config: Configuration, depth: int, max_nodes: int
) -> set[tuple[Choreography, GlobalState]]:
    """All configurations reachable in at most `depth` steps."""
    defs = config.program.procedures
    start = (config.program.main, config.state)
    seen = {start}
    frontier = [start]
    for _ in range(depth):
        next_frontier = []
        for main, state in frontier:
            if main == END:
                continue
            for t in iter_transitions(CONCRETE, defs, main, state):
                node = (t.target, t.state)
                if node not in seen:
                    seen.add(node)
                    if len(seen) > max_nodes:
                        raise SearchBudgetError(f"more than {max_nodes} configurations")
                    next_frontier.append(node)
        frontier = next_frontier
    return seen


def check_confluence(
    config: Configuration,
    steps: int,
    seeds: tuple[int, int] = (0, 1),
    max_nodes: int = 20_000,
) -> PropertyReport:
    """Two independent random executions of at most `steps` steps can reach
    a common configuration again, found by bounded joint exploration."""
    report = PropertyReport("confluence", trials=1)
    r1 = run(CONCRETE, config, steps, f"random:{seeds[0]}")
    r2 = run(CONCRETE, config, steps, f"random:{seeds[1]}")
    try:
        reach1 = _explore(r1.config, steps, max_nodes)
        reach2 = _explore(r2.config, steps, max_nodes)
    except SearchBudgetError:
        report.inconclusive = 1
        return report
    if reach1.isdisjoint(reach2):
        report.counterexample = Counterexample(
            config.program,
            config.state,
            [t.label for t in r1.trace] + [t.label for t in r2.trace],
            f"no common configuration within {steps} further steps",
        )
    return report


def check_termination_unique(
    config: Configuration, depth: int, max_nodes: int = 20_000
) -> PropertyReport:
    """All terminated configurations reachable within `depth` steps agree
    on the state."""
    from .semantics import reachable_terminals

    report = PropertyReport("termination_unique", trials=1)
    try:
        terminals = reachable_terminals(CONCRETE, config, depth, max_nodes)
    except SearchBudgetError:
        report.inconclusive = 1
        return report
    if len(terminals) > 1:
        report.counterexample = Counterexample(
            config.program,
            config.state,
            [],
            f"{len(terminals)} distinct terminal states reachable",
        )
    return report


# ---------------------------------------------------------------------------
# Trial drivers

PROPERTY_NAMES = (
    "progress",
    "deadlock_freedom",
    "diamond",
    "confluence",
    "termination_unique",
)


def _gen_instance(seed: int, depth: int) -> tuple[Program, GlobalState, GenConfig]:
    cfg = GenConfig(seed=seed, max_depth=depth)
    program = gen_program(cfg)
    state = gen_state(random.Random(seed ^ 0x5EED), cfg.num_processes)
    return program, state, cfg


def run_property(
    name: str,
    trials: int,
    seed: int = 0,
    depth: int = 3,
    fuel: int = 200,
) -> PropertyReport:
    """Run a named property over `trials` generated instances; stops at the
    first counterexample."""
    if name not in PROPERTY_NAMES:
        raise ValueError(f"unknown property {name!r} (choose from {PROPERTY_NAMES})")
    inconclusive = 0
    for i in range(trials):
        program, state, _ = _gen_instance(seed + i, depth)
        if name == "progress":
            r = check_progress(program, state)
        elif name == "deadlock_freedom":
            r = check_deadlock_freedom(program, state, fuel, seed=seed + i)
        elif name == "diamond":
            r = _diamond_trial(program, state, seed + i)
        elif name == "confluence":
            small = gen_program(GenConfig(seed=seed + i, max_depth=2, num_processes=4))
            state = gen_state(random.Random(seed + i), 4)
            r = check_confluence(
                Configuration(small, state), min(depth * 2, 6), (seed + i, seed + i + 1)
            )
        else:
            small = gen_program(
                GenConfig(
                    seed=seed + i,
                    max_depth=2,
                    num_processes=4,
                    recursion_probability=0.1,
                )
            )
            state = gen_state(random.Random(seed + i), 4)
            r = check_termination_unique(Configuration(small, state), depth=10)
        inconclusive += r.inconclusive
        if not r.passed:
            return PropertyReport(name, trials=i + 1, counterexample=r.counterexample,
                                  inconclusive=inconclusive)
    return PropertyReport(name, trials=trials, inconclusive=inconclusive)


def _diamond_trial(program: Program, state: GlobalState, seed: int) -> PropertyReport:
    """Diamond check at the initial configuration and along a short random
    walk, so runtime call terms are exercised too."""
    rng = random.Random(seed)
    defs = program.procedures
    main = program.main
    for _ in range(4):
        r = check_diamond(defs, main, state)
        if not r.passed:
            return r
        enabled = enumerate_transitions(CONCRETE, defs, main, state)
        if not enabled:
            break
        t = rng.choice(enabled)
        main, state = t.target, t.state
    return PropertyReport("diamond", trials=1)


def replay(report: PropertyReport) -> bool:
    """Re-run a failed property on its embedded counterexample; returns
    True when the failure reproduces."""
    ce = report.counterexample
    if ce is None:
        return False
    if report.name == "progress":
        return not check_progress(ce.program, ce.state).passed
    if report.name == "deadlock_freedom":
        # Replay the recorded labels, then look for the stuck configuration.
        from .semantics import NoSuchTransitionError, step

        config = Configuration(ce.program, ce.state)
        try:
            for label in ce.labels:
                config = step(CONCRETE, config, label)
        except NoSuchTransitionError:
            return False
        return (
            config.program.main != END
            and not enumerate_transitions(
                CONCRETE, config.program.procedures, config.program.main, config.state
            )
        )
    if report.name == "diamond":
        return not check_diamond(ce.program.procedures, ce.program.main, ce.state).passed
    if report.name == "confluence":
        return not check_confluence(Configuration(ce.program, ce.state), 6).passed
    if report.name == "termination_unique":
        return not check_termination_unique(
            Configuration(ce.program, ce.state), depth=10
        ).passed
    return False
