"""Command-line front end.

Exit codes follow one convention everywhere: 0 for success or a passing
check, 1 for a failure or counterexample, 2 for usage errors or an
inconclusive outcome (including running out of fuel).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import encoding, parser, prf, properties
from .concrete import CONCRETE, XX, initial_state
from .core import GlobalState, Program, ccp_wf, program_wf_violation, reachable_procedures, well_ann
from .semantics import (
    Configuration,
    OUT_OF_FUEL,
    STUCK,
    TERMINATED,
    enumerate_transitions,
    label_json,
    run,
    trace_lines,
    transition_json,
)

PASS, FAIL, USAGE = 0, 1, 2


def _load_program(path: str) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SystemExit(f"corechor: cannot read {path}: {exc}")
    try:
        return parser.parse_program(text)
    except parser.ParseError as exc:
        raise SystemExit(f"corechor: {path}: {exc}")


def _parse_state(pairs: Optional[Sequence[str]]) -> GlobalState:
    values = {}
    for item in pairs or ():
        try:
            key, _, val = item.partition("=")
            values[int(key)] = int(val)
        except ValueError:
            raise SystemExit(f"corechor: bad --state entry {item!r}, expected P=V")
    return initial_state(values)


def _universe(program: Program, spec: str) -> list[int]:
    if spec == "auto":
        return sorted(reachable_procedures(program))
    try:
        return [int(x) for x in spec.split(",") if x != ""]
    except ValueError:
        raise SystemExit(f"corechor: bad --universe {spec!r}, expected 'auto' or a comma list")


def _cmd_check(args: argparse.Namespace) -> int:
    program = _load_program(args.file)
    universe = _universe(program, args.universe)
    if not well_ann(program, universe):
        print("not well-formed: a procedure uses processes outside its annotation")
        return FAIL
    violation = program_wf_violation(universe, program)
    if violation is not None:
        print(f"not well-formed: {violation}")
        return FAIL
    print("well-formed")
    return PASS


def _run_common(args: argparse.Namespace):
    program = _load_program(args.file)
    state = _parse_state(args.state)
    return Configuration(program, state)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _run_common(args)
    result = run(CONCRETE, config, args.fuel, args.sched)
    print(f"status: {result.status}")
    print(f"steps: {len(result.trace)}")
    final = result.config.state
    print(f"default: {final.default}")
    for (p, x), v in sorted(final.overrides().items()):
        print(f"{p}.{x} = {v}")
    return {TERMINATED: PASS, STUCK: FAIL, OUT_OF_FUEL: USAGE}[result.status]


def _cmd_trace(args: argparse.Namespace) -> int:
    config = _run_common(args)
    result = run(CONCRETE, config, args.fuel, args.sched)
    out = sys.stdout if args.output is None else open(args.output, "w")
    try:
        for line in trace_lines(result.trace):
            print(line, file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return {TERMINATED: PASS, STUCK: FAIL, OUT_OF_FUEL: USAGE}[result.status]


def _cmd_enum(args: argparse.Namespace) -> int:
    config = _run_common(args)
    enabled = enumerate_transitions(
        CONCRETE, config.program.procedures, config.program.main, config.state
    )
    for t in enabled:
        print(json.dumps(transition_json(t), default=str))
    return PASS


def _cmd_prop(args: argparse.Namespace) -> int:
    try:
        report = properties.run_property(
            args.name, trials=args.trials, seed=args.seed, depth=args.depth
        )
    except ValueError as exc:
        raise SystemExit(f"corechor: {exc}")
    if report.passed and report.inconclusive == 0:
        print(f"{args.name}: pass ({report.trials} trials)")
        return PASS
    if report.passed:
        print(f"{args.name}: inconclusive ({report.inconclusive} budget-limited trials)")
        return USAGE
    ce = report.counterexample
    print(f"{args.name}: counterexample after {report.trials} trials: {ce.message}")
    stem = Path(args.out) / f"{args.name}_counterexample"
    stem.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{stem}.cc").write_text(parser.format_program(ce.program))
    Path(f"{stem}.state.json").write_text(
        json.dumps(
            {
                "default": ce.state.default,
                "entries": [
                    {"p": p, "x": x, "v": v} for (p, x), v in sorted(ce.state.overrides().items())
                ],
            },
            indent=2,
        )
    )
    Path(f"{stem}.labels.json").write_text(
        json.dumps([label_json(l) for l in ce.labels], indent=2)
    )
    print(f"wrote {stem}.cc, {stem}.state.json, {stem}.labels.json")
    return FAIL


def _parse_prf(text: str) -> prf.PRFunction:
    try:
        return prf.parse_function(text)
    except prf.FunctionSyntaxError as exc:
        raise SystemExit(f"corechor: {exc}")


def _cmd_prf_eval(args: argparse.Namespace) -> int:
    fn = _parse_prf(args.expr)
    if len(args.args) != prf.arity(fn):
        raise SystemExit(
            f"corechor: function has arity {prf.arity(fn)}, got {len(args.args)} arguments"
        )
    value = prf.eval_fn(fn, args.fuel, args.args)
    print("None" if value is None else f"Some {value}")
    return PASS if value is not None else USAGE


def _cmd_prf_compile(args: argparse.Namespace) -> int:
    fn = _parse_prf(args.expr)
    text = parser.format_program(encoding.encode_default(fn))
    if args.output is None:
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return PASS


def _cmd_prf_implements(args: argparse.Namespace) -> int:
    fn = _parse_prf(args.expr)
    k = prf.arity(fn)
    grid = [()]
    for _ in range(k):
        grid = [xs + (v,) for xs in grid for v in range(args.max_input + 1)]
    program = encoding.encode_default(fn)
    report = encoding.check_implements(
        program,
        fn,
        tuple(range(1, k + 1)),
        0,
        grid,
        fuel=args.fuel,
        run_seeds=tuple(range(args.seeds)),
    )
    print(report.to_json())
    return PASS if report.passed else FAIL


def _build_arg_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="corechor",
        description="Interpret choreographies, check their metatheory, and "
        "compile partial recursive functions to them.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def add_exec_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("file", metavar="FILE")
        p.add_argument("--state", action="append", metavar="P=V",
                       help="set process P's xx to V (repeatable)")
        p.add_argument("--fuel", type=int, default=100_000)
        p.add_argument("--sched", default="first", metavar="first|random:SEED")

    p = sub.add_parser("check", help="well-formedness of a program file")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--universe", default="auto",
                   help="'auto' (call-graph closure) or a comma list of procedure ids")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("run", help="execute a program and print the final state")
    add_exec_flags(p)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("trace", help="execute and emit one JSON object per step")
    add_exec_flags(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=_cmd_trace)

    p = sub.add_parser("enum", help="list the enabled transitions")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--state", action="append", metavar="P=V")
    p.set_defaults(fn=_cmd_enum)

    p = sub.add_parser("prop", help="run a metatheory property on generated programs")
    p.add_argument("name", choices=properties.PROPERTY_NAMES)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--out", default=".", help="directory for counterexample files")
    p.set_defaults(fn=_cmd_prop)

    prf_p = sub.add_parser("prf", help="partial recursive function commands")
    prf_sub = prf_p.add_subparsers(dest="prf_command", required=True)

    p = prf_sub.add_parser("eval", help="evaluate a function on arguments")
    p.add_argument("expr")
    p.add_argument("args", nargs="*", type=int)
    p.add_argument("--fuel", type=int, default=1000)
    p.set_defaults(fn=_cmd_prf_eval)

    p = prf_sub.add_parser("compile", help="compile a function to a choreography")
    p.add_argument("expr")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=_cmd_prf_compile)

    p = prf_sub.add_parser("implements", help="check a compiled function end to end")
    p.add_argument("expr")
    p.add_argument("--max-input", type=int, default=5)
    p.add_argument("--fuel", type=int, default=100_000)
    p.add_argument("--seeds", type=int, default=3, help="number of random schedulers")
    p.set_defaults(fn=_cmd_prf_implements)

    return top


def main(argv: Optional[Sequence[str]] = None) -> int:
    arg_parser = _build_arg_parser()
    try:
        args = arg_parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already; normalize others.
        return USAGE if exc.code not in (0,) else 0
    try:
        return args.fn(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return USAGE
        return exc.code if exc.code is not None else USAGE


if __name__ == "__main__":
    sys.exit(main())
