"""Core choreographies: syntax, semantics, metatheory checks, and a
compiler from partial recursive functions."""

from .core import (
    END,
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
    Program,
    RTCall,
    Sel,
    UnknownProcedureError,
    ccp_wf,
    chor_processes,
    choreography_wf,
    exact_annotations,
    is_initial,
    program_wf,
    program_wf_violation,
    reachable_procedures,
    sequence,
    states_ext_equal,
    update_state,
    well_ann,
)
from .semantics import (
    Configuration,
    LCom,
    LSel,
    LTau,
    MalformedTermError,
    NoSuchTransitionError,
    OUT_OF_FUEL,
    RCall,
    RCom,
    RCond,
    RSel,
    RichLabel,
    RunResult,
    STUCK,
    SearchBudgetError,
    TERMINATED,
    Transition,
    TransitionLabel,
    enumerate_transitions,
    forget,
    iter_transitions,
    label_processes,
    reachable_terminals,
    run,
    step,
)
from .concrete import CONCRETE, COMPARE, SUCC, THIS, XX, YY, ZERO, if_eq, initial_state, send
from .prf import (
    ArityError,
    Composition,
    Minimization,
    PRFunction,
    Projection,
    Recursion,
    Successor,
    Zero,
    arity,
    converges_within,
    depth,
    eval_fn,
    eval_opt,
    find_zero_from,
    format_function,
    parse_function,
    standard_library,
)
from .encoding import (
    EncodingContext,
    ImplementsReport,
    check_implements,
    encode,
    encode_default,
    procedure_body,
    procedure_count,
    process_count,
)
from .properties import (
    Counterexample,
    GenConfig,
    PropertyReport,
    check_confluence,
    check_deadlock_freedom,
    check_diamond,
    check_progress,
    check_termination_unique,
    gen_function,
    gen_program,
    gen_state,
    run_property,
)
from .parser import ParseError, format_choreography, format_program, parse_program

__version__ = "0.1.0"
