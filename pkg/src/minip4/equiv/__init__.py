"""Translation validation: equivalence of block semantics and trace checking."""
from .core import (AWARE, BRUTE, EQUIVALENT, INEQUIVALENT, SOLVER, STRICT, UNKNOWN, UNSTABLE,
                   BudgetExceeded, Counterexample, EquivResult, SignatureMismatch,
                   brute_force_equiv, check_equivalence, replays, unify_inputs)
from .smt import SolverUnavailable, emit_smt, parse_model, run_solver
from .validate import (BLOCKING, CRASH, FINDING_KINDS, INVALID_EMIT, SEMANTIC, UNSTABLE_FINDING,
                       Finding, ValidationStats, validate_trace)

__all__ = [
    "AWARE", "BRUTE", "EQUIVALENT", "INEQUIVALENT", "SOLVER", "STRICT", "UNKNOWN", "UNSTABLE",
    "BudgetExceeded", "Counterexample", "EquivResult", "SignatureMismatch",
    "brute_force_equiv", "check_equivalence", "replays", "unify_inputs",
    "SolverUnavailable", "emit_smt", "parse_model", "run_solver",
    "BLOCKING", "CRASH", "FINDING_KINDS", "INVALID_EMIT", "SEMANTIC", "UNSTABLE_FINDING",
    "Finding", "ValidationStats", "validate_trace",
]
