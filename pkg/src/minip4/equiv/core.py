"""Equivalence of two BlockSemantics.

Two modes:

strict
    outputs must agree bit-for-bit (outside invalid headers) under both the
    zero and the 0xAA undefined-value policy.
taint_aware
    a mismatch only counts on bits that are *defined* in the before program
    (not in its taint mask, not in an invalid or unknown-validity header).
    Since the after program is compared under both policies, a defined bit
    that turned undefined is still caught.  A pair that fails strict but
    passes taint_aware is UnstableOnly.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..semantics import terms as T
from ..semantics.concrete import concrete_eval, invalid_header_mask
from ..semantics.evaluate import (PATTERN_55, PATTERN_AA, U64, ZERO, Evaluator, UndefinedPolicy,
                                  lane_assignment, lane_env)
from ..semantics.interp import BlockSemantics

EQUIVALENT = "Equivalent"
INEQUIVALENT = "Inequivalent"
UNSTABLE = "UnstableOnly"
UNKNOWN = "Unknown"

BRUTE = "BruteForce"
SOLVER = "ExternalSolver"

STRICT = "strict"
AWARE = "taint_aware"
MODES = (STRICT, AWARE)

DEFAULT_BUDGET = 20
CHUNK_BITS = 16
# together the two patterns put both 0 and 1 on every bit of an undefined value
POLICIES = (ZERO, PATTERN_AA, PATTERN_55)


class SignatureMismatch(ValueError):
    """The two blocks do not share inputs/outputs."""


class BudgetExceeded(ValueError):
    """Too many input bits for exhaustive enumeration."""


@dataclass
class Counterexample:
    inputs: Dict[str, int]
    policy: str
    before_out: Dict[str, int]
    after_out: Dict[str, int]

    def to_dict(self) -> dict:
        return {"inputs": dict(self.inputs), "policy": self.policy,
                "before_out": dict(self.before_out), "after_out": dict(self.after_out)}


@dataclass
class EquivResult:
    verdict: str
    backend: str
    counterexample: Optional[Counterexample] = None
    reason: str = ""
    elapsed_ms: float = 0.0
    evaluations: int = 0

    @property
    def equivalent(self) -> bool:
        return self.verdict == EQUIVALENT

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "backend": self.backend,
                "counterexample": self.counterexample.to_dict() if self.counterexample else None,
                "reason": self.reason, "ms": round(self.elapsed_ms, 3)}


def normalize_mode(mode: str) -> str:
    m = {"aware": AWARE, "taint-aware": AWARE, "taint_aware": AWARE, "strict": STRICT}.get(mode)
    if m is None:
        raise ValueError(f"unknown equivalence mode {mode!r}")
    return m


def unify_inputs(before: BlockSemantics, after: BlockSemantics) -> List[T.Term]:
    """Shared input list: identical parameter inputs, union of table symbols."""
    bp = [(t.val, t.width) for t in before.param_inputs]
    ap = [(t.val, t.width) for t in after.param_inputs]
    if bp != ap:
        raise SignatureMismatch(f"parameter inputs differ: {bp} vs {ap}")
    bo = [(o.name, o.term.width, o.header) for o in before.outputs]
    ao = [(o.name, o.term.width, o.header) for o in after.outputs]
    if bo != ao:
        raise SignatureMismatch(f"outputs differ: {bo} vs {ao}")
    inputs = list(before.inputs)
    seen = {t.val: t for t in inputs}
    for t in after.table_inputs:
        other = seen.get(t.val)
        if other is None:
            inputs.append(t)
            seen[t.val] = t
        elif other.width != t.width:
            raise SignatureMismatch(f"table symbol {t.val} has widths {other.width} and {t.width}")
    return inputs


def _outputs(sem: BlockSemantics, vals) -> Dict[str, int]:
    return {o.name: int(v) for o, v in zip(sem.outputs, vals)}


def make_counterexample(before, after, assignment, aware: bool) -> Optional[Counterexample]:
    """Replay an assignment; return a counterexample under the first policy that shows it."""
    for policy in POLICIES:
        rb = concrete_eval(before, assignment, policy)
        ra = concrete_eval(after, assignment, policy)
        if _differs(before, rb, ra, aware):
            return Counterexample(dict(assignment), str(policy), rb.values, ra.values)
    return None


def _differs(before, rb, ra, aware: bool) -> bool:
    for o in before.outputs:
        if aware:
            ignore = rb.dont_care[o.name]
        else:
            ignore = 0
            if o.header is not None and rb.values[o.header] == 0:
                ignore = T.mask(o.term.width)
        if (rb.values[o.name] ^ ra.values[o.name]) & ~ignore & T.mask(o.term.width):
            return True
    return False


def replays(before: BlockSemantics, after: BlockSemantics, cex: Counterexample,
            aware: bool = True) -> bool:
    """Does the counterexample show a difference when re-evaluated with concrete_eval?"""
    full = {t.val: 0 for t in unify_inputs(before, after)}
    full.update(cex.inputs)
    policy = UndefinedPolicy.parse(cex.policy)
    rb = concrete_eval(before, full, policy)
    ra = concrete_eval(after, full, policy)
    return _differs(before, rb, ra, aware)


class _PairEvaluator:
    """Evaluates both blocks on lane batches and reports mismatching lanes."""

    def __init__(self, before: BlockSemantics, after: BlockSemantics):
        self.before, self.after = before, after
        self.nb = len(before.outputs)
        self.ev = Evaluator(before.terms() + after.terms())
        self.masks_wanted = any(t.has_undef for t in before.terms())
        self.policies = POLICIES if self.ev.has_undef else (ZERO,)

    def mismatches(self, env, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Boolean lane arrays (aware_bad, strict_bad)."""
        nb = self.nb
        aware_bad = np.zeros(n, dtype=bool)
        strict_bad = np.zeros(n, dtype=bool)
        masks_b = None
        dc_aware = None
        for policy in self.policies:
            want_masks = self.masks_wanted and masks_b is None
            vals, msks = self.ev.run(env, policy, masks=want_masks)
            vb, va = vals[:nb], vals[nb:]
            if want_masks:
                masks_b = msks[:nb]
                dc_aware = invalid_header_mask(self.before, vb, masks_b)
            elif masks_b is None:
                masks_b = [U64(0)] * nb
                dc_aware = invalid_header_mask(self.before, vb)
            dc_strict = invalid_header_mask(self.before, vb)
            for o, b, a, m, da, ds in zip(self.before.outputs, vb, va, masks_b, dc_aware, dc_strict):
                if b is a:
                    continue
                diff = b ^ a
                full = U64(T.mask(o.term.width))
                strict_bad |= np.broadcast_to((diff & ~ds & full) != 0, (n,))
                aware_bad |= np.broadcast_to((diff & ~(m | da) & full) != 0, (n,))
        return aware_bad, strict_bad


def brute_force_equiv(before: BlockSemantics, after: BlockSemantics, mode: str = AWARE,
                      width_budget: int = DEFAULT_BUDGET) -> EquivResult:
    """Exhaustive check over every input assignment; the ground-truth oracle."""
    mode = normalize_mode(mode)
    start = time.perf_counter()
    inputs = unify_inputs(before, after)
    bits = sum(t.bits for t in inputs)
    if bits > width_budget:
        raise BudgetExceeded(f"{bits} input bits exceed the budget of {width_budget}")
    total = 1 << bits
    pe = _PairEvaluator(before, after)
    chunk = 1 << min(bits, CHUNK_BITS)
    first_aware = first_strict = None
    done = 0
    for lo in range(0, total, chunk):
        n = min(chunk, total - lo)
        aware_bad, strict_bad = pe.mismatches(lane_env(inputs, lo, n), n)
        done += n
        if first_strict is None and strict_bad.any():
            first_strict = lo + int(np.argmax(strict_bad))
        if aware_bad.any():
            first_aware = lo + int(np.argmax(aware_bad))
            break
        if mode == STRICT and first_strict is not None:
            break
    aware = mode == AWARE
    if aware and first_aware is not None:
        verdict, lane = INEQUIVALENT, first_aware
    elif first_strict is not None:
        verdict, lane = (UNSTABLE if aware else INEQUIVALENT), first_strict
    else:
        verdict, lane = EQUIVALENT, None
    cex = None
    if lane is not None:
        assignment = lane_assignment(inputs, lane)
        cex = make_counterexample(before, after, assignment, aware=verdict == INEQUIVALENT and aware)
    elapsed = (time.perf_counter() - start) * 1000
    return EquivResult(verdict, BRUTE, cex, "", elapsed, done)


def check_equivalence(before: BlockSemantics, after: BlockSemantics, mode: str = AWARE,
                      backend: str = "brute", budget: int = DEFAULT_BUDGET,
                      solver: Optional[str] = None, dump_smt: Optional[str] = None,
                      timeout: float = 60.0) -> EquivResult:
    """Decide equivalence with the requested backend ("brute" or "smt")."""
    mode = normalize_mode(mode)
    unify_inputs(before, after)
    if before.terms() == after.terms() and [o.name for o in before.outputs] == \
            [o.name for o in after.outputs]:
        return EquivResult(EQUIVALENT, BRUTE if backend == "brute" else SOLVER)
    if backend in ("smt", "solver", SOLVER):
        from .smt import SolverUnavailable, smt_equiv
        try:
            return smt_equiv(before, after, mode, solver=solver, dump_dir=dump_smt, timeout=timeout)
        except SolverUnavailable as exc:
            reason = str(exc)
            try:
                res = brute_force_equiv(before, after, mode, budget)
            except BudgetExceeded:
                return EquivResult(UNKNOWN, SOLVER, reason=reason)
            res.reason = f"fell back to brute force: {reason}"
            return res
    if backend not in ("brute", BRUTE):
        raise ValueError(f"unknown backend {backend!r}")
    if dump_smt:
        from .smt import dump_script
        dump_script(before, after, mode, dump_smt)
    try:
        return brute_force_equiv(before, after, mode, budget)
    except BudgetExceeded as exc:
        return EquivResult(UNKNOWN, BRUTE, reason=str(exc))
