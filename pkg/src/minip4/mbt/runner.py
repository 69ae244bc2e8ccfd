"""End-to-end model-based testing of one program."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from ..equiv.core import INEQUIVALENT, Counterexample, EquivResult
from ..equiv.validate import CRASH, INVALID_EMIT, SEMANTIC, Finding
from ..lang.typecheck import TypedProgram
from ..passes.pipeline import PassTrace, run_pipeline
from ..semantics import ZERO, UndefinedPolicy, interpret_block
from .paths import DEFAULT_LIMIT, TestCase, derive_testcases, enumerate_paths
from .stf import write_stf
from .target import TargetCrash, run_target

BACKEND = "ModelBasedTest"


@dataclass
class MbtStats:
    paths: int = 0
    uncontrollable: int = 0
    truncated: int = 0
    tests: int = 0
    passed: int = 0
    failed: int = 0
    rejected: int = 0
    notes: List[str] = field(default_factory=list)
    stf: Dict[str, str] = field(default_factory=dict)  # control -> STF text


def run_mbt(tp: TypedProgram, bugs: Iterable[str] = (), policy: UndefinedPolicy = ZERO,
            limit: int = DEFAULT_LIMIT, seed: int = 0, program: str = "<input>",
            trace: Optional[PassTrace] = None, order: Optional[Sequence[str]] = None,
            stats: Optional[MbtStats] = None) -> List[Finding]:
    """Derive tests from the original program and run them on the compiled one.

    A pass trace may be handed in to avoid compiling twice.  The first
    failing test of each control becomes a Semantic finding; no pass is named
    because the test only sees the end result.
    """
    stats = stats if stats is not None else MbtStats()
    if trace is None:
        trace = run_pipeline(tp, order=order, bugs=tuple(bugs))
    if trace.crash is not None:
        return [Finding(CRASH, program, trace.crash.pass_name, message=str(trace.crash),
                        seed=seed, backend=BACKEND)]
    if trace.invalid_emit is not None:
        return [Finding(INVALID_EMIT, program, trace.invalid_emit.pass_name,
                        message=str(trace.invalid_emit), seed=seed, backend=BACKEND)]
    final = trace.final
    findings: List[Finding] = []
    for ctl in tp.program.pipeline():
        t0 = time.perf_counter()
        sem = interpret_block(tp, ctl)
        paths = enumerate_paths(sem, limit)
        stats.paths += len(paths)
        stats.uncontrollable += sum(not p.controllable for p in paths)
        stats.truncated += paths.truncated
        tests = derive_testcases(sem, paths, seed, policy, stats.notes)
        stats.tests += len(tests)
        stats.stf[ctl] = write_stf(sem, tests)
        for tc in tests:
            try:
                r = run_target(final, tc, policy)
            except TargetCrash as exc:
                findings.append(Finding(CRASH, program, None, message=f"target crashed: {exc}",
                                        control=ctl, seed=seed, backend=BACKEND))
                break
            if r.status == "reject":
                stats.rejected += 1
                stats.notes.append(f"{ctl} path {tc.path_id}: rejected ({r.reason})")
                continue
            if r.passed:
                stats.passed += 1
                continue
            stats.failed += 1
            ms = (time.perf_counter() - t0) * 1000
            names = _cared_outputs(sem, tc)
            cex = Counterexample(dict(tc.inputs), str(policy),
                                 {k: tc.expected[k] for k in names},
                                 {k: r.actual[k] for k in names if k in r.actual})
            res = EquivResult(INEQUIVALENT, BACKEND, cex, reason=r.reason, elapsed_ms=ms)
            findings.append(Finding(SEMANTIC, program, None, res,
                                    message=f"path {tc.path_id}: {r.reason}", control=ctl,
                                    seed=seed, backend=BACKEND, ms=ms))
            break
    return findings


def _cared_outputs(sem, tc: TestCase) -> List[str]:
    """Outputs with at least one bit the test actually checks."""
    return [o.name for o in sem.outputs
            if tc.dont_care.get(o.name, 0) != (1 << o.bits) - 1]
