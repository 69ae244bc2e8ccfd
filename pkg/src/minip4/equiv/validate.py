"""Pairwise validation of a pass trace, producing findings."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..semantics import interpret_block
from .core import AWARE, INEQUIVALENT, UNKNOWN, UNSTABLE, EquivResult, check_equivalence

CRASH = "Crash"
SEMANTIC = "Semantic"
UNSTABLE_FINDING = "Unstable"
INVALID_EMIT = "InvalidEmit"
FINDING_KINDS = (CRASH, SEMANTIC, UNSTABLE_FINDING, INVALID_EMIT)
BLOCKING = (CRASH, SEMANTIC, INVALID_EMIT)


@dataclass
class Finding:
    kind: str
    program: str
    pass_name: Optional[str]
    result: Optional[EquivResult] = None
    message: str = ""
    control: Optional[str] = None
    seed: Optional[int] = None
    backend: Optional[str] = None
    ms: float = 0.0

    @property
    def blocking(self) -> bool:
        return self.kind in BLOCKING

    def to_dict(self) -> dict:
        cex = self.result.counterexample if self.result is not None else None
        return {
            "kind": self.kind,
            "program": self.program,
            "pass": self.pass_name,
            "control": self.control,
            "counterexample": None if cex is None else cex.to_dict(),
            "message": self.message,
            "seed": self.seed,
            "backend": self.backend,
            "ms": round(self.ms, 3),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class ValidationStats:
    pairs: int = 0
    checks: int = 0
    unknown: List[str] = field(default_factory=list)


def validate_trace(trace, mode: str = AWARE, backend: str = "brute", program: str = "<input>",
                   seed: Optional[int] = None, budget: int = 20, solver: Optional[str] = None,
                   dump_smt: Optional[str] = None,
                   stats: Optional[ValidationStats] = None) -> List[Finding]:
    """Check every consecutive pair of the trace, control by control.

    The first Semantic finding pinpoints the faulty pass and stops the scan;
    Unstable findings are recorded and the scan continues.  A crash or
    rejected emission that cut the trace short is reported last.
    """
    stats = stats if stats is not None else ValidationStats()
    findings: List[Finding] = []
    cache: Dict[int, Dict[str, object]] = {}

    def sems(i: int):
        if i not in cache:
            tp = trace.entries[i].program
            cache[i] = {c: interpret_block(tp, c) for c in tp.program.pipeline()}
        return cache[i]

    semantic = False
    for i in range(1, len(trace.entries)):
        stats.pairs += 1
        before, after = sems(i - 1), sems(i)
        name = trace.entries[i].pass_name
        for ctl, b in before.items():
            a = after.get(ctl)
            if a is None:
                findings.append(Finding(CRASH, program, name, message=f"control {ctl} disappeared",
                                        control=ctl, seed=seed))
                semantic = True
                break
            t0 = time.perf_counter()
            r = check_equivalence(b, a, mode=mode, backend=backend, budget=budget,
                                  solver=solver, dump_smt=dump_smt)
            stats.checks += 1
            ms = (time.perf_counter() - t0) * 1000
            if r.verdict == INEQUIVALENT:
                findings.append(Finding(SEMANTIC, program, name, r, control=ctl, seed=seed,
                                        backend=r.backend, ms=ms))
                semantic = True
                break
            if r.verdict == UNSTABLE:
                findings.append(Finding(UNSTABLE_FINDING, program, name, r, control=ctl, seed=seed,
                                        backend=r.backend, ms=ms))
            elif r.verdict == UNKNOWN:
                stats.unknown.append(f"{name}/{ctl}: {r.reason}")
        if semantic:
            break
    if trace.crash is not None:
        findings.append(Finding(CRASH, program, trace.crash.pass_name, message=str(trace.crash),
                                seed=seed))
    if trace.invalid_emit is not None:
        findings.append(Finding(INVALID_EMIT, program, trace.invalid_emit.pass_name,
                                message=str(trace.invalid_emit), seed=seed))
    return findings
