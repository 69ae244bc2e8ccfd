"""Fuzzing campaign: generate, compile, validate and test many programs.

Each job is fully determined by its program seed (master seed + job index),
the generator config and the toggle set, so results do not depend on the
number of workers.  Findings are written in job order.
"""
from __future__ import annotations

import json
import multiprocessing
import os
import time
import traceback
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from .equiv import AWARE, FINDING_KINDS, validate_trace
from .generator import GenConfig, generate_program
from .mbt import run_mbt
from .passes import BUGS, check_bugs, run_pipeline
from .semantics import ZERO, UndefinedPolicy


@dataclass(frozen=True)
class CampaignConfig:
    count: int = 100
    master_seed: int = 0
    bugs: tuple = ()
    gen: GenConfig = field(default_factory=GenConfig)
    mode: str = AWARE
    backend: str = "brute"
    policy: UndefinedPolicy = ZERO
    workers: int = 1
    mbt: bool = True
    path_limit: int = 64


@dataclass
class BugRow:
    pass_name: str
    tried: int = 0
    triggered: int = 0
    detecting: int = 0
    pinpointed: int = 0
    first_detection: Optional[int] = None


@dataclass
class JobResult:
    index: int
    seed: int
    findings: List[dict]
    bugs: Dict[str, dict]
    ms: float
    error: Optional[str] = None


@dataclass
class CampaignReport:
    master_seed: int
    count: int
    bugs: List[str]
    totals: Dict[str, int]
    detection: Dict[str, BugRow]
    errors: List[dict]
    wall_clock_s: float
    mean_program_ms: float
    max_program_ms: float
    seeds: List[int]

    @property
    def all_detected(self) -> bool:
        return all(r.detecting > 0 for r in self.detection.values())

    @property
    def pinpoint_rate(self) -> float:
        det = sum(r.detecting for r in self.detection.values())
        return 1.0 if det == 0 else sum(r.pinpointed for r in self.detection.values()) / det

    @property
    def blocking(self) -> int:
        return sum(self.totals.get(k, 0) for k in ("Crash", "Semantic", "InvalidEmit"))

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "detection"}
        d["seeds"] = {"first": self.seeds[0], "last": self.seeds[-1]} if self.seeds else {}
        d["detection"] = {b: asdict(r) for b, r in self.detection.items()}
        d["all_detected"] = self.all_detected
        d["pinpoint_rate"] = round(self.pinpoint_rate, 4)
        d["wall_clock_s"] = round(self.wall_clock_s, 3)
        d["mean_program_ms"] = round(self.mean_program_ms, 3)
        d["max_program_ms"] = round(self.max_program_ms, 3)
        return d


def _finding_record(f, index: int) -> dict:
    d = f.to_dict()
    d.pop("ms", None)  # timings would break byte-identical reruns
    d["job"] = index
    return d


def run_job(cfg: CampaignConfig, index: int) -> JobResult:
    seed = cfg.master_seed + index
    t0 = time.perf_counter()
    name = f"gen_{seed}.mp4l"
    try:
        tp = generate_program(cfg.gen.with_seed(seed))
        findings = []
        trace = run_pipeline(tp, bugs=cfg.bugs)
        findings += validate_trace(trace, mode=cfg.mode, backend=cfg.backend, program=name,
                                   seed=seed)
        if cfg.mbt and not trace.aborted:
            findings += run_mbt(tp, policy=cfg.policy, limit=cfg.path_limit, seed=seed,
                                program=name, trace=trace)
        rows = {}
        if cfg.bugs:
            clean = [e.hash for e in run_pipeline(tp)]
            for b in cfg.bugs:
                rows[b] = _attribute(tp, b, clean, cfg, name, seed)
        return JobResult(index, seed, [_finding_record(f, index) for f in findings], rows,
                         (time.perf_counter() - t0) * 1000)
    except Exception as exc:  # a broken job must not sink the campaign
        return JobResult(index, seed, [], {}, (time.perf_counter() - t0) * 1000,
                         f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=4)}")


def _attribute(tp, bug: str, clean: List[str], cfg: CampaignConfig, name: str, seed: int) -> dict:
    """Run with one toggle alone: did it change anything, and who gets blamed?"""
    trace = run_pipeline(tp, bugs=(bug,))
    if not trace.aborted and [e.hash for e in trace] == clean:
        return {"triggered": False, "detected": False, "pass": None}
    found = validate_trace(trace, mode=cfg.mode, backend=cfg.backend, program=name, seed=seed)
    blamed = found[0].pass_name if found else None
    return {"triggered": True, "detected": bool(found), "pass": blamed}


def _worker(args):
    cfg, index = args
    return run_job(cfg, index)


def iter_jobs(cfg: CampaignConfig):
    jobs = [(cfg, i) for i in range(cfg.count)]
    if cfg.workers <= 1 or cfg.count <= 1:
        for j in jobs:
            yield _worker(j)
        return
    ctx = multiprocessing.get_context("fork" if os.name == "posix" else "spawn")
    with ctx.Pool(cfg.workers) as pool:
        # imap keeps job order while idle workers pull the next job
        yield from pool.imap(_worker, jobs, chunksize=1)


def run_campaign(cfg: CampaignConfig, findings_out=None, progress=None) -> CampaignReport:
    """Run every job; stream findings as JSON lines to `findings_out` in job order."""
    cfg = _normalized(cfg)
    start = time.perf_counter()
    totals = {k: 0 for k in FINDING_KINDS}
    rows = {b: BugRow(BUGS[b].pass_name) for b in cfg.bugs}
    errors, times, seeds = [], [], []
    for res in iter_jobs(cfg):
        seeds.append(res.seed)
        times.append(res.ms)
        if res.error is not None:
            errors.append({"job": res.index, "seed": res.seed, "error": res.error})
        for d in res.findings:
            totals[d["kind"]] = totals.get(d["kind"], 0) + 1
            if findings_out is not None:
                findings_out.write(json.dumps(d, sort_keys=True) + "\n")
        for b, r in res.bugs.items():
            row = rows[b]
            row.tried += 1
            row.triggered += r["triggered"]
            if r["detected"]:
                row.detecting += 1
                row.pinpointed += r["pass"] == row.pass_name
                if row.first_detection is None:
                    row.first_detection = res.index
        if progress is not None:
            progress(res)
    if findings_out is not None:
        findings_out.flush()
    wall = time.perf_counter() - start
    return CampaignReport(cfg.master_seed, cfg.count, list(cfg.bugs), totals, rows, errors, wall,
                          sum(times) / len(times) if times else 0.0, max(times, default=0.0),
                          seeds)


def _normalized(cfg: CampaignConfig) -> CampaignConfig:
    bugs = tuple(b for b in BUGS if b in check_bugs(cfg.bugs))
    return CampaignConfig(cfg.count, cfg.master_seed, bugs, cfg.gen, cfg.mode, cfg.backend,
                          cfg.policy, max(1, cfg.workers), cfg.mbt, cfg.path_limit)


def expand_bugs(ids: Iterable[str]) -> List[str]:
    """`all` stands for the whole catalog."""
    out: List[str] = []
    for i in ids:
        out.extend(BUGS if i == "all" else [i])
    return sorted(check_bugs(out), key=list(BUGS).index)
