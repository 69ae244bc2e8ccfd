"""Acceptance criteria 1-7, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v` or directly as a script.
The full suite takes a few minutes; criterion 1 alone runs a 500 program
campaign.
"""
import os
import random
import re
import sys
import time

import numpy as np
import pytest

from conftest import CORPUS, corpus_files, load, solver_available
from minip4.campaign import CampaignConfig, run_campaign
from minip4.equiv import (AWARE, INEQUIVALENT, STRICT, brute_force_equiv, replays,
                          validate_trace)
from minip4.equiv.core import unify_inputs
from minip4.equiv.smt import smt_equiv
from minip4.generator import GenConfig, generate_program
from minip4.lang import parse_program, print_program, typecheck
from minip4.mbt import execute, run_mbt
from minip4.passes import BUGS, run_pipeline
from minip4.semantics import ZERO, concrete_eval, interpret_block
from minip4.semantics.evaluate import lane_assignment
from oracles import sweep_mismatch

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return emit


def test_criterion_1_seeded_bug_detection(report):
    cfg = CampaignConfig(count=500, master_seed=42, bugs=tuple(BUGS), workers=os.cpu_count() or 1)
    rep = run_campaign(cfg)
    missed = [b for b, r in rep.detection.items() if r.detecting == 0]
    rate = rep.pinpoint_rate
    ok = not missed and rate >= 0.95 and rep.wall_clock_s < 600 and not rep.errors
    counts = ", ".join(f"{b}={r.detecting}" for b, r in rep.detection.items())
    report(1, ok, f"detections {counts}; pinpoint {rate:.1%}; {rep.wall_clock_s:.0f}s; "
                  f"missed {missed or 'none'}; job errors {len(rep.errors)}")
    assert ok


def test_criterion_2_regressions(report):
    checks = {}
    tr = run_pipeline(load("hoist_ternary.mp4l"))
    seo = [e.text for e in tr if e.pass_name == "SideEffectOrder"][0]
    checks["hoisted ternary"] = seo[seo.index("apply"):] == (
        "apply {\n"
        "        bit<48> _t0;\n"
        "        if (h.mac_src > 48w2) {\n"
        "            _t0 = 48w1;\n"
        "        } else {\n"
        "            _t0 = 48w2;\n"
        "        }\n"
        "        h.mac_src = _t0 + h.mac_src;\n"
        "    }\n"
        "}\n")

    f = validate_trace(run_pipeline(load("slice_store.mp4l"), bugs=["DSE-SLICE-ALIAS"]))
    checks["slice alias"] = (
        [(x.kind, x.pass_name) for x in f] == [("Semantic", "ElimDeadStores")]
        and f[0].result.counterexample.before_out["h.eth_type"] >> 8 == 0xFF
        and f[0].result.counterexample.after_out["h.eth_type"] >> 8 != 0xFF)

    f = validate_trace(run_pipeline(load("invalid_header_copy.mp4l"), bugs=["CP-INVALID-HDR"]),
                       mode=AWARE)
    checks["unstable copy"] = [(x.kind, x.pass_name) for x in f] == [("Unstable", "CopyProp")]

    f = validate_trace(run_pipeline(load("exit_copyout.mp4l"), bugs=["RAP-EXIT-SKIP-COPYOUT"]))
    checks["exit copy-out"] = (
        [(x.kind, x.pass_name) for x in f] == [("Semantic", "RemoveActionParams")]
        and f[0].result.counterexample.before_out["h.eth_type"] == 0xFFFF
        and f[0].result.counterexample.after_out["h.eth_type"] != 0xFFFF)

    ok = all(checks.values())
    report(2, ok, ", ".join(f"{k} {'ok' if v else 'WRONG'}" for k, v in checks.items()))
    assert ok


def test_criterion_3_clean_pipeline_soundness(report):
    blocking, mbt_fail, tests = [], [], 0
    for seed in range(1000):
        tp = generate_program(GenConfig(seed=seed))
        trace = run_pipeline(tp)
        blocking += [(seed, f.kind, f.pass_name) for f in validate_trace(trace, mode=AWARE)
                     if f.blocking]
        for f in run_mbt(tp, trace=trace, seed=seed):
            mbt_fail.append((seed, f.kind))
    ok = not blocking and not mbt_fail
    report(3, ok, f"1000 programs: {len(blocking)} blocking validation findings, "
                  f"{len(mbt_fail)} MBT failures {(blocking + mbt_fail)[:3]}")
    assert ok


LITERAL = re.compile(r"\b(\d+)w(\d+)\b")


def _mutants(limit, budget=20):
    """Programs paired with a copy that has one literal changed."""
    rng = random.Random(4)
    seed = 10_000
    while limit:
        tp = generate_program(GenConfig(seed=seed))
        seed += 1
        text = print_program(tp.program)
        lits = list(LITERAL.finditer(text))
        if not lits:
            continue
        m = rng.choice(lits)
        width = int(m.group(1))
        value = (int(m.group(2)) + rng.randint(1, (1 << width) - 1)) % (1 << width) \
            if width > 1 else 1 - int(m.group(2))
        mutant = typecheck(parse_program(f"{text[:m.start()]}{width}w{value}{text[m.end():]}"))
        for ctl in tp.program.pipeline():
            sa, sb = interpret_block(tp, ctl), interpret_block(mutant, ctl)
            if sum(t.bits for t in unify_inputs(sa, sb)) <= budget and limit:
                yield sa, sb
                limit -= 1


def _pairs(limit=250, budget=20):
    """Distinct before/after block pairs from real pass traces, some bug-toggled."""
    toggles = [()] + [(b,) for b in BUGS]
    seed = 0
    while True:
        tp = generate_program(GenConfig(seed=seed))
        for bugs in toggles:
            trace = run_pipeline(tp, bugs=bugs)
            for a, b in zip(trace.entries, trace.entries[1:]):
                if a.hash == b.hash:
                    continue
                for ctl in a.program.program.pipeline():
                    sa, sb = interpret_block(a.program, ctl), interpret_block(b.program, ctl)
                    if sum(t.bits for t in unify_inputs(sa, sb)) <= budget:
                        yield sa, sb
                        limit -= 1
                        if limit == 0:
                            return
        seed += 1


def test_criterion_4_oracle_agreement(report):
    if not solver_available():
        report(4, False, "no GAUNTLET_SOLVER configured; solver agreement not checked")
        pytest.skip("no solver")
    pairs = list(_pairs()) + list(_mutants(250))
    disagree, bad_replay, ineq, checks = [], 0, 0, 0
    for i, (sa, sb) in enumerate(pairs):
        for mode in (AWARE, STRICT):
            b = brute_force_equiv(sa, sb, mode)
            s = smt_equiv(sa, sb, mode)  # no shortcut, no brute-force fallback
            checks += 1
            if b.verdict != s.verdict:
                disagree.append((i, mode, b.verdict, s.verdict))
            for r in (b, s):
                if r.verdict == INEQUIVALENT:
                    ineq += 1
                    bad_replay += not replays(sa, sb, r.counterexample, aware=mode == AWARE)
    ok = len(pairs) == 500 and not disagree and bad_replay == 0
    report(4, ok, f"{len(pairs)} pairs, {checks} checks per backend, {len(disagree)} "
                  f"disagreements, {ineq} counterexamples, {bad_replay} failed replays")
    assert ok


def test_criterion_5_semantics_vs_execution(report):
    mismatches, too_wide, spot = [], 0, 0
    rng = np.random.default_rng(5)
    for seed in range(200):
        tp = generate_program(GenConfig(seed=seed))
        for ctl in tp.program.pipeline():
            sem = interpret_block(tp, ctl)
            too_wide += sem.input_bits > 16
            # spot checks through the single-packet entry points
            for lane in rng.integers(0, 1 << sem.input_bits, size=4):
                inputs = lane_assignment(sem.inputs, int(lane))
                want = concrete_eval(sem, inputs, ZERO)
                got = execute(tp, ctl, inputs, 1, ZERO)
                spot += 1
                for name, v in want.values.items():
                    if (int(got[name][0]) ^ v) & ~want.dont_care[name]:
                        mismatches.append((seed, ctl, name, inputs))
        err = sweep_mismatch(tp, ZERO)
        if err:
            mismatches.append((seed, err))
    ok = not mismatches and too_wide == 0
    report(5, ok, f"200 programs swept exhaustively plus {spot} single-packet checks; "
                  f"{len(mismatches)} mismatches; {too_wide} blocks over 16 input bits")
    assert ok


def test_criterion_6_roundtrip(report):
    bad = []
    sources = []
    for name in corpus_files():
        with open(os.path.join(CORPUS, name)) as fh:
            sources.append((name, parse_program(fh.read())))
    sources += [(f"seed {s}", generate_program(GenConfig(seed=s)).program) for s in range(1000)]
    entries = 0
    for name, p in sources:
        if parse_program(print_program(p)) != p:
            bad.append(name)
    for name in corpus_files():
        for e in run_pipeline(load(name)):
            entries += 1
            try:
                typecheck(parse_program(e.text))
            except Exception as exc:  # noqa: BLE001 - any failure counts
                bad.append(f"{name}/{e.pass_name}: {exc}")
    for s in range(0, 1000, 5):
        for e in run_pipeline(generate_program(GenConfig(seed=s))):
            entries += 1
            try:
                typecheck(parse_program(e.text))
            except Exception as exc:  # noqa: BLE001
                bad.append(f"seed {s}/{e.pass_name}: {exc}")
    ok = not bad
    report(6, ok, f"{len(sources)} programs round-tripped, {entries} trace elements reparsed; "
                  f"failures {bad[:3] or 'none'}")
    assert ok


def test_criterion_7_performance(report):
    from minip4.lang import ast as A
    cfg = GenConfig(seed=7, min_statements_per_block=500, max_statements_per_block=500,
                    max_depth=1, max_controls=1, allow_exit=False, target_input_bits=10**6,
                    max_paths=float("inf"), max_attempts=1)
    tp = generate_program(cfg)
    ctl = tp.program.controls[0]
    top = len(ctl.body.stmts)
    n = sum(1 for s in A.walk_stmts(ctl.body) if not isinstance(s, A.Block))
    t0 = time.perf_counter()
    interpret_block(tp, ctl.name)
    t_interp = time.perf_counter() - t0

    hdr = "header H { bit<8> a; bit<8> b; bit<3> c; }"
    before = typecheck(parse_program(
        f"{hdr} control c(inout H h) {{ apply {{ h.b = h.a * 8w3 + (bit<8>)h.c; }} }}"))
    after = typecheck(parse_program(
        f"{hdr} control c(inout H h) {{ apply {{ h.b = (h.a << 1) + h.a + (bit<8>)h.c; }} }}"))
    sa, sb = interpret_block(before, "c"), interpret_block(after, "c")
    bits = sum(t.bits for t in unify_inputs(sa, sb))
    t0 = time.perf_counter()
    r = brute_force_equiv(sa, sb, STRICT)
    t_brute = time.perf_counter() - t0
    ok = top >= 500 and t_interp < 5 and bits == 20 and r.verdict == "Equivalent" and t_brute < 30
    report(7, ok, f"interpret_block on {top} top-level ({n} total) statements "
                  f"{t_interp:.2f}s; "
                  f"brute force over {bits} bits {t_brute:.2f}s ({r.verdict})")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
