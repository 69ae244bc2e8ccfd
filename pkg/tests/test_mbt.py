import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import corpus_files, load
from minip4.equiv import AWARE, SEMANTIC, validate_trace
from minip4.generator import GenConfig, generate_program
from minip4.lang import parse_program, typecheck
from minip4.mbt import run_mbt, run_target
from minip4.mbt.paths import (PathCondition, derive_testcases, enumerate_paths,
                              satisfies)
from minip4.mbt.runner import MbtStats
from minip4.mbt.stf import case_inputs, expect_hex, expect_matches, read_stf, write_stf, StfError
from minip4.passes import BUGS, run_pipeline
from minip4.semantics import PATTERN_AA, ZERO, UndefinedPolicy, interpret_block
from minip4.semantics import terms as T

HDR = "header H { bit<8> a; bit<8> b; }"
PLAIN = "struct H { bit<8> a; bit<8> b; }"  # no validity bit to branch on


def prog(body, hdr=HDR, params="inout H h", extra=""):
    return typecheck(parse_program(f"{hdr} control c({params}) {{ {extra} apply {{ {body} }} }}"))


def derive(tp, control="c", seed=0, policy=ZERO):
    sem = interpret_block(tp, control)
    return sem, derive_testcases(sem, enumerate_paths(sem), seed, policy)


def test_straight_line_has_one_true_path():
    sem = interpret_block(prog("h.b = h.a + 1;", PLAIN), "c")
    paths = enumerate_paths(sem)
    assert len(paths) == 1 and paths[0].cond is T.TRUE and paths[0].controllable


def test_table_apply_gives_three_paths():
    tp = load("table_assign.mp4l")
    sem = interpret_block(tp, "ingress")
    paths = enumerate_paths(sem)
    assert len(paths) == 3 and all(p.controllable for p in paths)
    tests = derive_testcases(sem, paths)
    hits = sorted((tc.inputs["hdr.a"] == tc.inputs["t_table_key_0"],
                   tc.inputs["t_action_0"] == 1) for tc in tests)
    # no match; match running the default; match running assign()
    assert hits == [(False, False), (True, False), (True, True)] or \
        hits == [(False, True), (True, False), (True, True)]
    for tc in tests:
        hit = tc.inputs["hdr.a"] == tc.inputs["t_table_key_0"] and tc.inputs["t_action_0"] == 1
        assert tc.expected["hdr.a"] == (1 if hit else tc.inputs["hdr.a"])


def test_taint_guarded_branch_is_uncontrollable():
    tp = prog("bit<8> u; if (h.a == 1) { if (u == 2) { h.b = 3; } }", PLAIN)
    sem = interpret_block(tp, "c")
    paths = enumerate_paths(sem)
    assert [p.controllable for p in paths] == [False, True]
    notes = []
    tests = derive_testcases(sem, paths, notes=notes)
    assert len(tests) == 1 and tests[0].inputs["h.a"] != 1
    assert "undefined" in notes[0]


def test_equality_guard_solves_both_sides_nonzero():
    sem, tests = derive(prog("if (h.a == 8w3) { h.b = 8w1; } else { h.b = 8w2; }"))
    assert len(tests) == 2
    taken, other = tests
    assert taken.inputs["h.a"] == 3 and taken.expected["h.b"] == 1
    assert other.inputs["h.a"] not in (0, 3) and other.expected["h.b"] == 2
    # the non-zero preference also covers untouched inputs
    assert all(tc.inputs["h.b"] != 0 and tc.inputs["h.$valid"] == 1 for tc in tests)


def test_set_invalid_header_fields_are_all_dont_care():
    tp = load("set_invalid_all.mp4l")
    sem, tests = derive(tp, "ig")
    (tc,) = tests
    assert tc.dont_care["h.eth.dst"] == 0xFF
    assert tc.expected["h.eth.$valid"] == 0 and tc.dont_care["h.eth.$valid"] == 0


def test_invalid_input_header_is_its_own_path():
    # field reads of an invalid header are undefined, so validity splits paths
    sem = interpret_block(prog("h.b = h.a + 1;"), "c")
    paths = enumerate_paths(sem)
    assert [p.choices[0][1] for p in paths] == [True, False]
    tests = derive_testcases(sem, paths)
    assert [tc.inputs["h.$valid"] for tc in tests] == [1, 0]
    assert tests[1].dont_care["h.b"] == 0xFF


def test_false_path_is_dropped():
    sem = interpret_block(prog("h.b = 1;"), "c")
    notes = []
    assert derive_testcases(sem, [PathCondition(T.FALSE, 0)], notes=notes) == []
    assert notes


def test_unreachable_branch_produces_no_test():
    sem = interpret_block(prog("if (h.a == 1) { if (h.a == 2) { h.b = 9; } }"), "c")
    paths = enumerate_paths(sem)
    tests = derive_testcases(sem, paths)
    assert len(tests) == 2
    assert all(tc.expected["h.b"] != 9 for tc in tests)


def test_limit_truncates():
    body = " ".join(f"if (h.a[{i}:{i}] == 1) {{ h.b = h.b + 1; }}" for i in range(5))
    sem = interpret_block(prog(body, PLAIN), "c")
    assert len(enumerate_paths(sem)) == 32
    cut = enumerate_paths(sem, limit=4)
    assert len(cut) == 4 and cut.truncated


# ---------------------------------------------------------------- target


def test_unoptimized_program_passes_its_own_tests():
    tp = load("table_two_actions.mp4l")
    for ctl in tp.program.pipeline():
        sem, tests = derive(tp, ctl)
        assert tests
        assert all(run_target(tp, tc).passed for tc in tests)


def test_slice_alias_bug_fails_on_upper_byte():
    tp = load("slice_store.mp4l")
    trace = run_pipeline(tp, bugs=("DSE-SLICE-ALIAS",))
    _, tests = derive(tp, "ig")
    r = run_target(trace.final, tests[0])
    assert r.status == "fail"
    assert r.actual["h.eth_type"] >> 8 != 0xFF


def test_masked_undefined_output_passes_regardless():
    tp = load("undefined_local.mp4l")
    sem, tests = derive(tp, "ig")
    hit = [tc for tc in tests if tc.inputs["h.a"] == 3]
    assert hit and hit[0].dont_care["h.a"] == 0xFF
    for policy in (ZERO, PATTERN_AA):
        assert run_target(tp, hit[0], policy).passed


def test_missing_output_is_a_reject():
    sem, (tc,) = derive(prog("h.b = 1;"))
    tc.expected["ghost"] = 0
    assert run_target(prog("h.b = 1;"), tc).status == "reject"


def test_mismatch_reports_actual_values():
    sem, (tc,) = derive(prog("h.b = 1;"))
    r = run_target(prog("h.b = 2;"), tc)
    assert r.status == "fail" and r.actual["h.b"] == 2 and "h.b" in r.reason


def test_dual_policy_exposes_only_the_matching_pattern():
    # the "compiled" version lost an initializer: under zero fill it still agrees
    before = prog("bit<8> v = 0; h.b = v;")
    after = prog("bit<8> v; h.b = v;")
    sem, (tc,) = derive(before)
    assert run_target(after, tc, ZERO).passed
    r = run_target(after, tc, PATTERN_AA)
    assert r.status == "fail" and r.actual["h.b"] == 0xAA
    # and the other way round: a value that happens to equal 0xAA
    before = prog("bit<8> v = 0xAA; h.b = v;")
    sem, (tc,) = derive(before)
    assert run_target(after, tc, PATTERN_AA).passed
    assert run_target(after, tc, ZERO).status == "fail"


# ---------------------------------------------------------------- run_mbt


def test_exit_copyout_bug_found_end_to_end():
    tp = load("exit_copyout.mp4l")
    findings = run_mbt(tp, bugs=("RAP-EXIT-SKIP-COPYOUT",))
    assert len(findings) == 1
    f = findings[0]
    assert f.kind == SEMANTIC and f.pass_name is None
    assert f.result.counterexample.after_out["h.eth_type"] != 0xFFFF
    assert f.result.counterexample.before_out["h.eth_type"] == 0xFFFF


@pytest.mark.parametrize("name", corpus_files())
def test_clean_pipeline_over_corpus(name):
    tp = load(name)
    stats = MbtStats()
    assert run_mbt(tp, program=name, stats=stats) == []
    assert stats.failed == 0


@pytest.mark.parametrize("bug", list(BUGS))
def test_mbt_findings_are_also_found_by_validation(bug):
    for seed in range(40):
        tp = generate_program(GenConfig(seed=seed))
        trace = run_pipeline(tp, bugs=(bug,))
        mbt = run_mbt(tp, trace=trace, seed=seed)
        if any(f.kind == SEMANTIC for f in mbt):
            tv = validate_trace(trace, mode=AWARE)
            assert any(f.kind == SEMANTIC for f in tv), seed


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_paths_are_sound_and_tests_self_consistent(seed):
    tp = generate_program(GenConfig(seed=seed))
    for ctl in tp.program.pipeline():
        sem = interpret_block(tp, ctl)
        paths = enumerate_paths(sem)
        for tc in derive_testcases(sem, paths, seed):
            hit = [p.path_id for p in paths if satisfies(p.cond, tc.inputs)]
            assert hit == [tc.path_id]
            assert run_target(tp, tc).passed


# ---------------------------------------------------------------- STF


def test_stf_roundtrip():
    tp = load("table_slice_key.mp4l")
    for ctl in tp.program.pipeline():
        sem, tests = derive(tp, ctl, seed=3)
        cases = read_stf(write_stf(sem, tests))
        assert len(cases) == len(tests)
        for case, tc in zip(cases, tests):
            assert (case.control, case.path_id, case.seed) == (ctl, tc.path_id, 3)
            assert case_inputs(sem, case) == tc.inputs
            assert case.expect == expect_hex(sem, tc.expected, tc.dont_care)


def test_expect_wildcards_whole_nibbles_only():
    sem = interpret_block(prog("h.b = 1;", "header H { bit<8> a; bit<8> b; }"), "c")
    # outputs: $valid (1 bit), a, b -> 17 bits, padded to 20
    text = expect_hex(sem, {"h.$valid": 1, "h.a": 0x12, "h.b": 0x34},
                      {"h.a": 0xF0, "h.b": 0x01})
    assert text == "1*234"
    assert expect_matches(text, "1f234") and not expect_matches(text, "1f235")


def test_stf_rejects_garbage():
    with pytest.raises(StfError):
        read_stf("packet zz\n")
