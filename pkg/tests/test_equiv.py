import os

import pytest
from hypothesis import given, settings, strategies as st

from conftest import load, needs_solver
from minip4.equiv import (AWARE, EQUIVALENT, INEQUIVALENT, STRICT, UNKNOWN, UNSTABLE,
                          SignatureMismatch, brute_force_equiv, check_equivalence, emit_smt,
                          replays, validate_trace)
from minip4.lang import parse_program, typecheck
from minip4.passes import run_pipeline
from minip4.semantics import interpret_block
from oracles import brute_truth

HDR = "header H { bit<6> a; bit<6> b; }"


def sem(body, hdr=HDR, params="inout H h"):
    return interpret_block(typecheck(parse_program(
        f"{hdr} control c({params}) {{ apply {{ {body} }} }}")), "c")


# expression pairs over h.a (6 bits) with their Python meaning
PAIRS = [
    ("h.b = h.a * 6w2;", lambda a: (a * 2) & 63, "h.b = h.a << 1;", lambda a: (a << 1) & 63),
    ("h.b = h.a + 6w1;", lambda a: (a + 1) & 63, "h.b = h.a - 6w63;", lambda a: (a - 63) & 63),
    ("h.b = h.a & 6w7;", lambda a: a & 7, "h.b = h.a[2:0] ++ 3w0;", lambda a: (a & 7) << 3),
    ("h.b = h.a ^ h.a;", lambda a: 0, "h.b = 0;", lambda a: 0),
    ("h.b = h.a > 6w40 ? 6w1 : 6w2;", lambda a: 1 if a > 40 else 2,
     "h.b = h.a >= 6w40 ? 6w1 : 6w2;", lambda a: 1 if a >= 40 else 2),
]


@pytest.mark.parametrize("before,bf,after,af", PAIRS)
def test_brute_force_matches_python_enumeration(before, bf, after, af):
    truth = brute_truth(bf, af, 6)
    r = brute_force_equiv(sem(before), sem(after), STRICT)
    assert (r.verdict == EQUIVALENT) == (truth == [])
    if truth:
        assert r.counterexample.inputs["h.a"] in truth
        assert replays(sem(before), sem(after), r.counterexample, aware=False)


def test_lowest_failing_input_is_reported_first():
    r = brute_force_equiv(sem("h.b = h.a;"), sem("h.b = h.a == 6w5 ? 6w0 : h.a;"), AWARE)
    assert r.verdict == INEQUIVALENT
    assert r.counterexample.inputs["h.a"] == 5 and r.counterexample.inputs["h.$valid"] == 1


def test_taint_only_difference_is_unstable():
    before = sem("bit<6> u; h.b = u;")
    after = sem("h.b = 0;")
    assert brute_force_equiv(before, after, AWARE).verdict == UNSTABLE
    assert brute_force_equiv(before, after, STRICT).verdict == INEQUIVALENT


def test_defined_bit_turning_undefined_is_caught_in_aware_mode():
    before = sem("h.b = 0;")
    after = sem("bit<6> u; h.b = u;")
    assert brute_force_equiv(before, after, AWARE).verdict == INEQUIVALENT


def test_one_bit_undefined_difference_needs_both_patterns():
    # 0xAA truncated to one bit is 0 like the zero policy; only 0x55 exposes this
    hdr = "header H { bit<1> a; bit<1> b; }"
    before = sem("bit<1> u; h.b = u;", hdr)
    after = sem("h.b = 0;", hdr)
    assert brute_force_equiv(before, after, STRICT).verdict == INEQUIVALENT


def test_invalid_header_fields_are_ignored():
    s = "header H { bit<6> a; } struct S { H x; }"
    before = sem("s.x.setInvalid(); s.x.a = 1;", s, "inout S s")
    after = sem("s.x.setInvalid(); s.x.a = 2;", s, "inout S s")
    assert brute_force_equiv(before, after, STRICT).verdict == EQUIVALENT


def test_signature_mismatch():
    other = sem("", "header G { bit<6> z; }", "inout G h")
    with pytest.raises(SignatureMismatch):
        check_equivalence(sem(""), other)


def test_budget_gives_unknown():
    big = "header H { bit<32> a; bit<32> b; }"
    r = check_equivalence(sem("h.b = h.a;", big), sem("h.b = h.a + 0;", big))
    assert r.verdict == EQUIVALENT  # identical terms need no enumeration
    r = check_equivalence(sem("h.b = h.a;", big), sem("h.b = h.a * 1 + h.b * 0;", big))
    assert r.verdict == EQUIVALENT
    r = check_equivalence(sem("h.b = h.a;", big), sem("h.b = h.a ^ 32w1;", big))
    assert r.verdict == UNKNOWN


def test_smt_script_is_self_contained():
    text = emit_smt(sem("h.b = h.a;"), sem("h.b = h.a + 1;"), STRICT)
    assert text.startswith("(set-logic QF_BV)") and "(check-sat)" in text


@needs_solver
@pytest.mark.parametrize("before,bf,after,af", PAIRS)
def test_solver_agrees_with_brute_force(before, bf, after, af):
    for mode in (STRICT, AWARE):
        b = brute_force_equiv(sem(before), sem(after), mode)
        s = check_equivalence(sem(before), sem(after), mode, backend="smt")
        assert s.verdict == b.verdict
        if s.counterexample is not None:
            assert replays(sem(before), sem(after), s.counterexample, aware=mode == AWARE)


@needs_solver
def test_solver_handles_wide_programs():
    tr = run_pipeline(load("wide_fields.mp4l"), bugs=["PRED-NESTED-IF"])
    assert validate_trace(tr, backend="smt") == []


def test_dump_smt_writes_scripts(tmp_path):
    tr = run_pipeline(load("slice_store.mp4l"), bugs=["DSE-SLICE-ALIAS"])
    validate_trace(tr, dump_smt=str(tmp_path))
    assert any(f.endswith(".smt2") for f in os.listdir(tmp_path))


def test_regression_slice_store_counterexample():
    tr = run_pipeline(load("slice_store.mp4l"), bugs=["DSE-SLICE-ALIAS"])
    (f,) = validate_trace(tr)
    assert f.kind == "Semantic" and f.pass_name == "ElimDeadStores"
    assert f.result.counterexample.after_out["h.eth_type"] >> 8 != 0xFF


def test_regression_invalid_header_copy_is_unstable_in_aware_mode():
    tr = run_pipeline(load("invalid_header_copy.mp4l"), bugs=["CP-INVALID-HDR"])
    kinds = [f.kind for f in validate_trace(tr, mode=AWARE)]
    assert kinds == ["Unstable"]
    assert [f.kind for f in validate_trace(tr, mode=STRICT)] == ["Semantic"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 63), st.integers(0, 63))
def test_constant_difference_found_exactly(k, j):
    before = sem(f"h.b = h.a == 6w{k} ? 6w1 : 6w0;")
    after = sem(f"h.b = h.a == 6w{j} ? 6w1 : 6w0;")
    r = brute_force_equiv(before, after, STRICT)
    assert (r.verdict == EQUIVALENT) == (k == j)
    if k != j:
        assert r.counterexample.inputs["h.a"] == min(k, j)
