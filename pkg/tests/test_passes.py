import os

import pytest

from conftest import CORPUS, corpus_files, load
from minip4.equiv import validate_trace
from minip4.lang import parse_program, print_program, typecheck
from minip4.passes import (BUGS, PASS_ORDER, PASSES, UnknownBug, check_bugs, dump_passes,
                           run_pass, run_pipeline)
from minip4.passes.catalog import catalog_toml


def tp_of(body, header="header H { bit<8> a; bit<8> b; bit<8> c; }", params="inout H h",
          actions=""):
    return typecheck(parse_program(f"{header} control c({params}) {{ {actions} apply {{ {body} }} }}"))


def body_text(tp):
    text = print_program(tp.program)
    return text[text.index("apply"):]


def test_constant_fold():
    out = run_pass(tp_of("h.a = 8w2 + 8w3; if (8w1 == 8w2) { h.b = 1; }"), "ConstantFold")
    text = body_text(out)
    assert "8w5" in text and "if" not in text


def test_constant_fold_keeps_dead_branches_with_apply_sites():
    src = ("header H { bit<8> a; } control c(inout H h) { table t { key = h.a : exact; "
           "actions = { NoAction(); } default_action = NoAction(); } "
           "apply { if (false) { t.apply(); } t.apply(); } }")
    out = run_pass(typecheck(parse_program(src)), "ConstantFold")
    assert body_text(out).count("t.apply()") == 2


def test_strength_reduce():
    text = body_text(run_pass(tp_of("h.a = h.a * 8w4; h.b = h.b + 8w0;"), "StrengthReduce"))
    assert "<< 8w2" in text and "+" not in text


def test_side_effect_order_hoists_ternary():
    tp = load("hoist_ternary.mp4l")
    text = body_text(run_pass(tp, "SideEffectOrder"))
    assert "?" not in text and "if (" in text


def test_inline_calls():
    tp = tp_of("f(); f();", actions="action f() { bit<8> t = h.a; h.b = t; }")
    text = body_text(run_pass(tp, "InlineCalls"))
    assert "f()" not in text and text.count("h.b =") == 2


def test_remove_action_params_copies_out_before_exit():
    text = body_text(run_pass(load("exit_copyout.mp4l"), "RemoveActionParams"))
    assert text.index("h.eth_type = tmp_val") < text.index("exit")


def test_predicate_turns_branches_into_muxes():
    text = body_text(run_pass(load("nested_if.mp4l"), "Predicate"))
    assert "if (" not in text and "?" in text


def test_dead_stores():
    text = body_text(run_pass(load("dead_store_chain.mp4l"), "ElimDeadStores"))
    assert "8w1" not in text and "8w2" in text and "8w3" in text


def test_copy_prop():
    text = body_text(run_pass(load("copy_chain.mp4l"), "CopyProp"))
    assert "h.b = h.a" in text


def test_copy_prop_respects_header_validity():
    tp = load("invalid_header_copy.mp4l")
    assert "h.eth.src_addr = h.ipv4.src_addr" in body_text(run_pass(tp, "CopyProp"))
    bugged = body_text(run_pass(tp, "CopyProp", {"CP-INVALID-HDR"}))
    assert "h.eth.src_addr = 8w1" in bugged


def test_trace_starts_with_input_and_skips_no_ops():
    tr = run_pipeline(load("dead_store_chain.mp4l"))
    assert tr.entries[0].pass_name == "input"
    assert [e.pass_name for e in tr][1:] == ["ElimDeadStores"]
    hashes = [e.hash for e in tr]
    assert len(set(hashes)) == len(hashes)


def test_every_trace_element_reparses_to_itself():
    for name in corpus_files():
        for e in run_pipeline(load(name)):
            assert print_program(parse_program(e.text)) == e.text


def test_dump_passes(tmp_path):
    tr = run_pipeline(load("slice_store.mp4l"))
    paths = dump_passes(tr, str(tmp_path))
    assert [os.path.basename(p) for p in paths] == ["00_input.mp4l", "01_RemoveActionParams.mp4l"]
    assert open(paths[1]).read() == tr.entries[1].text


def test_invalid_emission_is_dumped(tmp_path):
    tr = run_pipeline(load("slice_overflow.mp4l"), bugs=["SR-SLICE-OVERFLOW"])
    assert tr.invalid_emit is not None and tr.invalid_emit.pass_name == "StrengthReduce"
    paths = dump_passes(tr, str(tmp_path))
    assert paths[-1].endswith("StrengthReduce.invalid.mp4l")


def test_unknown_bug_and_pass():
    with pytest.raises(UnknownBug):
        check_bugs(["NOPE"])
    with pytest.raises(KeyError):
        run_pipeline(load("copy_chain.mp4l"), order=["Nope"])


def test_catalog_has_one_bug_per_distinct_pass():
    assert len(BUGS) >= 6
    assert len({b.pass_name for b in BUGS.values()}) == len(BUGS)
    assert all(b.pass_name in PASSES for b in BUGS.values())
    for b in BUGS.values():
        assert os.path.exists(os.path.join(CORPUS, b.reference))


def test_shipped_catalog_matches_code():
    shipped = open(os.path.join(CORPUS, "..", "..", "..", "bugs", "catalog.toml")).read()
    assert catalog_toml() in shipped


@pytest.mark.parametrize("bug", list(BUGS))
def test_each_bug_changes_its_reference_and_is_pinned(bug):
    info = BUGS[bug]
    tp = load(info.reference)
    clean = run_pipeline(tp)
    bugged = run_pipeline(tp, bugs=[bug])
    assert [e.hash for e in bugged] != [e.hash for e in clean] or bugged.aborted
    findings = validate_trace(bugged, mode="strict")
    assert findings and findings[0].pass_name == info.pass_name


@pytest.mark.parametrize("name", corpus_files())
def test_clean_pipeline_is_sound_on_corpus(name):
    findings = validate_trace(run_pipeline(load(name)), mode="strict", backend="smt")
    assert findings == []


def test_pass_order_is_the_registry_order():
    assert PASS_ORDER == list(PASSES)
