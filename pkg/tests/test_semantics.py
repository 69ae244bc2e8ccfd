import pytest

from conftest import corpus_files, load
from minip4.lang import parse_program, typecheck
from minip4.semantics import (PATTERN_AA, ZERO, UndefinedPolicy, concrete_eval, format_semantics,
                              interpret_block, terms as T)
from oracles import sweep_mismatch


def sem_of(src, control="c"):
    return interpret_block(typecheck(parse_program(src)), control)


def test_terms_are_hash_consed():
    x, y = T.var("x", 8), T.var("y", 8)
    assert T.add(x, y) is T.add(x, y)
    assert T.add(x, T.const(8, 0)) is x
    assert T.ite(T.TRUE, x, y) is x
    assert T.extract(T.concat(x, y), 7, 0) is y


def test_boolean_terms_have_width_zero():
    b = T.eq(T.var("x", 4), T.const(4, 3))
    assert b.width == T.BOOL_W and b.bits == 1


def test_exit_still_copies_out():
    sem = interpret_block(load("exit_copyout.mp4l"), "ig")
    assert sem.output("h.eth_type").term is T.const(16, 0xFFFF)


def test_table_becomes_control_plane_symbols():
    sem = interpret_block(load("table_assign.mp4l"), "ingress")
    names = {t.val: t.bits for t in sem.table_inputs}
    assert names == {"t_table_key_0": 8, "t_action_0": 2}
    hit = {"hdr.a": 5, "hdr.b": 0, "t_table_key_0": 5, "t_action_0": 1}
    assert concrete_eval(sem, hit).values["hdr.a"] == 1
    assert concrete_eval(sem, dict(hit, t_table_key_0=6)).values["hdr.a"] == 5
    assert concrete_eval(sem, dict(hit, t_action_0=2)).values["hdr.a"] == 5


def test_out_parameter_starts_undefined():
    sem = sem_of("header H { bit<8> a; } control c(inout H h, out bit<8> o) { apply { } }")
    r = concrete_eval(sem, {"h.$valid": 1, "h.a": 3}, PATTERN_AA)
    assert r.values["o"] == 0xAA and r.dont_care["o"] == 0xFF
    assert r.dont_care["h.a"] == 0


def test_set_valid_on_invalid_header_makes_fields_undefined():
    sem = sem_of("header H { bit<8> a; } struct S { H x; } "
                 "control c(inout S s) { apply { s.x.setValid(); } }")
    was_valid = concrete_eval(sem, {"s.x.$valid": 1, "s.x.a": 9})
    assert was_valid.values["s.x.a"] == 9 and was_valid.dont_care["s.x.a"] == 0
    was_invalid = concrete_eval(sem, {"s.x.$valid": 0, "s.x.a": 9})
    assert was_invalid.dont_care["s.x.a"] == 0xFF
    assert was_invalid.values["s.x.$valid"] == 1


def test_invalid_header_fields_are_dont_care():
    sem = interpret_block(load("set_invalid_all.mp4l"), "ig")
    r = concrete_eval(sem, {"h.eth.$valid": 1, "h.eth.dst": 4})
    assert r.values["h.eth.$valid"] == 0
    assert r.dont_care["h.eth.dst"] == 0xFF


def test_exit_guards_later_writes():
    sem = interpret_block(load("exit_in_branch.mp4l"), "ig")
    assert concrete_eval(sem, {"h.$valid": 1, "h.a": 0, "h.b": 9}).values["h.b"] == 1
    assert concrete_eval(sem, {"h.$valid": 1, "h.a": 4, "h.b": 9}).values["h.b"] == 2


def test_exit_in_action_stops_the_caller():
    sem = interpret_block(load("exit_in_action.mp4l"), "ig")
    small = concrete_eval(sem, {"h.$valid": 1, "h.a": 3, "h.b": 9}).values
    assert (small["h.a"], small["h.b"]) == (3, 9)
    big = concrete_eval(sem, {"h.$valid": 1, "h.a": 30, "h.b": 9}).values
    assert (big["h.a"], big["h.b"]) == (0, 30)


def test_copy_in_copy_out_order():
    # the body writes h.a directly, then copy-out of x overwrites it
    sem = interpret_block(load("action_alias.mp4l"), "ig")
    assert concrete_eval(sem, {"h.$valid": 1, "h.a": 4}).values["h.a"] == 5


def test_policy_parse():
    assert UndefinedPolicy.parse("zero") is ZERO
    p = UndefinedPolicy.parse("pattern:55")
    assert p.value(16) == 0x5555 and p.value(3) == 0b101 and p.value(T.BOOL_W) == 1
    with pytest.raises(ValueError):
        UndefinedPolicy.parse("pattern:1ff")


def test_pretty_printer_shows_ite_structure():
    text = format_semantics(interpret_block(load("table_assign.mp4l"), "ingress"))
    assert "t_table_key_0" in text and "if" in text


@pytest.mark.parametrize("name", corpus_files())
def test_corpus_semantics_match_direct_execution(name):
    tp = load(name)
    if any(interpret_block(tp, c).input_bits > 20 for c in tp.program.pipeline()):
        pytest.skip("too many input bits for an exhaustive sweep")
    for policy in (ZERO, PATTERN_AA):
        assert sweep_mismatch(tp, policy) is None
