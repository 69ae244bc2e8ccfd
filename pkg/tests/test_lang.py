import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS, corpus_files, load
from minip4.generator import GenConfig, generate_program
from minip4.lang import (ParseError, ShiftWidthError, TypeCheckError, ast as A, parse_expr,
                         parse_program, print_expr, print_program, typecheck)


def roundtrip(text):
    p = parse_program(text)
    once = print_program(p)
    twice = print_program(parse_program(once))
    return once, twice


@pytest.mark.parametrize("name", corpus_files())
def test_corpus_roundtrip_is_a_fixed_point(name):
    with open(f"{CORPUS}/{name}") as fh:
        once, twice = roundtrip(fh.read())
    assert once == twice
    typecheck(parse_program(once))


def test_corpus_has_forty_programs():
    assert len(corpus_files()) >= 40


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_generated_programs_roundtrip(seed):
    tp = generate_program(GenConfig(seed=seed))
    once = print_program(tp.program)
    assert print_program(parse_program(once)) == once


def test_precedence_is_printed_back_unambiguously():
    e = parse_expr("a + b * c == d && !e || f")
    assert print_expr(parse_expr(print_expr(e))) == print_expr(e)
    assert isinstance(e, A.Binary) and e.op == "||"


def test_width_literals():
    e = parse_expr("16w0xFFFF")
    assert (e.value, e.width) == (0xFFFF, 16)
    assert parse_expr("0b101").value == 5


def test_parse_error_has_location():
    with pytest.raises(ParseError) as info:
        parse_program("control c(inout bit<8> x) { apply { x = ; } }")
    assert info.value.loc.line == 1
    assert "expected expression" in str(info.value)


def test_unterminated_comment():
    with pytest.raises(ParseError):
        parse_program("/* nothing ends")


def test_shift_of_unsized_literal_by_a_variable_is_rejected():
    tp = parse_program(open(f"{CORPUS}/reject/shift_width.mp4l").read())
    with pytest.raises(ShiftWidthError):
        typecheck(tp)


@pytest.mark.parametrize("src", [
    "header H { bool b; } control c(inout H h) { apply { } }",
    "header H { bit<8> a; } control c(inout H h) { apply { h.a = 8w1 + 4w1; } }",
    "header H { bit<8> a; } control c(inout H h) { apply { h.a = h.a[8:0]; } }",
    "header H { bit<8> a; } control c(inout H h) { apply { h.b = 1; } }",
    "header H { bit<8> a; } control c(inout H h) { apply { if (h.a) { } } }",
    "header H { bit<8> a; } control c(inout H h) { action f(inout bit<8> x) { } "
    "apply { f(h.a + 1); } }",
])
def test_type_errors(src):
    with pytest.raises(TypeCheckError):
        typecheck(parse_program(src))


def test_literal_width_is_inferred_from_context():
    tp = typecheck(parse_program(
        "header H { bit<12> a; } control c(inout H h) { apply { h.a = h.a + 1; } }"))
    assign = tp.program.controls[0].body.stmts[0]
    assert assign.value.right.width == 12


def test_corpus_programs_load():
    for name in corpus_files():
        assert load(name).program.controls
