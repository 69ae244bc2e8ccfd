"""Symbolic semantics of MiniP4 control blocks."""
from . import terms
from .concrete import ConcreteResult, concrete_eval, output_masks
from .evaluate import PATTERN_55, PATTERN_AA, ZERO, Evaluator, MissingAssignment, UndefinedPolicy
from .interp import (BlockSemantics, OutputSpec, UnsupportedConstruct, interpret_block,
                     interpret_program)
from .pretty import format_semantics, term_str

__all__ = [
    "terms", "ConcreteResult", "concrete_eval", "output_masks", "PATTERN_55", "PATTERN_AA", "ZERO",
    "Evaluator", "MissingAssignment", "UndefinedPolicy", "BlockSemantics", "OutputSpec",
    "UnsupportedConstruct", "interpret_block", "interpret_program", "format_semantics",
    "term_str",
]
