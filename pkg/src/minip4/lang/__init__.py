"""MiniP4 language core: AST, parser, printer and type checker."""
from . import ast
from .errors import MiniP4Error, ParseError, ShiftWidthError, TypeCheckError
from .parser import parse_expr, parse_program
from .printer import print_expr, print_program, print_stmt
from .typecheck import TypedProgram, TypeInfo, typecheck

__all__ = [
    "ast", "MiniP4Error", "ParseError", "ShiftWidthError", "TypeCheckError",
    "parse_expr", "parse_program", "print_expr", "print_program", "print_stmt",
    "TypedProgram", "TypeInfo", "typecheck",
]
