"""Canonical MiniP4 pretty-printer.  parse_program(print_program(p)) == p."""
from __future__ import annotations

from typing import List

from . import ast as A

INDENT = "    "

_ATOMS = (A.Literal, A.BoolLit, A.Name, A.Member, A.Slice, A.IsValid)


def print_type(t: A.Type) -> str:
    return str(t)


def print_expr(e: A.Expr) -> str:
    if isinstance(e, A.Literal):
        return str(e.value) if e.width is None else f"{e.width}w{e.value}"
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.Name):
        return e.name
    if isinstance(e, A.Member):
        return f"{_postfix_base(e.expr)}.{e.member}"
    if isinstance(e, A.Slice):
        return f"{_postfix_base(e.expr)}[{e.hi}:{e.lo}]"
    if isinstance(e, A.IsValid):
        return f"{_postfix_base(e.expr)}.isValid()"
    if isinstance(e, A.Cast):
        return f"({print_type(e.type)}){_operand(e.expr, unary=True)}"
    if isinstance(e, A.Unary):
        return f"{e.op}{_operand(e.expr, unary=True)}"
    if isinstance(e, A.Binary):
        return f"{_operand(e.left)} {e.op} {_operand(e.right)}"
    if isinstance(e, A.Ternary):
        return f"{_operand(e.cond)} ? {_operand(e.then)} : {_operand(e.other)}"
    raise TypeError(f"not an expression: {e!r}")


def _postfix_base(e: A.Expr) -> str:
    if isinstance(e, (A.Name, A.Member, A.Slice, A.Literal)):
        return print_expr(e)
    return f"({print_expr(e)})"


def _operand(e: A.Expr, unary: bool = False) -> str:
    if isinstance(e, _ATOMS):
        return print_expr(e)
    if not unary and isinstance(e, (A.Unary, A.Cast)):
        return print_expr(e)
    return f"({print_expr(e)})"


def _stmt_lines(s: A.Stmt, ind: str) -> List[str]:
    if isinstance(s, A.Block):
        if not s.stmts:
            return [ind + "{}"]
        lines = [ind + "{"]
        for sub in s.stmts:
            lines.extend(_stmt_lines(sub, ind + INDENT))
        lines.append(ind + "}")
        return lines
    if isinstance(s, A.Assign):
        return [f"{ind}{print_expr(s.target)} = {print_expr(s.value)};"]
    if isinstance(s, A.VarDecl):
        init = "" if s.init is None else f" = {print_expr(s.init)}"
        return [f"{ind}{print_type(s.type)} {s.name}{init};"]
    if isinstance(s, A.Call):
        args = ", ".join(print_expr(a) for a in s.args)
        return [f"{ind}{s.name}({args});"]
    if isinstance(s, A.ApplyTable):
        return [f"{ind}{s.table}.apply();"]
    if isinstance(s, A.Exit):
        return [ind + "exit;"]
    if isinstance(s, A.SetValidity):
        method = "setValid" if s.valid else "setInvalid"
        return [f"{ind}{_postfix_base(s.target)}.{method}();"]
    if isinstance(s, A.If):
        lines = _attach(f"{ind}if ({print_expr(s.cond)}) ", s.then, ind)
        if s.other is not None:
            if lines[-1].strip() == "}":
                lines[-1] = lines[-1] + " else "
                tail = _attach("", s.other, ind)
                lines[-1] = lines[-1] + tail[0].lstrip()
                lines.extend(tail[1:])
            else:
                lines.extend(_attach(f"{ind}else ", s.other, ind))
        return lines
    raise TypeError(f"not a statement: {s!r}")


def _attach(prefix: str, s: A.Stmt, ind: str) -> List[str]:
    """Lines for `prefix <s>`, keeping a block's brace on the prefix line."""
    if isinstance(s, (A.Block, A.If)):
        sub = _stmt_lines(s, ind)
        return [prefix + sub[0].lstrip()] + sub[1:]
    return [prefix.rstrip()] + _stmt_lines(s, ind + INDENT)


def print_stmt(s: A.Stmt, indent: int = 0) -> str:
    return "\n".join(_stmt_lines(s, INDENT * indent))


def _params(params) -> str:
    return ", ".join(f"{p.direction} {print_type(p.type)} {p.name}" for p in params)


def print_program(p: A.Program) -> str:
    out: List[str] = []
    for d in p.type_decls:
        kw = "header" if isinstance(d, A.HeaderDecl) else "struct"
        out.append(f"{kw} {d.name} {{")
        for f in d.fields:
            out.append(f"{INDENT}{print_type(f.type)} {f.name};")
        out.append("}")
    for c in p.controls:
        out.append(f"control {c.name}({_params(c.params)}) {{")
        for a in c.actions:
            body = _stmt_lines(a.body, INDENT)
            out.append(f"{INDENT}action {a.name}({_params(a.params)}) {body[0].lstrip()}")
            out.extend(body[1:])
        for t in c.tables:
            out.append(f"{INDENT}table {t.name} {{")
            out.append(f"{INDENT * 2}key = {print_expr(t.key)} : exact;")
            acts = " ".join(f"{a}();" for a in t.actions)
            out.append(f"{INDENT * 2}actions = {{ {acts} }}" if acts else f"{INDENT * 2}actions = {{}}")
            out.append(f"{INDENT * 2}default_action = {t.default_action}();")
            out.append(f"{INDENT}}}")
        body = _stmt_lines(c.body, INDENT)
        out.append(f"{INDENT}apply {body[0].lstrip()}")
        out.extend(body[1:])
        out.append("}")
    if p.package:
        out.append(f"package main({', '.join(p.package)});")
    return "\n".join(out) + "\n"
