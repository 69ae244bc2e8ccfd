"""Recursive-descent parser for MiniP4 source text (grammar in docs/grammar.md)."""
from __future__ import annotations

import re
from typing import List, NamedTuple, Optional

from . import ast as A
from .errors import ParseError

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n\f\v]+)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<wint>\d+[wW](?:0[xX][0-9a-fA-F]+|0[bB][01]+|\d+))
  | (?P<int>0[xX][0-9a-fA-F]+|0[bB][01]+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><<|>>|<=|>=|==|!=|&&|\|\||\+\+|[{}()\[\];:,.=<>+\-*&|^~!?])
""", re.VERBOSE | re.DOTALL)

KEYWORDS = {
    "header", "struct", "control", "action", "table", "key", "exact", "actions",
    "default_action", "apply", "if", "else", "exit", "bit", "bool", "true",
    "false", "in", "inout", "out", "package",
}

# binding power of binary operators, C-like
_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5, "==": 6, "!=": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7, "<<": 8, ">>": 8, "++": 9,
    "+": 10, "-": 10, "*": 11,
}

MAX_NESTING = 200


class Token(NamedTuple):
    kind: str  # "int", "wint", "ident", "kw", "op", "eof"
    text: str
    loc: A.Loc


def _parse_int(text: str) -> int:
    t = text.lower()
    if t.startswith("0x"):
        return int(t[2:], 16)
    if t.startswith("0b"):
        return int(t[2:], 2)
    return int(t, 10)


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        loc = A.Loc(line, pos - line_start + 1)
        if m is None:
            if text.startswith("/*", pos):
                raise ParseError("unterminated comment", loc)
            raise ParseError(f"unexpected character {text[pos]!r}", loc)
        kind = m.lastgroup
        chunk = m.group()
        if kind in ("int", "wint", "op"):
            tokens.append(Token(kind, chunk, loc))
        elif kind == "ident":
            tokens.append(Token("kw" if chunk in KEYWORDS else "ident", chunk, loc))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", A.Loc(line, pos - line_start + 1)))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.depth = 0

    # -------------------------------------------------------- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected '{text}'")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            self.error("expected identifier")
        self.i += 1
        return t.text

    def int_value(self) -> int:
        t = self.tok
        if t.kind != "int":
            self.error("expected integer constant")
        self.i += 1
        return _parse_int(t.text)

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{msg}, found {found}", t.loc)

    def nest(self):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise ParseError("nesting too deep", self.tok.loc)

    def unnest(self):
        self.depth -= 1

    # -------------------------------------------------------- declarations

    def program(self) -> A.Program:
        type_decls, controls, package = [], [], None
        while self.tok.kind != "eof":
            if self.at("header") or self.at("struct"):
                type_decls.append(self.type_decl())
            elif self.at("control"):
                controls.append(self.control())
            elif self.at("package"):
                if package is not None:
                    self.error("duplicate package declaration")
                package = self.package()
            else:
                self.error("expected declaration")
        return A.Program(tuple(type_decls), tuple(controls), package or ())

    def package(self) -> tuple:
        self.expect("package")
        self.ident()
        self.expect("(")
        names = []
        if not self.at(")"):
            names.append(self.ident())
            while self.accept(","):
                names.append(self.ident())
        self.expect(")")
        self.expect(";")
        return tuple(names)

    def type_decl(self):
        loc = self.tok.loc
        is_header = self.tok.text == "header"
        self.i += 1
        name = self.ident()
        self.expect("{")
        fields = []
        while not self.accept("}"):
            floc = self.tok.loc
            ty = self.type_ref()
            fname = self.ident()
            self.expect(";")
            fields.append(A.FieldDecl(ty, fname, loc=floc))
        cls = A.HeaderDecl if is_header else A.StructDecl
        return cls(name, tuple(fields), loc=loc)

    def type_ref(self) -> A.Type:
        if self.accept("bit"):
            self.expect("<")
            width = self.int_value()
            self.expect(">")
            return A.BitType(width)
        if self.accept("bool"):
            return A.BOOL
        if self.tok.kind == "ident":
            return A.NamedType(self.ident())
        self.error("expected type")

    def params(self) -> tuple:
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.param())
            while self.accept(","):
                params.append(self.param())
        self.expect(")")
        return tuple(params)

    def param(self) -> A.Param:
        loc = self.tok.loc
        if self.tok.kind == "kw" and self.tok.text in A.DIRECTIONS:
            direction = self.tok.text
            self.i += 1
        else:
            self.error("expected parameter direction (in, inout, out)")
        ty = self.type_ref()
        return A.Param(direction, ty, self.ident(), loc=loc)

    def control(self) -> A.ControlDecl:
        loc = self.expect("control").loc
        name = self.ident()
        params = self.params()
        self.expect("{")
        actions, tables = [], []
        while True:
            if self.at("action"):
                actions.append(self.action())
            elif self.at("table"):
                tables.append(self.table())
            else:
                break
        self.expect("apply")
        body = self.block()
        self.expect("}")
        return A.ControlDecl(name, params, tuple(actions), tuple(tables), body, loc=loc)

    def action(self) -> A.ActionDecl:
        loc = self.expect("action").loc
        name = self.ident()
        params = self.params()
        return A.ActionDecl(name, params, self.block(), loc=loc)

    def table(self) -> A.TableDecl:
        loc = self.expect("table").loc
        name = self.ident()
        self.expect("{")
        self.expect("key")
        self.expect("=")
        key = self.expr()
        self.expect(":")
        self.expect("exact")
        self.expect(";")
        self.expect("actions")
        self.expect("=")
        self.expect("{")
        acts = []
        while not self.accept("}"):
            acts.append(self.ident())
            if self.accept("("):
                self.expect(")")
            self.expect(";")
        self.expect("default_action")
        self.expect("=")
        default = self.ident()
        if self.accept("("):
            self.expect(")")
        self.expect(";")
        self.expect("}")
        return A.TableDecl(name, key, tuple(acts), default, loc=loc)

    # -------------------------------------------------------- statements

    def block(self) -> A.Block:
        loc = self.expect("{").loc
        self.nest()
        stmts = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            stmts.append(self.stmt())
        self.unnest()
        return A.Block(tuple(stmts), loc=loc)

    def stmt(self) -> A.Stmt:
        t = self.tok
        loc = t.loc
        if self.at("{"):
            return self.block()
        if self.accept(";"):
            return A.Block((), loc=loc)
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.nest()
            then = self.stmt()
            other = self.stmt() if self.accept("else") else None
            self.unnest()
            return A.If(cond, then, other, loc=loc)
        if self.accept("exit"):
            self.expect(";")
            return A.Exit(loc=loc)
        if self.at("bit") or self.at("bool"):
            ty = self.type_ref()
            name = self.ident()
            init = self.expr() if self.accept("=") else None
            self.expect(";")
            return A.VarDecl(ty, name, init, loc=loc)
        if t.kind != "ident":
            self.error("expected statement")
        if self.peek().kind == "op" and self.peek().text == "(":
            name = self.ident()
            self.expect("(")
            args = []
            if not self.at(")"):
                args.append(self.expr())
                while self.accept(","):
                    args.append(self.expr())
            self.expect(")")
            self.expect(";")
            return A.Call(name, tuple(args), loc=loc)
        target = self.lvalue()
        if self.at("("):
            if isinstance(target, A.Member) and target.member == "apply" \
                    and isinstance(target.expr, A.Name):
                self.expect("(")
                self.expect(")")
                self.expect(";")
                return A.ApplyTable(target.expr.name, loc=loc)
            if isinstance(target, A.Member) and target.member in ("setValid", "setInvalid"):
                self.expect("(")
                self.expect(")")
                self.expect(";")
                return A.SetValidity(target.expr, target.member == "setValid", loc=loc)
            self.error("unexpected method call")
        self.expect("=")
        value = self.expr()
        self.expect(";")
        return A.Assign(target, value, loc=loc)

    def lvalue(self) -> A.Expr:
        loc = self.tok.loc
        e: A.Expr = A.Name(self.ident(), loc=loc)
        while True:
            if self.accept("."):
                mloc = self.tok.loc
                e = A.Member(e, self._member_name(), loc=mloc)
            elif self.at("["):
                e = self.slice_suffix(e)
            else:
                return e

    def _member_name(self) -> str:
        t = self.tok
        if t.kind in ("ident", "kw"):
            self.i += 1
            return t.text
        self.error("expected member name")

    def slice_suffix(self, e: A.Expr) -> A.Slice:
        loc = self.expect("[").loc
        hi = self.int_value()
        self.expect(":")
        lo = self.int_value()
        self.expect("]")
        return A.Slice(e, hi, lo, loc=loc)

    # -------------------------------------------------------- expressions

    def expr(self) -> A.Expr:
        self.nest()
        loc = self.tok.loc
        cond = self.binary(1)
        if self.accept("?"):
            then = self.expr()
            self.expect(":")
            other = self.expr()
            cond = A.Ternary(cond, then, other, loc=loc)
        self.unnest()
        return cond

    def binary(self, min_prec: int) -> A.Expr:
        left = self.unary()
        while True:
            t = self.tok
            prec = _PRECEDENCE.get(t.text) if t.kind == "op" else None
            if prec is None or prec < min_prec:
                return left
            self.i += 1
            right = self.binary(prec + 1)
            left = A.Binary(t.text, left, right, loc=t.loc)

    def unary(self) -> A.Expr:
        t = self.tok
        if t.kind == "op" and t.text in ("~", "!", "-"):
            self.i += 1
            self.nest()
            operand = self.unary()
            self.unnest()
            return A.Unary(t.text, operand, loc=t.loc)
        if self.at("(") and self.peek().kind == "kw" and self.peek().text in ("bit", "bool"):
            self.i += 1
            ty = self.type_ref()
            self.expect(")")
            self.nest()
            operand = self.unary()
            self.unnest()
            return A.Cast(ty, operand, loc=t.loc)
        return self.postfix(self.primary())

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "wint":
            self.i += 1
            w, v = re.split("[wW]", t.text, maxsplit=1)
            return A.Literal(_parse_int(v), int(w), loc=t.loc)
        if t.kind == "int":
            self.i += 1
            return A.Literal(_parse_int(t.text), None, loc=t.loc)
        if self.accept("true"):
            return A.BoolLit(True, loc=t.loc)
        if self.accept("false"):
            return A.BoolLit(False, loc=t.loc)
        if t.kind == "ident":
            self.i += 1
            return A.Name(t.text, loc=t.loc)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected expression")

    def postfix(self, e: A.Expr) -> A.Expr:
        while True:
            if self.at("."):
                loc = self.tok.loc
                self.i += 1
                name = self._member_name()
                if name == "isValid" and self.at("("):
                    self.expect("(")
                    self.expect(")")
                    e = A.IsValid(e, loc=loc)
                else:
                    e = A.Member(e, name, loc=loc)
            elif self.at("["):
                e = self.slice_suffix(e)
            else:
                return e


def parse_program(text) -> A.Program:
    """Parse MiniP4 source.  Raises ParseError on any malformed input."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"source is not valid UTF-8 ({exc.reason})", A.Loc(1, 1)) from None
    try:
        return Parser(text).program()
    except RecursionError:
        raise ParseError("nesting too deep", A.Loc(1, 1)) from None


def parse_expr(text: str) -> A.Expr:
    p = Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error("trailing input")
    return e
