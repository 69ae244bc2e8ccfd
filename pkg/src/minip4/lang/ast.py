"""MiniP4 abstract syntax.

Nodes are frozen dataclasses.  Source locations ride along on every node but
are excluded from equality, so two trees compare equal iff they have the same
structure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

MAX_WIDTH = 64


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _loc():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class BitType:
    width: int

    def __str__(self) -> str:
        return f"bit<{self.width}>"


@dataclass(frozen=True)
class BoolType:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class NamedType:
    name: str

    def __str__(self) -> str:
        return self.name


Type = Union[BitType, BoolType, NamedType]
BOOL = BoolType()


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Literal:
    value: int
    width: Optional[int] = None  # None: untyped integer, resolved by typecheck
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Name:
    name: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Member:
    expr: "Expr"
    member: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Slice:
    expr: "Expr"
    hi: int
    lo: int
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Cast:
    type: Type
    expr: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Unary:
    op: str  # "~", "!", "-"
    expr: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class IsValid:
    expr: "Expr"
    loc: Optional[Loc] = _loc()


Expr = Union[Literal, BoolLit, Name, Member, Slice, Cast, Unary, Binary, Ternary, IsValid]

ARITH_OPS = ("+", "-", "*")
BITWISE_OPS = ("&", "|", "^")
SHIFT_OPS = ("<<", ">>")
EQUALITY_OPS = ("==", "!=")
RELATIONAL_OPS = ("<", "<=", ">", ">=")
LOGICAL_OPS = ("&&", "||")
CONCAT_OP = "++"
BINARY_OPS = (ARITH_OPS + BITWISE_OPS + SHIFT_OPS + EQUALITY_OPS + RELATIONAL_OPS
              + LOGICAL_OPS + (CONCAT_OP,))


# ---------------------------------------------------------------- statements

@dataclass(frozen=True)
class Block:
    stmts: tuple = ()
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Assign:
    target: Expr
    value: Expr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    other: Optional["Stmt"] = None
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class VarDecl:
    type: Type
    name: str
    init: Optional[Expr] = None
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class ApplyTable:
    table: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Exit:
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class SetValidity:
    target: Expr
    valid: bool
    loc: Optional[Loc] = _loc()


Stmt = Union[Block, Assign, If, VarDecl, Call, ApplyTable, Exit, SetValidity]


# ---------------------------------------------------------------- declarations

@dataclass(frozen=True)
class FieldDecl:
    type: Type
    name: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class HeaderDecl:
    name: str
    fields: tuple = ()
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class StructDecl:
    name: str
    fields: tuple = ()
    loc: Optional[Loc] = _loc()


DIRECTIONS = ("in", "inout", "out")


@dataclass(frozen=True)
class Param:
    direction: str
    type: Type
    name: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class ActionDecl:
    name: str
    params: tuple = ()
    body: Block = Block()
    loc: Optional[Loc] = _loc()


NO_ACTION = "NoAction"


@dataclass(frozen=True)
class TableDecl:
    name: str
    key: Expr
    actions: tuple = ()
    default_action: str = NO_ACTION
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class ControlDecl:
    name: str
    params: tuple = ()
    actions: tuple = ()
    tables: tuple = ()
    body: Block = Block()
    loc: Optional[Loc] = _loc()

    def action(self, name: str) -> Optional[ActionDecl]:
        for a in self.actions:
            if a.name == name:
                return a
        return None

    def table(self, name: str) -> Optional[TableDecl]:
        for t in self.tables:
            if t.name == name:
                return t
        return None


@dataclass(frozen=True)
class Program:
    type_decls: tuple = ()
    controls: tuple = ()
    package: tuple = ()

    def control(self, name: str) -> Optional[ControlDecl]:
        for c in self.controls:
            if c.name == name:
                return c
        return None

    def pipeline(self) -> tuple:
        """Control names forming the pipeline; all controls when no package is declared."""
        if self.package:
            return self.package
        return tuple(c.name for c in self.controls)

    def type_decl(self, name: str):
        for d in self.type_decls:
            if d.name == name:
                return d
        return None


# ---------------------------------------------------------------- helpers

def lvalue_path(e: Expr) -> Optional[tuple]:
    """Dotted path of a Name/Member chain, or None for anything else."""
    parts = []
    while isinstance(e, Member):
        parts.append(e.member)
        e = e.expr
    if not isinstance(e, Name):
        return None
    parts.append(e.name)
    return tuple(reversed(parts))


def path_expr(path) -> Expr:
    e: Expr = Name(path[0])
    for p in path[1:]:
        e = Member(e, p)
    return e


def children(e: Expr) -> tuple:
    if isinstance(e, (Member, Slice, Cast, Unary, IsValid)):
        return (e.expr,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Ternary):
        return (e.cond, e.then, e.other)
    return ()


def walk_expr(e: Expr):
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def stmt_exprs(s: Stmt) -> tuple:
    """Expressions directly owned by a statement (not those of nested statements)."""
    if isinstance(s, Assign):
        return (s.target, s.value)
    if isinstance(s, If):
        return (s.cond,)
    if isinstance(s, VarDecl):
        return (s.init,) if s.init is not None else ()
    if isinstance(s, Call):
        return tuple(s.args)
    if isinstance(s, SetValidity):
        return (s.target,)
    return ()


def sub_stmts(s: Stmt) -> tuple:
    if isinstance(s, Block):
        return tuple(s.stmts)
    if isinstance(s, If):
        return (s.then,) if s.other is None else (s.then, s.other)
    return ()


def walk_stmts(s: Stmt):
    stack = [s]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(sub_stmts(node)))


def as_block(s: Stmt) -> Block:
    return s if isinstance(s, Block) else Block((s,))
