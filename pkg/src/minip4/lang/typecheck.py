"""MiniP4 type checker.

`typecheck` validates a parsed program and returns a TypedProgram whose
program is *elaborated*: every untyped integer literal has been given the
width its context demands.  Downstream modules can therefore type any
expression bottom-up with `TypeInfo.expr_type`.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from . import ast as A
from .errors import ShiftWidthError, TypeCheckError


class _IntType:
    """Type of an integer literal whose width is not yet known."""

    def __repr__(self):
        return "int"

    __str__ = __repr__


INT = _IntType()


def amount_width(value: int) -> int:
    """Width given to an untyped shift amount."""
    return 8 if value < 256 else A.MAX_WIDTH


class TypeInfo:
    """Header/struct layout queries shared by the checker and the back ends."""

    def __init__(self, program: A.Program):
        self.decls = {d.name: d for d in program.type_decls}

    def is_header(self, t) -> bool:
        return isinstance(t, A.NamedType) and isinstance(self.decls.get(t.name), A.HeaderDecl)

    def is_struct(self, t) -> bool:
        return isinstance(t, A.NamedType) and isinstance(self.decls.get(t.name), A.StructDecl)

    def field_type(self, t, member: str):
        if not isinstance(t, A.NamedType):
            return None
        decl = self.decls.get(t.name)
        if decl is None:
            return None
        for f in decl.fields:
            if f.name == member:
                return f.type
        return None

    def leaves(self, t, prefix: tuple = ()) -> List[Tuple[tuple, A.Type, Optional[tuple]]]:
        """Flattened scalar leaves of a value of type t: (path, leaf type, owning header path)."""
        out = []
        self._leaves(t, prefix, None, out)
        return out

    def _leaves(self, t, prefix, header, out):
        if isinstance(t, (A.BitType, A.BoolType)):
            out.append((prefix, t, header))
            return
        decl = self.decls[t.name]
        if isinstance(decl, A.HeaderDecl):
            header = prefix
        for f in decl.fields:
            self._leaves(f.type, prefix + (f.name,), header, out)

    def headers(self, t, prefix: tuple = ()) -> List[tuple]:
        """Paths of all headers contained in a value of type t, in layout order."""
        if self.is_header(t):
            return [prefix]
        if self.is_struct(t):
            out = []
            for f in self.decls[t.name].fields:
                out.extend(self.headers(f.type, prefix + (f.name,)))
            return out
        return []

    def width(self, t) -> int:
        """Bit width of a scalar type (bool counts as 1)."""
        return t.width if isinstance(t, A.BitType) else 1

    def expr_type(self, e: A.Expr, lookup: Callable[[str], A.Type]) -> A.Type:
        """Type of an elaborated expression."""
        if isinstance(e, A.Literal):
            return A.BitType(e.width)
        if isinstance(e, (A.BoolLit, A.IsValid)):
            return A.BOOL
        if isinstance(e, A.Name):
            return lookup(e.name)
        if isinstance(e, A.Member):
            return self.field_type(self.expr_type(e.expr, lookup), e.member)
        if isinstance(e, A.Slice):
            return A.BitType(e.hi - e.lo + 1)
        if isinstance(e, A.Cast):
            return e.type
        if isinstance(e, A.Unary):
            return self.expr_type(e.expr, lookup)
        if isinstance(e, A.Binary):
            if e.op in A.EQUALITY_OPS or e.op in A.RELATIONAL_OPS or e.op in A.LOGICAL_OPS:
                return A.BOOL
            lt = self.expr_type(e.left, lookup)
            if e.op == A.CONCAT_OP:
                return A.BitType(lt.width + self.expr_type(e.right, lookup).width)
            return lt
        if isinstance(e, A.Ternary):
            return self.expr_type(e.then, lookup)
        raise TypeError(f"not an expression: {e!r}")


@dataclass
class TypedProgram:
    program: A.Program
    types: Dict[int, object] = field(default_factory=dict, repr=False, compare=False)
    lvalue_classes: Dict[tuple, bool] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.info = TypeInfo(self.program)

    def control(self, name: str) -> A.ControlDecl:
        c = self.program.control(name)
        if c is None:
            raise KeyError(name)
        return c

    def __eq__(self, other):
        return isinstance(other, TypedProgram) and self.program == other.program


# --------------------------------------------------------------------- scopes

@dataclass
class _Var:
    type: object
    writable: bool


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.parent = parent
        self.vars: Dict[str, _Var] = {}

    def lookup(self, name: str) -> Optional[_Var]:
        s = self
        while s is not None:
            if name in s.vars:
                return s.vars[name]
            s = s.parent
        return None

    def declare(self, name: str, var: _Var, loc):
        if self.lookup(name) is not None:
            raise TypeCheckError(f"declaration of '{name}' shadows an existing name", loc)
        self.vars[name] = var


def _fits(value: int, width: int) -> bool:
    return 0 <= value < (1 << width)


def _same(a, b) -> bool:
    return type(a) is type(b) and a == b


class _Checker:
    def __init__(self, program: A.Program):
        self.program = program
        self.info = TypeInfo(program)
        self.types: Dict[int, object] = {}
        self.lvalue_classes: Dict[tuple, bool] = {}
        self.control: Optional[A.ControlDecl] = None
        self.in_action = False

    # ----------------------------------------------------------- declarations

    def check_type(self, t, loc, allow_named=True):
        if isinstance(t, A.BitType):
            if not 1 <= t.width <= A.MAX_WIDTH:
                raise TypeCheckError(f"bit width {t.width} outside 1..{A.MAX_WIDTH}", loc)
        elif isinstance(t, A.NamedType):
            if not allow_named:
                raise TypeCheckError(f"type '{t.name}' not allowed here", loc)
            if t.name not in self.info.decls:
                raise TypeCheckError(f"unknown type '{t.name}'", loc)

    def check_program(self) -> A.Program:
        seen = set()
        for d in self.program.type_decls:
            if d.name in seen:
                raise TypeCheckError(f"duplicate type '{d.name}'", d.loc)
            seen.add(d.name)
        for d in self.program.type_decls:
            names = set()
            for f in d.fields:
                if f.name in names:
                    raise TypeCheckError(f"duplicate field '{f.name}' in '{d.name}'", f.loc)
                names.add(f.name)
                if isinstance(d, A.HeaderDecl):
                    if not isinstance(f.type, A.BitType):
                        raise TypeCheckError("header fields must have bit<N> type", f.loc)
                    self.check_type(f.type, f.loc)
                else:
                    self.check_type(f.type, f.loc)
                    if isinstance(f.type, A.NamedType) and not self.info.is_header(f.type):
                        raise TypeCheckError("struct fields may only nest headers", f.loc)
        names = set()
        controls = []
        for c in self.program.controls:
            if c.name in names or c.name in seen:
                raise TypeCheckError(f"duplicate name '{c.name}'", c.loc)
            names.add(c.name)
            controls.append(self.check_control(c))
        pk = set()
        for n in self.program.package:
            if n not in names:
                raise TypeCheckError(f"package references unknown control '{n}'")
            if n in pk:
                raise TypeCheckError(f"package lists control '{n}' twice")
            pk.add(n)
        return dataclasses.replace(self.program, controls=tuple(controls))

    def check_control(self, c: A.ControlDecl) -> A.ControlDecl:
        self.control = c
        top = _Scope()
        for p in c.params:
            self.check_type(p.type, p.loc)
            top.declare(p.name, _Var(p.type, p.direction != "in"), p.loc)
        for a in c.actions:
            if a.name == A.NO_ACTION:
                raise TypeCheckError("cannot redefine NoAction", a.loc)
            top.declare(a.name, _Var("action", False), a.loc)
        for t in c.tables:
            top.declare(t.name, _Var("table", False), t.loc)
        actions = []
        for a in c.actions:
            scope = _Scope(top)
            for p in a.params:
                self.check_type(p.type, p.loc, allow_named=False)
                scope.declare(p.name, _Var(p.type, p.direction != "in"), p.loc)
            self.in_action = True
            body = self.check_block(a.body, scope)
            self.in_action = False
            actions.append(dataclasses.replace(a, body=body))
        tables = [self.check_table(t, top) for t in c.tables]
        body = self.check_block(c.body, _Scope(top))
        return dataclasses.replace(c, actions=tuple(actions), tables=tuple(tables), body=body)

    def check_table(self, t: A.TableDecl, scope: _Scope) -> A.TableDecl:
        base = t.key.expr if isinstance(t.key, A.Slice) else t.key
        if A.lvalue_path(base) is None:
            raise TypeCheckError("table key must be a field, variable or slice of one", t.key.loc or t.loc)
        key, kt = self.check_expr(t.key, scope, None)
        if not isinstance(kt, A.BitType):
            raise TypeCheckError("table key must have bit<N> type", t.key.loc or t.loc)
        seen = set()
        for name in t.actions:
            if name in seen:
                raise TypeCheckError(f"action '{name}' listed twice in table '{t.name}'", t.loc)
            seen.add(name)
            if name == A.NO_ACTION:
                continue
            a = self.control.action(name)
            if a is None:
                raise TypeCheckError(f"table '{t.name}' references unknown action '{name}'", t.loc)
            if a.params:
                raise TypeCheckError(f"table action '{name}' must not take parameters", t.loc)
        if t.default_action != A.NO_ACTION and t.default_action not in t.actions:
            raise TypeCheckError(f"default action '{t.default_action}' is not in the action list", t.loc)
        return dataclasses.replace(t, key=key)

    # ----------------------------------------------------------- statements

    def check_block(self, b: A.Block, scope: _Scope) -> A.Block:
        inner = _Scope(scope)
        stmts = tuple(self.check_stmt(s, inner) for s in b.stmts)
        return dataclasses.replace(b, stmts=stmts)

    def check_stmt(self, s: A.Stmt, scope: _Scope) -> A.Stmt:
        if isinstance(s, A.Block):
            return self.check_block(s, scope)
        if isinstance(s, A.Assign):
            target, tt = self.check_lvalue(s.target, scope)
            if not isinstance(tt, (A.BitType, A.BoolType)):
                raise TypeCheckError("assignment of aggregate values is not supported", s.loc)
            value = self.coerce(s.value, tt, scope)
            return dataclasses.replace(s, target=target, value=value)
        if isinstance(s, A.If):
            cond = self.coerce(s.cond, A.BOOL, scope)
            then = self.check_stmt(s.then, _Scope(scope))
            other = None if s.other is None else self.check_stmt(s.other, _Scope(scope))
            return dataclasses.replace(s, cond=cond, then=then, other=other)
        if isinstance(s, A.VarDecl):
            self.check_type(s.type, s.loc, allow_named=False)
            init = None if s.init is None else self.coerce(s.init, s.type, scope)
            scope.declare(s.name, _Var(s.type, True), s.loc)
            return dataclasses.replace(s, init=init)
        if isinstance(s, A.Call):
            return self.check_call(s, scope)
        if isinstance(s, A.ApplyTable):
            if self.in_action:
                raise TypeCheckError("tables cannot be applied inside actions", s.loc)
            if self.control.table(s.table) is None:
                raise TypeCheckError(f"unknown table '{s.table}'", s.loc)
            return s
        if isinstance(s, A.Exit):
            return s
        if isinstance(s, A.SetValidity):
            target, tt = self.check_lvalue(s.target, scope)
            if not self.info.is_header(tt):
                raise TypeCheckError("setValid/setInvalid requires a header", s.loc)
            return dataclasses.replace(s, target=target)
        raise TypeCheckError(f"unsupported statement {type(s).__name__}", getattr(s, "loc", None))

    def check_call(self, s: A.Call, scope: _Scope) -> A.Call:
        if self.in_action:
            raise TypeCheckError("action calls inside actions are not supported", s.loc)
        if s.name == A.NO_ACTION:
            params = ()
        else:
            a = self.control.action(s.name)
            if a is None:
                raise TypeCheckError(f"unknown action '{s.name}'", s.loc)
            params = a.params
        if len(params) != len(s.args):
            raise TypeCheckError(
                f"action '{s.name}' expects {len(params)} arguments, got {len(s.args)}", s.loc)
        args = []
        for i, (p, arg) in enumerate(zip(params, s.args)):
            if p.direction == "in":
                args.append(self.coerce(arg, p.type, scope))
                self.lvalue_classes[(self.control.name, id(s), i)] = False
                continue
            try:
                e, t = self.check_lvalue(arg, scope)
            except TypeCheckError as exc:
                raise TypeCheckError(
                    f"argument {i + 1} of '{s.name}' is bound to an {p.direction} parameter "
                    f"and must be a writable lvalue ({exc.message})", arg.loc or s.loc) from None
            if not _same(t, p.type):
                raise TypeCheckError(
                    f"argument {i + 1} of '{s.name}' has type {t}, expected {p.type}", arg.loc or s.loc)
            self.lvalue_classes[(self.control.name, id(s), i)] = True
            args.append(e)
        return dataclasses.replace(s, args=tuple(args))

    def check_lvalue(self, e: A.Expr, scope: _Scope):
        base = e.expr if isinstance(e, A.Slice) else e
        path = A.lvalue_path(base)
        if path is None:
            raise TypeCheckError("not an lvalue", e.loc)
        var = scope.lookup(path[0])
        if var is None or isinstance(var.type, str):
            raise TypeCheckError(f"unknown variable '{path[0]}'", e.loc)
        if not var.writable:
            raise TypeCheckError(f"'{'.'.join(path)}' is read-only", e.loc)
        return self.check_expr(e, scope, None)

    # ----------------------------------------------------------- expressions

    def coerce(self, e: A.Expr, target, scope: _Scope) -> A.Expr:
        e2, t = self.check_expr(e, scope, target if isinstance(target, A.BitType) else None)
        if t is INT:
            raise TypeCheckError(f"cannot use an integer literal as {target}", e.loc)
        if not _same(t, target):
            raise TypeCheckError(f"type mismatch: expected {target}, got {t}", e.loc)
        return e2

    def check_expr(self, e: A.Expr, scope: _Scope, expected):
        e2, t = self._expr(e, scope, expected)
        if t is not INT:
            self.types[id(e2)] = t
        return e2, t

    def _typed(self, e: A.Expr, scope: _Scope, what: str):
        e2, t = self.check_expr(e, scope, None)
        if t is INT:
            raise TypeCheckError(f"cannot infer the width of {what}", e.loc)
        return e2, t

    def _expr(self, e: A.Expr, scope: _Scope, expected):
        if isinstance(e, A.Literal):
            if e.width is None:
                if e.value < 0:
                    raise TypeCheckError("negative literal", e.loc)
                if isinstance(expected, A.BitType):
                    if not _fits(e.value, expected.width):
                        raise TypeCheckError(f"literal {e.value} does not fit in {expected}", e.loc)
                    return dataclasses.replace(e, width=expected.width), expected
                return e, INT
            if not 1 <= e.width <= A.MAX_WIDTH:
                raise TypeCheckError(f"bit width {e.width} outside 1..{A.MAX_WIDTH}", e.loc)
            if not _fits(e.value, e.width):
                raise TypeCheckError(f"literal {e.value} does not fit in bit<{e.width}>", e.loc)
            return e, A.BitType(e.width)
        if isinstance(e, A.BoolLit):
            return e, A.BOOL
        if isinstance(e, A.Name):
            var = scope.lookup(e.name)
            if var is None or isinstance(var.type, str):
                raise TypeCheckError(f"unknown variable '{e.name}'", e.loc)
            return e, var.type
        if isinstance(e, A.Member):
            base, bt = self.check_expr(e.expr, scope, None)
            ft = self.info.field_type(bt, e.member)
            if ft is None:
                raise TypeCheckError(f"type {bt} has no field '{e.member}'", e.loc)
            return dataclasses.replace(e, expr=base), ft
        if isinstance(e, A.Slice):
            base, bt = self._typed(e.expr, scope, "a sliced integer literal")
            if not isinstance(bt, A.BitType):
                raise TypeCheckError(f"cannot slice a value of type {bt}", e.loc)
            if not 0 <= e.lo <= e.hi < bt.width:
                raise TypeCheckError(f"slice [{e.hi}:{e.lo}] out of range for {bt}", e.loc)
            return dataclasses.replace(e, expr=base), A.BitType(e.hi - e.lo + 1)
        if isinstance(e, A.Cast):
            return self._cast(e, scope)
        if isinstance(e, A.Unary):
            if e.op == "!":
                x = self.coerce(e.expr, A.BOOL, scope)
                return dataclasses.replace(e, expr=x), A.BOOL
            x, t = self.check_expr(e.expr, scope, expected)
            if t is INT:
                return e, INT
            if not isinstance(t, A.BitType):
                raise TypeCheckError(f"operator '{e.op}' requires bit<N>, got {t}", e.loc)
            return dataclasses.replace(e, expr=x), t
        if isinstance(e, A.Binary):
            return self._binary(e, scope, expected)
        if isinstance(e, A.Ternary):
            cond = self.coerce(e.cond, A.BOOL, scope)
            (a, ta), (b, tb) = self._unify(e.then, e.other, scope, expected, e.loc)
            if ta is INT:
                return e, INT
            return dataclasses.replace(e, cond=cond, then=a, other=b), ta
        if isinstance(e, A.IsValid):
            base, bt = self.check_expr(e.expr, scope, None)
            if A.lvalue_path(base) is None or not self.info.is_header(bt):
                raise TypeCheckError("isValid() requires a header", e.loc)
            return dataclasses.replace(e, expr=base), A.BOOL
        raise TypeCheckError(f"unsupported expression {type(e).__name__}", getattr(e, "loc", None))

    def _cast(self, e: A.Cast, scope: _Scope):
        target = e.type
        self.check_type(target, e.loc, allow_named=False)
        x, t = self.check_expr(e.expr, scope, target if isinstance(target, A.BitType) else None)
        if t is INT:
            raise TypeCheckError(f"cannot cast an integer literal to {target}", e.loc)
        ok = (isinstance(target, A.BitType) and isinstance(t, A.BitType)) \
            or _same(target, t) \
            or (isinstance(target, A.BitType) and target.width == 1 and isinstance(t, A.BoolType)) \
            or (isinstance(target, A.BoolType) and isinstance(t, A.BitType) and t.width == 1)
        if not ok:
            raise TypeCheckError(f"cannot cast {t} to {target}", e.loc)
        return dataclasses.replace(e, expr=x), target

    def _unify(self, l: A.Expr, r: A.Expr, scope: _Scope, expected, loc):
        """Check two operands that must share a type, resolving untyped literals."""
        a, ta = self.check_expr(l, scope, None)
        b, tb = self.check_expr(r, scope, None)
        if ta is INT and tb is INT:
            if isinstance(expected, A.BitType):
                a, ta = self.check_expr(l, scope, expected)
                b, tb = self.check_expr(r, scope, expected)
            else:
                return (l, INT), (r, INT)
        elif ta is INT:
            a, ta = self._resolve(l, tb, scope)
        elif tb is INT:
            b, tb = self._resolve(r, ta, scope)
        if not _same(ta, tb):
            raise TypeCheckError(f"operand types differ: {ta} vs {tb}", loc)
        return (a, ta), (b, tb)

    def _resolve(self, e: A.Expr, t, scope: _Scope):
        if not isinstance(t, A.BitType):
            raise TypeCheckError(f"cannot use an integer literal as {t}", e.loc)
        return self.check_expr(e, scope, t)

    def _binary(self, e: A.Binary, scope: _Scope, expected):
        op = e.op
        if op in A.LOGICAL_OPS:
            a = self.coerce(e.left, A.BOOL, scope)
            b = self.coerce(e.right, A.BOOL, scope)
            return dataclasses.replace(e, left=a, right=b), A.BOOL
        if op in A.ARITH_OPS or op in A.BITWISE_OPS:
            (a, ta), (b, tb) = self._unify(e.left, e.right, scope, expected, e.loc)
            if ta is INT:
                return e, INT
            if not isinstance(ta, A.BitType):
                raise TypeCheckError(f"operator '{op}' requires bit<N>, got {ta}", e.loc)
            return dataclasses.replace(e, left=a, right=b), ta
        if op in A.EQUALITY_OPS or op in A.RELATIONAL_OPS:
            (a, ta), (b, tb) = self._unify(e.left, e.right, scope, None, e.loc)
            if ta is INT:
                raise TypeCheckError("cannot infer the width of an integer comparison", e.loc)
            if op in A.RELATIONAL_OPS and not isinstance(ta, A.BitType):
                raise TypeCheckError(f"operator '{op}' requires bit<N>, got {ta}", e.loc)
            if isinstance(ta, A.NamedType):
                raise TypeCheckError("aggregate comparison is not supported", e.loc)
            return dataclasses.replace(e, left=a, right=b), A.BOOL
        if op in A.SHIFT_OPS:
            b, tb = self.check_expr(e.right, scope, None)
            if tb is INT:
                b, tb = self.check_expr(e.right, scope, A.BitType(amount_width(e.right.value))) \
                    if isinstance(e.right, A.Literal) else (None, INT)
                if tb is INT:
                    raise TypeCheckError("cannot infer the width of the shift amount", e.loc)
            if not isinstance(tb, A.BitType):
                raise TypeCheckError(f"shift amount must be bit<N>, got {tb}", e.loc)
            a, ta = self.check_expr(e.left, scope, None)
            if ta is INT:
                if not isinstance(e.right, A.Literal):
                    raise ShiftWidthError(
                        "width of shifted integer literal is unknown: shift amount is not a "
                        "compile-time constant", e.loc)
                if not isinstance(expected, A.BitType):
                    return e, INT
                a, ta = self.check_expr(e.left, scope, expected)
            if not isinstance(ta, A.BitType):
                raise TypeCheckError(f"operator '{op}' requires bit<N>, got {ta}", e.loc)
            return dataclasses.replace(e, left=a, right=b), ta
        if op == A.CONCAT_OP:
            a, ta = self._typed(e.left, scope, "a concatenated integer literal")
            b, tb = self._typed(e.right, scope, "a concatenated integer literal")
            if not (isinstance(ta, A.BitType) and isinstance(tb, A.BitType)):
                raise TypeCheckError("'++' requires bit<N> operands", e.loc)
            if ta.width + tb.width > A.MAX_WIDTH:
                raise TypeCheckError(f"concatenation wider than {A.MAX_WIDTH} bits", e.loc)
            return dataclasses.replace(e, left=a, right=b), A.BitType(ta.width + tb.width)
        raise TypeCheckError(f"unknown operator '{op}'", e.loc)


def typecheck(p: A.Program) -> TypedProgram:
    """Check p; raise TypeCheckError (or ShiftWidthError) with a location on failure."""
    checker = _Checker(p)
    try:
        elaborated = checker.check_program()
    except RecursionError:
        raise TypeCheckError("expression nesting too deep") from None
    return TypedProgram(elaborated, checker.types, checker.lvalue_classes)
