"""Shared machinery for AST->AST passes."""
from __future__ import annotations

import dataclasses
import re
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Union

from ..lang import ast as A
from ..lang.typecheck import TypedProgram, TypeInfo


class PassCrash(Exception):
    """An internal assertion fired inside a pass."""

    def __init__(self, pass_name: str, message: str):
        super().__init__(f"{pass_name}: {message}")
        self.pass_name = pass_name
        self.message = message


class ReparseFailure(Exception):
    """A pass emitted text that does not parse or typecheck."""

    def __init__(self, pass_name: str, text: str, error: Exception):
        super().__init__(f"{pass_name}: emitted program rejected: {error}")
        self.pass_name = pass_name
        self.text = text
        self.error = error


def pass_assert(cond: bool, pass_name: str, message: str) -> None:
    if not cond:
        raise PassCrash(pass_name, message)


_FRESH_RE = re.compile(r"^_t(\d+)$")


def declared_names(c: A.ControlDecl) -> set:
    """Every identifier bound anywhere in a control."""
    names = {c.name}
    names.update(p.name for p in c.params)
    names.update(a.name for a in c.actions)
    names.update(t.name for t in c.tables)
    bodies = [c.body]
    for a in c.actions:
        names.update(p.name for p in a.params)
        bodies.append(a.body)
    for b in bodies:
        for s in A.walk_stmts(b):
            if isinstance(s, A.VarDecl):
                names.add(s.name)
    return names


class FreshNames:
    """`_t<N>` generator scoped to one control, starting past any existing index."""

    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        top = -1
        for n in self.taken:
            m = _FRESH_RE.match(n)
            if m:
                top = max(top, int(m.group(1)))
        self.next = top + 1

    def __call__(self) -> str:
        while True:
            name = f"_t{self.next}"
            self.next += 1
            if name not in self.taken:
                self.taken.add(name)
                return name

    def reserve(self, preferred: str) -> str:
        """`preferred` if still unused, otherwise a fresh name."""
        if preferred not in self.taken:
            self.taken.add(preferred)
            return preferred
        return self()


StmtResult = Union[A.Stmt, List[A.Stmt]]


class Rewriter:
    """Whole-program rewriter that tracks the types of variables in scope.

    Subclasses override `stmt` and/or `expr`.  `stmt` may return a single
    statement or a list that is spliced into the enclosing block.
    """

    name = "Rewriter"

    def __init__(self, tp: TypedProgram, bugs: FrozenSet[str] = frozenset()):
        self.tp = tp
        self.info: TypeInfo = tp.info
        self.bugs = bugs
        self.scopes: List[Dict[str, A.Type]] = []
        self.control: Optional[A.ControlDecl] = None
        self.fresh: Optional[FreshNames] = None
        self.in_action: Optional[A.ActionDecl] = None

    def bug(self, bug_id: str) -> bool:
        return bug_id in self.bugs

    # --------------------------------------------------------------- scopes

    def lookup(self, name: str) -> A.Type:
        for s in reversed(self.scopes):
            if name in s:
                return s[name]
        raise KeyError(name)

    def declare(self, name: str, t: A.Type) -> None:
        self.scopes[-1][name] = t

    def type_of(self, e: A.Expr) -> A.Type:
        return self.info.expr_type(e, self.lookup)

    def width_of(self, e: A.Expr) -> int:
        t = self.type_of(e)
        return t.width if isinstance(t, A.BitType) else 1

    # --------------------------------------------------------------- drivers

    def run(self, p: A.Program) -> A.Program:
        return dataclasses.replace(p, controls=tuple(self.rewrite_control(c) for c in p.controls))

    def rewrite_control(self, c: A.ControlDecl) -> A.ControlDecl:
        self.control = c
        self.fresh = FreshNames(declared_names(c))
        self.scopes = [{p.name: p.type for p in c.params}]
        actions = []
        for a in c.actions:
            self.in_action = a
            self.scopes.append({p.name: p.type for p in a.params})
            actions.append(dataclasses.replace(a, body=self.block(a.body)))
            self.scopes.pop()
        self.in_action = None
        tables = tuple(self.table(t) for t in c.tables)
        body = self.block(c.body)
        return self.finish_control(dataclasses.replace(c, actions=tuple(actions), tables=tables, body=body))

    def finish_control(self, c: A.ControlDecl) -> A.ControlDecl:
        return c

    def table(self, t: A.TableDecl) -> A.TableDecl:
        return t

    def block(self, b: A.Block) -> A.Block:
        self.scopes.append({})
        out: List[A.Stmt] = []
        for s in b.stmts:
            r = self.stmt(s)
            if isinstance(r, list):
                out.extend(r)
            elif r is not None:
                out.append(r)
        self.scopes.pop()
        return dataclasses.replace(b, stmts=tuple(out))

    def branch(self, s: A.Stmt) -> A.Stmt:
        """Rewrite an if-branch; a non-block branch that grows becomes a block."""
        if isinstance(s, A.Block):
            return self.block(s)
        self.scopes.append({})
        r = self.stmt(s)
        self.scopes.pop()
        if isinstance(r, list):
            return r[0] if len(r) == 1 else A.Block(tuple(r))
        return r

    def stmt(self, s: A.Stmt) -> StmtResult:
        """Default: rewrite expressions, recurse into sub-statements."""
        return self.default_stmt(s)

    def default_stmt(self, s: A.Stmt) -> StmtResult:
        if isinstance(s, A.Block):
            return self.block(s)
        if isinstance(s, A.Assign):
            return dataclasses.replace(s, target=self.lvalue(s.target), value=self.expr(s.value))
        if isinstance(s, A.If):
            cond = self.expr(s.cond)
            then = self.branch(s.then)
            other = None if s.other is None else self.branch(s.other)
            return dataclasses.replace(s, cond=cond, then=then, other=other)
        if isinstance(s, A.VarDecl):
            init = None if s.init is None else self.expr(s.init)
            self.declare(s.name, s.type)
            return dataclasses.replace(s, init=init)
        if isinstance(s, A.Call):
            return dataclasses.replace(s, args=tuple(self.call_args(s)))
        return s

    def call_args(self, s: A.Call) -> List[A.Expr]:
        action = self.control.action(s.name)
        out = []
        for i, arg in enumerate(s.args):
            if action is not None and action.params[i].direction != "in":
                out.append(self.lvalue(arg))
            else:
                out.append(self.expr(arg))
        return out

    def lvalue(self, e: A.Expr) -> A.Expr:
        return e

    def expr(self, e: A.Expr) -> A.Expr:
        return e


def map_expr(e: A.Expr, fn: Callable[[A.Expr], A.Expr]) -> A.Expr:
    """Bottom-up rebuild: children first, then fn on the rebuilt node."""
    if isinstance(e, (A.Member, A.Slice, A.Cast, A.Unary, A.IsValid)):
        inner = map_expr(e.expr, fn)
        if inner is not e.expr:
            e = dataclasses.replace(e, expr=inner)
    elif isinstance(e, A.Binary):
        left, right = map_expr(e.left, fn), map_expr(e.right, fn)
        if left is not e.left or right is not e.right:
            e = dataclasses.replace(e, left=left, right=right)
    elif isinstance(e, A.Ternary):
        c, a, b = map_expr(e.cond, fn), map_expr(e.then, fn), map_expr(e.other, fn)
        if c is not e.cond or a is not e.then or b is not e.other:
            e = dataclasses.replace(e, cond=c, then=a, other=b)
    return fn(e)


def rename_expr(e: A.Expr, names: Dict[str, str]) -> A.Expr:
    def fn(x):
        if isinstance(x, A.Name) and x.name in names:
            return A.Name(names[x.name], x.loc)
        return x
    return map_expr(e, fn)


def rename_stmt(s: A.Stmt, names: Dict[str, str], fresh: Optional[FreshNames] = None) -> A.Stmt:
    """Rename variables; with `fresh`, every local declared in s gets a new name."""
    names = dict(names)

    def go(s: A.Stmt) -> A.Stmt:
        if isinstance(s, A.Block):
            saved = dict(names)
            out = A.Block(tuple(go(x) for x in s.stmts), s.loc)
            names.clear()
            names.update(saved)
            return out
        if isinstance(s, A.Assign):
            return dataclasses.replace(s, target=rename_expr(s.target, names),
                                       value=rename_expr(s.value, names))
        if isinstance(s, A.If):
            return dataclasses.replace(s, cond=rename_expr(s.cond, names), then=go_scoped(s.then),
                                       other=None if s.other is None else go_scoped(s.other))
        if isinstance(s, A.VarDecl):
            init = None if s.init is None else rename_expr(s.init, names)
            new = s.name
            if fresh is not None:
                new = fresh()
                names[s.name] = new
            return dataclasses.replace(s, name=new, init=init)
        if isinstance(s, A.Call):
            return dataclasses.replace(s, args=tuple(rename_expr(a, names) for a in s.args))
        if isinstance(s, A.SetValidity):
            return dataclasses.replace(s, target=rename_expr(s.target, names))
        return s

    def go_scoped(s: A.Stmt) -> A.Stmt:
        saved = dict(names)
        out = go(s)
        names.clear()
        names.update(saved)
        return out

    return go(s)


def expr_paths(e: A.Expr) -> List[tuple]:
    """Lvalue paths read by an expression (maximal Name/Member chains)."""
    out = []
    stack = [e]
    while stack:
        x = stack.pop()
        p = A.lvalue_path(x) if isinstance(x, (A.Name, A.Member)) else None
        if p is not None:
            out.append(p)
            continue
        stack.extend(A.children(x))
    return out


def overlaps(a: tuple, b: tuple) -> bool:
    n = min(len(a), len(b))
    return a[:n] == b[:n]


def target_path(e: A.Expr) -> tuple:
    return A.lvalue_path(e.expr if isinstance(e, A.Slice) else e)


def contains(s: A.Stmt, kinds) -> bool:
    return any(isinstance(x, kinds) for x in A.walk_stmts(s))


def fixpoint(step: Callable[[A.Program], A.Program], p: A.Program, limit: int = 8) -> A.Program:
    for _ in range(limit):
        q = step(p)
        if q == p:
            return q
        p = q
    return p
