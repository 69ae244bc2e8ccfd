"""Predicate: if/else over plain assignments becomes guarded (mux) assignments.

    if (c) { x = a; if (d) { y = b; } } else { x = e; }
becomes
    bool g0 = c;
    x = g0 ? a : x;
    bool g1 = g0 && d;
    y = g1 ? b : y;
    bool g2 = !g0;
    x = g2 ? e : x;

Every guard is materialised in a fresh boolean before the assignments it
protects, so later writes cannot change an already evaluated condition.
Local declarations inside the branches become unconditional; expressions
are pure, so evaluating an initializer on the untaken path is harmless.
They are renamed first so that sibling scopes cannot collide.
"""
from __future__ import annotations

from typing import List, Optional

from ..lang import ast as A
from .base import Rewriter, rename_stmt

BUG_NESTED = "PRED-NESTED-IF"


def eligible(s: A.Stmt) -> bool:
    if isinstance(s, (A.Assign, A.VarDecl)):
        return True
    if isinstance(s, A.Block):
        return all(eligible(x) for x in s.stmts)
    if isinstance(s, A.If):
        return eligible(s.then) and (s.other is None or eligible(s.other))
    return False


class _Predicate(Rewriter):
    name = "Predicate"

    def stmt(self, s):
        if isinstance(s, A.If) and eligible(s):
            out: List[A.Stmt] = []
            self.emit(rename_stmt(s, {}, self.fresh), None, out)
            return out
        return self.default_stmt(s)

    def guard(self, value: A.Expr, out: List[A.Stmt], loc) -> A.Name:
        name = self.fresh()
        self.declare(name, A.BOOL)
        out.append(A.VarDecl(A.BOOL, name, value, loc))
        return A.Name(name)

    def emit(self, s: A.Stmt, g: Optional[A.Name], out: List[A.Stmt]) -> None:
        if isinstance(s, A.Assign):
            out.append(A.Assign(s.target, A.Ternary(g, s.value, s.target), s.loc))
        elif isinstance(s, A.VarDecl):
            self.declare(s.name, s.type)
            out.append(s)
        elif isinstance(s, A.Block):
            for x in s.stmts:
                self.emit(x, g, out)
        elif isinstance(s, A.If):
            outer = None if self.bug(BUG_NESTED) else g
            then_guard = s.cond if outer is None else A.Binary("&&", outer, s.cond)
            gt = self.guard(then_guard, out, s.loc)
            self.emit(s.then, gt, out)
            if s.other is not None:
                neg = A.Unary("!", gt)
                ge = self.guard(neg if g is None else A.Binary("&&", g, neg), out, s.loc)
                self.emit(s.other, ge, out)


def predicate(tp, bugs=frozenset()):
    return _Predicate(tp, bugs).run(tp.program)
