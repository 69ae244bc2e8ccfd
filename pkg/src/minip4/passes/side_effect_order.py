"""SideEffectOrder: turn conditional expressions into explicit if/else control flow.

Every `c ? a : b` inside a statement is evaluated into a fresh temporary
ahead of the statement, innermost and leftmost first.  Afterwards no
conditional expression may remain; the pass asserts this before returning.
"""
from __future__ import annotations

import dataclasses
from typing import List

from ..lang import ast as A
from .base import PassCrash, Rewriter

BUG_MISS = "SEO-MISS-TERNARY"


class _SideEffectOrder(Rewriter):
    name = "SideEffectOrder"

    def stmt(self, s):
        self.pre: List[A.Stmt] = []
        if isinstance(s, A.If):
            cond = self.hoist(s.cond)
            pre = self.pre
            then = self.branch(s.then)
            other = None if s.other is None else self.branch(s.other)
            return pre + [dataclasses.replace(s, cond=cond, then=then, other=other)]
        if isinstance(s, (A.Block,)):
            return self.block(s)
        r = self.default_stmt(s)
        return self.pre + [r]

    def expr(self, e):
        return self.hoist(e)

    def hoist(self, e: A.Expr, operand: bool = False) -> A.Expr:
        if isinstance(e, A.Ternary):
            cond = self.hoist(e.cond)
            then = self.hoist(e.then)
            other = self.hoist(e.other)
            if operand and self.bug(BUG_MISS):
                return dataclasses.replace(e, cond=cond, then=then, other=other)
            t = self.type_of(then)
            name = self.fresh()
            self.pre.append(A.VarDecl(t, name, None, e.loc))
            self.declare(name, t)
            self.pre.append(A.If(cond, A.Block((A.Assign(A.Name(name), then),)),
                                 A.Block((A.Assign(A.Name(name), other),)), e.loc))
            return A.Name(name, e.loc)
        if isinstance(e, A.Binary):
            left = self.hoist(e.left, operand=True)
            right = self.hoist(e.right, operand=True)
            if left is e.left and right is e.right:
                return e
            return dataclasses.replace(e, left=left, right=right)
        if isinstance(e, (A.Member, A.Slice, A.Cast, A.Unary, A.IsValid)):
            inner = self.hoist(e.expr)
            return e if inner is e.expr else dataclasses.replace(e, expr=inner)
        return e


def _check_no_ternary(p: A.Program) -> None:
    for c in p.controls:
        bodies = [c.body] + [a.body for a in c.actions]
        for b in bodies:
            for s in A.walk_stmts(b):
                for e in A.stmt_exprs(s):
                    for x in A.walk_expr(e):
                        if isinstance(x, A.Ternary):
                            raise PassCrash("SideEffectOrder",
                                            f"conditional expression survived in control {c.name}")


def side_effect_order(tp, bugs=frozenset()):
    out = _SideEffectOrder(tp, bugs).run(tp.program)
    _check_no_ternary(out)
    return out
