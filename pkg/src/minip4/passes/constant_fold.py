"""ConstantFold: evaluate subexpressions whose operands are all literals."""
from __future__ import annotations

import dataclasses

from ..lang import ast as A
from .base import Rewriter, contains, fixpoint, map_expr


def _mask(w: int) -> int:
    return (1 << w) - 1


def _lit(e) -> bool:
    return isinstance(e, A.Literal) and e.width is not None


def fold(e: A.Expr) -> A.Expr:
    """One folding step on a node whose children are already folded."""
    if isinstance(e, A.Unary):
        x = e.expr
        if e.op == "!" and isinstance(x, A.BoolLit):
            return A.BoolLit(not x.value, e.loc)
        if _lit(x) and e.op == "~":
            return A.Literal(~x.value & _mask(x.width), x.width, e.loc)
        if _lit(x) and e.op == "-":
            return A.Literal(-x.value & _mask(x.width), x.width, e.loc)
        return e
    if isinstance(e, A.Cast):
        x = e.expr
        if isinstance(e.type, A.BoolType):
            if isinstance(x, A.BoolLit):
                return x
            if _lit(x):
                return A.BoolLit(x.value == 1, e.loc)
            return e
        if isinstance(x, A.BoolLit):
            return A.Literal(int(x.value), e.type.width, e.loc)
        if _lit(x):
            return A.Literal(x.value & _mask(e.type.width), e.type.width, e.loc)
        return e
    if isinstance(e, A.Slice) and _lit(e.expr):
        return A.Literal((e.expr.value >> e.lo) & _mask(e.hi - e.lo + 1), e.hi - e.lo + 1, e.loc)
    if isinstance(e, A.Ternary) and isinstance(e.cond, A.BoolLit):
        return e.then if e.cond.value else e.other
    if isinstance(e, A.Binary):
        return _fold_binary(e)
    return e


def _fold_binary(e: A.Binary) -> A.Expr:
    a, b, op = e.left, e.right, e.op
    if op in A.LOGICAL_OPS:
        if isinstance(a, A.BoolLit) and isinstance(b, A.BoolLit):
            v = (a.value and b.value) if op == "&&" else (a.value or b.value)
            return A.BoolLit(v, e.loc)
        return e
    if op in A.EQUALITY_OPS and isinstance(a, A.BoolLit) and isinstance(b, A.BoolLit):
        return A.BoolLit((a.value == b.value) == (op == "=="), e.loc)
    if not (_lit(a) and _lit(b)):
        return e
    x, y, w = a.value, b.value, a.width
    m = _mask(w)
    if op == "+":
        return A.Literal((x + y) & m, w, e.loc)
    if op == "-":
        return A.Literal((x - y) & m, w, e.loc)
    if op == "*":
        return A.Literal((x * y) & m, w, e.loc)
    if op == "&":
        return A.Literal(x & y, w, e.loc)
    if op == "|":
        return A.Literal(x | y, w, e.loc)
    if op == "^":
        return A.Literal(x ^ y, w, e.loc)
    if op == "<<":
        return A.Literal((x << y) & m if y < w else 0, w, e.loc)
    if op == ">>":
        return A.Literal(x >> y if y < w else 0, w, e.loc)
    if op == "++":
        return A.Literal((x << b.width) | y, w + b.width, e.loc)
    cmp = {"==": x == y, "!=": x != y, "<": x < y, "<=": x <= y, ">": x > y, ">=": x >= y}
    if op in cmp:
        return A.BoolLit(cmp[op], e.loc)
    return e


class _ConstantFold(Rewriter):
    name = "ConstantFold"

    def expr(self, e):
        return map_expr(e, fold)

    def lvalue(self, e):
        return e

    def stmt(self, s):
        if isinstance(s, A.If):
            cond = self.expr(s.cond)
            if isinstance(cond, A.BoolLit):
                keep, drop = (s.then, s.other) if cond.value else (s.other, s.then)
                # dropping an apply site would renumber the control-plane symbols
                if drop is None or not contains(drop, A.ApplyTable):
                    if keep is None:
                        return A.Block((), s.loc)
                    return self.block(A.as_block(keep))
            s = dataclasses.replace(s, cond=cond)
            return dataclasses.replace(s, then=self.branch(s.then),
                                       other=None if s.other is None else self.branch(s.other))
        return self.default_stmt(s)


def constant_fold(tp, bugs=frozenset()):
    return fixpoint(lambda p: _ConstantFold(tp, bugs).run(p), tp.program)
