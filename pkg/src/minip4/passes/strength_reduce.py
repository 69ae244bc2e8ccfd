"""StrengthReduce: algebraic simplification and cheaper operator forms."""
from __future__ import annotations

from ..lang import ast as A
from .base import Rewriter, fixpoint, map_expr

BUG_SLICE = "SR-SLICE-OVERFLOW"


def _lit(e, value=None) -> bool:
    return isinstance(e, A.Literal) and e.width is not None and (value is None or e.value == value)


def _log2(v: int):
    if v > 1 and v & (v - 1) == 0:
        return v.bit_length() - 1
    return None


class _StrengthReduce(Rewriter):
    name = "StrengthReduce"

    def expr(self, e):
        return map_expr(e, self.reduce)

    def reduce(self, e: A.Expr) -> A.Expr:
        for _ in range(16):
            r = self.step(e)
            if r is e:
                return e
            e = r
        return e

    def step(self, e: A.Expr) -> A.Expr:
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.Slice):
            return self.slice(e)
        return e

    def binary(self, e: A.Binary) -> A.Expr:
        a, b, op = e.left, e.right, e.op
        if op in ("+", "|", "^"):
            if _lit(b, 0):
                return a
            if _lit(a, 0):
                return b
        if op == "-" and _lit(b, 0):
            return a
        if op == "*":
            for x, y in ((a, b), (b, a)):
                if _lit(y, 1):
                    return x
                if _lit(y, 0):
                    return y
                if _lit(y):
                    k = _log2(y.value)
                    if k is not None:
                        return A.Binary("<<", x, A.Literal(k, 8), e.loc)
        if op == "&":
            if _lit(b, 0):
                return b
            if _lit(a, 0):
                return a
        if op in A.SHIFT_OPS and _lit(b):
            if b.value == 0:
                return a
            w = self.width_of(a)
            if b.value >= w:
                return A.Literal(0, w, e.loc)
        return e

    def slice(self, e: A.Slice) -> A.Expr:
        base, hi, lo = e.expr, e.hi, e.lo
        if isinstance(base, A.Slice):
            return A.Slice(base.expr, hi + base.lo, lo + base.lo, e.loc)
        w = self.width_of(base)
        if lo == 0 and hi == w - 1:
            return base
        if isinstance(base, A.Binary) and base.op in A.SHIFT_OPS and _lit(base.right):
            k = base.right.value
            inner = base.left
            if base.op == "<<":
                # (x << k)[hi:lo] == x[hi-k:lo-k] when lo >= k; all zero when hi < k
                if self.bug(BUG_SLICE):
                    return A.Slice(inner, hi - k, lo - k, e.loc)
                if hi < k:
                    return A.Literal(0, hi - lo + 1, e.loc)
                if lo >= k:
                    return A.Slice(inner, hi - k, lo - k, e.loc)
            else:
                # (x >> k)[hi:lo] == x[hi+k:lo+k] when hi + k < width; all zero when lo + k >= width
                if self.bug(BUG_SLICE):
                    return A.Slice(inner, hi + k, lo + k, e.loc)
                if lo + k >= w:
                    return A.Literal(0, hi - lo + 1, e.loc)
                if hi + k < w:
                    return A.Slice(inner, hi + k, lo + k, e.loc)
        return e


def strength_reduce(tp, bugs=frozenset()):
    return fixpoint(lambda p: _StrengthReduce(tp, bugs).run(p), tp.program)
