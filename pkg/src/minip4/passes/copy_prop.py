"""CopyProp: forward propagation of literal and plain-variable copies.

After `x = e` where e is a literal or an lvalue, later reads of x become e
until x or anything e reads is written.  Reading a header field is only
defined while the header is valid, so a fact whose destination lies in a
header is used only where that header is known valid.
"""
from __future__ import annotations

import dataclasses
from typing import Dict, Set

from ..lang import ast as A
from .base import Rewriter, fixpoint, overlaps, target_path

BUG_INVALID = "CP-INVALID-HDR"


def _copyable(e: A.Expr) -> bool:
    return isinstance(e, (A.Literal, A.BoolLit)) or (
        isinstance(e, (A.Name, A.Member)) and A.lvalue_path(e) is not None)


class _Facts:
    __slots__ = ("copies", "valid")

    def __init__(self, copies=None, valid=None):
        self.copies: Dict[tuple, A.Expr] = dict(copies or {})
        self.valid: Set[tuple] = set(valid or ())

    def copy(self) -> "_Facts":
        return _Facts(self.copies, self.valid)

    def kill(self, path: tuple) -> None:
        for d in list(self.copies):
            src = self.copies[d]
            sp = A.lvalue_path(src) if isinstance(src, (A.Name, A.Member)) else None
            if overlaps(d, path) or (sp is not None and overlaps(sp, path)):
                del self.copies[d]

    def clear(self) -> None:
        self.copies.clear()
        self.valid.clear()


class _CopyProp(Rewriter):
    name = "CopyProp"

    def rewrite_control(self, c):
        self.header_of: Dict[tuple, tuple] = {}
        for p in c.params:
            for path, _, hdr in self.info.leaves(p.type, (p.name,)):
                if hdr is not None:
                    self.header_of[path] = hdr
        self.facts = _Facts()
        return super().rewrite_control(c)

    def block(self, b):
        if b is self.control.body or any(b is a.body for a in self.control.actions):
            self.facts = _Facts()
        out = super().block(b)
        # facts mentioning locals of this block must not escape it
        locals_ = {s.name for s in b.stmts if isinstance(s, A.VarDecl)}
        if locals_:
            for name in locals_:
                self.facts.kill((name,))
        return out

    def usable(self, path: tuple) -> bool:
        hdr = self.header_of.get(path)
        if hdr is None or self.bug(BUG_INVALID):
            return True
        return hdr in self.facts.valid

    def expr(self, e):
        def fn(x):
            if isinstance(x, (A.Name, A.Member)):
                p = A.lvalue_path(x)
                if p is not None and p in self.facts.copies and self.usable(p):
                    return self.facts.copies[p]
            return x

        return _map_reads(e, fn)

    def branch(self, s):
        out = super().branch(s)
        if isinstance(s, A.VarDecl):
            self.facts.kill((s.name,))
        return out

    def stmt(self, s):
        f = self.facts
        if isinstance(s, A.Assign):
            value = self.expr(s.value)
            path = target_path(s.target)
            f.kill(path)
            if not isinstance(s.target, A.Slice) and _copyable(value) and A.lvalue_path(value) != path:
                f.copies[path] = value
            return dataclasses.replace(s, value=value)
        if isinstance(s, A.VarDecl):
            init = None if s.init is None else self.expr(s.init)
            self.declare(s.name, s.type)
            f.kill((s.name,))
            if init is not None and _copyable(init):
                f.copies[(s.name,)] = init
            return dataclasses.replace(s, init=init)
        if isinstance(s, A.If):
            cond = self.expr(s.cond)
            entry = f.copy()
            then = self.branch(s.then)
            after_then = self.facts
            self.facts = entry.copy()
            other = None if s.other is None else self.branch(s.other)
            after_else = self.facts
            self.facts = _join(entry, after_then, after_else)
            return dataclasses.replace(s, cond=cond, then=then, other=other)
        if isinstance(s, A.Block):
            return self.block(s)
        if isinstance(s, A.SetValidity):
            h = A.lvalue_path(s.target)
            for path in [p for p, hh in self.header_of.items() if hh == h]:
                f.kill(path)
            if s.valid:
                f.valid.add(h)
            else:
                f.valid.discard(h)
            return s
        if isinstance(s, A.Call):
            r = self.default_stmt(s)
            f.clear()
            return r
        if isinstance(s, A.ApplyTable):
            f.clear()
            return s
        return s


def _join(entry: _Facts, a: _Facts, b: _Facts) -> _Facts:
    """Facts holding after an if: those of the entry that neither branch disturbed."""
    out = _Facts()
    for d, src in entry.copies.items():
        if a.copies.get(d) is src and b.copies.get(d) is src:
            out.copies[d] = src
    out.valid = entry.valid & a.valid & b.valid
    return out


def _map_reads(e: A.Expr, fn) -> A.Expr:
    """Apply fn to maximal lvalue reads, leaving isValid() operands alone."""
    if isinstance(e, A.IsValid):
        return e
    if isinstance(e, (A.Name, A.Member)) and A.lvalue_path(e) is not None:
        return fn(e)
    if isinstance(e, (A.Slice, A.Cast, A.Unary, A.Member)):
        inner = _map_reads(e.expr, fn)
        return e if inner is e.expr else dataclasses.replace(e, expr=inner)
    if isinstance(e, A.Binary):
        l, r = _map_reads(e.left, fn), _map_reads(e.right, fn)
        return e if (l is e.left and r is e.right) else dataclasses.replace(e, left=l, right=r)
    if isinstance(e, A.Ternary):
        c, a, b = _map_reads(e.cond, fn), _map_reads(e.then, fn), _map_reads(e.other, fn)
        if c is e.cond and a is e.then and b is e.other:
            return e
        return dataclasses.replace(e, cond=c, then=a, other=b)
    return e


def copy_prop(tp, bugs=frozenset()):
    return fixpoint(lambda p: _CopyProp(tp, bugs).run(p), tp.program)
