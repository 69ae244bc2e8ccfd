"""RemoveActionParams: expand calls of parameterised actions with explicit copy-in/copy-out.

    a(arg1, arg2);
becomes
    {
        bit<W> tmp_p1 = arg1;       // copy-in (out parameters stay uninitialized)
        bit<W> tmp_p2 = arg2;
        <body statements, parameters renamed; every exit preceded by the copy-out>
        arg1 = tmp_p1;              // copy-out of inout/out parameters
        arg2 = tmp_p2;
    }
"""
from __future__ import annotations

import dataclasses
from typing import List

from ..lang import ast as A
from .base import Rewriter, rename_stmt

BUG_EXIT = "RAP-EXIT-SKIP-COPYOUT"


def _replace_exits(s: A.Stmt, copy_out: List[A.Stmt]) -> A.Stmt:
    if isinstance(s, A.Exit):
        return A.Block(tuple(copy_out) + (s,), s.loc)
    if isinstance(s, A.Block):
        return dataclasses.replace(s, stmts=tuple(_replace_exits(x, copy_out) for x in s.stmts))
    if isinstance(s, A.If):
        return dataclasses.replace(s, then=_replace_exits(s.then, copy_out),
                                   other=None if s.other is None else _replace_exits(s.other, copy_out))
    return s


class _RemoveActionParams(Rewriter):
    name = "RemoveActionParams"

    def stmt(self, s):
        if isinstance(s, A.Call) and s.args:
            action = self.control.action(s.name)
            return self.expand(action, s)
        return self.default_stmt(s)

    def expand(self, action: A.ActionDecl, call: A.Call) -> A.Stmt:
        names = {}
        decls: List[A.Stmt] = []
        copy_out: List[A.Stmt] = []
        for p, arg in zip(action.params, call.args):
            tmp = self.fresh.reserve(f"tmp_{p.name}")
            names[p.name] = tmp
            init = None if p.direction == "out" else arg
            decls.append(A.VarDecl(p.type, tmp, init, call.loc))
            if p.direction != "in":
                copy_out.append(A.Assign(arg, A.Name(tmp), call.loc))
        body = rename_stmt(action.body, names, self.fresh)
        if not self.bug(BUG_EXIT):
            body = _replace_exits(body, copy_out)
        # the renamed body shares the block with the copies; its locals are fresh names
        inner = body.stmts if isinstance(body, A.Block) else (body,)
        return A.Block(tuple(decls) + tuple(inner) + tuple(copy_out), call.loc)

    def finish_control(self, c: A.ControlDecl) -> A.ControlDecl:
        return dataclasses.replace(c, actions=tuple(a for a in c.actions if not a.params))


def remove_action_params(tp, bugs=frozenset()):
    return _RemoveActionParams(tp, bugs).run(tp.program)
