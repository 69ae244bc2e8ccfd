"""InlineCalls: replace calls to parameterless actions by their bodies."""
from __future__ import annotations

import dataclasses

from ..lang import ast as A
from .base import Rewriter, rename_stmt


class _InlineCalls(Rewriter):
    name = "InlineCalls"

    def stmt(self, s):
        if isinstance(s, A.Call) and not s.args:
            if s.name == A.NO_ACTION:
                return A.Block((), s.loc)
            action = self.control.action(s.name)
            if action is not None and not action.params:
                # locals get fresh names so they cannot collide with names visible here
                return rename_stmt(action.body, {}, self.fresh)
        return self.default_stmt(s)

    def finish_control(self, c: A.ControlDecl) -> A.ControlDecl:
        used = set()
        for t in c.tables:
            used.update(t.actions)
            used.add(t.default_action)
        for s in A.walk_stmts(c.body):
            if isinstance(s, A.Call):
                used.add(s.name)
        actions = tuple(a for a in c.actions if a.name in used)
        return dataclasses.replace(c, actions=actions)


def inline_calls(tp, bugs=frozenset()):
    return _InlineCalls(tp, bugs).run(tp.program)
