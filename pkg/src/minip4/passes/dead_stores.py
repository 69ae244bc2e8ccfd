"""ElimDeadStores: delete assignments overwritten before any read.

Works backwards over each statement list.  `covered` holds the lvalue paths
that a later statement in the same list overwrites completely before
anything reads them.  Anything that may read or observe state (if, block,
call, apply, exit, validity changes) empties the set.
"""
from __future__ import annotations

import dataclasses
from typing import List, Set

from ..lang import ast as A
from .base import expr_paths, fixpoint, overlaps, target_path

BUG_SLICE = "DSE-SLICE-ALIAS"


def _covers(covered: Set[tuple], path: tuple) -> bool:
    return any(path[:len(c)] == c for c in covered)


def _read(covered: Set[tuple], e: A.Expr) -> None:
    for p in expr_paths(e):
        for c in [c for c in covered if overlaps(c, p)]:
            covered.discard(c)


class _DeadStores:
    name = "ElimDeadStores"

    def __init__(self, bugs):
        self.bugs = bugs

    def block(self, b: A.Block) -> A.Block:
        return dataclasses.replace(b, stmts=tuple(self.stmts(list(b.stmts))))

    def nested(self, s: A.Stmt) -> A.Stmt:
        if isinstance(s, A.Block):
            return self.block(s)
        if isinstance(s, A.If):
            return dataclasses.replace(s, then=self.nested(s.then),
                                       other=None if s.other is None else self.nested(s.other))
        return s

    def stmts(self, stmts: List[A.Stmt]) -> List[A.Stmt]:
        covered: Set[tuple] = set()
        kept: List[A.Stmt] = []
        for s in reversed(stmts):
            if isinstance(s, A.Assign):
                path = target_path(s.target)
                if _covers(covered, path):
                    continue
                if not isinstance(s.target, A.Slice) or BUG_SLICE in self.bugs:
                    covered.add(path)
                _read(covered, s.value)
                kept.append(s)
            elif isinstance(s, A.VarDecl):
                if s.init is not None:
                    _read(covered, s.init)
                covered = {c for c in covered if c[0] != s.name}
                kept.append(s)
            else:
                covered.clear()
                kept.append(self.nested(s))
        kept.reverse()
        return kept


def elim_dead_stores(tp, bugs=frozenset()):
    d = _DeadStores(bugs)

    def step(p: A.Program) -> A.Program:
        controls = []
        for c in p.controls:
            actions = tuple(dataclasses.replace(a, body=d.block(a.body)) for a in c.actions)
            controls.append(dataclasses.replace(c, actions=actions, body=d.block(c.body)))
        return dataclasses.replace(p, controls=tuple(controls))

    return fixpoint(step, tp.program)
