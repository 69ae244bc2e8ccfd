"""Concrete evaluation of BlockSemantics and don't-care derivation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from . import terms as T
from .evaluate import U64, ZERO, ZERO64, Evaluator, MissingAssignment, UndefinedPolicy, single_env


def invalid_header_mask(sem, vals: Sequence, msks: Optional[Sequence] = None) -> List:
    """Per output: all ones where the governing header is invalid (or of unknown validity)."""
    index = {o.name: i for i, o in enumerate(sem.outputs)}
    out = []
    for o, v in zip(sem.outputs, vals):
        if o.header is None:
            out.append(ZERO64)
            continue
        j = index[o.header]
        off = vals[j] == 0
        if msks is not None:
            off = off | (msks[j] != 0)
        out.append(np.where(off, U64(T.mask(o.term.width)), ZERO64))
    return out


def output_masks(sem, vals: Sequence, msks: Sequence) -> List:
    """Don't-care masks: tainted bits plus every bit of an invalid header."""
    hdr = invalid_header_mask(sem, vals, msks)
    return [h | m for h, m in zip(hdr, msks)]


@dataclass
class ConcreteResult:
    values: Dict[str, int]
    dont_care: Dict[str, int]
    taint: Dict[str, int]

    def cares(self, name: str) -> int:
        return self.values[name] & ~self.dont_care[name]


_evaluators: "Dict[int, tuple]" = {}


def evaluator_for(sem) -> Evaluator:
    hit = _evaluators.get(id(sem))
    if hit is not None and hit[0] is sem:
        return hit[1]
    ev = Evaluator(sem.terms())
    if len(_evaluators) > 256:
        _evaluators.clear()
    _evaluators[id(sem)] = (sem, ev)
    return ev


def concrete_eval(sem, assignment: Mapping[str, int],
                  policy: UndefinedPolicy = ZERO) -> ConcreteResult:
    """Evaluate every output on one input assignment."""
    for t in sem.inputs:
        if t.val not in assignment:
            raise MissingAssignment(t.val)
    ev = evaluator_for(sem)
    vals, msks = ev.run(single_env(assignment), policy, masks=True)
    dc = output_masks(sem, vals, msks)
    values, dont_care, taint = {}, {}, {}
    for o, v, m, d in zip(sem.outputs, vals, msks, dc):
        values[o.name] = int(np.ravel(v)[0])
        taint[o.name] = int(np.ravel(m)[0])
        dont_care[o.name] = int(np.ravel(d)[0])
    return ConcreteResult(values, dont_care, taint)
