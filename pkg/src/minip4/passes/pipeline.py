"""Running passes in sequence, reparsing every emitted program."""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence

from ..lang import MiniP4Error, parse_program, print_program, typecheck
from ..lang.typecheck import TypedProgram
from .base import PassCrash, ReparseFailure
from .catalog import check_bugs
from .constant_fold import constant_fold
from .copy_prop import copy_prop
from .dead_stores import elim_dead_stores
from .inline_calls import inline_calls
from .predicate import predicate
from .remove_action_params import remove_action_params
from .side_effect_order import side_effect_order
from .strength_reduce import strength_reduce

PASSES: Dict[str, Callable] = {
    "ConstantFold": constant_fold,
    "StrengthReduce": strength_reduce,
    "SideEffectOrder": side_effect_order,
    "InlineCalls": inline_calls,
    "RemoveActionParams": remove_action_params,
    "Predicate": predicate,
    "ElimDeadStores": elim_dead_stores,
    "CopyProp": copy_prop,
}
PASS_ORDER: List[str] = list(PASSES)


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def reparse(text: str) -> TypedProgram:
    return typecheck(parse_program(text))


def run_pass(tp: TypedProgram, pass_name: str, bugs: Iterable[str] = ()) -> TypedProgram:
    """Apply one pass and return the reparsed, re-typechecked result.

    Unexpected exceptions inside the pass are reported as PassCrash; an
    emitted program that the front end rejects raises ReparseFailure.
    """
    fn = PASSES[pass_name]
    try:
        out = fn(tp, frozenset(bugs))
    except PassCrash:
        raise
    except Exception as e:  # any internal error is a crash of this pass
        raise PassCrash(pass_name, f"{type(e).__name__}: {e}") from e
    text = print_program(out)
    try:
        return reparse(text)
    except MiniP4Error as e:
        raise ReparseFailure(pass_name, text, e) from e


@dataclass
class TraceEntry:
    pass_name: str
    text: str
    program: TypedProgram
    hash: str


@dataclass
class PassTrace:
    entries: List[TraceEntry] = field(default_factory=list)
    crash: Optional[PassCrash] = None
    invalid_emit: Optional[ReparseFailure] = None

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def final(self) -> TypedProgram:
        return self.entries[-1].program

    @property
    def aborted(self) -> bool:
        return self.crash is not None or self.invalid_emit is not None


def run_pipeline(tp: TypedProgram, order: Optional[Sequence[str]] = None,
                 bugs: Iterable[str] = ()) -> PassTrace:
    bugs = check_bugs(bugs)
    order = PASS_ORDER if order is None else list(order)
    for name in order:
        if name not in PASSES:
            raise KeyError(f"unknown pass {name!r}")
    text = print_program(tp.program)
    trace = PassTrace([TraceEntry("input", text, tp, content_hash(text))])
    cur = tp
    for name in order:
        try:
            cur = run_pass(cur, name, bugs)
        except PassCrash as e:
            trace.crash = e
            break
        except ReparseFailure as e:
            trace.invalid_emit = e
            break
        text = print_program(cur.program)
        h = content_hash(text)
        if h != trace.entries[-1].hash:
            trace.entries.append(TraceEntry(name, text, cur, h))
    return trace


def dump_passes(trace: PassTrace, out_dir: str) -> List[str]:
    """Write every trace element as `NN_<pass>.mp4l`; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i, e in enumerate(trace.entries):
        path = os.path.join(out_dir, f"{i:02d}_{e.pass_name}.mp4l")
        with open(path, "w", encoding="utf-8") as f:
            f.write(e.text)
        paths.append(path)
    if trace.invalid_emit is not None:
        path = os.path.join(out_dir, f"{len(trace.entries):02d}_{trace.invalid_emit.pass_name}.invalid.mp4l")
        with open(path, "w", encoding="utf-8") as f:
            f.write(trace.invalid_emit.text)
        paths.append(path)
    return paths
