"""Lane-vectorized evaluation of term DAGs.

Every value is a numpy uint64 array with one lane per input assignment (or a
uint64 scalar that broadcasts).  Alongside values the evaluator can compute a
per-bit taint mask: bit i of the mask is set when bit i of the value may
depend on the undefined-value policy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import terms as T

U64 = np.uint64
ZERO64 = U64(0)


@dataclass(frozen=True)
class UndefinedPolicy:
    """How undefined reads are resolved: all zero, or a repeated byte pattern."""

    kind: str = "zero"
    byte: int = 0

    @staticmethod
    def parse(text: str) -> "UndefinedPolicy":
        text = text.strip().lower()
        if text == "zero":
            return ZERO
        if text.startswith("pattern:"):
            value = int(text.split(":", 1)[1], 16)
            if not 0 <= value <= 0xFF:
                raise ValueError("pattern byte must be in 00..ff")
            return UndefinedPolicy("pattern", value)
        raise ValueError(f"unknown undefined-value policy {text!r}")

    def value(self, width: int) -> int:
        """Concrete value of an undefined read of this width (0 = boolean)."""
        if self.kind == "zero":
            return 0
        if width == T.BOOL_W:
            return 1 if self.byte else 0
        reps = (width + 7) // 8
        return int.from_bytes(bytes([self.byte]) * reps, "big") & T.mask(width)

    def __str__(self) -> str:
        return "zero" if self.kind == "zero" else f"pattern:{self.byte:02x}"


ZERO = UndefinedPolicy("zero", 0)
PATTERN_AA = UndefinedPolicy("pattern", 0xAA)
PATTERN_55 = UndefinedPolicy("pattern", 0x55)


class MissingAssignment(KeyError):
    """An input symbol has no value in the assignment."""


def _full(m: int, any_mask):
    """Full-width taint wherever any_mask is non-zero."""
    if np.ndim(any_mask) == 0:
        return U64(m) if any_mask else ZERO64
    return np.where(any_mask != 0, U64(m), ZERO64)


def _nonzero(x) -> bool:
    if np.ndim(x) == 0:
        return bool(x)
    return bool(x.any())


class Evaluator:
    """Evaluates a fixed set of root terms over batches of lanes.

    The DAG is flattened once; each run walks it in topological order and
    frees intermediate arrays after their last use.
    """

    def __init__(self, roots: Sequence[T.Term]):
        self.roots = list(roots)
        self.order = T.topo_order(self.roots)
        index = {id(t): i for i, t in enumerate(self.order)}
        self.root_idx = [index[id(r)] for r in self.roots]
        self.arg_idx = [tuple(index[id(a)] for a in t.args) for t in self.order]
        last = [-1] * len(self.order)
        for i, args in enumerate(self.arg_idx):
            for a in args:
                last[a] = i
        keep = set(self.root_idx)
        self.frees: List[Tuple[int, ...]] = [() for _ in self.order]
        for a, i in enumerate(last):
            if i >= 0 and a not in keep:
                self.frees[i] = self.frees[i] + (a,)
        self.vars = {t.val: t for t in self.order if t.op == T.VAR}
        self.has_undef = any(t.op == T.UNDEF for t in self.order)

    def run(self, env: Mapping[str, object], policy: UndefinedPolicy = ZERO,
            masks: bool = False):
        """Return (values, masks) for the roots; masks is None unless requested."""
        order = self.order
        vals: List[object] = [None] * len(order)
        msks: Optional[List[object]] = [None] * len(order) if masks else None
        with np.errstate(over="ignore"):
            for i, t in enumerate(order):
                a = self.arg_idx[i]
                op = t.op
                w = t.width
                m = T.mask(w)
                if op == T.CONST:
                    v = U64(t.val)
                elif op == T.VAR:
                    try:
                        v = env[t.val]
                    except KeyError:
                        raise MissingAssignment(t.val) from None
                elif op == T.UNDEF:
                    v = U64(policy.value(w))
                else:
                    v = _apply(op, t, w, m, [vals[j] for j in a])
                vals[i] = v
                if masks:
                    if not t.has_undef:
                        msks[i] = ZERO64
                    elif op == T.UNDEF:
                        msks[i] = U64(m)
                    else:
                        msks[i] = _taint(op, t, w, m, [vals[j] for j in a], [msks[j] for j in a])
                for j in self.frees[i]:
                    vals[j] = None
                    if masks:
                        msks[j] = None
        out_v = [vals[i] for i in self.root_idx]
        out_m = [msks[i] for i in self.root_idx] if masks else None
        return out_v, out_m


def _apply(op, t, w, m, x):
    mm = U64(m)
    if op == T.ITE:
        c, a, b = x
        if np.ndim(c) == 0:
            return a if c else b
        return np.where(c != 0, a, b)
    if op == T.EXTRACT:
        return (x[0] >> U64(t.val[1])) & mm
    if op == T.CONCAT:
        return (x[0] << U64(t.args[1].width)) | x[1]
    if op == T.NOT:
        return ~x[0] & mm
    if op == T.NEG:
        return (ZERO64 - x[0]) & mm
    if op == T.LNOT:
        return x[0] ^ U64(1)
    if op == T.ADD:
        return (x[0] + x[1]) & mm
    if op == T.SUB:
        return (x[0] - x[1]) & mm
    if op == T.MUL:
        return (x[0] * x[1]) & mm
    if op == T.AND or op == T.LAND:
        return x[0] & x[1]
    if op == T.OR or op == T.LOR:
        return x[0] | x[1]
    if op == T.XOR:
        return x[0] ^ x[1]
    if op == T.SHL or op == T.LSHR:
        v, amt = x
        k = np.minimum(amt, U64(63))
        r = (v << k) & mm if op == T.SHL else v >> k
        return np.where(amt < U64(w), r, ZERO64)
    if op == T.EQ:
        return (x[0] == x[1]).astype(U64)
    if op == T.ULT:
        return (x[0] < x[1]).astype(U64)
    if op == T.ULE:
        return (x[0] <= x[1]).astype(U64)
    raise AssertionError(op)


def _taint(op, t, w, m, x, k):
    mm = U64(m)
    if op == T.ITE:
        c, a, b = x
        mc, ma, mb = k
        picked = (ma if c else mb) if np.ndim(c) == 0 else np.where(c != 0, ma, mb)
        if not _nonzero(mc):
            return picked
        spread = (ma | mb | (a ^ b)) & mm
        return np.where(mc != 0, spread, picked)
    if op == T.EXTRACT:
        return (k[0] >> U64(t.val[1])) & mm
    if op == T.CONCAT:
        return (k[0] << U64(t.args[1].width)) | k[1]
    if op in (T.NOT, T.LNOT):
        return k[0]
    if op == T.XOR:
        return k[0] | k[1]
    if op in (T.AND, T.LAND):
        (va, vb), (ma, mb) = x, k
        return ((ma & (mb | vb)) | (mb & (ma | va))) & mm
    if op in (T.OR, T.LOR):
        (va, vb), (ma, mb) = x, k
        return ((ma & (mb | ~vb)) | (mb & (ma | ~va))) & mm
    if op in (T.SHL, T.LSHR):
        amt = x[1]
        mv, mamt = k
        kk = np.minimum(amt, U64(63))
        shifted = (mv << kk) & mm if op == T.SHL else mv >> kk
        shifted = np.where(amt < U64(w), shifted, ZERO64)
        if not _nonzero(mamt):
            return shifted
        return np.where(mamt != 0, mm, shifted)
    # NEG, arithmetic and comparisons: any tainted input taints the whole result
    any_m = k[0] if len(k) == 1 else (k[0] | k[1])
    return _full(m, any_m)


# ----------------------------------------------------------------- input lanes

def total_bits(inputs: Sequence[T.Term]) -> int:
    return sum(t.bits for t in inputs)


def lane_env(inputs: Sequence[T.Term], start: int, count: int) -> Dict[str, np.ndarray]:
    """Assignments for lanes start..start+count-1; the first input is most significant."""
    idx = np.arange(start, start + count, dtype=U64)
    env = {}
    shift = total_bits(inputs)
    for t in inputs:
        shift -= t.bits
        env[t.val] = (idx >> U64(shift)) & U64(T.mask(t.width))
    return env


def lane_assignment(inputs: Sequence[T.Term], lane: int) -> Dict[str, int]:
    out = {}
    shift = total_bits(inputs)
    for t in inputs:
        shift -= t.bits
        out[t.val] = (lane >> shift) & T.mask(t.width)
    return out


def single_env(assignment: Mapping[str, int]) -> Dict[str, np.ndarray]:
    return {k: np.array([int(v)], dtype=U64) for k, v in assignment.items()}


def lanes(x, n: int) -> np.ndarray:
    """Broadcast a scalar result to n lanes."""
    if np.ndim(x) == 0:
        return np.full(n, x, dtype=U64)
    return x
