"""Path enumeration over BlockSemantics and test-case derivation.

Paths come from splitting the output terms on their if-then-else conditions:
pick a condition, substitute true and false for it, and recurse on both
halves.  The choices made along the way form a decision tree, so the
resulting conditions are mutually exclusive and together cover every input.
Conditions that read an undefined value cannot be steered from the packet;
once only such conditions remain the path is marked uncontrollable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from ..semantics import terms as T
from ..semantics.concrete import concrete_eval
from ..semantics.evaluate import U64, ZERO, Evaluator, UndefinedPolicy, lane_env, lanes
from ..semantics.interp import BlockSemantics

DEFAULT_LIMIT = 64
EXHAUSTIVE_BITS = 20
SAMPLE_LANES = 4096
SAMPLE_ROUNDS = 24


class UnsatisfiablePath(ValueError):
    """No input assignment reaches the path (or none was found by sampling)."""


@dataclass(frozen=True)
class PathCondition:
    cond: T.Term
    path_id: int
    controllable: bool = True
    choices: tuple = ()  # (condition, taken) pairs from root to leaf


class PathList(list):
    """A list of PathCondition that remembers whether `limit` cut it short."""

    truncated: bool = False


@dataclass
class TestCase:
    __test__ = False  # not a pytest class

    control: str
    inputs: Dict[str, int]
    expected: Dict[str, int]
    dont_care: Dict[str, int]
    path_id: int
    seed: int

    def cares(self, name: str) -> int:
        return self.expected[name] & ~self.dont_care.get(name, 0)


# ----------------------------------------------------------------- substitution

def rebuild(t: T.Term, args: Sequence[T.Term]) -> T.Term:
    """Recreate t over new children through the simplifying constructors."""
    op = t.op
    if op == T.ITE:
        return T.ite(*args)
    if op == T.EXTRACT:
        return T.extract(args[0], *t.val)
    if op == T.CONCAT:
        return T.concat(*args)
    if op == T.NOT:
        return T.bvnot(args[0])
    if op == T.NEG:
        return T.neg(args[0])
    if op == T.LNOT:
        return T.lnot(args[0])
    if op in T.BV_BINOPS:
        return T.binop(op, *args)
    if op in T.SHIFTS:
        return T.shift(op, *args)
    if op == T.EQ:
        return T.eq(*args)
    if op == T.ULT:
        return T.ult(*args)
    if op == T.ULE:
        return T.ule(*args)
    if op == T.LAND:
        return T.land(*args)
    if op == T.LOR:
        return T.lor(*args)
    raise ValueError(f"cannot rebuild {op}")


def substitute(roots: Sequence[T.Term], target: T.Term, value: T.Term) -> List[T.Term]:
    """Replace every occurrence of `target` under roots by `value`."""
    new: Dict[int, T.Term] = {id(target): value}
    for t in T.topo_order(roots):
        if id(t) in new or not t.args:
            continue
        args = [new.get(id(a), a) for a in t.args]
        if any(a is not b for a, b in zip(args, t.args)):
            new[id(t)] = rebuild(t, args)
    return [new.get(id(r), r) for r in roots]


def _split_point(roots: Sequence[T.Term]):
    """Outermost untainted if-then-else condition, and whether a tainted one exists."""
    tainted = False
    seen = set()
    stack = list(reversed(roots))
    while stack:
        t = stack.pop()
        if id(t) in seen or t.op in (T.CONST, T.VAR, T.UNDEF):
            continue
        seen.add(id(t))
        if t.op == T.ITE:
            c = t.args[0]
            if not c.has_undef:
                return c, tainted
            tainted = True
        stack.extend(reversed(t.args))
    return None, tainted


def enumerate_paths(sem: BlockSemantics, limit: int = DEFAULT_LIMIT) -> PathList:
    """Mutually exclusive path conditions, at most `limit` of them.

    Branches are explored depth first, true side first.  When the limit
    is hit the list is marked truncated and the unexplored rest dropped.
    """
    out = PathList()
    # (pending roots, conjunction so far, choices)
    work = [(list(sem.terms()), T.TRUE, ())]
    while work:
        roots, cond, choices = work.pop()
        if cond is T.FALSE:
            continue
        if len(out) >= limit:
            out.truncated = True
            break
        c, tainted = _split_point(roots)
        if c is None:
            out.append(PathCondition(cond, len(out), not tainted, choices))
            continue
        # push false first so the true side is explored first
        for taken in (False, True):
            lit = c if taken else T.lnot(c)
            sub = substitute(roots, c, T.bool_const(taken))
            work.append((sub, T.land(cond, lit), choices + ((c, taken),)))
    return out


# ----------------------------------------------------------------- solving

def _constants(cond: T.Term) -> Dict[str, List[int]]:
    """Per input variable: constants it is compared against (sampling hints)."""
    hints: Dict[str, List[int]] = {}
    for t in T.topo_order([cond]):
        if t.op in T.COMPARES:
            a, b = t.args
            if b.op == T.CONST:
                a, b = b, a
            if a.op == T.CONST and b.op == T.VAR:
                v = a.val
                hints.setdefault(b.val, []).extend([v, v + 1, max(v - 1, 0)])
    return hints


def _nonzero_count(sem: BlockSemantics, env: Mapping[str, np.ndarray], n: int) -> np.ndarray:
    count = np.zeros(n, dtype=np.int64)
    for t in sem.inputs:
        count += (lanes(env[t.val], n) != 0)
    return count


def _pick(sem: BlockSemantics, env, sat: np.ndarray, rng: np.random.Generator) -> Dict[str, int]:
    """Choose a satisfying lane, preferring those with the most non-zero inputs."""
    n = sat.shape[0]
    idx = np.flatnonzero(sat)
    score = _nonzero_count(sem, env, n)[idx]
    best = idx[score == score.max()]
    lane = int(best[rng.integers(len(best))])
    return {t.val: int(lanes(env[t.val], n)[lane]) for t in sem.inputs}


def _random_env(sem: BlockSemantics, hints, n: int, rng: np.random.Generator, nonzero: bool):
    env = {}
    for t in sem.inputs:
        m = T.mask(t.width)
        if t.bits >= 63:
            v = rng.integers(0, 1 << 62, size=n, dtype=np.uint64) << U64(1)
            v |= rng.integers(0, 2, size=n, dtype=np.uint64)
        else:
            v = rng.integers(1 if nonzero else 0, m + 1, size=n, dtype=np.uint64)
        v &= U64(m)
        pool = hints.get(t.val)
        if pool:
            take = rng.random(n) < 0.3
            choice = np.array(pool, dtype=np.uint64)[rng.integers(len(pool), size=n)] & U64(m)
            v = np.where(take, choice, v)
        env[t.val] = v
    return env


def solve_path(sem: BlockSemantics, path: PathCondition, rng: np.random.Generator
               ) -> Dict[str, int]:
    """An input assignment satisfying the path, non-zero inputs preferred.

    Up to EXHAUSTIVE_BITS input bits the whole space is evaluated; beyond
    that random (non-zero biased) samples are tried, seeded with constants
    the condition compares against.
    """
    if path.cond is T.FALSE:
        raise UnsatisfiablePath(f"path {path.path_id} is false")
    ev = Evaluator([path.cond])
    bits = sem.input_bits
    if bits <= EXHAUSTIVE_BITS:
        n = 1 << bits
        env = lane_env(sem.inputs, 0, n)
        (sat,), _ = ev.run(env)
        sat = lanes(sat, n) != 0
        if not sat.any():
            raise UnsatisfiablePath(f"path {path.path_id} has no satisfying input")
        return _pick(sem, env, sat, rng)
    hints = _constants(path.cond)
    for round_ in range(SAMPLE_ROUNDS):
        env = _random_env(sem, hints, SAMPLE_LANES, rng, nonzero=round_ < SAMPLE_ROUNDS // 2)
        (sat,), _ = ev.run(env)
        sat = lanes(sat, SAMPLE_LANES) != 0
        if sat.any():
            return _pick(sem, env, sat, rng)
    raise UnsatisfiablePath(f"path {path.path_id}: no satisfying input found by sampling")


def derive_testcases(sem: BlockSemantics, paths: Iterable[PathCondition], seed: int = 0,
                     policy: UndefinedPolicy = ZERO,
                     notes: Optional[List[str]] = None) -> List[TestCase]:
    """One test case per satisfiable controllable path.

    Expected outputs come from the semantics; tainted bits and the fields of
    invalid headers are don't-care.  Unsatisfiable paths are dropped and a
    note is appended to `notes` when given.
    """
    rng = np.random.default_rng(seed)
    out: List[TestCase] = []
    for p in paths:
        if not p.controllable:
            if notes is not None:
                notes.append(f"path {p.path_id} depends on undefined values; skipped")
            continue
        try:
            inputs = solve_path(sem, p, rng)
        except UnsatisfiablePath as exc:
            if notes is not None:
                notes.append(str(exc))
            continue
        r = concrete_eval(sem, inputs, policy)
        out.append(TestCase(sem.control, inputs, r.values, r.dont_care, p.path_id, seed))
    return out


def satisfies(cond: T.Term, inputs: Mapping[str, int]) -> bool:
    env = {k: np.array([v], dtype=U64) for k, v in inputs.items()}
    (v,), _ = Evaluator([cond]).run(env)
    return bool(np.ravel(v)[0])
