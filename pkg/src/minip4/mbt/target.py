"""Reference target: executes a MiniP4 control directly on concrete packets.

The executor walks the AST once per batch; every value is a numpy array with
one lane per packet, and branch arms run under lane masks.  It shares no code
with the symbolic interpreter beyond input/output naming, so agreement
between the two is a meaningful check.

Control plane: each table apply site has one installed entry.  Its key is
the site's `<table>_table_key_<k>` input and its action is the action with
the 1-based id given by `<table>_action_<k>`; an id outside the action list
installs the default action.  Packets whose key misses run the default, and
a site without control-plane values has no entry at all.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..lang import ast as A
from ..lang.typecheck import TypedProgram
from ..semantics.evaluate import ZERO, UndefinedPolicy
from ..semantics.interp import (action_width, dotted, table_action_name, table_key_name,
                               valid_name)

U64 = np.uint64


class TargetCrash(RuntimeError):
    """The target hit a construct it cannot execute."""


def _mask(w: int):
    return U64((1 << w) - 1)


Value = Tuple[np.ndarray, int]  # lanes, width (0 = bool)


class _State:
    __slots__ = ("env", "valid", "exited")

    def __init__(self, env, valid, exited):
        self.env: Dict[tuple, Value] = env
        self.valid: Dict[tuple, np.ndarray] = valid
        self.exited: np.ndarray = exited


class _Exec:
    def __init__(self, tp: TypedProgram, control: A.ControlDecl, inputs: Mapping[str, np.ndarray],
                 n: int, policy: UndefinedPolicy):
        self.info = tp.info
        self.control = control
        self.inputs = inputs
        self.n = n
        self.policy = policy
        self.sites: Dict[str, int] = {}
        self.leaf_header: Dict[tuple, tuple] = {}
        self.param_names = {p.name for p in control.params}

    def undef(self, w: int) -> np.ndarray:
        v = self.policy.value(w)
        if w == 0:
            return np.full(self.n, bool(v))
        return np.full(self.n, v, dtype=U64)

    def input(self, name: str, w: int) -> np.ndarray:
        if name not in self.inputs:
            raise KeyError(name)
        x = np.broadcast_to(np.asarray(self.inputs[name]), (self.n,))
        if w == 0:
            return x.astype(bool)
        return x.astype(U64) & _mask(w)

    # ------------------------------------------------------------ entry

    def run(self) -> Dict[str, np.ndarray]:
        env: Dict[tuple, Value] = {}
        valid: Dict[tuple, np.ndarray] = {}
        for p in self.control.params:
            for h in self.info.headers(p.type, (p.name,)):
                valid[h] = np.zeros(self.n, bool) if p.direction == "out" else \
                    self.input(valid_name(h), 0)
            for path, lt, hdr in self.info.leaves(p.type, (p.name,)):
                if hdr is not None:
                    self.leaf_header[path] = hdr
                w = lt.width if isinstance(lt, A.BitType) else 0
                env[path] = (self.undef(w) if p.direction == "out" else self.input(dotted(path), w), w)
        st = _State(env, valid, np.zeros(self.n, bool))
        self.block(self.control.body, st, np.ones(self.n, bool))
        out: Dict[str, np.ndarray] = {}
        for p in self.control.params:
            if p.direction == "in":
                continue
            for path, lt, hdr in self.info.leaves(p.type, (p.name,)):
                if hdr is not None and valid_name(hdr) not in out:
                    out[valid_name(hdr)] = st.valid[hdr]
                out[dotted(path)] = st.env[path][0]
        return {k: np.broadcast_to(v, (self.n,)) for k, v in out.items()}

    # ------------------------------------------------------------ statements

    def block(self, b: A.Block, st: _State, live: np.ndarray) -> None:
        before = set(st.env)
        for s in b.stmts:
            self.stmt(s, st, live)
        for k in [k for k in st.env if k not in before]:
            del st.env[k]

    def stmt(self, s: A.Stmt, st: _State, live: np.ndarray) -> None:
        if isinstance(s, A.Block):
            self.block(s, st, live)
        elif isinstance(s, A.Assign):
            v, _ = self.eval(s.value, st)
            self.write(st, s.target, v, live & ~st.exited)
        elif isinstance(s, A.VarDecl):
            w = s.type.width if isinstance(s.type, A.BitType) else 0
            v = self.undef(w) if s.init is None else self.eval(s.init, st)[0]
            st.env[(s.name,)] = (v, w)
        elif isinstance(s, A.If):
            c, _ = self.eval(s.cond, st)
            self.block(A.as_block(s.then), st, live & c)
            if s.other is not None:
                self.block(A.as_block(s.other), st, live & ~c)
        elif isinstance(s, A.Call):
            self.call(s.name, s.args, st, live)
        elif isinstance(s, A.ApplyTable):
            self.apply(s.table, st, live)
        elif isinstance(s, A.Exit):
            st.exited = st.exited | live
        elif isinstance(s, A.SetValidity):
            h = A.lvalue_path(s.target)
            eff = live & ~st.exited
            if s.valid:
                for path, hdr in self.leaf_header.items():
                    if hdr == h:
                        old, w = st.env[path]
                        fresh = eff & ~st.valid[h]
                        st.env[path] = (np.where(fresh, self.undef(w), old), w)
            st.valid[h] = np.where(eff, s.valid, st.valid[h])
        else:
            raise TargetCrash(f"cannot execute {type(s).__name__}")

    def call(self, name: str, args, st: _State, live: np.ndarray) -> None:
        if name == A.NO_ACTION:
            return
        action = self.control.action(name)
        if action is None:
            raise TargetCrash(f"unknown action {name}")
        entry_exited = st.exited
        frame_env = {k: v for k, v in st.env.items() if k[0] in self.param_names}
        for p, arg in zip(action.params, args):
            w = p.type.width if isinstance(p.type, A.BitType) else 0
            frame_env[(p.name,)] = (self.undef(w), w) if p.direction == "out" else \
                (self.eval(arg, st)[0], w)
        frame = _State(frame_env, st.valid, st.exited)
        self.block(action.body, frame, live)
        for k in st.env:
            if k[0] in self.param_names:
                st.env[k] = frame.env[k]
        st.exited = frame.exited
        guard = live & ~entry_exited
        for p, arg in zip(action.params, args):
            if p.direction != "in":
                self.write(st, arg, frame.env[(p.name,)][0], guard)

    def apply(self, name: str, st: _State, live: np.ndarray) -> None:
        t = self.control.table(name)
        site = self.sites.get(name, 0)
        self.sites[name] = site + 1
        key, kw = self.eval(t.key, st)
        n_act = len(t.actions)
        aw = action_width(n_act)
        kname, aname = table_key_name(name, site), table_action_name(name, site)
        if kname in self.inputs and aname in self.inputs:
            entry_key = self.input(kname, kw)
            entry_act = self.input(aname, aw)
            hit = live & (np.broadcast_to(key, (self.n,)) == entry_key)
        else:
            # no entry installed at this site: every packet misses
            entry_act = np.zeros(self.n, dtype=U64)
            hit = np.zeros(self.n, bool)
        chosen = np.zeros(self.n, bool)
        for i, a in enumerate(t.actions, 1):
            lanes = hit & (entry_act == U64(i))
            chosen |= lanes
            self.call(a, (), st, lanes)
        self.call(t.default_action, (), st, live & ~chosen)

    def write(self, st: _State, target: A.Expr, value, guard: np.ndarray) -> None:
        if isinstance(target, A.Slice):
            path = A.lvalue_path(target.expr)
            old, w = st.env[path]
            m = _mask(target.hi - target.lo + 1) << U64(target.lo)
            new = (old & ~m & _mask(w)) | ((np.asarray(value, dtype=U64) << U64(target.lo)) & m)
        else:
            path = A.lvalue_path(target)
            old, w = st.env[path]
            new = value
        st.env[path] = (np.where(guard, new, old), w)

    # ------------------------------------------------------------ expressions

    def eval(self, e: A.Expr, st: _State) -> Value:
        if isinstance(e, A.Literal):
            return U64(e.value), e.width
        if isinstance(e, A.BoolLit):
            return np.bool_(e.value), 0
        if isinstance(e, (A.Name, A.Member)):
            path = A.lvalue_path(e)
            v, w = st.env[path]
            hdr = self.leaf_header.get(path)
            if hdr is not None:
                v = np.where(st.valid[hdr], v, self.undef(w))
            return v, w
        if isinstance(e, A.IsValid):
            return st.valid[A.lvalue_path(e.expr)], 0
        if isinstance(e, A.Slice):
            v, _ = self.eval(e.expr, st)
            w = e.hi - e.lo + 1
            return (v >> U64(e.lo)) & _mask(w), w
        if isinstance(e, A.Cast):
            v, w = self.eval(e.expr, st)
            if isinstance(e.type, A.BoolType):
                return (v if w == 0 else v != U64(0)), 0
            if w == 0:
                v = np.asarray(v).astype(U64)
            return v & _mask(e.type.width), e.type.width
        if isinstance(e, A.Unary):
            v, w = self.eval(e.expr, st)
            if e.op == "!":
                return ~v, 0
            if e.op == "~":
                return ~v & _mask(w), w
            return (U64(0) - v) & _mask(w), w
        if isinstance(e, A.Ternary):
            c, _ = self.eval(e.cond, st)
            a, w = self.eval(e.then, st)
            b, _ = self.eval(e.other, st)
            return np.where(c, a, b), w
        if isinstance(e, A.Binary):
            return self.binary(e, st)
        raise TargetCrash(f"cannot evaluate {type(e).__name__}")

    def binary(self, e: A.Binary, st: _State) -> Value:
        a, w = self.eval(e.left, st)
        b, wb = self.eval(e.right, st)
        op = e.op
        m = _mask(w) if w else None
        if op == "+":
            return (a + b) & m, w
        if op == "-":
            return (a - b) & m, w
        if op == "*":
            return (a * b) & m, w
        if op == "&":
            return a & b, w
        if op == "|":
            return a | b, w
        if op == "^":
            return a ^ b, w
        if op in ("<<", ">>"):
            amt = np.minimum(b, U64(63))
            r = (a << amt) & m if op == "<<" else a >> amt
            return np.where(b >= U64(w), U64(0), r), w
        if op == "++":
            return (a << U64(wb)) | b, w + wb
        if op == "&&":
            return a & b, 0
        if op == "||":
            return a | b, 0
        cmp = {"==": np.equal, "!=": np.not_equal, "<": np.less, "<=": np.less_equal,
               ">": np.greater, ">=": np.greater_equal}.get(op)
        if cmp is None:
            raise TargetCrash(f"unknown operator {op}")
        return cmp(a, b), 0


def execute(tp: TypedProgram, control: str, inputs: Mapping[str, object], n: int = 1,
            policy: UndefinedPolicy = ZERO) -> Dict[str, np.ndarray]:
    """Run `control` on n packets; inputs map input names to ints or lane arrays."""
    c = tp.program.control(control)
    if c is None:
        raise TargetCrash(f"no control named {control}")
    try:
        with np.errstate(over="ignore"):
            return _Exec(tp, c, inputs, n, policy).run()
    except KeyError as exc:
        raise MissingInput(str(exc)) from None


class MissingInput(KeyError):
    """A packet or control-plane value the target needs was not supplied."""


@dataclass
class TargetResult:
    status: str  # "pass" | "fail" | "reject"
    actual: Dict[str, int] = field(default_factory=dict)
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def run_target(final: TypedProgram, tc, policy: UndefinedPolicy = ZERO,
               control: Optional[str] = None) -> TargetResult:
    """Execute one test case and compare with its expectation outside don't-care bits."""
    control = control or tc.control
    try:
        out = execute(final, control, tc.inputs, 1, policy)
    except MissingInput as exc:
        return TargetResult("reject", reason=f"cannot install input {exc}")
    actual = {k: int(v[0]) for k, v in out.items()}
    bad: List[str] = []
    for name, exp in tc.expected.items():
        if name not in actual:
            return TargetResult("reject", actual, f"target has no output {name}")
        care = ~tc.dont_care.get(name, 0)
        if (actual[name] ^ exp) & care:
            bad.append(name)
    if bad:
        return TargetResult("fail", actual, "mismatch on " + ", ".join(bad))
    return TargetResult("pass", actual)
