"""Symbolic interpreter: one control block -> BlockSemantics.

The whole block is executed once over a symbolic state.  Branches are merged
with per-lvalue if-then-else terms, exit is a boolean carried in the state
that guards every later write, and table applications become free
control-plane symbols (one key and one action variable per apply site).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..lang import ast as A
from ..lang.typecheck import TypedProgram
from . import terms as T

VALID_SUFFIX = "$valid"


class UnsupportedConstruct(Exception):
    """The interpreter met a construct it does not model."""


@dataclass(frozen=True)
class OutputSpec:
    name: str
    term: T.Term
    header: Optional[str] = None  # name of the validity output governing this field

    @property
    def bits(self) -> int:
        return self.term.bits


@dataclass(frozen=True)
class BlockSemantics:
    control: str
    inputs: Tuple[T.Term, ...]          # free variables: parameters, then table symbols
    outputs: Tuple[OutputSpec, ...]
    n_param_inputs: int

    @property
    def param_inputs(self) -> Tuple[T.Term, ...]:
        return self.inputs[: self.n_param_inputs]

    @property
    def table_inputs(self) -> Tuple[T.Term, ...]:
        return self.inputs[self.n_param_inputs:]

    @property
    def input_bits(self) -> int:
        return sum(t.bits for t in self.inputs)

    def output(self, name: str) -> OutputSpec:
        for o in self.outputs:
            if o.name == name:
                return o
        raise KeyError(name)

    def terms(self) -> List[T.Term]:
        return [o.term for o in self.outputs]


def dotted(path: Sequence[str]) -> str:
    return ".".join(path)


def valid_name(header_path: Sequence[str]) -> str:
    return dotted(tuple(header_path) + (VALID_SUFFIX,))


def table_key_name(table: str, site: int) -> str:
    return f"{table}_table_key_{site}"


def table_action_name(table: str, site: int) -> str:
    return f"{table}_action_{site}"


def action_width(n_actions: int) -> int:
    """ceil(log2(n + 1)), at least one bit."""
    return max(1, n_actions.bit_length())


def scalar_width(t) -> int:
    return T.BOOL_W if isinstance(t, A.BoolType) else t.width


class _State:
    __slots__ = ("env", "valid", "exited")

    def __init__(self, env, valid, exited):
        self.env: Dict[tuple, T.Term] = env
        self.valid: Dict[tuple, T.Term] = valid
        self.exited: T.Term = exited

    def copy(self) -> "_State":
        return _State(dict(self.env), dict(self.valid), self.exited)


def _merge(c: T.Term, a: _State, b: _State) -> _State:
    env = {k: T.ite(c, v, b.env[k]) for k, v in a.env.items()}
    valid = {k: T.ite(c, v, b.valid[k]) for k, v in a.valid.items()}
    return _State(env, valid, T.ite(c, a.exited, b.exited))


class _Interpreter:
    def __init__(self, tp: TypedProgram, control: A.ControlDecl):
        self.info = tp.info
        self.control = control
        self.leaf_header: Dict[tuple, tuple] = {}
        self.param_names = {p.name for p in control.params}
        self.sites: Dict[str, int] = {}
        self.table_inputs: List[T.Term] = []

    # --------------------------------------------------------------- entry

    def run(self) -> BlockSemantics:
        env: Dict[tuple, T.Term] = {}
        valid: Dict[tuple, T.Term] = {}
        inputs: List[T.Term] = []
        for p in self.control.params:
            if isinstance(p.type, A.NamedType) and p.type.name not in self.info.decls:
                raise UnsupportedConstruct(f"unknown type {p.type.name}")
            headers = self.info.headers(p.type, (p.name,))
            for h in headers:
                if p.direction == "out":
                    valid[h] = T.FALSE
                else:
                    v = T.bool_var(valid_name(h))
                    valid[h] = v
            emitted = set()
            for path, lt, hdr in self.info.leaves(p.type, (p.name,)):
                if hdr is not None:
                    self.leaf_header[path] = hdr
                    if p.direction != "out" and hdr not in emitted:
                        emitted.add(hdr)
                        inputs.append(valid[hdr])
                w = scalar_width(lt)
                if p.direction == "out":
                    env[path] = T.undef(w)
                else:
                    v = T.var(dotted(path), w)
                    env[path] = v
                    inputs.append(v)
        state = _State(env, valid, T.FALSE)
        self.exec_block(self.control.body, state)
        outputs: List[OutputSpec] = []
        for p in self.control.params:
            if p.direction == "in":
                continue
            emitted = set()
            for path, lt, hdr in self.info.leaves(p.type, (p.name,)):
                if hdr is not None and hdr not in emitted:
                    emitted.add(hdr)
                    outputs.append(OutputSpec(valid_name(hdr), state.valid[hdr]))
                outputs.append(OutputSpec(dotted(path), state.env[path],
                                          valid_name(hdr) if hdr is not None else None))
        n_params = len(inputs)
        return BlockSemantics(self.control.name, tuple(inputs + self.table_inputs),
                              tuple(outputs), n_params)

    # --------------------------------------------------------------- statements

    def exec_block(self, b: A.Block, st: _State) -> None:
        before = set(st.env)
        for s in b.stmts:
            self.exec(s, st)
        for k in [k for k in st.env if k not in before]:
            del st.env[k]

    def skip(self, s: Optional[A.Stmt]) -> None:
        # statements that never run still own their apply-site numbers
        if s is None:
            return
        for x in A.walk_stmts(s):
            if isinstance(x, A.ApplyTable):
                self.sites[x.table] = self.sites.get(x.table, 0) + 1

    def exec(self, s: A.Stmt, st: _State) -> None:
        if st.exited is T.TRUE:
            self.skip(s)
            return
        if isinstance(s, A.Block):
            self.exec_block(s, st)
        elif isinstance(s, A.Assign):
            self.write(st, s.target, self.eval(s.value, st), st.exited)
        elif isinstance(s, A.VarDecl):
            w = scalar_width(s.type)
            st.env[(s.name,)] = T.undef(w) if s.init is None else self.eval(s.init, st)
        elif isinstance(s, A.If):
            c = self.eval(s.cond, st)
            if c is T.TRUE or c is T.FALSE:
                branch = s.then if c is T.TRUE else s.other
                self.skip(s.other if c is T.TRUE else s.then)
                if branch is not None:
                    self.exec_scoped(branch, st)
                return
            a = st.copy()
            self.exec_scoped(s.then, a)
            b = st.copy()
            if s.other is not None:
                self.exec_scoped(s.other, b)
            m = _merge(c, a, b)
            st.env, st.valid, st.exited = m.env, m.valid, m.exited
        elif isinstance(s, A.Call):
            self.call(s.name, s.args, st)
        elif isinstance(s, A.ApplyTable):
            self.apply_table(s.table, st)
        elif isinstance(s, A.Exit):
            st.exited = T.TRUE
        elif isinstance(s, A.SetValidity):
            self.set_validity(s, st)
        else:
            raise UnsupportedConstruct(f"statement {type(s).__name__}")

    def exec_scoped(self, s: A.Stmt, st: _State) -> None:
        self.exec_block(A.as_block(s), st)

    def call(self, name: str, args: Sequence[A.Expr], st: _State) -> None:
        if name == A.NO_ACTION:
            return
        action = self.control.action(name)
        if action is None:
            raise UnsupportedConstruct(f"call to unknown action {name}")
        entry_exit = st.exited
        values = []
        for p, arg in zip(action.params, args):
            if p.direction == "out":
                values.append(T.undef(scalar_width(p.type)))
            else:
                values.append(self.eval(arg, st))
        frame_env = {k: v for k, v in st.env.items() if k[0] in self.param_names}
        for p, v in zip(action.params, values):
            frame_env[(p.name,)] = v
        frame = _State(frame_env, st.valid, st.exited)
        self.exec_block(action.body, frame)
        for k in st.env:
            if k[0] in self.param_names:
                st.env[k] = frame.env[k]
        st.valid = frame.valid
        st.exited = frame.exited
        # copy-out happens even when the body exited
        for p, arg in zip(action.params, args):
            if p.direction != "in":
                self.write(st, arg, frame.env[(p.name,)], entry_exit)

    def apply_table(self, name: str, st: _State) -> None:
        table = self.control.table(name)
        if table is None:
            raise UnsupportedConstruct(f"apply of unknown table {name}")
        site = self.sites.get(name, 0)
        self.sites[name] = site + 1
        key = self.eval(table.key, st)
        kv = T.var(table_key_name(name, site), key.width)
        aw = action_width(len(table.actions))
        av = T.var(table_action_name(name, site), aw)
        self.table_inputs.extend((kv, av))
        matched = T.eq(key, kv)
        default = st.copy()
        self.call(table.default_action, (), default)
        # if (key == k) { if (act == 1) a1 elif ... else default } else default
        acc = default
        for i in range(len(table.actions), 0, -1):
            branch = st.copy()
            self.call(table.actions[i - 1], (), branch)
            acc = _merge(T.eq(av, T.const(aw, i)), branch, acc)
        acc = _merge(matched, acc, default)
        st.env, st.valid, st.exited = acc.env, acc.valid, acc.exited

    def set_validity(self, s: A.SetValidity, st: _State) -> None:
        h = A.lvalue_path(s.target)
        if h not in st.valid:
            raise UnsupportedConstruct(f"{dotted(h)} is not a header")
        g = st.exited
        before = st.valid[h]
        if s.valid:
            for path, hdr in self.leaf_header.items():
                if hdr == h:
                    old = st.env[path]
                    new = T.ite(before, old, T.undef(old.width))
                    st.env[path] = T.ite(g, old, new)
            st.valid[h] = T.ite(g, before, T.TRUE)
        else:
            st.valid[h] = T.ite(g, before, T.FALSE)

    def write(self, st: _State, target: A.Expr, value: T.Term, guard: T.Term) -> None:
        if isinstance(target, A.Slice):
            path = A.lvalue_path(target.expr)
            old = st.env[path]
            parts = []
            if target.hi < old.width - 1:
                parts.append(T.extract(old, old.width - 1, target.hi + 1))
            parts.append(value)
            if target.lo > 0:
                parts.append(T.extract(old, target.lo - 1, 0))
            new = T.concat_all(parts)
        else:
            path = A.lvalue_path(target)
            if path not in st.env:
                raise UnsupportedConstruct(f"write to non-scalar {dotted(path or ())}")
            old = st.env[path]
            new = value
        st.env[path] = T.ite(guard, old, new)

    # --------------------------------------------------------------- expressions

    def eval(self, e: A.Expr, st: _State) -> T.Term:
        if isinstance(e, A.Literal):
            if e.width is None:
                raise UnsupportedConstruct("untyped literal (program not elaborated)")
            return T.const(e.width, e.value)
        if isinstance(e, A.BoolLit):
            return T.bool_const(e.value)
        if isinstance(e, (A.Name, A.Member)):
            path = A.lvalue_path(e)
            if path is None or path not in st.env:
                raise UnsupportedConstruct(f"read of non-scalar {print_path(e)}")
            v = st.env[path]
            hdr = self.leaf_header.get(path)
            if hdr is not None:
                v = T.ite(st.valid[hdr], v, T.undef(v.width))
            return v
        if isinstance(e, A.IsValid):
            return st.valid[A.lvalue_path(e.expr)]
        if isinstance(e, A.Slice):
            return T.extract(self.eval(e.expr, st), e.hi, e.lo)
        if isinstance(e, A.Cast):
            x = self.eval(e.expr, st)
            if isinstance(e.type, A.BoolType):
                return x if x.width == T.BOOL_W else T.bv_to_bool(x)
            if x.width == T.BOOL_W:
                x = T.bool_to_bv(x)
            return T.resize(x, e.type.width)
        if isinstance(e, A.Unary):
            x = self.eval(e.expr, st)
            if e.op == "!":
                return T.lnot(x)
            if e.op == "~":
                return T.bvnot(x)
            return T.neg(x)
        if isinstance(e, A.Binary):
            return self.binary(e, st)
        if isinstance(e, A.Ternary):
            return T.ite(self.eval(e.cond, st), self.eval(e.then, st), self.eval(e.other, st))
        raise UnsupportedConstruct(f"expression {type(e).__name__}")

    def binary(self, e: A.Binary, st: _State) -> T.Term:
        a = self.eval(e.left, st)
        b = self.eval(e.right, st)
        op = e.op
        if op in _BV:
            return T.binop(_BV[op], a, b)
        if op == "<<":
            return T.shl(a, b)
        if op == ">>":
            return T.lshr(a, b)
        if op == "==":
            return T.eq(a, b)
        if op == "!=":
            return T.lnot(T.eq(a, b))
        if op == "<":
            return T.ult(a, b)
        if op == "<=":
            return T.ule(a, b)
        if op == ">":
            return T.ult(b, a)
        if op == ">=":
            return T.ule(b, a)
        if op == "&&":
            return T.land(a, b)
        if op == "||":
            return T.lor(a, b)
        if op == "++":
            return T.concat(a, b)
        raise UnsupportedConstruct(f"operator {op}")


_BV = {"+": T.ADD, "-": T.SUB, "*": T.MUL, "&": T.AND, "|": T.OR, "^": T.XOR}


def print_path(e: A.Expr) -> str:
    p = A.lvalue_path(e)
    return dotted(p) if p else type(e).__name__


def interpret_block(tp: TypedProgram, control: str) -> BlockSemantics:
    """Functional form of one control block of a typechecked program."""
    c = tp.program.control(control)
    if c is None:
        raise UnsupportedConstruct(f"no control named {control}")
    try:
        return _Interpreter(tp, c).run()
    except (KeyError, T.WidthError) as exc:
        raise UnsupportedConstruct(f"internal inconsistency: {exc}") from exc


def interpret_program(tp: TypedProgram) -> Dict[str, BlockSemantics]:
    return {name: interpret_block(tp, name) for name in tp.program.pipeline()}
