"""Random generation of well-typed MiniP4 programs.

Generation is type-directed: every expression is grown for a known target
type, so the result typechecks by construction.  Each AST production has a
weight; a production with weight 0 never appears in the output.

Control inputs are budgeted: the total width of all symbolic inputs of a
control (header fields, validity bits, scalar parameters and one key plus
action symbol per table apply) stays at or below `target_input_bits`, which
keeps every generated program inside the exhaustive-equivalence budget.
"""
from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .lang import ast as A
from .lang.typecheck import TypedProgram, typecheck
from .semantics.interp import action_width

STMT_PRODUCTIONS = ("assign", "if", "vardecl", "block", "call", "apply", "exit", "setvalid")
BIT_PRODUCTIONS = ("literal", "lvalue", "slice", "cast", "concat", "unary", "binary", "shift",
                   "ternary")
BOOL_PRODUCTIONS = ("boollit", "boolvar", "compare", "logical", "not", "isvalid")
PRODUCTIONS = STMT_PRODUCTIONS + BIT_PRODUCTIONS + BOOL_PRODUCTIONS

DEFAULT_WEIGHTS: Dict[str, float] = {
    "assign": 10, "if": 4, "vardecl": 3, "block": 1, "call": 3, "apply": 2, "exit": 0.5,
    "setvalid": 1,
    "literal": 4, "lvalue": 6, "slice": 1.5, "cast": 1, "concat": 1, "unary": 1, "binary": 4,
    "shift": 1.5, "ternary": 1.5,
    "boollit": 0.5, "boolvar": 1, "compare": 5, "logical": 1.5, "not": 1, "isvalid": 1.5,
}


class GenerationBudgetExhausted(RuntimeError):
    pass


@dataclass
class GenConfig:
    seed: int = 0
    weights: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    max_statements_per_block: int = 10
    min_statements_per_block: int = 1
    max_depth: int = 3
    max_controls: int = 2
    width_pool: Tuple[int, ...] = (1, 2, 3, 4, 8)
    allow_undefined: bool = True
    allow_tables: bool = True
    allow_exit: bool = True
    allow_ternary: bool = True
    target_input_bits: int = 16
    max_paths: int = 64
    max_attempts: int = 50

    def __post_init__(self):
        unknown = set(self.weights) - set(PRODUCTIONS)
        if unknown:
            raise ValueError(f"unknown productions: {', '.join(sorted(unknown))}")
        for k in PRODUCTIONS:
            self.weights.setdefault(k, 0.0)
            if self.weights[k] < 0:
                raise ValueError(f"negative weight for {k}")
        if not any(self.weights[k] > 0 for k in ("literal", "lvalue")):
            raise ValueError("at least one of the literal/lvalue productions needs positive weight")
        if not self.width_pool or any(not 1 <= w <= A.MAX_WIDTH for w in self.width_pool):
            raise ValueError("width_pool must hold widths in 1..64")
        if self.target_input_bits < 2:
            raise ValueError("target_input_bits must be at least 2")
        self.width_pool = tuple(self.width_pool)

    def with_seed(self, seed: int) -> "GenConfig":
        return dataclasses.replace(self, seed=seed, weights=dict(self.weights))

    # flat key=value text, `weight.<production> = x` for weights
    @classmethod
    def from_text(cls, text: str) -> "GenConfig":
        kw: Dict[str, object] = {}
        weights = dict(DEFAULT_WEIGHTS)
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {n}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key.startswith("weight."):
                weights[key[7:]] = float(value)
            elif key == "width_pool":
                kw[key] = tuple(int(x) for x in value.replace(",", " ").split())
            elif key in types and key != "weights":
                if key.startswith("allow_"):
                    if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                        raise ValueError(f"line {n}: {key} expects a boolean")
                    kw[key] = value.lower() in ("true", "1", "yes")
                else:
                    kw[key] = int(value, 0)
            else:
                raise ValueError(f"line {n}: unknown key {key!r}")
        return cls(weights=weights, **kw)

    @classmethod
    def from_file(cls, path: str) -> "GenConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_text(f.read())

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "weights":
                continue
            if f.name == "width_pool":
                v = " ".join(str(w) for w in v)
            elif isinstance(v, bool):
                v = str(v).lower()
            lines.append(f"{f.name} = {v}")
        lines += [f"weight.{k} = {self.weights[k]:g}" for k in PRODUCTIONS]
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ path count

def _expr_paths(e: Optional[A.Expr]) -> int:
    if e is None:
        return 1
    return 2 ** sum(1 for x in A.walk_expr(e) if isinstance(x, A.Ternary))


def _stmt_paths(s: A.Stmt, c: A.ControlDecl) -> int:
    if isinstance(s, A.Block):
        n = 1
        for x in s.stmts:
            n *= _stmt_paths(x, c)
        return n
    if isinstance(s, A.If):
        other = 1 if s.other is None else _stmt_paths(s.other, c)
        return _expr_paths(s.cond) * (_stmt_paths(s.then, c) + other)
    if isinstance(s, A.Call):
        n = 1
        for a in s.args:
            n *= _expr_paths(a)
        return n * _action_paths(s.name, c)
    if isinstance(s, A.ApplyTable):
        t = c.table(s.table)
        return sum(_action_paths(a, c) for a in t.actions) + _action_paths(t.default_action, c)
    n = 1
    for e in A.stmt_exprs(s):
        n *= _expr_paths(e)
    return n


def _action_paths(name: str, c: A.ControlDecl) -> int:
    a = c.action(name)
    return 1 if a is None else _stmt_paths(a.body, c)


def estimate_paths(tp) -> int:
    """Upper bound on execution paths of the largest control.

    Sequencing multiplies, branch arms add, a table apply adds one arm per
    listed action plus the default, and each conditional expression doubles.
    """
    p = tp.program if isinstance(tp, TypedProgram) else tp
    best = 1
    for c in p.controls:
        best = max(best, _stmt_paths(c.body, c))
    return best


# ------------------------------------------------------------------ generator

@dataclass
class _Var:
    path: tuple
    type: object  # A.BitType or A.BOOL
    writable: bool

    def expr(self) -> A.Expr:
        return A.path_expr(self.path)

    @property
    def width(self) -> int:
        return self.type.width if isinstance(self.type, A.BitType) else 0


class _Gen:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.w = cfg.weights
        self.counter = 0

    # -------------------------------------------------------------- helpers

    def name(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def pick(self, options: Sequence[str]) -> Optional[str]:
        opts = [o for o in options if self.w.get(o, 0) > 0]
        if not opts:
            return None
        return self.rng.choices(opts, weights=[self.w[o] for o in opts])[0]

    def chance(self, p: float) -> bool:
        return self.rng.random() < p

    def width(self) -> int:
        return self.rng.choice(self.cfg.width_pool)

    # -------------------------------------------------------------- program

    def program(self) -> A.Program:
        headers = self.header_types()
        struct = A.StructDecl("Hdr", tuple(A.FieldDecl(A.NamedType(h.name), f"h{i}")
                                           for i, h in enumerate(headers)))
        self.headers = headers
        n = self.rng.randint(1, max(1, self.cfg.max_controls))
        names = ["ig", "eg", "c2", "c3", "c4", "c5"][:n] if n <= 6 else [f"c{i}" for i in range(n)]
        controls = tuple(self.control(name) for name in names)
        package = tuple(names) if n > 1 else ()
        return A.Program(tuple(headers) + (struct,), controls, package)

    def header_types(self) -> List[A.HeaderDecl]:
        # leave room for scalar params and at least one table apply
        budget = self.cfg.target_input_bits - 4
        if self.cfg.allow_tables and self.w["apply"] > 0:
            budget -= 5
        budget = max(budget, 2)
        out = []
        for i in range(self.rng.randint(1, 2)):
            fields = []
            used = 1  # validity bit
            for j in range(self.rng.randint(1, 3)):
                w = self.width()
                if used + w > budget:
                    w = budget - used
                if w < 1:
                    break
                fields.append(A.FieldDecl(A.BitType(w), f"f{j}"))
                used += w
            if not fields:
                break
            budget -= used
            out.append(A.HeaderDecl(f"H{i}", tuple(fields)))
        if not out:
            out.append(A.HeaderDecl("H0", (A.FieldDecl(A.BitType(1), "f0"),)))
        return out

    def control(self, name: str) -> A.ControlDecl:
        cfg = self.cfg
        params = [A.Param("inout", A.NamedType("Hdr"), "h")]
        used = sum(1 + sum(f.type.width for f in h.fields) for h in self.headers)
        room = cfg.target_input_bits - used
        if room >= 1 and self.chance(0.5):
            w = min(self.width(), room)
            params.append(A.Param("in", A.BitType(w), "m"))
            room -= w
        if room >= 1 and self.chance(0.3):
            params.append(A.Param("inout", A.BOOL, "flag"))
            room -= 1
        if cfg.allow_undefined and self.chance(0.4):
            params.append(A.Param("out", A.BitType(self.width()), "o"))
        self.budget = room
        self.params = params
        self.param_vars: List[_Var] = []
        self.header_paths: List[tuple] = []
        for p in params:
            w = p.direction != "in"
            if isinstance(p.type, A.NamedType):
                for i, h in enumerate(self.headers):
                    self.header_paths.append((p.name, f"h{i}"))
                    for f in h.fields:
                        self.param_vars.append(_Var((p.name, f"h{i}", f.name), f.type, w))
            else:
                self.param_vars.append(_Var((p.name,), p.type, w))

        actions: List[A.ActionDecl] = []
        if self.w["call"] > 0 or (self.w["apply"] > 0 and cfg.allow_tables):
            for _ in range(self.rng.randint(1, 3)):
                actions.append(self.action())
        self.actions = actions
        tables: List[A.TableDecl] = []
        plain = [a.name for a in actions if not a.params]
        if cfg.allow_tables and self.w["apply"] > 0:
            for i in range(self.rng.randint(1, 2)):
                tables.append(self.table(f"t{i}", plain))
        self.tables = tables
        self.scopes = [list(self.param_vars)]
        self.in_action = False
        body = self.block(0, top=True)
        return A.ControlDecl(name, tuple(params), tuple(actions), tuple(tables), body)

    def action(self) -> A.ActionDecl:
        name = self.name("a")
        params = []
        if self.chance(0.5):
            dirs = ["in", "inout"] + (["out"] if self.cfg.allow_undefined else [])
            for _ in range(self.rng.randint(1, 2)):
                params.append(A.Param(self.rng.choice(dirs), A.BitType(self.width()), self.name("p")))
        self.scopes = [list(self.param_vars),
                       [_Var((p.name,), p.type, p.direction != "in") for p in params]]
        self.in_action = True
        n = self.rng.randint(1, max(1, min(4, self.cfg.max_statements_per_block)))
        early_exit = None
        writes_back = any(p.direction != "in" for p in params)
        if writes_back and self.cfg.allow_exit and self.w["exit"] > 0 and self.chance(0.3):
            # exits inside actions with copy-out are where calling conventions get subtle;
            # the guard is built before any local exists so it may go anywhere
            early_exit = A.Exit()
            if self.w["if"] > 0 and self.chance(0.5):
                early_exit = A.If(self.boolean(1), A.Block((early_exit,)))
        stmts = self.stmts(n, 1)
        if early_exit is not None:
            stmts.insert(self.rng.randint(0, len(stmts)), early_exit)
        body = A.Block(tuple(stmts))
        self.in_action = False
        return A.ActionDecl(name, tuple(params), body)

    def table(self, name: str, plain: List[str]) -> A.TableDecl:
        keys = [v for v in self.param_vars if isinstance(v.type, A.BitType)]
        v = self.rng.choice(keys)
        key: A.Expr = v.expr()
        if v.width > 4 and self.chance(0.5):
            lo = self.rng.randint(0, v.width - 4)
            key = A.Slice(key, lo + 3, lo)
        choices = list(plain) + [A.NO_ACTION]
        k = self.rng.randint(1, len(choices))
        acts = self.rng.sample(choices, k)
        default = self.rng.choice(acts + [A.NO_ACTION])
        return A.TableDecl(name, key, tuple(acts), default)

    def apply_cost(self, t: A.TableDecl) -> int:
        kw = t.key.hi - t.key.lo + 1 if isinstance(t.key, A.Slice) else \
            next(v.width for v in self.param_vars if v.path == A.lvalue_path(t.key))
        return kw + action_width(len(t.actions))

    # -------------------------------------------------------------- statements

    def block(self, depth: int, top: bool = False) -> A.Block:
        cfg = self.cfg
        if top:
            n = self.rng.randint(min(cfg.min_statements_per_block, cfg.max_statements_per_block),
                                 cfg.max_statements_per_block)
        else:
            n = self.rng.randint(1, max(1, cfg.max_statements_per_block // 3))
        self.scopes.append([])
        stmts = self.stmts(n, depth)
        self.scopes.pop()
        return A.Block(tuple(stmts))

    def stmts(self, n: int, depth: int) -> List[A.Stmt]:
        out = []
        for _ in range(n):
            s = self.stmt(depth)
            if s is not None:
                out.append(s)
        return out

    def stmt(self, depth: int) -> Optional[A.Stmt]:
        options = ["assign", "vardecl", "setvalid"]
        if depth < self.cfg.max_depth:
            options += ["if", "block"]
        if self.cfg.allow_exit:
            options.append("exit")
        if not self.in_action:
            if self.actions:
                options.append("call")
            if self.tables:
                options.append("apply")
        for _ in range(8):
            kind = self.pick(options)
            if kind is None:
                return None
            s = getattr(self, "s_" + kind)(depth)
            if s is not None:
                return s
        return None

    def visible(self) -> List[_Var]:
        return [v for scope in self.scopes for v in scope]

    def s_assign(self, depth):
        targets = [v for v in self.visible() if v.writable]
        if not targets:
            return None
        v = self.rng.choice(targets)
        if isinstance(v.type, A.BitType) and v.width > 1 and self.chance(0.25):
            hi = self.rng.randint(0, v.width - 1)
            lo = self.rng.randint(0, hi)
            return A.Assign(A.Slice(v.expr(), hi, lo), self.bit(hi - lo + 1, 0))
        return A.Assign(v.expr(), self.value(v.type, 0))

    def s_vardecl(self, depth):
        t = A.BOOL if self.chance(0.2) else A.BitType(self.width())
        init = None
        if not self.cfg.allow_undefined or self.chance(0.75):
            init = self.value(t, 0)
        name = self.name("v")
        self.scopes[-1].append(_Var((name,), t, True))
        return A.VarDecl(t, name, init)

    def s_if(self, depth):
        cond = self.boolean(0)
        then = self.block(depth + 1)
        other = self.block(depth + 1) if self.chance(0.5) else None
        return A.If(cond, then, other)

    def s_block(self, depth):
        return self.block(depth + 1)

    def s_exit(self, depth):
        return A.Exit()

    def s_setvalid(self, depth):
        if not self.cfg.allow_undefined:
            return None
        return A.SetValidity(A.path_expr(self.rng.choice(self.header_paths)), self.chance(0.5))

    def s_call(self, depth):
        a = self.rng.choice(self.actions)
        args = []
        for p in a.params:
            if p.direction == "in":
                args.append(self.bit(p.type.width, 0))
                continue
            arg = self.writable_of_width(p.type.width)
            if arg is None:
                return None
            args.append(arg)
        return A.Call(a.name, tuple(args))

    def writable_of_width(self, w: int) -> Optional[A.Expr]:
        exact = [v for v in self.visible() if v.writable and v.width == w]
        wider = [v for v in self.visible() if v.writable and v.width > w]
        if wider and (not exact or self.chance(0.3)):
            v = self.rng.choice(wider)
            lo = self.rng.randint(0, v.width - w)
            return A.Slice(v.expr(), lo + w - 1, lo)
        if exact:
            return self.rng.choice(exact).expr()
        return None

    def s_apply(self, depth):
        t = self.rng.choice(self.tables)
        cost = self.apply_cost(t)
        if cost > self.budget:
            return None
        self.budget -= cost
        return A.ApplyTable(t.name)

    # -------------------------------------------------------------- expressions

    def value(self, t, depth: int) -> A.Expr:
        return self.boolean(depth) if isinstance(t, A.BoolType) else self.bit(t.width, depth)

    def literal(self, w: int, typed: bool = True) -> A.Literal:
        m = (1 << w) - 1
        v = self.rng.choice([0, 1, m, self.rng.randint(0, m), self.rng.randint(0, m)])
        return A.Literal(v & m, w if typed else None)

    def bit(self, w: int, depth: int) -> A.Expr:
        terminal = depth >= self.cfg.max_depth
        options = ["literal", "lvalue"]
        if not terminal:
            options += ["slice", "cast", "unary", "binary", "shift"]
            if w >= 2:
                options.append("concat")
            if self.cfg.allow_ternary:
                options.append("ternary")
        for _ in range(6):
            kind = self.pick(options)
            e = getattr(self, "b_" + kind)(w, depth)
            if e is not None:
                return e
        if self.w["literal"] > 0:
            return self.literal(w)
        e = self.b_lvalue(w, depth)
        if e is None:
            e = self.b_slice_any(w)
        if e is None:
            raise GenerationBudgetExhausted(f"no way to build a bit<{w}> without literals")
        return e

    def b_literal(self, w, depth):
        return self.literal(w)

    def b_lvalue(self, w, depth):
        vs = [v for v in self.visible() if v.width == w and isinstance(v.type, A.BitType)]
        return self.rng.choice(vs).expr() if vs else None

    def b_slice_any(self, w):
        vs = [v for v in self.visible() if isinstance(v.type, A.BitType) and v.width > w]
        if not vs:
            return None
        v = self.rng.choice(vs)
        lo = self.rng.randint(0, v.width - w)
        return A.Slice(v.expr(), lo + w - 1, lo)

    def b_slice(self, w, depth):
        if self.w["shift"] > 0 and self.chance(0.3):
            big = max([x for x in self.cfg.width_pool if x > w], default=None)
            if big is not None:
                base = self.bit(big, depth + 1)
                k = self.rng.randint(1, big)
                op = self.rng.choice(A.SHIFT_OPS)
                lo = self.rng.randint(0, big - w)
                return A.Slice(A.Binary(op, base, A.Literal(k, None)), lo + w - 1, lo)
        return self.b_slice_any(w)

    def b_cast(self, w, depth):
        if w == 1 and self.chance(0.3):
            return A.Cast(A.BitType(1), self.boolean(depth + 1))
        others = [x for x in self.cfg.width_pool if x != w]
        if not others:
            return None
        return A.Cast(A.BitType(w), self.bit(self.rng.choice(others), depth + 1))

    def b_concat(self, w, depth):
        a = self.rng.randint(1, w - 1)
        return A.Binary("++", self.bit(a, depth + 1), self.bit(w - a, depth + 1))

    def b_unary(self, w, depth):
        return A.Unary(self.rng.choice(("~", "-")), self.bit(w, depth + 1))

    def b_binary(self, w, depth):
        op = self.rng.choice(A.ARITH_OPS + A.BITWISE_OPS)
        left = self.bit(w, depth + 1)
        if self.w["literal"] > 0 and self.chance(0.2):
            right: A.Expr = self.literal(w, typed=False)
        else:
            right = self.bit(w, depth + 1)
        return A.Binary(op, left, right)

    def b_shift(self, w, depth):
        op = self.rng.choice(A.SHIFT_OPS)
        left = self.bit(w, depth + 1)
        if self.chance(0.6) or self.w["lvalue"] == 0:
            amount: A.Expr = A.Literal(self.rng.randint(0, w + 1), None)
        else:
            amount = self.bit(self.rng.choice(self.cfg.width_pool), self.cfg.max_depth)
        return A.Binary(op, left, amount)

    def b_ternary(self, w, depth):
        return A.Ternary(self.boolean(depth + 1), self.bit(w, depth + 1), self.bit(w, depth + 1))

    def boolean(self, depth: int) -> A.Expr:
        terminal = depth >= self.cfg.max_depth
        options = ["boollit", "boolvar", "isvalid"]
        if not terminal:
            options += ["compare", "logical", "not"]
        for _ in range(6):
            kind = self.pick(options)
            if kind is None:
                break
            e = getattr(self, "e_" + kind)(depth)
            if e is not None:
                return e
        if self.w["compare"] > 0:
            return self.e_compare(self.cfg.max_depth - 1)
        return A.BoolLit(self.chance(0.5))

    def e_boollit(self, depth):
        return A.BoolLit(self.chance(0.5))

    def e_boolvar(self, depth):
        vs = [v for v in self.visible() if isinstance(v.type, A.BoolType)]
        return self.rng.choice(vs).expr() if vs else None

    def e_isvalid(self, depth):
        return A.IsValid(A.path_expr(self.rng.choice(self.header_paths)))

    def e_compare(self, depth):
        widths = [v.width for v in self.visible() if isinstance(v.type, A.BitType)]
        w = self.rng.choice(widths) if widths and self.chance(0.7) else self.width()
        op = self.rng.choice(A.EQUALITY_OPS + A.RELATIONAL_OPS)
        return A.Binary(op, self.bit(w, depth + 1), self.bit(w, depth + 1))

    def e_logical(self, depth):
        return A.Binary(self.rng.choice(A.LOGICAL_OPS), self.boolean(depth + 1),
                        self.boolean(depth + 1))

    def e_not(self, depth):
        return A.Unary("!", self.boolean(depth + 1))


def generate_program(cfg: GenConfig) -> TypedProgram:
    """Deterministic in cfg.seed; regrows until the path and input caps hold."""
    rng = random.Random(cfg.seed)
    last = ""
    for _ in range(cfg.max_attempts):
        g = _Gen(cfg, rng)
        p = g.program()
        tp = typecheck(p)
        paths = estimate_paths(tp)
        if paths > cfg.max_paths:
            last = f"{paths} paths"
            continue
        return tp
    raise GenerationBudgetExhausted(f"seed {cfg.seed}: no program within limits ({last})")
