"""SMT-LIB2 (QF_BV) encoding of equivalence queries and an external-solver driver.

Every term becomes a bit vector (booleans are 1-bit).  Each DAG node is one
define-fun, so scripts stay linear in the DAG size.  The solver is spoken to
over stdin/stdout; nothing is imported in-process.
"""
from __future__ import annotations

import os
import re
import shlex
import subprocess
import time
from typing import Dict, List, Optional, Tuple

from ..semantics import terms as T
from ..semantics.evaluate import ZERO, UndefinedPolicy
from ..semantics.interp import BlockSemantics
from .core import (AWARE, EQUIVALENT, INEQUIVALENT, POLICIES, SOLVER, STRICT, UNKNOWN, UNSTABLE,
                   EquivResult, make_counterexample, normalize_mode, unify_inputs)

SOLVER_ENV = "GAUNTLET_SOLVER"


class SolverUnavailable(RuntimeError):
    """No external solver is configured or it could not be started."""


def _bv(value: int, bits: int) -> str:
    if bits % 4 == 0:
        return f"#x{value:0{bits // 4}x}"
    return f"#b{value:0{bits}b}"


def _sort(bits: int) -> str:
    return f"(_ BitVec {bits})"


def quote(name: str) -> str:
    return f"|{name}|"


class _Encoder:
    def __init__(self):
        self.lines: List[str] = []
        self.names: Dict[Tuple[str, int], str] = {}
        self.counter = 0

    def define(self, prefix: str, bits: int, body: str) -> str:
        name = f"{prefix}{self.counter}"
        self.counter += 1
        self.lines.append(f"(define-fun {name} () {_sort(bits)} {body})")
        return name

    # ------------------------------------------------------------ values

    def values(self, roots: List[T.Term], policy: UndefinedPolicy, tag: str,
               share: Optional[Dict[int, str]] = None) -> Dict[int, str]:
        """Names of the value of every node; nodes without undef reuse `share`."""
        out: Dict[int, str] = {}
        for t in T.topo_order(roots):
            if share is not None and not t.has_undef and id(t) in share:
                out[id(t)] = share[id(t)]
                continue
            out[id(t)] = self.value_node(t, policy, out, tag)
        return out

    def value_node(self, t: T.Term, policy, names, tag) -> str:
        bits = t.bits
        op = t.op
        if op == T.CONST:
            return _bv(t.val, bits)
        if op == T.VAR:
            return quote(t.val)
        if op == T.UNDEF:
            return _bv(policy.value(t.width), bits)
        a = [names[id(x)] for x in t.args]
        if op == T.ITE:
            body = f"(ite (= {a[0]} #b1) {a[1]} {a[2]})"
        elif op == T.EXTRACT:
            body = f"((_ extract {t.val[0]} {t.val[1]}) {a[0]})"
        elif op == T.CONCAT:
            body = f"(concat {a[0]} {a[1]})"
        elif op in (T.NOT, T.LNOT):
            body = f"(bvnot {a[0]})"
        elif op == T.NEG:
            body = f"(bvneg {a[0]})"
        elif op in _SMT_BIN:
            body = f"({_SMT_BIN[op]} {a[0]} {a[1]})"
        elif op in T.SHIFTS:
            body = self.shift(op, t.width, t.args[1].width, a[0], a[1])
        elif op == T.EQ:
            body = f"(ite (= {a[0]} {a[1]}) #b1 #b0)"
        elif op == T.ULT:
            body = f"(ite (bvult {a[0]} {a[1]}) #b1 #b0)"
        elif op == T.ULE:
            body = f"(ite (bvule {a[0]} {a[1]}) #b1 #b0)"
        else:
            raise AssertionError(op)
        return self.define(tag, bits, body)

    @staticmethod
    def shift(op: str, w: int, wa: int, v: str, amt: str) -> str:
        big = max(w, wa)
        ve = v if big == w else f"((_ zero_extend {big - w}) {v})"
        ae = amt if big == wa else f"((_ zero_extend {big - wa}) {amt})"
        fn = "bvshl" if op == T.SHL else "bvlshr"
        shifted = f"({fn} {ve} {ae})"
        if big != w:
            shifted = f"((_ extract {w - 1} 0) {shifted})"
        return f"(ite (bvult {ae} {_bv(w, big)}) {shifted} {_bv(0, w)})"

    # ------------------------------------------------------------ taint masks

    def masks(self, roots: List[T.Term], vals: Dict[int, str]) -> Dict[int, str]:
        out: Dict[int, str] = {}
        for t in T.topo_order(roots):
            bits = t.bits
            zero, ones = _bv(0, bits), _bv(T.mask(t.width), bits)
            if not t.has_undef:
                out[id(t)] = zero
                continue
            op = t.op
            if op == T.UNDEF:
                out[id(t)] = ones
                continue
            m = [out[id(x)] for x in t.args]
            v = [vals[id(x)] for x in t.args]
            if op == T.ITE:
                picked = f"(ite (= {v[0]} #b1) {m[1]} {m[2]})"
                spread = f"(bvor {m[1]} (bvor {m[2]} (bvxor {v[1]} {v[2]})))"
                body = f"(ite (= {m[0]} #b0) {picked} {spread})"
            elif op == T.EXTRACT:
                body = f"((_ extract {t.val[0]} {t.val[1]}) {m[0]})"
            elif op == T.CONCAT:
                body = f"(concat {m[0]} {m[1]})"
            elif op in (T.NOT, T.LNOT):
                body = m[0]
            elif op == T.XOR:
                body = f"(bvor {m[0]} {m[1]})"
            elif op in (T.AND, T.LAND):
                body = (f"(bvor (bvand {m[0]} (bvor {m[1]} {v[1]})) "
                        f"(bvand {m[1]} (bvor {m[0]} {v[0]})))")
            elif op in (T.OR, T.LOR):
                body = (f"(bvor (bvand {m[0]} (bvor {m[1]} (bvnot {v[1]}))) "
                        f"(bvand {m[1]} (bvor {m[0]} (bvnot {v[0]}))))")
            elif op in T.SHIFTS:
                shifted = self.shift(op, t.width, t.args[1].width, m[0], v[1])
                za = _bv(0, t.args[1].bits)
                body = f"(ite (= {m[1]} {za}) {shifted} {ones})"
            else:
                conds = " ".join(f"(= {mi} {_bv(0, x.bits)})" for mi, x in zip(m, t.args))
                cond = conds if len(m) == 1 else f"(and {conds})"
                body = f"(ite {cond} {zero} {ones})"
            out[id(t)] = self.define("m", bits, body)
        return out


_SMT_BIN = {T.ADD: "bvadd", T.SUB: "bvsub", T.MUL: "bvmul", T.AND: "bvand", T.OR: "bvor",
            T.XOR: "bvxor", T.LAND: "bvand", T.LOR: "bvor"}


def emit_smt(before: BlockSemantics, after: BlockSemantics, mode: str = AWARE) -> str:
    """QF_BV script whose single assertion is satisfiable iff the pair differs.

    In taint_aware mode sat means a defined bit of `before` can differ; in
    strict mode any bit outside invalid headers.
    """
    mode = normalize_mode(mode)
    inputs = unify_inputs(before, after)
    enc = _Encoder()
    out = ["(set-logic QF_BV)", "(set-option :produce-models true)"]
    for t in inputs:
        out.append(f"(declare-fun {quote(t.val)} () {_sort(t.bits)})")
    roots_b, roots_a = before.terms(), after.terms()
    all_roots = roots_b + roots_a
    has_undef = any(t.has_undef for t in all_roots)
    zvals = enc.values(all_roots, ZERO, "z")
    policies = [("z", zvals)]
    if has_undef:
        for prefix, policy in zip("pq", POLICIES[1:]):
            policies.append((prefix, enc.values(all_roots, policy, prefix, share=zvals)))
    mvals = enc.masks(roots_b, zvals) if mode == AWARE else None
    index = {o.name: i for i, o in enumerate(before.outputs)}
    disjuncts: List[str] = []
    for _, vals in policies:
        for i, o in enumerate(before.outputs):
            b, a = roots_b[i], roots_a[i]
            bits = b.bits
            zero, ones = _bv(0, bits), _bv(T.mask(b.width), bits)
            ignore = []
            if mode == AWARE and mvals[id(b)] != zero:
                ignore.append(mvals[id(b)])
            if o.header is not None:
                hv = roots_b[index[o.header]]
                off = f"(= {vals[id(hv)]} #b0)"
                if mode == AWARE and mvals[id(hv)] != "#b0":
                    off = f"(or {off} (= {mvals[id(hv)]} #b1))"
                ignore.append(f"(ite {off} {ones} {zero})")
            diff = f"(bvxor {vals[id(b)]} {vals[id(a)]})"
            for ig in ignore:
                diff = f"(bvand {diff} (bvnot {ig}))"
            disjuncts.append(f"(distinct {diff} {zero})")
    out.extend(enc.lines)
    if not disjuncts:
        out.append("(assert false)")
    elif len(disjuncts) == 1:
        out.append(f"(assert {disjuncts[0]})")
    else:
        out.append("(assert (or " + " ".join(disjuncts) + "))")
    out.append("(check-sat)")
    if inputs:
        out.append("(get-value (" + " ".join(quote(t.val) for t in inputs) + "))")
    return "\n".join(out) + "\n"


def semantics_smt(sem: BlockSemantics, policy: UndefinedPolicy = ZERO) -> str:
    """SMT-LIB2 definitions of one block's outputs, undefined reads resolved by policy."""
    enc = _Encoder()
    out = [f"; control {sem.control}, undefined reads as {policy}"]
    for t in sem.inputs:
        out.append(f"(declare-fun {quote(t.val)} () {_sort(t.bits)})")
    roots = sem.terms()
    vals = enc.values(roots, policy, "z")
    out.extend(enc.lines)
    for o, r in zip(sem.outputs, roots):
        out.append(f"(define-fun {quote('out.' + o.name)} () {_sort(r.bits)} {vals[id(r)]})")
    return "\n".join(out) + "\n"


_counter = [0]


def dump_script(before: BlockSemantics, after: BlockSemantics, mode: str, directory: str,
                label: str = "") -> str:
    os.makedirs(directory, exist_ok=True)
    _counter[0] += 1
    stem = label or f"check_{_counter[0]:04d}"
    path = os.path.join(directory, f"{stem}_{normalize_mode(mode)}.smt2")
    with open(path, "w") as fh:
        fh.write(emit_smt(before, after, mode))
    return path


_VALUE_RE = re.compile(r"\(\s*(\|[^|]*\||[^\s()|]+)\s+(#x[0-9a-fA-F]+|#b[01]+|\(_\s+bv(\d+)\s+\d+\))\s*\)")


def parse_model(text: str) -> Dict[str, int]:
    out = {}
    for m in _VALUE_RE.finditer(text):
        name, lit = m.group(1), m.group(2)
        name = name[1:-1] if name.startswith("|") else name
        if lit.startswith("#x"):
            out[name] = int(lit[2:], 16)
        elif lit.startswith("#b"):
            out[name] = int(lit[2:], 2)
        else:
            out[name] = int(m.group(3))
    return out


def solver_command(solver: Optional[str] = None) -> List[str]:
    cmd = solver if solver is not None else os.environ.get(SOLVER_ENV, "")
    if not cmd.strip():
        raise SolverUnavailable(f"{SOLVER_ENV} is not set")
    return shlex.split(cmd)


def run_solver(script: str, solver: Optional[str] = None, timeout: float = 60.0) -> Tuple[str, str]:
    """Run the solver; return (status, raw output)."""
    argv = solver_command(solver)
    try:
        proc = subprocess.run(argv, input=script, capture_output=True, text=True, timeout=timeout)
    except FileNotFoundError as exc:
        raise SolverUnavailable(f"cannot start solver {argv[0]!r}: {exc}") from None
    except subprocess.TimeoutExpired:
        return "timeout", ""
    text = proc.stdout.strip()
    status = text.split(None, 1)[0] if text else "error"
    if status not in ("sat", "unsat", "unknown"):
        return "error", (proc.stdout + proc.stderr)[:2000]
    return status, text


def _query(before, after, mode, solver, dump_dir, timeout):
    script = emit_smt(before, after, mode)
    if dump_dir:
        os.makedirs(dump_dir, exist_ok=True)
        _counter[0] += 1
        with open(os.path.join(dump_dir, f"check_{_counter[0]:04d}_{mode}.smt2"), "w") as fh:
            fh.write(script)
    return run_solver(script, solver, timeout)


def smt_equiv(before: BlockSemantics, after: BlockSemantics, mode: str = AWARE,
              solver: Optional[str] = None, dump_dir: Optional[str] = None,
              timeout: float = 60.0) -> EquivResult:
    mode = normalize_mode(mode)
    start = time.perf_counter()
    inputs = unify_inputs(before, after)
    solver_command(solver)

    def finish(verdict, cex=None, reason=""):
        return EquivResult(verdict, SOLVER, cex, reason, (time.perf_counter() - start) * 1000)

    def model_cex(raw, aware):
        model = parse_model(raw)
        assignment = {t.val: model.get(t.val, 0) & T.mask(t.width) for t in inputs}
        return make_counterexample(before, after, assignment, aware)

    status, raw = _query(before, after, mode, solver, dump_dir, timeout)
    if status == "sat":
        cex = model_cex(raw, mode == AWARE)
        if cex is None:
            return finish(UNKNOWN, reason="solver model does not replay")
        return finish(INEQUIVALENT, cex)
    if status != "unsat":
        return finish(UNKNOWN, reason=f"solver returned {status}")
    if mode == STRICT:
        return finish(EQUIVALENT)
    status, raw = _query(before, after, STRICT, solver, dump_dir, timeout)
    if status == "sat":
        return finish(UNSTABLE, model_cex(raw, False))
    if status != "unsat":
        return finish(UNKNOWN, reason=f"solver returned {status}")
    return finish(EQUIVALENT)
