"""Hash-consed bit-vector terms.

A Term is an immutable DAG node.  Booleans have width 0 (they evaluate to a
single bit).  Structurally equal terms are the same Python object, so `is`
is term equality and DAG sharing comes for free.  Smart constructors fold
constants and apply a few algebraic identities that hold for every value of
every free variable and every undefined-value policy.
"""
from __future__ import annotations

import weakref
from typing import Iterable, Iterator, List, Tuple

BOOL_W = 0

# node kinds
CONST = "const"
VAR = "var"
UNDEF = "undef"
ITE = "ite"
EXTRACT = "extract"
CONCAT = "concat"
NOT = "not"        # bitwise ~
NEG = "neg"
LNOT = "lnot"      # boolean !
ADD = "add"
SUB = "sub"
MUL = "mul"
AND = "and"
OR = "or"
XOR = "xor"
SHL = "shl"
LSHR = "lshr"
EQ = "eq"
ULT = "ult"
ULE = "ule"
LAND = "land"
LOR = "lor"

BV_BINOPS = (ADD, SUB, MUL, AND, OR, XOR)
SHIFTS = (SHL, LSHR)
COMPARES = (EQ, ULT, ULE)

_table: "weakref.WeakValueDictionary[tuple, Term]" = weakref.WeakValueDictionary()


class WidthError(ValueError):
    """A term would violate its width invariant."""


class Term:
    __slots__ = ("op", "width", "args", "val", "has_undef", "__weakref__")

    op: str
    width: int
    args: Tuple["Term", ...]
    val: object

    def __repr__(self) -> str:
        from .pretty import term_str
        return term_str(self, max_depth=6)

    @property
    def is_bool(self) -> bool:
        return self.width == BOOL_W

    @property
    def bits(self) -> int:
        return self.width or 1

    @property
    def is_const(self) -> bool:
        return self.op == CONST

    # Terms are interned, so identity semantics are exactly structural equality.
    __hash__ = object.__hash__

    def __eq__(self, other):
        return self is other

    def __reduce__(self):
        raise TypeError("terms are interned and cannot be pickled")


def _mk(op: str, width: int, args: tuple = (), val=None) -> Term:
    key = (op, width, val, tuple(id(a) for a in args))
    t = _table.get(key)
    if t is not None:
        return t
    t = Term()
    t.op = op
    t.width = width
    t.args = args
    t.val = val
    t.has_undef = op == UNDEF or any(a.has_undef for a in args)
    # the key holds child ids; children stay alive as long as t does, and the
    # weak entry dies with t, so an id is never reused under a live key
    _table[key] = t
    return t


def mask(width: int) -> int:
    return (1 << (width or 1)) - 1


# ----------------------------------------------------------------- leaves

def const(width: int, value: int) -> Term:
    return _mk(CONST, width, (), value & mask(width))


def bool_const(value: bool) -> Term:
    return _mk(CONST, BOOL_W, (), 1 if value else 0)


TRUE = bool_const(True)
FALSE = bool_const(False)


def var(name: str, width: int) -> Term:
    return _mk(VAR, width, (), name)


def bool_var(name: str) -> Term:
    return _mk(VAR, BOOL_W, (), name)


def undef(width: int) -> Term:
    """The undefined value of a width; every undefined read of that width shares it."""
    return _mk(UNDEF, width)


# ----------------------------------------------------------------- helpers

def _check_bv(*ts: Term):
    for t in ts:
        if t.width == BOOL_W:
            raise WidthError(f"expected a bit vector, got boolean {t!r}")


def _check_same(a: Term, b: Term):
    if a.width != b.width:
        raise WidthError(f"width mismatch: {a.width} vs {b.width}")


def _check_bool(*ts: Term):
    for t in ts:
        if t.width != BOOL_W:
            raise WidthError(f"expected a boolean, got bit<{t.width}>")


def _fold(op, a, b, w):
    m = mask(w)
    if op == ADD:
        return (a + b) & m
    if op == SUB:
        return (a - b) & m
    if op == MUL:
        return (a * b) & m
    if op == AND:
        return a & b
    if op == OR:
        return a | b
    if op == XOR:
        return a ^ b
    raise AssertionError(op)


# ----------------------------------------------------------------- constructors

def ite(c: Term, a: Term, b: Term) -> Term:
    _check_bool(c)
    _check_same(a, b)
    if c.op == CONST:
        return a if c.val else b
    if a is b:
        return a
    if c.op == LNOT:
        return ite(c.args[0], b, a)
    if a.width == BOOL_W:
        if a is TRUE and b is FALSE:
            return c
        if a is FALSE and b is TRUE:
            return lnot(c)
    # ite(c, ite(c, x, y), z) -> ite(c, x, z)
    if a.op == ITE and a.args[0] is c:
        return ite(c, a.args[1], b)
    if b.op == ITE and b.args[0] is c:
        return ite(c, a, b.args[2])
    return _mk(ITE, a.width, (c, a, b))


def extract(t: Term, hi: int, lo: int) -> Term:
    _check_bv(t)
    if not 0 <= lo <= hi < t.width:
        raise WidthError(f"extract [{hi}:{lo}] out of range for width {t.width}")
    if lo == 0 and hi == t.width - 1:
        return t
    if t.op == CONST:
        return const(hi - lo + 1, t.val >> lo)
    if t.op == EXTRACT:
        base_lo = t.val[1]
        return extract(t.args[0], hi + base_lo, lo + base_lo)
    if t.op == CONCAT:
        a, b = t.args
        if lo >= b.width:
            return extract(a, hi - b.width, lo - b.width)
        if hi < b.width:
            return extract(b, hi, lo)
    return _mk(EXTRACT, hi - lo + 1, (t,), (hi, lo))


def concat(a: Term, b: Term) -> Term:
    """a supplies the high bits."""
    _check_bv(a, b)
    w = a.width + b.width
    if a.op == CONST and b.op == CONST:
        return const(w, (a.val << b.width) | b.val)
    if a.op == EXTRACT and b.op == EXTRACT and a.args[0] is b.args[0] and a.val[1] == b.val[0] + 1:
        return extract(a.args[0], a.val[0], b.val[1])
    return _mk(CONCAT, w, (a, b))


def concat_all(parts: Iterable[Term]) -> Term:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = concat(out, p)
    return out


def bvnot(a: Term) -> Term:
    _check_bv(a)
    if a.op == CONST:
        return const(a.width, ~a.val)
    if a.op == NOT:
        return a.args[0]
    return _mk(NOT, a.width, (a,))


def neg(a: Term) -> Term:
    _check_bv(a)
    if a.op == CONST:
        return const(a.width, -a.val)
    return _mk(NEG, a.width, (a,))


def binop(op: str, a: Term, b: Term) -> Term:
    _check_bv(a, b)
    _check_same(a, b)
    w = a.width
    if a.op == CONST and b.op == CONST:
        return const(w, _fold(op, a.val, b.val, w))
    m = mask(w)
    # canonical: constant on the right for commutative ops
    if a.op == CONST and op in (ADD, MUL, AND, OR, XOR):
        a, b = b, a
    if b.op == CONST:
        v = b.val
        if v == 0 and op in (ADD, SUB, OR, XOR):
            return a
        if v == 0 and op in (MUL, AND):
            return b
        if v == 1 and op == MUL:
            return a
        if v == m and op == AND:
            return a
        if v == m and op == OR:
            return b
    return _mk(op, w, (a, b))


def add(a, b):
    return binop(ADD, a, b)


def sub(a, b):
    return binop(SUB, a, b)


def mul(a, b):
    return binop(MUL, a, b)


def bvand(a, b):
    return binop(AND, a, b)


def bvor(a, b):
    return binop(OR, a, b)


def bvxor(a, b):
    return binop(XOR, a, b)


def shift(op: str, a: Term, amt: Term) -> Term:
    """Logical shift; the amount may have any width; amounts >= width give 0."""
    _check_bv(a, amt)
    w = a.width
    if amt.op == CONST:
        k = amt.val
        if k == 0:
            return a
        if k >= w:
            return const(w, 0)
        if a.op == CONST:
            return const(w, (a.val << k) if op == SHL else (a.val >> k))
    elif a.op == CONST and a.val == 0:
        return a
    return _mk(op, w, (a, amt))


def shl(a, amt):
    return shift(SHL, a, amt)


def lshr(a, amt):
    return shift(LSHR, a, amt)


def eq(a: Term, b: Term) -> Term:
    _check_same(a, b)
    if a.op == CONST and b.op == CONST:
        return bool_const(a.val == b.val)
    if a.width == BOOL_W:
        if b.op == CONST:
            return a if b.val else lnot(a)
        if a.op == CONST:
            return b if a.val else lnot(b)
    if a.op == CONST:
        a, b = b, a
    return _mk(EQ, BOOL_W, (a, b))


def ult(a: Term, b: Term) -> Term:
    _check_bv(a, b)
    _check_same(a, b)
    if a.op == CONST and b.op == CONST:
        return bool_const(a.val < b.val)
    if b.op == CONST and b.val == 0:
        return FALSE
    return _mk(ULT, BOOL_W, (a, b))


def ule(a: Term, b: Term) -> Term:
    _check_bv(a, b)
    _check_same(a, b)
    if a.op == CONST and b.op == CONST:
        return bool_const(a.val <= b.val)
    if a.op == CONST and a.val == 0:
        return TRUE
    return _mk(ULE, BOOL_W, (a, b))


def lnot(a: Term) -> Term:
    _check_bool(a)
    if a.op == CONST:
        return bool_const(not a.val)
    if a.op == LNOT:
        return a.args[0]
    return _mk(LNOT, BOOL_W, (a,))


def land(a: Term, b: Term) -> Term:
    _check_bool(a, b)
    if a.op == CONST:
        return b if a.val else FALSE
    if b.op == CONST:
        return a if b.val else FALSE
    if a is b:
        return a
    return _mk(LAND, BOOL_W, (a, b))


def lor(a: Term, b: Term) -> Term:
    _check_bool(a, b)
    if a.op == CONST:
        return TRUE if a.val else b
    if b.op == CONST:
        return TRUE if b.val else a
    if a is b:
        return a
    return _mk(LOR, BOOL_W, (a, b))


def bool_to_bv(b: Term) -> Term:
    return ite(b, const(1, 1), const(1, 0))


def bv_to_bool(a: Term) -> Term:
    return eq(a, const(a.width, 1))


def resize(a: Term, width: int) -> Term:
    """Zero-extend or truncate a bit vector."""
    if a.width == width:
        return a
    if a.width > width:
        return extract(a, width - 1, 0)
    return concat(const(width - a.width, 0), a)


# ----------------------------------------------------------------- traversal

def topo_order(roots: Iterable[Term]) -> List[Term]:
    """Children-before-parents order of every node reachable from roots."""
    order: List[Term] = []
    seen = set()
    for r in roots:
        if id(r) in seen:
            continue
        stack = [(r, False)]
        while stack:
            t, done = stack.pop()
            if done:
                order.append(t)
                continue
            if id(t) in seen:
                continue
            seen.add(id(t))
            stack.append((t, True))
            for a in reversed(t.args):
                if id(a) not in seen:
                    stack.append((a, False))
    return order


def free_vars(roots: Iterable[Term]) -> List[Term]:
    return [t for t in topo_order(roots) if t.op == VAR]


def iter_nodes(root: Term) -> Iterator[Term]:
    return iter(topo_order([root]))


def dag_size(roots: Iterable[Term]) -> int:
    return len(topo_order(roots))


def validate(t: Term) -> None:
    """Structural width check of a whole DAG; raises WidthError."""
    for n in topo_order([t]):
        a = n.args
        if n.op in (CONST, VAR, UNDEF):
            if n.width < 0 or n.width > 64:
                raise WidthError(f"bad width {n.width}")
            if n.op == CONST and not 0 <= n.val <= mask(n.width):
                raise WidthError(f"constant {n.val} does not fit width {n.width}")
        elif n.op == ITE:
            if a[0].width != BOOL_W or a[1].width != a[2].width or n.width != a[1].width:
                raise WidthError("ite width invariant violated")
        elif n.op == EXTRACT:
            hi, lo = n.val
            if not 0 <= lo <= hi < a[0].width or n.width != hi - lo + 1:
                raise WidthError("extract width invariant violated")
        elif n.op == CONCAT:
            if n.width != a[0].width + a[1].width or BOOL_W in (a[0].width, a[1].width):
                raise WidthError("concat width invariant violated")
        elif n.op in (NOT, NEG):
            if n.width != a[0].width or n.width == BOOL_W:
                raise WidthError("unary width invariant violated")
        elif n.op in BV_BINOPS:
            if not (n.width == a[0].width == a[1].width) or n.width == BOOL_W:
                raise WidthError("binary width invariant violated")
        elif n.op in SHIFTS:
            if n.width != a[0].width or BOOL_W in (n.width, a[1].width):
                raise WidthError("shift width invariant violated")
        elif n.op in COMPARES:
            if n.width != BOOL_W or a[0].width != a[1].width:
                raise WidthError("comparison width invariant violated")
        elif n.op in (LAND, LOR, LNOT):
            if n.width != BOOL_W or any(x.width != BOOL_W for x in a):
                raise WidthError("boolean width invariant violated")
        else:
            raise WidthError(f"unknown node kind {n.op}")
