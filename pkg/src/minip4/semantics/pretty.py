"""Human-readable rendering of terms and block semantics."""
from __future__ import annotations

from typing import Dict, List

from . import terms as T

_INFIX = {
    T.ADD: "+", T.SUB: "-", T.MUL: "*", T.AND: "&", T.OR: "|", T.XOR: "^",
    T.SHL: "<<", T.LSHR: ">>", T.EQ: "==", T.ULT: "<", T.ULE: "<=",
    T.LAND: "&&", T.LOR: "||", T.CONCAT: "++",
}


def _leaf(t: T.Term) -> str:
    if t.op == T.CONST:
        if t.width == T.BOOL_W:
            return "true" if t.val else "false"
        return str(t.val)
    if t.op == T.VAR:
        return t.val
    return f"undef<{t.width or 'bool'}>"


def term_str(t: T.Term, max_depth: int = 1_000_000, names: Dict[int, str] = None) -> str:
    names = names or {}

    def go(t: T.Term, depth: int, top: bool = False) -> str:
        if not top and id(t) in names:
            return names[id(t)]
        if not t.args:
            return _leaf(t)
        if depth <= 0:
            return "..."
        d = depth - 1
        if t.op == T.ITE:
            c, a, b = t.args
            return f"if ({go(c, d)}) then {go(a, d)} else {go(b, d)}"
        if t.op == T.EXTRACT:
            return f"{go(t.args[0], d)}[{t.val[0]}:{t.val[1]}]"
        if t.op == T.NOT:
            return f"~{go(t.args[0], d)}"
        if t.op == T.NEG:
            return f"-{go(t.args[0], d)}"
        if t.op == T.LNOT:
            return f"!{go(t.args[0], d)}"
        return f"({go(t.args[0], d)} {_INFIX[t.op]} {go(t.args[1], d)})"

    return go(t, max_depth, top=True)


def format_semantics(sem) -> str:
    """Functional form of a block: shared subterms first, then one line per output."""
    roots = sem.terms()
    order = T.topo_order(roots)
    uses: Dict[int, int] = {}
    for t in order:
        for a in t.args:
            uses[id(a)] = uses.get(id(a), 0) + 1
    names: Dict[int, str] = {}
    lines: List[str] = []
    ins = ", ".join(f"{v.val}: {'bool' if v.width == T.BOOL_W else f'bit<{v.width}>'}"
                    for v in sem.inputs)
    lines.append(f"control {sem.control}({ins})")
    for t in order:
        if t.args and uses.get(id(t), 0) > 1 and t.op == T.ITE:
            name = f"$s{len(names)}"
            lines.append(f"  let {name} = {term_str(t, names=names)}")
            names[id(t)] = name
    for o in sem.outputs:
        lines.append(f"  {o.name} = {term_str(o.term, names=names)}")
    return "\n".join(lines) + "\n"
