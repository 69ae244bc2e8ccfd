"""Seeded defects.  Each toggle alters exactly one pass."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable


@dataclass(frozen=True)
class BugInfo:
    id: str
    pass_name: str
    trigger: str
    reference: str  # regression program in the corpus


BUGS: Dict[str, BugInfo] = {b.id: b for b in [
    BugInfo("SEO-MISS-TERNARY", "SideEffectOrder",
            "a ternary used as an operand of a binary operator is left in place",
            "hoist_ternary.mp4l"),
    BugInfo("SR-SLICE-OVERFLOW", "StrengthReduce",
            "slice of a constant shift is rewritten without bounds checks, "
            "producing a slice index outside the operand",
            "slice_overflow.mp4l"),
    BugInfo("DSE-SLICE-ALIAS", "ElimDeadStores",
            "a store to a slice is treated as overwriting the whole variable, "
            "so an earlier store to the other bits is deleted",
            "slice_store.mp4l"),
    BugInfo("CP-INVALID-HDR", "CopyProp",
            "a value stored into a header field is forwarded to later reads "
            "without knowing that the header is valid",
            "invalid_header_copy.mp4l"),
    BugInfo("RAP-EXIT-SKIP-COPYOUT", "RemoveActionParams",
            "an exit inside an action with inout/out parameters skips the copy-out",
            "exit_copyout.mp4l"),
    BugInfo("PRED-NESTED-IF", "Predicate",
            "the guard of a nested if drops the enclosing guard",
            "nested_if.mp4l"),
]}


class UnknownBug(ValueError):
    pass


def check_bugs(ids: Iterable[str]) -> FrozenSet[str]:
    ids = frozenset(ids)
    for i in ids:
        if i not in BUGS:
            raise UnknownBug(f"unknown bug id {i!r}; known: {', '.join(sorted(BUGS))}")
    return ids


def catalog_toml() -> str:
    """The catalog in the text form shipped as bugs/catalog.toml."""
    out = []
    for b in BUGS.values():
        out.append("[[bug]]")
        out.append(f'id = "{b.id}"')
        out.append(f'pass = "{b.pass_name}"')
        out.append(f'trigger = "{b.trigger}"')
        out.append(f'reference = "{b.reference}"')
        out.append("")
    return "\n".join(out)
