"""STF-like test files.

    # control ingress path 0 seed 7
    table t site 0 key 0a action 1
    packet 0a0b
    expect 01**

`packet` is every parameter input of the block, concatenated in declaration
order with the first input in the most significant position.  `expect` is
every output concatenated the same way.  Both are left-padded with zero bits
to whole nibbles.  In `expect` a nibble whose four bits are all don't-care
prints as `*` (padding bits count as don't-care).  See docs/stf.md.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from ..semantics import terms as T
from ..semantics.interp import BlockSemantics
from .paths import TestCase

_TABLE_RE = re.compile(r"(\w+)_table_key_(\d+)$")


class StfError(ValueError):
    """Malformed STF text."""


@dataclass
class StfEntry:
    table: str
    site: int
    key: int
    action: int


@dataclass
class StfCase:
    control: str
    path_id: int
    seed: int
    entries: List[StfEntry] = field(default_factory=list)
    packet: str = ""
    expect: str = ""


def _pack(values: Sequence[Tuple[int, int]]) -> Tuple[int, int]:
    """Concatenate (value, bits) pairs MSB first; returns (word, total bits)."""
    word, bits = 0, 0
    for v, w in values:
        word = (word << w) | (v & ((1 << w) - 1))
        bits += w
    return word, bits


def _hex(word: int, bits: int) -> str:
    digits = max(1, (bits + 3) // 4)
    return format(word, f"0{digits}x")


def packet_hex(sem: BlockSemantics, inputs: Dict[str, int]) -> str:
    word, bits = _pack([(inputs[t.val], t.bits) for t in sem.param_inputs])
    return _hex(word, bits)


def expect_hex(sem: BlockSemantics, expected: Dict[str, int], dont_care: Dict[str, int]) -> str:
    word, bits = _pack([(expected[o.name], o.bits) for o in sem.outputs])
    dc, _ = _pack([(dont_care.get(o.name, 0), o.bits) for o in sem.outputs])
    digits = max(1, (bits + 3) // 4)
    pad = digits * 4 - bits
    dc |= ((1 << pad) - 1) << bits
    text = []
    for i in range(digits - 1, -1, -1):
        if (dc >> (4 * i)) & 0xF == 0xF:
            text.append("*")
        else:
            text.append(format((word >> (4 * i)) & 0xF, "x"))
    return "".join(text)


def table_entries(sem: BlockSemantics, inputs: Dict[str, int]) -> List[StfEntry]:
    out = []
    for t in sem.table_inputs:
        m = _TABLE_RE.match(t.val)
        if m is None:
            continue
        table, site = m.group(1), int(m.group(2))
        action = inputs.get(f"{table}_action_{site}", 0)
        out.append(StfEntry(table, site, inputs[t.val], action))
    return out


def write_stf(sem: BlockSemantics, tests: Sequence[TestCase]) -> str:
    lines = []
    for tc in tests:
        lines.append(f"# control {tc.control} path {tc.path_id} seed {tc.seed}")
        for e in table_entries(sem, tc.inputs):
            lines.append(f"table {e.table} site {e.site} key {e.key:x} action {e.action}")
        lines.append(f"packet {packet_hex(sem, tc.inputs)}")
        lines.append(f"expect {expect_hex(sem, tc.expected, tc.dont_care)}")
        lines.append("")
    return "\n".join(lines)


def read_stf(text: str) -> List[StfCase]:
    cases: List[StfCase] = []
    cur = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "#":
            if len(words) == 7 and words[1] == "control" and words[3] == "path" and words[5] == "seed":
                cur = StfCase(words[2], int(words[4]), int(words[6]))
                cases.append(cur)
            continue
        if cur is None:
            cur = StfCase("", 0, 0)
            cases.append(cur)
        try:
            if words[0] == "table" and len(words) == 8:
                cur.entries.append(StfEntry(words[1], int(words[3]), int(words[5], 16),
                                            int(words[7])))
            elif words[0] == "packet" and len(words) == 2:
                int(words[1], 16)
                cur.packet = words[1]
            elif words[0] == "expect" and len(words) == 2:
                if not re.fullmatch(r"[0-9a-fA-F*]+", words[1]):
                    raise ValueError(words[1])
                cur.expect = words[1]
                cur = None
            else:
                raise ValueError(line)
        except ValueError:
            raise StfError(f"line {n}: cannot parse {raw!r}") from None
    return cases


def unpack_packet(sem: BlockSemantics, packet: str) -> Dict[str, int]:
    """Split a packet back into the block's parameter inputs."""
    word = int(packet, 16)
    out = {}
    shift = sum(t.bits for t in sem.param_inputs)
    for t in sem.param_inputs:
        shift -= t.bits
        out[t.val] = (word >> shift) & T.mask(t.width)
    return out


def case_inputs(sem: BlockSemantics, case: StfCase) -> Dict[str, int]:
    """Full input assignment (packet plus control plane) of a parsed case."""
    inputs = unpack_packet(sem, case.packet)
    for e in case.entries:
        inputs[f"{e.table}_table_key_{e.site}"] = e.key
        inputs[f"{e.table}_action_{e.site}"] = e.action
    return inputs


def expect_matches(pattern: str, actual: str) -> bool:
    """Compare an expect pattern with an actual output hex string."""
    if len(pattern) != len(actual):
        return False
    return all(p == "*" or p.lower() == a.lower() for p, a in zip(pattern, actual))
