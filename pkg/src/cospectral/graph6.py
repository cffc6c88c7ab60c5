"""graph6 encoding and decoding.

Implements the published byte layout: N(n) is one byte (n+63) for n <= 62,
'~' plus 3 bytes for n <= 258047, '~~' plus 6 bytes for n <= 68719476735.
R(x) packs the upper-triangle adjacency bits in colexicographic column order
(exactly this package's edge-index order) into 6-bit groups, most significant
bit first, zero-padded, each group offset by 63.
"""

from __future__ import annotations

from .errors import FormatError
from .graphs import Graph

HEADER = ">>graph6<<"


def _encode_n(n: int) -> str:
    if n < 0:
        raise FormatError("negative vertex count")
    if n <= 62:
        return chr(n + 63)
    if n <= 258047:
        return "~" + "".join(chr(((n >> s) & 63) + 63) for s in (12, 6, 0))
    if n <= 68719476735:
        return "~~" + "".join(chr(((n >> s) & 63) + 63) for s in (30, 24, 18, 12, 6, 0))
    raise FormatError("vertex count too large for graph6")


def _decode_n(s: str) -> tuple[int, int]:
    """Returns (n, number of characters consumed)."""
    if not s:
        raise FormatError("empty graph6 string")
    if s[0] != "~":
        return ord(s[0]) - 63, 1
    if len(s) >= 2 and s[1] != "~":
        if len(s) < 4:
            raise FormatError("truncated graph6 size field")
        n = 0
        for ch in s[1:4]:
            n = (n << 6) | (ord(ch) - 63)
        return n, 4
    if len(s) < 8:
        raise FormatError("truncated graph6 size field")
    n = 0
    for ch in s[2:8]:
        n = (n << 6) | (ord(ch) - 63)
    return n, 8


def to_graph6(g: Graph) -> str:
    """Encode a graph as a graph6 string (no header, no newline)."""
    m = g.n * (g.n - 1) // 2
    out = [_encode_n(g.n)]
    # Bit k of the mask is pair k in colex order; graph6 wants it at position
    # k within the bit stream, MSB-first within each 6-bit group.
    bits = g.bits
    for start in range(0, m, 6):
        group = 0
        for off in range(6):
            k = start + off
            group <<= 1
            if k < m and (bits >> k) & 1:
                group |= 1
        out.append(chr(group + 63))
    return "".join(out)


def from_graph6(s: str) -> Graph:
    """Decode a graph6 string (optionally prefixed by the standard header)."""
    s = s.strip()
    if s.startswith(HEADER):
        s = s[len(HEADER):]
    n, consumed = _decode_n(s)
    m = n * (n - 1) // 2
    need = (m + 5) // 6
    body = s[consumed:]
    if len(body) != need:
        raise FormatError(
            f"graph6 body length {len(body)} != expected {need} for n={n}"
        )
    bits = 0
    for idx, ch in enumerate(body):
        val = ord(ch) - 63
        if not (0 <= val < 64):
            raise FormatError(f"invalid graph6 character {ch!r}")
        for off in range(6):
            k = idx * 6 + off
            if k < m and (val >> (5 - off)) & 1:
                bits |= 1 << k
    return Graph(n, bits)


def write_graph6_file(path, graphs) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for g in graphs:
            fh.write(to_graph6(g) + "\n")


def read_graph6_file(path) -> list[Graph]:
    out = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(from_graph6(line))
    return out
