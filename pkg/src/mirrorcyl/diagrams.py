"""Brauer diagrams on n north and n south vertices.

A diagram of width n is stored as a flat partner array over 2n slots.  Slot
``i`` (0-based, ``i < n``) is the north vertex ``(i+1)+`` and slot ``n + i`` is
the south vertex ``(i+1)-``.  ``partner[v]`` is the slot paired with ``v``.

Multiplication is concatenation with loop weight 1: ``compose(a, b)`` stacks
``a`` above ``b`` so that the south vertices of ``a`` are glued to the north
vertices of ``b``.  Closed loops formed in the glued middle row are deleted and
only counted.

Text notation
-------------
Diagrams print as a bracketed, comma separated edge list::

    [1+>1-, 2+^4+, 3+>2-, ..., 2-v3-]

``i+>j-`` is an NS edge, ``i+^j+`` a north bar and ``i-vj-`` a south bar (with
``i < j`` for bars).  Edges are listed by increasing north vertex, each edge
once, followed by the south bars in increasing order of their smaller vertex.
``parse_diagram`` accepts any edge order and arbitrary whitespace.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence


def _check_width(n: int) -> None:
    if not isinstance(n, (int,)) or isinstance(n, bool):
        raise TypeError(f"width must be an int, got {type(n).__name__}")
    if n < 2 or n % 2:
        raise ValueError(f"width must be an even integer >= 2, got {n}")


def _check_partner(n: int, partner: Sequence[int]) -> None:
    if len(partner) != 2 * n:
        raise ValueError(f"partner array has length {len(partner)}, expected {2 * n}")
    for v, w in enumerate(partner):
        if not 0 <= w < 2 * n:
            raise ValueError(f"slot {v} paired with out-of-range slot {w}")
        if w == v:
            raise ValueError(f"slot {v} is paired with itself")
        if partner[w] != v:
            raise ValueError(f"partner is not an involution at slot {v}")
    north_bars = sum(1 for v in range(n) if partner[v] < n)
    south_bars = sum(1 for v in range(n, 2 * n) if partner[v] >= n)
    if north_bars != south_bars:
        # Unreachable for a valid involution on n + n slots, kept as a guard.
        raise ValueError("north and south bar counts differ")


@dataclass(frozen=True)
class Diagram:
    """An immutable Brauer diagram of even width ``n``."""

    n: int
    partner: tuple[int, ...]

    def __post_init__(self):
        _check_width(self.n)
        object.__setattr__(self, "partner", tuple(int(v) for v in self.partner))
        _check_partner(self.n, self.partner)

    @classmethod
    def _trusted(cls, n: int, partner: Sequence[int]) -> Diagram:
        # Skips validation; only for partner arrays built by this module.
        d = object.__new__(cls)
        object.__setattr__(d, "n", n)
        object.__setattr__(d, "partner", tuple(partner))
        return d

    @classmethod
    def from_key(cls, key: bytes) -> Diagram:
        values = struct.unpack(f"<{len(key) // 2}H", key)
        return cls(len(values) // 2, [v - 1 for v in values])

    @property
    def bars(self) -> int:
        return bar_count(self)

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"Diagram({to_text(self)})"


class ComposeResult(NamedTuple):
    diagram: Diagram
    loops: int


def identity(n: int) -> Diagram:
    _check_width(n)
    return Diagram._trusted(n, [v + n for v in range(n)] + list(range(n)))


def _check_pair(n: int, i: int, j: int) -> None:
    if not (1 <= i < j <= n):
        raise ValueError(f"need 1 <= i < j <= {n}, got i={i}, j={j}")


def transposition(n: int, i: int, j: int) -> Diagram:
    """The permutation diagram ``(ij)``: ``i+`` to ``j-`` and ``j+`` to ``i-``."""
    _check_width(n)
    _check_pair(n, i, j)
    partner = list(identity(n).partner)
    a, b = i - 1, j - 1
    partner[a], partner[n + b] = n + b, a
    partner[b], partner[n + a] = n + a, b
    return Diagram._trusted(n, partner)


def bar_pair(n: int, i: int, j: int) -> Diagram:
    """The diagram with bars ``i+ j+`` and ``i- j-``, all other edges vertical."""
    _check_width(n)
    _check_pair(n, i, j)
    partner = list(identity(n).partner)
    a, b = i - 1, j - 1
    partner[a], partner[b] = b, a
    partner[n + a], partner[n + b] = n + b, n + a
    return Diagram._trusted(n, partner)


def compose(a: Diagram, b: Diagram) -> ComposeResult:
    """Concatenate ``a`` above ``b`` and return the product with its loop count."""
    if a.n != b.n:
        raise ValueError(f"width mismatch: {a.n} vs {b.n}")
    n = a.n
    pa, pb = a.partner, b.partner
    out = [-1] * (2 * n)
    seen = [False] * n  # middle-row columns already on an outer strand

    for start in range(2 * n):
        if out[start] >= 0:
            continue
        # in_a: currently at a slot of a, otherwise at a slot of b
        in_a = start < n
        v = start
        while True:
            w = pa[v] if in_a else pb[v]
            if in_a:
                if w < n:
                    break
                col = w - n
                seen[col] = True
                in_a, v = False, col
            else:
                if w >= n:
                    break
                seen[w] = True
                in_a, v = True, n + w
        out[start] = w
        out[w] = start

    loops = 0
    for c in range(n):
        if seen[c]:
            continue
        loops += 1
        col = c
        while not seen[col]:
            seen[col] = True
            nxt = pa[n + col] - n
            seen[nxt] = True
            col = pb[nxt]
    return ComposeResult(Diagram._trusted(n, out), loops)


def compose_all(diagrams: Sequence[Diagram]) -> ComposeResult:
    """Left-to-right product of a non-empty sequence, summing loops."""
    if not diagrams:
        raise ValueError("need at least one diagram")
    result, loops = diagrams[0], 0
    for d in diagrams[1:]:
        result, extra = compose(result, d)
        loops += extra
    return ComposeResult(result, loops)


def bar_count(d: Diagram) -> int:
    n = d.n
    return sum(1 for v in range(n) if d.partner[v] < n) // 2


def is_walled(d: Diagram) -> bool:
    """Membership in the walled (Manhattan) subalgebra.

    NS edges must join columns of equal parity and bars columns of opposite
    parity.
    """
    n = d.n
    for v, w in enumerate(d.partner):
        if v > w:
            continue
        same = (v % n) % 2 == (w % n) % 2
        ns = (v < n) != (w < n)
        if ns != same:
            return False
    return True


def ns_south_columns(d: Diagram) -> list[int]:
    """1-based columns whose south vertex lies on an NS edge."""
    n = d.n
    return [c + 1 for c in range(n) if d.partner[n + c] < n]


def canonical_key(d: Diagram) -> bytes:
    """Little-endian uint16 encoding of the 1-based partner array."""
    return struct.pack(f"<{2 * d.n}H", *(v + 1 for v in d.partner))


def enumerate_diagrams(n: int) -> Iterator[Diagram]:
    """All (2n-1)!! diagrams of width n, in a fixed order."""
    _check_width(n)
    partner = [-1] * (2 * n)

    def rec():
        try:
            first = partner.index(-1)
        except ValueError:
            yield Diagram._trusted(n, partner)
            return
        for other in range(first + 1, 2 * n):
            if partner[other] < 0:
                partner[first], partner[other] = other, first
                yield from rec()
                partner[first] = partner[other] = -1

    yield from rec()


def _label(n: int, v: int) -> str:
    return f"{v + 1}+" if v < n else f"{v - n + 1}-"


def to_text(d: Diagram) -> str:
    n = d.n
    edges = []
    for v in range(n):
        w = d.partner[v]
        if w >= n:
            edges.append(f"{_label(n, v)}>{_label(n, w)}")
        elif v < w:
            edges.append(f"{_label(n, v)}^{_label(n, w)}")
    for v in range(n, 2 * n):
        w = d.partner[v]
        if n <= v < w:
            edges.append(f"{_label(n, v)}v{_label(n, w)}")
    return "[" + ", ".join(edges) + "]"


_EDGE = re.compile(r"^(\d+)([+-])([>^v])(\d+)([+-])$")


def parse_diagram(text: str) -> Diagram:
    """Inverse of ``to_text``; the width is inferred from the edge count."""
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError(f"diagram text must be bracketed: {text!r}")
    items = [t.strip() for t in body[1:-1].split(",") if t.strip()]
    n = len(items)
    _check_width(n)
    partner = [-1] * (2 * n)

    def slot(num: str, sign: str) -> int:
        i = int(num)
        if not 1 <= i <= n:
            raise ValueError(f"vertex {num}{sign} out of range for width {n}")
        return i - 1 if sign == "+" else n + i - 1

    for item in items:
        m = _EDGE.match(item.replace(" ", ""))
        if not m:
            raise ValueError(f"bad edge {item!r}")
        i, si, kind, j, sj = m.groups()
        expected = {">": {"+", "-"}, "^": {"+"}, "v": {"-"}}[kind]
        if {si, sj} != expected or (kind == ">" and si == sj):
            raise ValueError(f"edge {item!r} does not match its connector {kind!r}")
        u, w = slot(i, si), slot(j, sj)
        if partner[u] >= 0 or partner[w] >= 0 or u == w:
            raise ValueError(f"vertex reused in {item!r}")
        partner[u], partner[w] = w, u
    return Diagram(n, partner)


def random_diagram(n: int, rng, bars: int | None = None, walled: bool = False) -> Diagram:
    """A random diagram of width n from a ``numpy.random.Generator``.

    With ``bars=None`` and ``walled=False`` the result is uniform over all
    diagrams.  Otherwise exactly ``bars`` north and south bars are placed at
    random, and with ``walled=True`` bars join opposite parities while NS
    edges keep parity.
    """
    _check_width(n)
    if bars is None and not walled:
        order = [int(v) for v in rng.permutation(2 * n)]
        partner = [0] * (2 * n)
        for a, b in zip(order[::2], order[1::2]):
            partner[a], partner[b] = b, a
        return Diagram._trusted(n, partner)
    if bars is None:
        bars = int(rng.integers(0, n // 2 + 1))
    if not 0 <= bars <= n // 2:
        raise ValueError(f"bars must lie in [0, {n // 2}]")
    partner = [0] * (2 * n)
    free = []
    for offset in (0, n):
        cols = [int(c) for c in rng.permutation(n)]
        if walled:
            odd = [c for c in cols if c % 2 == 0]  # 1-based odd columns
            even = [c for c in cols if c % 2 == 1]
            pairs = list(zip(odd[:bars], even[:bars]))
            rest = odd[bars:] + even[bars:]
        else:
            pairs = list(zip(cols[: 2 * bars : 2], cols[1 : 2 * bars : 2]))
            rest = cols[2 * bars :]
        for a, b in pairs:
            partner[offset + a], partner[offset + b] = offset + b, offset + a
        free.append(rest)
    north, south = free
    if walled:
        m = len(north) // 2
        groups = [(north[:m], [c for c in south if c % 2 == 0]), (north[m:], [c for c in south if c % 2 == 1])]
    else:
        groups = [(north, south)]
    for top, bottom in groups:
        bottom = [bottom[int(i)] for i in rng.permutation(len(bottom))]
        for a, b in zip(top, bottom):
            partner[a], partner[n + b] = n + b, a
    return Diagram(n, partner)
