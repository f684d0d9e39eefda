"""F2 linear algebra on int bitsets.

Vectors are Python ints (bit i = coordinate i), subspaces are lists of such
ints.  Everything here is exact and allocation-light; the rest of the package
leans on these helpers for kernels, spans and membership tests.

Convention: the pivot of a row is its lowest set bit.  `echelon` returns a
fully reduced basis sorted by pivot, so a single ascending reduction pass is
enough for membership tests.
"""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, List, Optional, Tuple


def parity(x: int) -> int:
    return bin(x).count("1") & 1


def _insert(piv: Dict[int, int], row: int) -> bool:
    """Triangular insertion; returns True if row enlarged the span."""
    while row:
        low = row & -row
        b = piv.get(low)
        if b is None:
            piv[low] = row
            return True
        row ^= b
    return False


def _reduced_rows(piv: Dict[int, int]) -> List[int]:
    lows = sorted(piv)
    for i, low in enumerate(lows):
        row = piv[low]
        for low2 in lows[i + 1:]:
            if row & low2:
                row ^= piv[low2]
        piv[low] = row
    return [piv[low] for low in lows]


def echelon(rows: Iterable[int]) -> List[int]:
    """Reduced row echelon basis of the span."""
    piv: Dict[int, int] = {}
    for r in rows:
        _insert(piv, r)
    return _reduced_rows(piv)


def rank(rows: Iterable[int]) -> int:
    piv: Dict[int, int] = {}
    return sum(_insert(piv, r) for r in rows)


def reduce_mod(vec: int, basis: List[int]) -> int:
    """Reduce vec against a *reduced, pivot-sorted* basis (as from echelon)."""
    for b in basis:
        if vec & (b & -b):
            vec ^= b
    return vec


def in_span(vec: int, basis: List[int]) -> bool:
    return reduce_mod(vec, basis) == 0


def span_equal(rows_a: Iterable[int], rows_b: Iterable[int]) -> bool:
    return echelon(rows_a) == echelon(rows_b)


def left_kernel(rows: List[int], ncols: int) -> List[int]:
    """Basis of {x : XOR of rows selected by x == 0}, one bit of x per row."""
    mask = (1 << ncols) - 1
    piv: Dict[int, int] = {}
    out: List[int] = []
    for i, row in enumerate(rows):
        cur = (row & mask) | (1 << (ncols + i))
        while cur & mask:
            low = (cur & mask) & -(cur & mask)
            b = piv.get(low)
            if b is None:
                break
            cur ^= b
        if cur & mask:
            piv[(cur & mask) & -(cur & mask)] = cur
        else:
            out.append(cur >> ncols)
    return echelon(out)


def solve(rows: List[int], ncols: int, target: int) -> Optional[int]:
    """Some x with XOR of selected rows == target, or None if inconsistent."""
    mask = (1 << ncols) - 1
    piv: Dict[int, int] = {}
    for i, row in enumerate(rows):
        cur = (row & mask) | (1 << (ncols + i))
        while cur & mask:
            low = (cur & mask) & -(cur & mask)
            b = piv.get(low)
            if b is None:
                piv[low] = cur
                break
            cur ^= b
    vec, acc = target, 0
    while vec:
        low = vec & -vec
        b = piv.get(low)
        if b is None:
            return None
        vec ^= b & mask
        acc ^= b >> ncols
    return acc


def intersect(rows_a: List[int], rows_b: List[int], ncols: int) -> List[int]:
    """Echelon basis of span(rows_a) ∩ span(rows_b) (Zassenhaus)."""
    a = echelon(rows_a)
    b = echelon(rows_b)
    if not a or not b:
        return []
    pairs = [(r, r) for r in a] + [(r, 0) for r in b]
    piv: Dict[int, Tuple[int, int]] = {}
    inter: List[int] = []
    for t, bot in pairs:
        while t:
            low = t & -t
            e = piv.get(low)
            if e is None:
                piv[low] = (t, bot)
                break
            t ^= e[0]
            bot ^= e[1]
        else:
            if bot:
                inter.append(bot)
    return echelon(inter)


def enumerate_span(basis: List[int]) -> Iterator[int]:
    """All 2^k elements of the span, Gray-code order (starts at 0)."""
    x = 0
    yield 0
    for i in range(1, 1 << len(basis)):
        j = (i & -i).bit_length() - 1
        x ^= basis[j]
        yield x


def vec_of_bits(bits: Iterable[int]) -> int:
    v = 0
    for i, b in enumerate(bits):
        if b & 1:
            v |= 1 << i
    return v


def bits_of_vec(v: int, n: int) -> Tuple[int, ...]:
    return tuple((v >> i) & 1 for i in range(n))
