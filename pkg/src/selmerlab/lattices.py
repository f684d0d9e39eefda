"""Lattices with an involution: decomposition into the three indecomposables.

A finitely generated Z-free module with an order-2 action splits as a direct
sum of copies of Z (trivial action), Z(-1) (action by -1) and the rank-2
regular lattice.  The multiplicities are pinned down by the rank, the rank of
the fixed sublattice, and the index of the norm image inside it (a power of 2
whose exponent is the trivial multiplicity).  Integer kernels and indices are
computed through Smith normal form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors, smith_normal_decomp


@dataclass(frozen=True)
class InvolutionLattice:
    """Z-free module of finite rank with a Z-linear action of order <= 2."""

    action: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.action)
        if any(len(row) != n for row in self.action):
            raise ValueError("action matrix must be square")
        if self._mat_mul(self.action, self.action) != _identity(n):
            raise ValueError("the action must square to the identity")

    @staticmethod
    def _mat_mul(a, b):
        n = len(a)
        return tuple(
            tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
            for i in range(n)
        )

    @property
    def rank(self) -> int:
        return len(self.action)


def _identity(n: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def lattice(rows: Sequence[Sequence[int]]) -> InvolutionLattice:
    return InvolutionLattice(tuple(tuple(int(x) for x in row) for row in rows))


def block_diag(*blocks: Sequence[Sequence[int]]) -> InvolutionLattice:
    n = sum(len(b) for b in blocks)
    rows = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                rows[off + i][off + j] = int(x)
        off += len(b)
    return lattice(rows)


REGULAR_BLOCK = ((0, 1), (1, 0))
TRIVIAL_BLOCK = ((1,),)
SIGN_BLOCK = ((-1,),)


def _integer_kernel(M: List[List[int]]) -> List[List[int]]:
    """Z-basis (as columns) of ker(M) ∩ Z^n; saturated by construction."""
    n = len(M)
    dm = DomainMatrix.from_list([[ZZ(x) for x in row] for row in M], ZZ)
    snf, S, T = smith_normal_decomp(dm)
    diag = snf.to_list()
    tcols = T.to_list()
    kernel_cols = []
    for j in range(n):
        d = diag[j][j] if j < len(diag) and j < len(diag[0]) else 0
        if d == 0:
            kernel_cols.append([int(tcols[i][j]) for i in range(n)])
    return kernel_cols


def _solve_integer(cols: List[List[int]], target: List[int]) -> List[int]:
    """Coordinates of target in the lattice spanned by the given columns."""
    from fractions import Fraction

    n, r = len(target), len(cols)
    # Gaussian elimination over Q; solution is integral because the basis
    # spans a saturated sublattice containing target
    A = [[Fraction(cols[j][i]) for j in range(r)] + [Fraction(target[i])]
         for i in range(n)]
    row = 0
    pivots = []
    for col in range(r):
        piv = next((i for i in range(row, n) if A[i][col]), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        pivrow = A[row]
        for i in range(n):
            if i != row and A[i][col]:
                f = A[i][col] / pivrow[col]
                A[i] = [a - f * b for a, b in zip(A[i], pivrow)]
        pivots.append((row, col))
        row += 1
    out = [Fraction(0)] * r
    for i, col in pivots:
        out[col] = A[i][r] / A[i][col]
    for i in range(n):
        if all(A[i][j] == 0 for j in range(r)) and A[i][r] != 0:
            raise ArithmeticError("target not in the span")
    for x in out:
        if x.denominator != 1:
            raise ArithmeticError("non-integral coordinates")
    return [int(x) for x in out]


def norm_index(L: InvolutionLattice) -> int:
    """The index (L^G : (1+g)L); equals 2**n1 for the trivial multiplicity n1."""
    n = L.rank
    G = [list(row) for row in L.action]
    GmI = [[G[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    fixed = _integer_kernel(GmI)
    r = len(fixed)
    GpI = [[G[i][j] + (1 if i == j else 0) for j in range(n)] for i in range(n)]
    norm_cols = [[GpI[i][j] for i in range(n)] for j in range(n)]
    if r == 0:
        return 1
    coords = [_solve_integer(fixed, col) for col in norm_cols]
    dm = DomainMatrix.from_list(
        [[ZZ(coords[j][i]) for j in range(n)] for i in range(r)], ZZ
    )
    factors = [int(f) for f in invariant_factors(dm)]
    nonzero = [abs(f) for f in factors if f != 0]
    if len(nonzero) != r:
        raise ArithmeticError("norm image does not have finite index in L^G")
    idx = 1
    for f in nonzero:
        idx *= f
    return idx


def decompose(L: InvolutionLattice) -> Tuple[int, int, int]:
    """Multiplicities (n1, n2, n3) of Z, Z(-1), Z[G] inside L."""
    n = L.rank
    G = [list(row) for row in L.action]
    GmI = [[G[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    rank_fixed = n - _rank_int(GmI)
    idx = norm_index(L)
    n1 = idx.bit_length() - 1
    if 1 << n1 != idx:
        raise ArithmeticError(f"norm index {idx} is not a power of 2")
    n3 = rank_fixed - n1
    n2 = n - n1 - 2 * n3
    if n2 < 0 or n3 < 0:
        raise ArithmeticError("inconsistent multiplicities")
    return n1, n2, n3


def _rank_int(M: List[List[int]]) -> int:
    from fractions import Fraction

    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    m = len(A[0]) if A else 0
    rank = 0
    row = 0
    for col in range(m):
        piv = next((i for i in range(row, n) if A[i][col]), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        for i in range(row + 1, n):
            if A[i][col]:
                f = A[i][col] / A[row][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[row])]
        rank += 1
        row += 1
    return rank


def classify_extension(u: Sequence[int], sign: int) -> str:
    """Structure of the rank-1 extension with g.m = sign*m + u, u in (Z/2)^n.

    Returns one of:
      * "trivial-summand": sign +1, u = 0, so a Z direct summand splits off;
      * "nonsplit": u != 0, the extension class is nonzero (for sign +1 this
        is exactly the middle case g.m = m + u of the trichotomy);
      * "minus-split": sign -1, u = 0, i.e. Z(-1) + torsion, which is neither
        regular nor has a trivial summand;
      * "regular-type" is never produced from rank-1 data (the regular lattice
        has rank 2) and is reserved for callers classifying full modules.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    nonzero = any(int(b) & 1 for b in u)
    if nonzero:
        return "nonsplit"
    return "trivial-summand" if sign == 1 else "minus-split"
