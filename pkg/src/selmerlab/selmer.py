"""Global 2-Selmer groups of quadratic twists, by three independent routes.

* selmer_direct: brute-force enumeration of the ambient square-class group,
  keeping classes whose localization lands in every local Kummer image.
* selmer_kernel: left kernel of the sum-of-local-Tate-pairings bilinear form
  against the product of the local images (duality route).
* selmer_count_formula: the character sum over factorisations of the good part
  of d, evaluated exactly; returns the order of the group.

All three share the LocalSubspace machinery of `curve`, so they agree on
conventions and disagree only if one of the routes is wrong.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import linalg
from .arith import (
    REAL,
    TWO,
    LocalClass,
    Place,
    SigmaSet,
    SquareClass,
    factorize,
    kronecker,
    localize,
    odd_place,
    sq_group,
    square_class,
    trivial_class,
)
from .curve import (
    Curve2T,
    DescentClass,
    GammaElement,
    LocalDescentClass,
    LocalSubspace,
    descent_class,
    gamma_at,
    local_image,
    local_image_by_class,
    local_tate_pairing,
    weil_e,
)


class BudgetError(RuntimeError):
    """An enumeration would exceed its stated budget."""


# ---------------------------------------------------------------------------
# coordinates on the sum of local cohomology groups


def _hilbert_block(v: Place) -> List[List[int]]:
    """Matrix of the additive Hilbert pairing on Q_v*/Q_v*^2 coordinates."""
    if v.kind == "real":
        return [[1]]
    if v.kind == "two":
        return [[0, 0, 1], [0, 1, 0], [1, 0, 0]]
    t = 1 if v.p % 4 == 3 else 0
    return [[t, 1], [1, 0]]


class SigmaLayout:
    """Fixed coordinates on the direct sum of H^1(Q_v, E[2]) over a place list."""

    def __init__(self, places: Sequence[Place]):
        self.places = tuple(places)
        self.offsets: Dict[Place, int] = {}
        off = 0
        for v in self.places:
            self.offsets[v] = off
            off += 2 * v.local_dim
        self.dim = off
        # columns of the sum-of-local-Tate-pairings Gram matrix
        self._gram_cols = [0] * self.dim
        for v in self.places:
            k = v.local_dim
            H = _hilbert_block(v)
            base = self.offsets[v]
            # <x, y> = x1^T H y2 + x2^T H y1 on the (c1 | c2) block
            for i in range(k):
                for j in range(k):
                    if H[i][j]:
                        self._gram_cols[base + k + j] |= 1 << (base + i)
                        self._gram_cols[base + j] |= 1 << (base + k + i)

    def embed_local(self, x: LocalDescentClass) -> int:
        return x.to_vec() << self.offsets[x.place]

    def localize(self, dc: DescentClass) -> int:
        vec = 0
        for v in self.places:
            vec |= self.embed_local(dc.localize(v))
        return vec

    def block(self, vec: int, v: Place) -> LocalDescentClass:
        k = 2 * v.local_dim
        return LocalDescentClass.from_vec(v, (vec >> self.offsets[v]) & ((1 << k) - 1))

    def gram_apply(self, y: int) -> int:
        acc = 0
        while y:
            low = y & -y
            acc ^= self._gram_cols[low.bit_length() - 1]
            y ^= low
        return acc

    def pair(self, x: int, y: int) -> int:
        """Sum over places of the local Tate pairings, in coordinates."""
        return linalg.parity(x & self.gram_apply(y))


class F2Solver:
    """Reusable solver for membership in span(rows) with coefficient recovery."""

    def __init__(self, rows: Sequence[int], ncols: int):
        self.ncols = ncols
        mask = (1 << ncols) - 1
        self.mask = mask
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
        self.piv = piv

    def solve(self, target: int) -> Optional[int]:
        vec, acc = target, 0
        while vec:
            b = self.piv.get(vec & -vec)
            if b is None:
                return None
            vec ^= b & self.mask
            acc ^= b >> self.ncols
        return acc


# ---------------------------------------------------------------------------
# b-classes


@dataclass(frozen=True)
class BClass:
    """A tuple of local square classes, one per place of Sigma."""

    sigma: SigmaSet
    classes: Tuple[LocalClass, ...]

    def __post_init__(self):
        if len(self.classes) != len(self.sigma.places):
            raise ValueError("one local class per place of Sigma")
        for v, c in zip(self.sigma.places, self.classes):
            if c.place != v:
                raise ValueError("local class at the wrong place")

    @staticmethod
    def from_int(d: int, sigma: SigmaSet) -> "BClass":
        c = square_class(d)
        return BClass(sigma, tuple(localize(c, v) for v in sigma.places))

    def at(self, v: Place) -> LocalClass:
        return self.classes[self.sigma.places.index(v)]

    @staticmethod
    def enumerate(sigma: SigmaSet) -> Iterator["BClass"]:
        ranges = []
        for v in sigma.places:
            k = v.local_dim
            ranges.append([LocalClass(v, linalg.bits_of_vec(i, k)) for i in range(1 << k)])
        for combo in itertools.product(*ranges):
            yield BClass(sigma, tuple(combo))

    def matches(self, d: int) -> bool:
        return BClass.from_int(d, self.sigma) == self

    def __repr__(self):
        bits = ",".join("".join(map(str, c.bits)) for c in self.classes)
        return f"BClass[{bits}]"


# ---------------------------------------------------------------------------
# Selmer groups


@dataclass(frozen=True)
class SelmerGroup:
    d: int
    basis: Tuple[DescentClass, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _coords(self, extra: Sequence[DescentClass] = ()) -> Tuple[List[int], List[int]]:
        cls = [dc for dc in self.basis] + list(extra)
        primes = sorted({p for dc in cls for c in (dc.c1, dc.c2) for p in c.primes})
        idx = {p: i for i, p in enumerate(primes)}

        def vec(dc: DescentClass) -> int:
            out = 0
            for half, c in enumerate((dc.c1, dc.c2)):
                base = half * (len(primes) + 1)
                if c.sign < 0:
                    out |= 1 << base
                for p in c.primes:
                    out |= 1 << (base + 1 + idx[p])
            return out

        return [vec(dc) for dc in self.basis], [vec(dc) for dc in extra]

    def contains(self, dc: DescentClass) -> bool:
        base, ext = self._coords([dc])
        return linalg.in_span(ext[0], linalg.echelon(base))

    def span_equal(self, other: "SelmerGroup") -> bool:
        base, ext = self._coords(other.basis)
        if len(linalg.echelon(base)) != len(linalg.echelon(base + ext)):
            return False
        return self.dim == other.dim


def good_part(d: int, sigma: SigmaSet) -> Tuple[int, Tuple[int, ...]]:
    """Write d = d0 * D with d0 supported on Sigma (sign included), D > 0 coprime."""
    if d == 0:
        raise ValueError("d must be nonzero")
    fac = factorize(d)
    if any(e > 1 for e in fac.values()):
        raise ValueError(f"d = {d} is not squarefree")
    d0 = -1 if d < 0 else 1
    D_primes = []
    for p in sorted(fac):
        if p in sigma.finite_primes:
            d0 *= p
        else:
            D_primes.append(p)
    return d0, tuple(D_primes)


def _twist_places(sigma: SigmaSet, D_primes: Sequence[int]) -> Tuple[Place, ...]:
    return sigma.places + tuple(odd_place(p) for p in D_primes)


def _vprime_basis(E: Curve2T, sigma: SigmaSet, D_primes: Sequence[int]) -> List[DescentClass]:
    gens = sq_group(sigma, D_primes)
    one = square_class(1)
    out = []
    for g in gens:
        out.append(DescentClass(g, one))
        out.append(DescentClass(one, g))
    return out


def local_conditions(E: Curve2T, d: int, sigma: SigmaSet,
                     D_primes: Optional[Sequence[int]] = None) -> List[LocalSubspace]:
    """The local images S_{d,v} at all places of Sigma and all primes of D."""
    if D_primes is None:
        _, D_primes = good_part(d, sigma)
    places = _twist_places(sigma, D_primes)
    return [local_image(E, d, v) for v in places]


def selmer_direct(E: Curve2T, d: int, sigma: SigmaSet,
                  max_dim: int = 24) -> SelmerGroup:
    """Brute-force route: enumerate the ambient group, test every local condition."""
    _check_sigma(E, sigma)
    d0, D_primes = good_part(d, sigma)
    places = _twist_places(sigma, D_primes)
    layout = SigmaLayout(places)
    vbasis = _vprime_basis(E, sigma, D_primes)
    n = len(vbasis)
    if n > max_dim:
        raise BudgetError(f"direct enumeration over 2^{n} classes refused")
    conds = local_conditions(E, d, sigma, D_primes)
    zspan = linalg.echelon([
        sub.basis[i].to_vec() << layout.offsets[sub.place]
        for sub in conds for i in range(sub.dim)
    ])
    locvecs = [layout.localize(dc) for dc in vbasis]
    members: List[int] = []
    cur = 0
    sel = 0
    if linalg.in_span(0, zspan):
        pass  # identity always a member
    for i in range(1, 1 << n):
        j = (i & -i).bit_length() - 1
        cur ^= locvecs[j]
        sel ^= 1 << j
        if linalg.in_span(cur, zspan):
            members.append(sel)
    basis_masks = linalg.echelon(members)
    basis = []
    for mask in basis_masks:
        dc = descent_class(1, 1)
        for j in range(n):
            if mask >> j & 1:
                dc = dc * vbasis[j]
        basis.append(dc)
    return SelmerGroup(d, tuple(basis))


def selmer_kernel(E: Curve2T, d: int, sigma: SigmaSet) -> SelmerGroup:
    """Duality route: left kernel of the local-Tate-pairing Gram matrix."""
    _check_sigma(E, sigma)
    d0, D_primes = good_part(d, sigma)
    vbasis = _vprime_basis(E, sigma, D_primes)
    conds = local_conditions(E, d, sigma, D_primes)
    cols = [(sub.place, z) for sub in conds for z in sub.basis]
    rows = []
    for dc in vbasis:
        row = 0
        loc_cache: Dict[Place, LocalDescentClass] = {}
        for j, (v, z) in enumerate(cols):
            x = loc_cache.get(v)
            if x is None:
                x = dc.localize(v)
                loc_cache[v] = x
            if local_tate_pairing(x, z):
                row |= 1 << j
        rows.append(row)
    kern = linalg.left_kernel(rows, len(cols))
    basis = []
    for mask in kern:
        dc = descent_class(1, 1)
        for j in range(len(vbasis)):
            if mask >> j & 1:
                dc = dc * vbasis[j]
        basis.append(dc)
    return SelmerGroup(d, tuple(basis))


def _check_sigma(E: Curve2T, sigma: SigmaSet) -> None:
    for p in E.bad_primes:
        if p != 2 and p not in sigma.odd_primes:
            raise ValueError(f"Sigma must contain the bad prime {p}")


# ---------------------------------------------------------------------------
# dual data at Sigma shared by the counting formula and the W-sums


_E2_ELEMENTS = ((0, 0), (1, 0), (0, 1), (1, 1))


class SigmaDualData:
    """V0 = classes unramified outside Sigma, Z0 = product of local images at
    Sigma for the twisting class b, embedded in one coordinate space.

    Provides the signed counts over affine slices V0 ∩ (X + Z0) that both the
    explicit point-count formula and the W-sums reduce to.
    """

    def __init__(self, E: Curve2T, sigma: SigmaSet, b: BClass):
        self.E = E
        self.sigma = sigma
        self.b = b
        self.layout = SigmaLayout(sigma.places)
        self.v0_gens = _vprime_basis(E, sigma, ())
        self.V0 = [self.layout.localize(dc) for dc in self.v0_gens]
        self.Z0 = []
        for v in sigma.places:
            sub = local_image_by_class(E, b.at(v))
            for z in sub.basis:
                self.Z0.append(self.layout.embed_local(z))
        self.sel0 = linalg.intersect(self.V0, self.Z0, self.layout.dim)
        self.s0 = len(self.sel0)
        self._solver = F2Solver(self.V0 + self.Z0, self.layout.dim)
        self._nv = len(self.V0)

    def decompose(self, x: int) -> Optional[Tuple[int, int]]:
        """x = v + z with v in span V0, z in span Z0, or None."""
        mask = self._solver.solve(x)
        if mask is None:
            return None
        v = 0
        for j in range(self._nv):
            if mask >> j & 1:
                v ^= self.V0[j]
        return v, v ^ x

    def signed_count_V(self, x: int, ychar: int) -> int:
        """sum over v0 in V0 ∩ (x + Z0) of (-1)^<v0, ychar>."""
        dec = self.decompose(x)
        if dec is None:
            return 0
        vstar = dec[0]
        gy = self.layout.gram_apply(ychar)
        if any(linalg.parity(w & gy) for w in self.sel0):
            return 0
        sign = -1 if linalg.parity(vstar & gy) else 1
        return sign << self.s0

    def signed_count_Z(self, x: int, ychar: int) -> int:
        """sum over z0 in Z0 ∩ (x + V0) of (-1)^<z0, ychar>."""
        dec = self.decompose(x)
        if dec is None:
            return 0
        zstar = dec[1]
        gy = self.layout.gram_apply(ychar)
        if any(linalg.parity(w & gy) for w in self.sel0):
            return 0
        sign = -1 if linalg.parity(zstar & gy) else 1
        return sign << self.s0

    def psi_tensor_vec(self, chi_local: Dict[Place, LocalClass],
                       x: Tuple[int, int]) -> int:
        """Embedding of chi tensor x, x in E[2] coordinates over (P1, P2)."""
        vec = 0
        for v in self.sigma.places:
            chi = chi_local[v]
            k = v.local_dim
            triv = trivial_class(v)
            c1 = chi if x[1] else triv
            c2 = chi if x[0] else triv
            vec |= self.layout.embed_local(LocalDescentClass(v, c1, c2))
        return vec


@lru_cache(maxsize=None)
def _dual_data(E: Curve2T, sigma: SigmaSet, b: BClass) -> SigmaDualData:
    return SigmaDualData(E, sigma, b)


def dual_data(E: Curve2T, sigma: SigmaSet, b: BClass) -> SigmaDualData:
    return _dual_data(E, sigma, b)


def selmer_count_formula(E: Curve2T, d: int, sigma: SigmaSet, r: int = 1,
                         max_omega: int = 8) -> int:
    """#Sel_2(E_d/Q) by the exact character sum over factorisations of D.

    Exponential in the number of good primes of d; this is an oracle, not a
    production path (capped at omega(D) <= max_omega <= 8).
    """
    _check_sigma(E, sigma)
    if r != 1:
        raise NotImplementedError("the evaluator is implemented for r = 1")
    d0, D_primes = good_part(d, sigma)
    omega = len(D_primes)
    if omega > min(max_omega, 8):
        raise BudgetError(f"omega(D) = {omega} exceeds the factorisation budget")
    duals = dual_data(E, sigma, BClass.from_int(d, sigma))

    # per-prime data
    gammas = [gamma_at(E, p) for p in D_primes]
    neg_d0_bits = [1 if kronecker(-d0, p) == -1 else 0 for p in D_primes]
    chi_locals = [
        {v: localize(square_class(p), v) for v in sigma.places} for p in D_primes
    ]
    vecs1 = []  # psi_p tensor pi1(u), indexed [prime][u]
    vecs2 = []
    tbits = []  # gamma + (-d0/p) contributions, indexed [prime][u]
    U = [(x, y) for x in _E2_ELEMENTS for y in _E2_ELEMENTS]
    for i, p in enumerate(D_primes):
        vec_of_x = {x: duals.psi_tensor_vec(chi_locals[i], x) for x in _E2_ELEMENTS}
        vecs1.append([vec_of_x[u[0]] for u in U])
        vecs2.append([vec_of_x[u[1]] for u in U])
        tb = []
        for x, y in U:
            bit = weil_e(x, gammas[i].apply(y))
            bit ^= weil_e(x, y) & neg_d0_bits[i]
            tb.append(bit)
        tbits.append(tb)
    cross = [[1 if kronecker(pi, pj) == -1 else 0 for pj in D_primes] for pi in D_primes]

    def phi(u, v) -> int:
        return weil_e((u[0][0] ^ v[0][0], u[0][1] ^ v[0][1]), v[1])

    total = 0
    assign = [0] * omega

    def rec(i: int, x1: int, x2: int, bits: int) -> None:
        nonlocal total
        if i == omega:
            inner = duals.signed_count_V(x1, x2)
            if inner:
                total += -inner if bits else inner
            return
        for ui in range(16):
            b = bits ^ tbits[i][ui]
            u = U[ui]
            for j in range(i):
                uj = U[assign[j]]
                b ^= phi(uj, u) & cross[j][i]
                b ^= phi(u, uj) & cross[i][j]
            assign[i] = ui
            rec(i + 1, x1 ^ vecs1[i][ui], x2 ^ vecs2[i][ui], b)

    rec(0, 0, 0, 0)
    denom = 1 << (2 * omega)
    if total % denom:
        raise ArithmeticError("count formula did not return an integer")
    count = total // denom
    if count <= 0:
        raise ArithmeticError("count formula returned a nonpositive size")
    return count


# ---------------------------------------------------------------------------
# systematic subspace, parity, witnesses


@dataclass(frozen=True)
class SystematicSubspace:
    basis: Tuple[DescentClass, ...]

    @property
    def n_b(self) -> int:
        return len(self.basis)

    def elements(self) -> List[DescentClass]:
        out = [descent_class(1, 1)]
        for b in self.basis:
            out += [x * b for x in out]
        return out

    def contains(self, dc: DescentClass) -> bool:
        return any(x == dc for x in self.elements())


def _group_closure(gens: Sequence[SquareClass]) -> List[SquareClass]:
    out = {SquareClass(1, ())}
    for g in gens:
        out |= {x * g for x in out}
    return sorted(out, key=lambda c: (c.sign, c.primes))


def systematic_subspace(E: Curve2T, sigma: SigmaSet, b: BClass,
                        L_gens: Sequence[SquareClass]) -> SystematicSubspace:
    """Classes trivialised by L meeting every twisted local condition at Sigma."""
    _check_sigma(E, sigma)
    gens = [square_class(g) for g in L_gens]
    for g in gens:
        for p in g.primes:
            if p != 2 and p not in sigma.odd_primes:
                raise ValueError(f"Sigma must contain the ramified prime {p}")
    G = _group_closure(gens)
    images = {v: local_image_by_class(E, b.at(v)) for v in sigma.places}
    kept: List[DescentClass] = []
    for c1 in G:
        for c2 in G:
            dc = DescentClass(c1, c2)
            if all(images[v].contains(dc.localize(v)) for v in sigma.places):
                kept.append(dc)
    # extract an F2 basis of the (automatically closed) kept set
    primes = sorted({p for g in gens for p in g.primes})
    idx = {p: i for i, p in enumerate(primes)}

    def vec(dc: DescentClass) -> int:
        out = 0
        for half, c in enumerate((dc.c1, dc.c2)):
            base = half * (len(primes) + 1)
            if c.sign < 0:
                out |= 1 << base
            for p in c.primes:
                out |= 1 << (base + 1 + idx[p])
        return out

    by_vec = {vec(dc): dc for dc in kept}
    basis = [by_vec[v] for v in linalg.echelon(list(by_vec)) if v]
    return SystematicSubspace(tuple(basis))


def kappa_v(E: Curve2T, b_v: LocalClass) -> int:
    """dim S_v / (S_v ∩ S_{b_v,v}) mod 2."""
    v = b_v.place
    S = local_image(E, 1, v)
    Sb = local_image_by_class(E, b_v)
    inter = linalg.intersect(
        [x.to_vec() for x in S.basis], [x.to_vec() for x in Sb.basis],
        2 * v.local_dim,
    )
    return (S.dim - len(inter)) & 1


@lru_cache(maxsize=None)
def _base_parity(E: Curve2T, sigma: SigmaSet) -> int:
    return selmer_kernel(E, 1, sigma).dim & 1


def parity_kappa(E: Curve2T, sigma: SigmaSet, b: BClass) -> int:
    """Predicted parity of dim Sel_2(E_d/Q) for every d in the class b."""
    total = _base_parity(E, sigma)
    for v in sigma.places:
        total ^= kappa_v(E, b.at(v))
    return total


def find_condition_E_witness(E: Curve2T, sigma: SigmaSet,
                             zeta: DescentClass) -> Optional[BClass]:
    """First b (in enumeration order) with S_b = {0, zeta} and odd parity."""
    if zeta.is_one():
        raise ValueError("zeta must be a nonzero class")
    L_gens = [c for c in (zeta.c1, zeta.c2) if not c.is_one()]
    for b in BClass.enumerate(sigma):
        S = systematic_subspace(E, sigma, b, L_gens)
        if S.n_b != 1 or S.basis[0] != zeta:
            continue
        if parity_kappa(E, sigma, b) == 1:
            return b
    return None
