"""Elliptic curves y^2 = (x-a1)(x-a2)(x-a3) with full rational 2-torsion.

Everything is exact: points are rational, square classes are factored, and
local Kummer images are certified by reaching the known F2-dimension of
E_d(Q_v)/2E_d(Q_v) (1 at the real place, 2 at odd p, 3 at p=2).

Convention for identifying H^1(Q, E[2]) with (Q*/Q*^2)^2: a class (c1, c2)
pairs against the 2-torsion basis (P1, P2) through the Weil pairing, i.e. a
homomorphism f corresponds to (c1, c2) with e(f(s), P_i) = psi_{c_i}(s).
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from . import linalg
from .arith import (
    REAL,
    TWO,
    LocalClass,
    Place,
    SigmaSet,
    SquareClass,
    factorize,
    hilbert_local,
    is_prime,
    kronecker,
    localize,
    odd_place,
    square_class,
    trivial_class,
)

TorsionTag = str  # "O", "T1", "T2", "T3"
PointLike = Union[TorsionTag, Tuple[Fraction, Fraction]]


class LocalImageError(RuntimeError):
    """Sampling failed to certify the local image dimension."""


# ---------------------------------------------------------------------------
# curves and rational points


@dataclass(frozen=True)
class Curve2T:
    a1: int
    a2: int
    a3: int

    def __post_init__(self):
        if len({self.a1, self.a2, self.a3}) != 3:
            raise ValueError("the three roots must be pairwise distinct")

    @property
    def roots(self) -> Tuple[int, int, int]:
        return (self.a1, self.a2, self.a3)

    @property
    def discriminant_support(self) -> int:
        d = 2
        for i, ai in enumerate(self.roots):
            for aj in self.roots[i + 1:]:
                d *= ai - aj
        return abs(d)

    @property
    def bad_primes(self) -> Tuple[int, ...]:
        return tuple(sorted(factorize(self.discriminant_support)))

    def sigma(self, extra: Sequence[int] = ()) -> SigmaSet:
        odd = [p for p in self.bad_primes if p != 2]
        return SigmaSet.of(*(list(odd) + list(extra)))

    def twisted_roots(self, d: int) -> Tuple[int, int, int]:
        return (self.a1 * d, self.a2 * d, self.a3 * d)

    def f(self, x: Fraction, d: int = 1) -> Fraction:
        r1, r2, r3 = self.twisted_roots(d)
        return (x - r1) * (x - r2) * (x - r3)

    def on_curve(self, pt: PointLike, d: int = 1) -> bool:
        if pt in ("O", "T1", "T2", "T3"):
            return True
        x, y = Fraction(pt[0]), Fraction(pt[1])
        return y * y == self.f(x, d)

    def point(self, x, y, d: int = 1) -> Tuple[Fraction, Fraction]:
        pt = (Fraction(x), Fraction(y))
        if not self.on_curve(pt, d):
            raise ValueError(f"({x}, {y}) is not on the twist by {d}")
        return pt

    def add(self, P: PointLike, Q: PointLike, d: int = 1) -> PointLike:
        """Group law on the twist by d (affine short Weierstrass arithmetic)."""
        P, Q = self._affine(P, d), self._affine(Q, d)
        if P is None:
            return self._tag(Q, d)
        if Q is None:
            return self._tag(P, d)
        x1, y1 = P
        x2, y2 = Q
        r1, r2, r3 = self.twisted_roots(d)
        A = -(r1 + r2 + r3)
        B = r1 * r2 + r1 * r3 + r2 * r3
        if x1 == x2:
            if y1 == -y2:
                return "O"
            lam = (3 * x1 * x1 + 2 * A * x1 + B) / (2 * y1)
        else:
            lam = (y2 - y1) / (x2 - x1)
        x3 = lam * lam - A - x1 - x2
        y3 = lam * (x1 - x3) - y1
        return self._tag((x3, y3), d)

    def _affine(self, pt: PointLike, d: int) -> Optional[Tuple[Fraction, Fraction]]:
        if pt == "O":
            return None
        if pt in ("T1", "T2", "T3"):
            i = int(pt[1]) - 1
            return (Fraction(self.roots[i] * d), Fraction(0))
        if not self.on_curve(pt, d):
            raise ValueError(f"{pt} is not on the twist by {d}")
        return (Fraction(pt[0]), Fraction(pt[1]))

    def _tag(self, pt, d: int) -> PointLike:
        x, y = pt
        if y == 0:
            for i, r in enumerate(self.twisted_roots(d)):
                if x == r:
                    return f"T{i + 1}"
        return (x, y)


# ---------------------------------------------------------------------------
# descent classes


@dataclass(frozen=True)
class DescentClass:
    """Element of H^1(Q, E[2]) as a pair of square classes."""

    c1: SquareClass
    c2: SquareClass

    def __mul__(self, other: "DescentClass") -> "DescentClass":
        return DescentClass(self.c1 * other.c1, self.c2 * other.c2)

    def is_one(self) -> bool:
        return self.c1.is_one() and self.c2.is_one()

    def localize(self, v: Place) -> "LocalDescentClass":
        return LocalDescentClass(v, localize(self.c1, v), localize(self.c2, v))

    def __repr__(self):
        return f"({self.c1.value}, {self.c2.value})"


def descent_class(c1, c2) -> DescentClass:
    return DescentClass(square_class(c1), square_class(c2))


@dataclass(frozen=True)
class LocalDescentClass:
    """Element of H^1(Q_v, E[2]) in coordinates (c1 bits, c2 bits)."""

    place: Place
    c1: LocalClass
    c2: LocalClass

    def __post_init__(self):
        if self.c1.place != self.place or self.c2.place != self.place:
            raise ValueError("components must live at the stated place")

    def __mul__(self, other: "LocalDescentClass") -> "LocalDescentClass":
        if other.place != self.place:
            raise ValueError("place mismatch")
        return LocalDescentClass(self.place, self.c1 * other.c1, self.c2 * other.c2)

    def is_one(self) -> bool:
        return self.c1.is_one() and self.c2.is_one()

    @property
    def dim(self) -> int:
        return 2 * self.place.local_dim

    def to_vec(self) -> int:
        return linalg.vec_of_bits(self.c1.bits + self.c2.bits)

    @staticmethod
    def from_vec(v: Place, vec: int) -> "LocalDescentClass":
        k = v.local_dim
        bits = linalg.bits_of_vec(vec, 2 * k)
        return LocalDescentClass(v, LocalClass(v, bits[:k]), LocalClass(v, bits[k:]))

    @staticmethod
    def one(v: Place) -> "LocalDescentClass":
        return LocalDescentClass(v, trivial_class(v), trivial_class(v))


def local_tate_pairing(x: LocalDescentClass, y: LocalDescentClass) -> int:
    """<x, y>_v = H_v(x1, y2) + H_v(x2, y1) in F2."""
    if x.place != y.place:
        raise ValueError("local Tate pairing needs both classes at one place")
    return hilbert_local(x.c1, y.c2) ^ hilbert_local(x.c2, y.c1)


@dataclass(frozen=True)
class LocalSubspace:
    place: Place
    basis: Tuple[LocalDescentClass, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def ambient_dim(self) -> int:
        return 2 * self.place.local_dim

    def vectors(self) -> List[int]:
        return linalg.echelon([b.to_vec() for b in self.basis])

    def contains(self, x: LocalDescentClass) -> bool:
        if x.place != self.place:
            return False
        return linalg.in_span(x.to_vec(), self.vectors())

    def span_equal(self, other: "LocalSubspace") -> bool:
        return self.place == other.place and self.vectors() == other.vectors()

    def is_isotropic(self) -> bool:
        return all(
            local_tate_pairing(a, b) == 0 for a in self.basis for b in self.basis
        )

    def elements(self) -> List[LocalDescentClass]:
        return [
            LocalDescentClass.from_vec(self.place, v)
            for v in linalg.enumerate_span(self.vectors())
        ]


# ---------------------------------------------------------------------------
# Kummer maps


def kummer_image_of_point(E: Curve2T, d: int, pt: PointLike) -> DescentClass:
    """delta_d of a point on the twist y^2 = (x-a1 d)(x-a2 d)(x-a3 d)."""
    a1, a2, a3 = E.roots
    if pt == "O":
        return descent_class(1, 1)
    if pt == "T1":
        return descent_class((a1 - a2) * (a1 - a3), d * (a1 - a2))
    if pt == "T2":
        return descent_class(d * (a2 - a1), (a2 - a1) * (a2 - a3))
    if pt == "T3":
        return kummer_image_of_point(E, d, "T1") * kummer_image_of_point(E, d, "T2")
    x, y = Fraction(pt[0]), Fraction(pt[1])
    if not E.on_curve((x, y), d):
        raise ValueError(f"({x}, {y}) does not lie on the twist by {d}")
    r1, r2, r3 = E.twisted_roots(d)
    if y == 0:
        tag = {r1: "T1", r2: "T2", r3: "T3"}[x]
        return kummer_image_of_point(E, d, tag)
    return descent_class(x - r1, x - r2)


def twisted_torsion_image(E: Curve2T, d: int, pt: PointLike, v: Place) -> LocalDescentClass:
    """Localization of delta_{d,v} on a 2-torsion point."""
    return kummer_image_of_point(E, d, pt).localize(v)


# ---------------------------------------------------------------------------
# local images


def _local_class_of_fraction(q: Fraction, v: Place) -> LocalClass:
    """Class of a nonzero rational in Q_v*/Q_v*^2, no global factoring."""
    if q == 0:
        raise ValueError("0 has no local class")
    num, den = q.numerator, q.denominator
    if v.kind == "real":
        return LocalClass(v, (1 if q < 0 else 0,))
    p = 2 if v.kind == "two" else v.p
    val = 0
    while num % p == 0:
        num //= p
        val += 1
    while den % p == 0:
        den //= p
        val -= 1
    if v.kind == "two":
        u = num * pow(den, -1, 8) % 8
        return LocalClass(v, (val & 1, 1 if u % 4 == 3 else 0, 1 if u in (3, 5) else 0))
    u = num * pow(den, -1, p) % p
    return LocalClass(v, (val & 1, 1 if kronecker(u, p) == -1 else 0))


def _is_local_square(q: Fraction, v: Place) -> bool:
    return _local_class_of_fraction(q, v).is_one()


def _target_dim(v: Place) -> int:
    # dim E_d(Q_v)/2E_d(Q_v) = dim E[2] + val-contribution of |2|_v
    return {"real": 1, "odd": 2, "two": 3}[v.kind]


def _seed_for(key: str) -> int:
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


def _sample_local_image(E: Curve2T, d: int, v: Place, budget: int) -> LocalSubspace:
    target = _target_dim(v)
    found: List[LocalDescentClass] = []
    vecs: List[int] = []

    def push(cls: LocalDescentClass) -> None:
        vec = cls.to_vec()
        if not linalg.in_span(vec, vecs):
            found.append(cls)
            vecs[:] = linalg.echelon(vecs + [vec])

    for tag in ("T1", "T2", "T3"):
        push(twisted_torsion_image(E, d, tag, v))
        if len(found) == target:
            return LocalSubspace(v, tuple(found))

    r1, r2, r3 = E.twisted_roots(d)

    if v.kind == "real":
        lo, mid, hi = sorted((r1, r2, r3))
        for x in (Fraction(lo + mid, 2), Fraction(hi) + 1):
            fx = E.f(x, d)
            if fx > 0:
                push(LocalDescentClass(v, _local_class_of_fraction(x - r1, v),
                                       _local_class_of_fraction(x - r2, v)))
            if len(found) == target:
                return LocalSubspace(v, tuple(found))
        raise LocalImageError(f"real image of twist by {d} did not reach dim {target}")

    p = 2 if v.kind == "two" else v.p
    rng = random.Random(_seed_for(f"locimg:{E.roots}:{d}:{v.kind}:{p}"))
    shifts = (0, r1, r2, r3)
    for _ in range(budget):
        # sample x in the formal neighbourhoods of all four 2-torsion points
        # as well as generically, so every coset of 2E_d(Q_v) gets hit
        k = rng.randint(-6, 6)
        u = rng.randrange(1, p ** 6)
        if u % p == 0:
            u += 1
        sign = rng.choice((1, -1))
        x = rng.choice(shifts) + Fraction(sign * u) * Fraction(p) ** k
        fx = E.f(x, d)
        if fx == 0 or not _is_local_square(fx, v):
            continue
        push(LocalDescentClass(v, _local_class_of_fraction(x - r1, v),
                               _local_class_of_fraction(x - r2, v)))
        if len(found) == target:
            return LocalSubspace(v, tuple(found))
    raise LocalImageError(
        f"local image at {v} of twist by {d} stuck at dim {len(found)} < {target}"
    )


@lru_cache(maxsize=None)
def _local_image_cached(roots: Tuple[int, int, int], d_rep: int, v: Place,
                        budget: int) -> LocalSubspace:
    return _sample_local_image(Curve2T(*roots), d_rep, v, budget)


def _local_rep(d_class: LocalClass) -> int:
    """A small integer in the given local square class."""
    v = d_class.place
    if v.kind == "real":
        return -1 if d_class.bits[0] else 1
    if v.kind == "two":
        u = d_class.unit_mod8
        return u * (2 if d_class.bits[0] else 1)
    p = v.p
    u = 1 if d_class.bits[1] == 0 else _least_nonresidue(p)
    return u * (p if d_class.bits[0] else 1)


@lru_cache(maxsize=None)
def _least_nonresidue(p: int) -> int:
    u = 2
    while kronecker(u, p) != -1:
        u += 1
    return u


def local_image(E: Curve2T, d: int, v: Place, budget: int = 100_000) -> LocalSubspace:
    """The image S_{d,v} of the local Kummer map of the twist by d.

    At odd places of good reduction this is the unramified subspace (d a unit
    at p) or the full 2-torsion image (p | d); elsewhere the image is sampled
    until the certified dimension is reached.
    """
    if d == 0:
        raise ValueError("d must be a nonzero integer")
    good_odd = v.kind == "odd" and E.discriminant_support % v.p != 0
    if good_odd:
        dc = localize(square_class(d), v)
        if dc.bits[0] == 0:
            # unramified subspace: both components are units
            nr = LocalClass(v, (0, 1))
            one = trivial_class(v)
            return LocalSubspace(v, (
                LocalDescentClass(v, nr, one),
                LocalDescentClass(v, one, nr),
            ))
        rep = _local_rep(dc)
        sub = LocalSubspace(v, tuple(
            twisted_torsion_image(E, rep, tag, v) for tag in ("T1", "T2")
        ))
        if len(sub.vectors()) != 2:
            raise LocalImageError(f"torsion image at ramified {v} is degenerate")
        return sub
    rep = _local_rep(localize(square_class(d), v))
    return _local_image_cached(E.roots, rep, v, budget)


def local_image_by_class(E: Curve2T, d_class: LocalClass,
                         budget: int = 100_000) -> LocalSubspace:
    """S_{b_v, v} for a local twisting class b_v."""
    return local_image(E, _local_rep(d_class), d_class.place, budget)


# ---------------------------------------------------------------------------
# Galois action on the 4-torsion


@dataclass(frozen=True)
class GammaElement:
    """Endomorphism of E[2] in the basis (P1, P2); rows[i][j] = coord i of im(P_j)."""

    rows: Tuple[Tuple[int, int], Tuple[int, int]]

    def __add__(self, other: "GammaElement") -> "GammaElement":
        return GammaElement(tuple(
            tuple(a ^ b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)
        ))

    def __matmul__(self, other: "GammaElement") -> "GammaElement":
        a, b = self.rows, other.rows
        return GammaElement(tuple(
            tuple((a[i][0] & b[0][j]) ^ (a[i][1] & b[1][j]) for j in range(2))
            for i in range(2)
        ))

    def apply(self, vec: Tuple[int, int]) -> Tuple[int, int]:
        return (
            (self.rows[0][0] & vec[0]) ^ (self.rows[0][1] & vec[1]),
            (self.rows[1][0] & vec[0]) ^ (self.rows[1][1] & vec[1]),
        )

    def is_zero(self) -> bool:
        return self.rows == ((0, 0), (0, 0))

    @staticmethod
    def zero() -> "GammaElement":
        return GammaElement(((0, 0), (0, 0)))

    @staticmethod
    def identity() -> "GammaElement":
        return GammaElement(((1, 0), (0, 1)))

    def trace(self) -> int:
        return self.rows[0][0] ^ self.rows[1][1]


def weil_e(x: Tuple[int, int], y: Tuple[int, int]) -> int:
    """Weil pairing on E[2] in coordinates over (P1, P2)."""
    return (x[0] & y[1]) ^ (x[1] & y[0])


def _char_bit(c: SquareClass, m: int) -> int:
    """psi_c evaluated on the Artin symbol of m (odd positive squarefree)."""
    return 1 if kronecker(c.value, m) == -1 else 0


def _gamma_from_bits(bit) -> GammaElement:
    """Columns of gamma from a bit functional on square classes.

    For delta(P_j) = (c1, c2) the image of P_j is the torsion point z with
    e(z, P1) = bit(c1) and e(z, P2) = bit(c2), i.e. z = (bit(c2), bit(c1)).
    """
    cols = []
    for c1, c2 in bit:
        cols.append((c2, c1))
    return GammaElement(((cols[0][0], cols[1][0]), (cols[0][1], cols[1][1])))


def torsion_descent_classes(E: Curve2T) -> Tuple[DescentClass, DescentClass]:
    return (kummer_image_of_point(E, 1, "T1"), kummer_image_of_point(E, 1, "T2"))


def gamma_at(E: Curve2T, m: int) -> GammaElement:
    """gamma(sigma_m) for a squarefree positive m coprime to the bad primes."""
    if m <= 0:
        raise ValueError("m must be positive")
    from math import gcd

    if gcd(m, E.discriminant_support) != 1:
        raise ValueError(f"m = {m} is not coprime to the bad primes")
    if any(e > 1 for e in factorize(m).values()):
        raise ValueError(f"m = {m} is not squarefree")
    d1, d2 = torsion_descent_classes(E)
    bits = [(_char_bit(dc.c1, m), _char_bit(dc.c2, m)) for dc in (d1, d2)]
    return _gamma_from_bits(bits)


# ---------------------------------------------------------------------------
# the group Gamma and the largeness condition


LINES = ((1, 0), (0, 1), (1, 1))


def _span_vectors(classes: Iterable[SquareClass]) -> Tuple[Tuple[int, ...], List[int]]:
    """Coordinates (sign, one bit per support prime) for a set of square classes."""
    primes = sorted({p for c in classes for p in c.primes})
    vecs = []
    for c in classes:
        bits = [1 if c.sign < 0 else 0] + [1 if p in c.primes else 0 for p in primes]
        vecs.append(linalg.vec_of_bits(bits))
    return tuple(primes), vecs


def gamma_group(E: Curve2T, L_gens: Sequence[SquareClass]) -> List[GammaElement]:
    """Image of the Galois group of L(E[4])/L inside End(E[2]).

    Enumerated exactly over characters of the multiquadratic field generated by
    the 4-torsion field and L, restricted to those fixing L.
    """
    a1, a2, a3 = E.roots
    four_tors = [square_class(a1 - a2), square_class(a1 - a3),
                 square_class(a2 - a3), square_class(-1)]
    d1, d2 = torsion_descent_classes(E)
    comps = [d1.c1, d1.c2, d2.c1, d2.c2]
    all_cls = four_tors + list(L_gens) + comps
    _, vecs = _span_vectors(all_cls)
    n_four = len(four_tors)
    n_L = len(L_gens)
    basis = linalg.echelon(vecs[: n_four + n_L])
    dim = len(basis)

    def coords(vec: int) -> int:
        # coefficient pattern of vec in the reduced basis
        out = 0
        for i, b in enumerate(basis):
            if vec & (b & -b):
                vec ^= b
                out |= 1 << i
        if vec:
            raise ValueError("class outside the enumerated field")
        return out

    comp_coords = [coords(v) for v in vecs[n_four + n_L:]]
    lgen_coords = [coords(v) for v in vecs[n_four: n_four + n_L]]
    out = set()
    for chi in range(1 << dim):
        if any(linalg.parity(chi & lc) for lc in lgen_coords):
            continue
        bits = [linalg.parity(chi & c) for c in comp_coords]
        out.add(_gamma_from_bits([(bits[0], bits[1]), (bits[2], bits[3])]))
    return sorted(out, key=lambda g: g.rows)


def endplus_elements() -> List[GammaElement]:
    """The self-adjoint endomorphisms of E[2] (matrices with equal diagonal)."""
    out = []
    for a in range(2):
        for b in range(2):
            for c in range(2):
                out.append(GammaElement(((a, b), (c, a))))
    return out


def transvection(x: Tuple[int, int]) -> GammaElement:
    """phi_x(y) = e(y, x) x."""
    rows = [[0, 0], [0, 0]]
    for j, basis_vec in enumerate(((1, 0), (0, 1))):
        img = tuple(bi & weil_e(basis_vec, x) for bi in x)
        rows[0][j], rows[1][j] = img
    return GammaElement((tuple(rows[0]), tuple(rows[1])))


@dataclass(frozen=True)
class ConditionReport:
    satisfied: bool
    invariant_line: Optional[Tuple[int, int]] = None
    extra_endo: Optional[GammaElement] = None

    def __bool__(self):
        return self.satisfied


def condition_for_gamma_set(gammas: Sequence[GammaElement]) -> ConditionReport:
    """Simplicity of E[2] plus scalar centralizer, for an explicit set."""
    for line in LINES:
        if all(g.apply(line) in ((0, 0), line) for g in gammas):
            return ConditionReport(False, invariant_line=line)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for dd in range(2):
                    m = GammaElement(((a, b), (c, dd)))
                    if m.is_zero() or m == GammaElement.identity():
                        continue
                    if all((m @ g) == (g @ m) for g in gammas):
                        return ConditionReport(False, extra_endo=m)
    return ConditionReport(True)


def check_condition_gamma(E: Curve2T, L_gens: Sequence[SquareClass]) -> ConditionReport:
    """No Gamma-invariant subspaces of E[2]; centralizer of Gamma is F2."""
    return condition_for_gamma_set(gamma_group(E, L_gens))


def check_no_cyclic_4_isogeny_proxy(E: Curve2T, P) -> str:
    """Linear-disjointness proxy: compare the 4-torsion field with Q(P/2).

    Returns 'ok', 'fails-disjointness', or 'degenerate' (P already halved
    rationally, so the associated field is Q).
    """
    x = Fraction(P[0]) if not isinstance(P, str) else None
    if x is None:
        raise ValueError("P must be an affine point with known x-coordinate")
    a1, a2, a3 = E.roots
    up = [square_class(x - a1), square_class(x - a2)]
    if all(c.is_one() for c in up):
        return "degenerate"
    four = [square_class(a1 - a2), square_class(a1 - a3),
            square_class(a2 - a3), square_class(-1)]
    _, vecs = _span_vectors(four + up)
    n = len(four)
    inter = linalg.intersect(vecs[:n], vecs[n:], max(v.bit_length() for v in vecs) + 1)
    return "ok" if not inter else "fails-disjointness"


def check_strict_two_structure(a: Sequence[int], M: Sequence[int]) -> bool:
    """Valuation pattern certifying a strict 2-structure for y^2 = prod(x - a_i).

    Needs ord_{p_i}(a_i - a_last) = 1 and ord_{p_i}(a_j - a_j') = 0 for every
    other pair, for each odd prime p_i of M (|M| = len(a) - 1).
    """
    n = len(a)
    if len(set(a)) != n:
        raise ValueError("entries of a must be distinct")
    if not 1 <= len(M) <= n - 1:
        raise ValueError("M must pair off with the first len(M) roots")
    for p in M:
        if p == 2 or not is_prime(p):
            raise ValueError(f"{p} is not an odd prime")

    def ord_p(val: int, p: int) -> int:
        if val == 0:
            return 10 ** 9
        e = 0
        while val % p == 0:
            val //= p
            e += 1
        return e

    last = n - 1
    for i, p in enumerate(M):
        for j in range(n):
            for jp in range(j + 1, n):
                want = 1 if {j, jp} == {i, last} else 0
                if ord_p(a[j] - a[jp], p) != want:
                    return False
    return True
