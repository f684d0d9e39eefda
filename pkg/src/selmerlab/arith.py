"""Exact arithmetic over Q and its completions.

Square classes (elements of Q*/Q*^2) are kept in factored form, so kronecker
symbols, localizations and Hilbert symbols are all computed without ever
factoring large integers mid-pipeline.  Hilbert symbols are F2-valued (0/1);
the multiplicative form is (-1)**bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np


# ---------------------------------------------------------------------------
# primes and factoring


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid far beyond 64 bits of input."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.array([], dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p:: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def factorize(n: int) -> Dict[int, int]:
    """Prime factorization of |n| by trial division (desk-scale inputs)."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: Dict[int, int] = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 7
    wheel = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while f * f <= n:
        if n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        else:
            f += wheel[i]
            i = (i + 1) % 8
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# ---------------------------------------------------------------------------
# Kronecker symbol


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n) in {-1, 0, 1}.  Rejects (0, 0)."""
    if a == 0 and n == 0:
        raise ValueError("kronecker(0, 0) is undefined")
    if n == 0:
        return 1 if a in (1, -1) else 0
    acc = 1
    if n < 0:
        n = -n
        if a < 0:
            acc = -acc
    # strip factors of 2 from n
    t = 0
    while n % 2 == 0:
        n //= 2
        t += 1
    if t:
        if a % 2 == 0:
            return 0
        if t % 2 == 1 and a % 8 in (3, 5):
            acc = -acc
    # now n odd positive: Jacobi
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                acc = -acc
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            acc = -acc
        a %= n
    return acc if n == 1 else 0


# ---------------------------------------------------------------------------
# square classes


def _squarefree_split(n: int) -> Tuple[int, Tuple[int, ...]]:
    sign = -1 if n < 0 else 1
    fac = factorize(n)
    primes = tuple(sorted(p for p, e in fac.items() if e % 2 == 1))
    return sign, primes


@dataclass(frozen=True)
class SquareClass:
    """Class in Q*/Q*^2, stored as sign and the sorted tuple of primes dividing
    the squarefree representative."""

    sign: int
    primes: Tuple[int, ...]

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +-1")

    @staticmethod
    def from_int(n: Union[int, Fraction]) -> "SquareClass":
        if isinstance(n, Fraction):
            n = n.numerator * n.denominator
        if n == 0:
            raise ValueError("0 has no square class")
        sign, primes = _squarefree_split(n)
        return SquareClass(sign, primes)

    @staticmethod
    def one() -> "SquareClass":
        return SquareClass(1, ())

    @property
    def value(self) -> int:
        v = self.sign
        for p in self.primes:
            v *= p
        return v

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        ps = set(self.primes) ^ set(other.primes)
        return SquareClass(self.sign * other.sign, tuple(sorted(ps)))

    def is_one(self) -> bool:
        return self.sign == 1 and not self.primes

    def __repr__(self):
        return f"SquareClass({self.value})"


def square_class(n: Union[int, Fraction, SquareClass]) -> SquareClass:
    if isinstance(n, SquareClass):
        return n
    return SquareClass.from_int(n)


# ---------------------------------------------------------------------------
# places and local classes


@dataclass(frozen=True, order=True)
class Place:
    kind: str  # "real", "two", "odd"
    p: int

    def __post_init__(self):
        if self.kind == "odd":
            if self.p == 2 or not is_prime(self.p):
                raise ValueError(f"{self.p} is not an odd prime")
        elif self.kind not in ("real", "two"):
            raise ValueError(f"bad place kind {self.kind!r}")

    @property
    def local_dim(self) -> int:
        """dim_F2 of Q_v*/Q_v*^2."""
        return {"real": 1, "odd": 2, "two": 3}[self.kind]

    def __repr__(self):
        return {"real": "oo", "two": "2"}.get(self.kind, str(self.p))


REAL = Place("real", 0)
TWO = Place("two", 2)


def odd_place(p: int) -> Place:
    return Place("odd", p)


@dataclass(frozen=True)
class LocalClass:
    """Element of Q_v*/Q_v*^2 in linear F2 coordinates.

    real: (sign,); odd p: (val parity, nonresidue bit);
    p=2: (val parity, eps, omega) where eps = u==3 mod 4, omega = u in {3,5} mod 8.
    """

    place: Place
    bits: Tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != self.place.local_dim:
            raise ValueError("wrong number of coordinate bits")

    def __mul__(self, other: "LocalClass") -> "LocalClass":
        if other.place != self.place:
            raise ValueError("place mismatch")
        return LocalClass(self.place, tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    def is_one(self) -> bool:
        return not any(self.bits)

    @property
    def unit_mod8(self) -> int:
        """For the place 2: the unit part mod 8."""
        if self.place.kind != "two":
            raise ValueError("unit_mod8 only makes sense at 2")
        _, eps, omega = self.bits
        return {(0, 0): 1, (1, 1): 3, (0, 1): 5, (1, 0): 7}[(eps, omega)]


def trivial_class(v: Place) -> LocalClass:
    return LocalClass(v, (0,) * v.local_dim)


def localize(c: Union[SquareClass, int, Fraction], v: Place) -> LocalClass:
    """Image of a global square class in Q_v*/Q_v*^2."""
    c = square_class(c)
    if v.kind == "real":
        return LocalClass(v, (1 if c.sign < 0 else 0,))
    if v.kind == "two":
        val = 1 if 2 in c.primes else 0
        u = c.sign
        for p in c.primes:
            if p != 2:
                u = u * p % 8
        u %= 8
        eps = 1 if u % 4 == 3 else 0
        omega = 1 if u in (3, 5) else 0
        return LocalClass(v, (val, eps, omega))
    p = v.p
    val = 1 if p in c.primes else 0
    u = c.sign
    for q in c.primes:
        if q != p:
            u = u * q % p
    nonres = 1 if kronecker(u, p) == -1 else 0
    return LocalClass(v, (val, nonres))


def hilbert_local(x: LocalClass, y: LocalClass) -> int:
    """Additive Hilbert symbol H_v on local classes (bilinear, symmetric)."""
    if x.place != y.place:
        raise ValueError("place mismatch")
    v = x.place
    if v.kind == "real":
        return x.bits[0] & y.bits[0]
    if v.kind == "two":
        a_val, a_eps, a_om = x.bits
        b_val, b_eps, b_om = y.bits
        return (a_eps & b_eps) ^ (a_val & b_om) ^ (b_val & a_om)
    a_val, a_non = x.bits
    b_val, b_non = y.bits
    h = (a_val & b_non) ^ (b_val & a_non)
    if v.p % 4 == 3:
        h ^= a_val & b_val
    return h


def hilbert(a, b, v: Place) -> int:
    """Additive Hilbert symbol of two global square classes at v."""
    return hilbert_local(localize(a, v), localize(b, v))


def hilbert_product_check(a, b) -> int:
    """Sum of H_v(a, b) over all places where it can be nonzero; always 0."""
    a, b = square_class(a), square_class(b)
    places = {REAL, TWO}
    for p in itertools.chain(a.primes, b.primes):
        if p != 2:
            places.add(odd_place(p))
    return sum(hilbert(a, b, v) for v in places) % 2


# ---------------------------------------------------------------------------
# Sigma sets and square-class groups


@dataclass(frozen=True)
class SigmaSet:
    """Finite set of places containing the real place and 2."""

    odd_primes: Tuple[int, ...]

    def __post_init__(self):
        ps = self.odd_primes
        if list(ps) != sorted(set(ps)):
            raise ValueError("odd primes must be sorted and distinct")
        for p in ps:
            if p == 2 or not is_prime(p):
                raise ValueError(f"{p} is not an odd prime")

    @staticmethod
    def of(*odd_primes: int) -> "SigmaSet":
        return SigmaSet(tuple(sorted(set(odd_primes))))

    @property
    def places(self) -> Tuple[Place, ...]:
        return (REAL, TWO) + tuple(odd_place(p) for p in self.odd_primes)

    @property
    def finite_primes(self) -> Tuple[int, ...]:
        return (2,) + self.odd_primes

    @property
    def N(self) -> int:
        n = 1
        for p in self.finite_primes:
            n *= p
        return n

    def __contains__(self, v: Place) -> bool:
        return v in self.places

    def __repr__(self):
        return "Sigma{oo,2" + "".join(f",{p}" for p in self.odd_primes) + "}"


def sq_group(sigma: SigmaSet, extra: Sequence[int] = ()) -> List[SquareClass]:
    """F2 basis of the square classes unramified outside sigma and `extra`."""
    for p in extra:
        if p in sigma.finite_primes:
            raise ValueError(f"extra prime {p} already in Sigma")
        if not is_prime(p) or p == 2:
            raise ValueError(f"extra entries must be odd primes, got {p}")
    basis = [SquareClass(-1, ())]
    basis += [SquareClass(1, (p,)) for p in sigma.finite_primes]
    basis += [SquareClass(1, (p,)) for p in sorted(extra)]
    return basis


# ---------------------------------------------------------------------------
# squarefree enumeration


def squarefree_sieve(X: int) -> Iterator[Tuple[int, Tuple[int, ...]]]:
    """Yield (n, prime factors) for every squarefree 1 <= n <= X, ascending."""
    if X < 1:
        raise ValueError("X must be >= 1")
    spf = np.zeros(X + 1, dtype=np.int64)
    for p in primes_up_to(X):
        sel = spf[p::p]
        sel[sel == 0] = p
        spf[p::p] = sel
    yield 1, ()
    for n in range(2, X + 1):
        m = n
        fac: List[int] = []
        squarefree = True
        while m > 1:
            p = int(spf[m])
            m //= p
            if m % p == 0:
                squarefree = False
                break
            fac.append(p)
        if squarefree:
            yield n, tuple(fac)


def squarefree_mask(X: int) -> np.ndarray:
    """Boolean array of length X+1, True at squarefree indices (0 excluded)."""
    mask = np.ones(X + 1, dtype=bool)
    mask[0] = False
    for p in primes_up_to(isqrt(X)):
        mask[p * p:: p * p] = False
    return mask


def squarefree_count_mobius(X: int) -> int:
    """Independent count of squarefree n <= X via the Moebius sum."""
    r = isqrt(X)
    mu = np.ones(r + 1, dtype=np.int64)
    prime = np.ones(r + 1, dtype=bool)
    prime[:2] = False
    for p in range(2, r + 1):
        if prime[p]:
            prime[2 * p:: p] = False
            mu[p::p] *= -1
            sq = p * p
            if sq <= r:
                mu[sq::sq] = 0
    return int(sum(int(mu[k]) * (X // (k * k)) for k in range(1, r + 1)))
