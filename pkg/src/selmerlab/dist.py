"""Exact evaluation of the limiting distributions and identities.

The mass function alpha lives on one parity class at a time: the masses
alpha(m), alpha(m+2), ... sum to 1 for either parity m, and the r-th moment
over a parity class is prod_{j<=r} (1 + 2^j).  Values that the theory states
as rationals (the beta table, Gaussian binomials, moment identities) are
computed as exact Fractions; the infinite products carry explicit truncation
error bounds and a float shadow.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

Rational = Fraction


@dataclass(frozen=True)
class AlphaParams:
    """Truncation point J for prod_{j>=1}(1 + p^-j)^-1; error <= 2*p^-J."""

    J: int = 80

    def truncation_error(self, p: int = 2) -> float:
        return 2.0 * float(p) ** (-self.J)


DEFAULT_ALPHA = AlphaParams()


def _alpha_constant(p: int, params: AlphaParams) -> Fraction:
    c = Fraction(1)
    for j in range(1, params.J + 1):
        c /= 1 + Fraction(1, p ** j)
    return c


def alpha(r: int, p: int = 2, params: AlphaParams = DEFAULT_ALPHA) -> Fraction:
    """Mass at corank r: prod_{j>=1}(1+p^-j)^-1 * prod_{j=1}^r p/(p^j - 1)."""
    if r < 0:
        raise ValueError("r must be >= 0")
    out = _alpha_constant(p, params)
    for j in range(1, r + 1):
        out *= Fraction(p, p ** j - 1)
    return out


def alpha_float(r: int, p: int = 2) -> float:
    return float(alpha(r, p))


def alpha_parity_mass(m: int, p: int = 2, terms: int = 40) -> Fraction:
    """sum_{j >= 0} alpha(m + 2j); equals 1 for either parity m in {0, 1}."""
    return sum((alpha(m + 2 * j, p) for j in range(terms)), Fraction(0))


def gauss_binom(k: int, r: int) -> Fraction:
    """Number of k-dimensional subspaces of F_2^r."""
    if not 0 <= k <= r:
        raise ValueError("need 0 <= k <= r")
    out = Fraction(1)
    for i in range(1, k + 1):
        out *= Fraction(1 - 2 ** (r - i + 1), 1 - 2 ** i)
    return out


def hom_moment_identity(r: int) -> bool:
    """sum_k #subspaces(k, r) 2^{k(k+1)/2} == prod_{j=1}^r (1 + 2^j), exactly."""
    if r > 12:
        raise ValueError("identity checked for r <= 12 only")
    lhs = sum(gauss_binom(k, r) * 2 ** (k * (k + 1) // 2) for k in range(r + 1))
    rhs = Fraction(1)
    for j in range(1, r + 1):
        rhs *= 1 + 2 ** j
    return lhs == rhs


def alpha_moment_check(r: int, tol: float = 1e-10) -> bool:
    """The parity-class moments of alpha match the hom-moment closed form.

    For either parity m: sum_j alpha(m + 2j) 2^{(m+2j) r} == prod_{j<=r}(1+2^j),
    and the total parity mass is 1.
    """
    if r > 6:
        raise ValueError("moment check capped at r <= 6")
    rhs = Fraction(1)
    for j in range(1, r + 1):
        rhs *= 1 + 2 ** j
    for m in (0, 1):
        acc = Fraction(0)
        for j in range(60):
            acc += alpha(m + 2 * j) * Fraction(2) ** ((m + 2 * j) * r)
        if abs(float(acc - rhs)) > tol:
            return False
        if abs(float(alpha_parity_mass(m) - 1)) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# the hitting probabilities beta_n


def beta(n: int, p: int = 2) -> Fraction:
    """beta_n by the recurrence beta_1 = 1 - 1/p,
    beta_n = (p-1)/p^n * (1 - (p^{n-1}-1)/(p-1) * beta_{n-1})."""
    if n < 1:
        raise ValueError("n must be >= 1")
    b = 1 - Fraction(1, p)
    for k in range(2, n + 1):
        b = Fraction(p - 1, p ** k) * (1 - Fraction(p ** (k - 1) - 1, p - 1) * b)
    return b


def beta_closed(n: int, p: int = 2) -> Fraction:
    """Closed form obtained by unrolling the recurrence."""
    if n < 1:
        raise ValueError("n must be >= 1")
    acc = Fraction(0)
    for i in range(n):
        term = Fraction((-1) ** i) * p ** ((n - i) * (n - i - 1) // 2)
        for j in range(1, i + 1):
            term *= p ** (n - j) - 1
        acc += term
    return Fraction(p - 1, p ** (n * (n + 1) // 2)) * acc


def beta_series(n: int, p: int = 2, terms: int = 60) -> float:
    """Truncated series sum_r (p-1) alpha_p(2r+m) / (p^{n+2r+m} - 1)."""
    m = (n + 1) % 2
    acc = 0.0
    for r in range(terms):
        acc += (p - 1) * float(alpha(2 * r + m, p)) / (p ** (n + 2 * r + m) - 1)
    return acc


# ---------------------------------------------------------------------------
# negative Pell constants


@dataclass(frozen=True)
class PellConstants:
    c_pell: float
    alpha_pell: float
    pr: Callable[[int], float]


def pell_constants(J: int = 80) -> PellConstants:
    """c_pell = 1 - prod_{j>=1}(1 - 2^{1-2j}) and the mass function Pr(r)."""
    prod = Fraction(1)
    for j in range(1, J + 1):
        prod *= 1 - Fraction(1, 2 ** (2 * j - 1))
    a = float(prod)

    def pr(r: int) -> float:
        if r < 1:
            raise ValueError("r must be >= 1")
        denom = 1
        for j in range(1, r):
            denom *= 2 ** j - 1
        return a / denom

    return PellConstants(c_pell=1.0 - a, alpha_pell=a, pr=pr)


def pell_identity_checks(tol: float = 1e-12) -> Dict[str, float]:
    """Cross-checks tying the Pell constants to the alpha normalisation.

    * prod (1 - 2^{1-2j}) == prod (1 + 2^-j)^{-1}  (Euler-style identity)
    * sum_r Pr(r) == 1
    * sum_r Pr(r)/(2^r - 1) == c_pell
    """
    pc = pell_constants()
    euler_gap = abs(pc.alpha_pell - float(_alpha_constant(2, DEFAULT_ALPHA)))
    total = sum(pc.pr(r) for r in range(1, 40))
    hit = sum(pc.pr(r) / (2 ** r - 1) for r in range(1, 40))
    return {
        "euler_gap": euler_gap,
        "pr_total_gap": abs(total - 1.0),
        "hitting_sum_gap": abs(hit - pc.c_pell),
        "tolerance": tol,
    }
