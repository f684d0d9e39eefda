"""Frobenian twist families: membership, sieving, censuses, asymptotic probes.

A family is cut out by a local square-class tuple b at Sigma together with a
multiquadratic splitting condition on the good prime divisors.  Sieving is
done with numpy masks (squarefree + splitting), after which the surviving
candidates are filtered by their local classes; censuses then run the kernel
route of the Selmer machinery member by member.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .arith import (
    SigmaSet,
    SquareClass,
    kronecker,
    primes_up_to,
    square_class,
    squarefree_mask,
)
from .curve import Curve2T, DescentClass, check_condition_gamma
from .selmer import BClass, SelmerGroup, good_part, parity_kappa, selmer_kernel


@dataclass(frozen=True)
class FamilySpec:
    curve: Curve2T
    sigma: SigmaSet
    L_gens: Tuple[SquareClass, ...]
    b: BClass

    def __post_init__(self):
        for p in self.curve.bad_primes:
            if p != 2 and p not in self.sigma.odd_primes:
                raise ValueError(f"Sigma must contain the bad prime {p}")
        for g in self.L_gens:
            for p in g.primes:
                if p != 2 and p not in self.sigma.odd_primes:
                    raise ValueError(f"Sigma must contain the ramified prime {p}")
        if self.b.sigma != self.sigma:
            raise ValueError("b must be a class tuple over the same Sigma")

    @property
    def n_L(self) -> int:
        from . import linalg

        primes = sorted({p for g in self.L_gens for p in g.primes})
        vecs = []
        for g in self.L_gens:
            v = 1 if g.sign < 0 else 0
            for i, p in enumerate(primes):
                if p in g.primes:
                    v |= 1 << (i + 1)
            vecs.append(v)
        return 1 << linalg.rank(vecs)

    def describe(self) -> Dict[str, object]:
        return {
            "curve": list(self.curve.roots),
            "sigma": list(self.sigma.finite_primes),
            "L_gens": [g.value for g in self.L_gens],
            "b": repr(self.b),
        }


def family_spec(curve: Curve2T, L_gens: Sequence = (), b_rep: int = 1,
                extra_sigma: Sequence[int] = ()) -> FamilySpec:
    """Convenience constructor: Sigma from the curve plus L's ramification."""
    gens = tuple(square_class(g) for g in L_gens)
    ram = {p for g in gens for p in g.primes if p != 2}
    sigma = curve.sigma(sorted(ram | set(extra_sigma)))
    return FamilySpec(curve, sigma, gens, BClass.from_int(b_rep, sigma))


def is_member(spec: FamilySpec, d: int,
              factors: Optional[Sequence[int]] = None) -> bool:
    """d lies in the class b at Sigma and its good primes split in L."""
    if d == 0:
        return False
    if factors is None:
        from .arith import factorize

        fac = factorize(d)
        if any(e > 1 for e in fac.values()):
            return False
        factors = sorted(fac)
    if not spec.b.matches(d):
        return False
    for p in factors:
        if p in spec.sigma.finite_primes:
            continue
        for g in spec.L_gens:
            if kronecker(g.value, p) != 1:
                return False
    return True


def _split_ok_mask(spec: FamilySpec, X: int) -> np.ndarray:
    """Mask of 1..X: squarefree and all primes outside Sigma split in L."""
    mask = squarefree_mask(X)
    if spec.L_gens:
        for p in primes_up_to(X):
            p = int(p)
            if p in spec.sigma.finite_primes:
                continue
            if any(kronecker(g.value, p) != 1 for g in spec.L_gens):
                mask[p::p] = False
    return mask


def sieve_family(spec: FamilySpec, X: int) -> List[Tuple[int, Tuple[int, ...]]]:
    """Members d with |d| < X, ascending |d|, with their factorizations.

    The local-class conditions at Sigma are applied as vectorized residue
    tests (they mirror `localize` verbatim); the result is identical to
    filtering with is_member, which the unit tests cross-check.
    """
    if X < 2:
        raise ValueError("X must be >= 2")
    sign = -1 if spec.b.at(spec.sigma.places[0]).bits[0] else 1
    mask = _split_ok_mask(spec, X - 1)
    idx = np.nonzero(mask)[0].astype(np.int64)
    keep = np.ones(len(idx), dtype=bool)
    for v, cls in zip(spec.sigma.places, spec.b.classes):
        if v.kind == "real":
            continue
        if v.kind == "two":
            val = (idx % 2 == 0)
            unit = np.where(val, idx // 2, idx)
            unit8 = (sign * unit) % 8
            want_eps, want_omega = cls.bits[1], cls.bits[2]
            eps = ((unit8 % 4) == 3)
            omega = (unit8 == 3) | (unit8 == 5)
            keep &= (val == bool(cls.bits[0])) & (eps == bool(want_eps)) \
                & (omega == bool(want_omega))
        else:
            p = v.p
            table = np.zeros(p, dtype=bool)
            for u in range(1, p):
                table[u] = kronecker(u, p) == -1
            val = (idx % p == 0)
            unit = np.where(val, idx // p, idx)
            nonres = table[(sign * unit) % p]
            keep &= (val == bool(cls.bits[0])) & (nonres == bool(cls.bits[1]))
    out = []
    ps = [int(p) for p in primes_up_to(math.isqrt(X) + 1)]
    for n in idx[keep]:
        n = int(n)
        m, fac = n, []
        for p in ps:
            if p * p > m:
                break
            if m % p == 0:
                fac.append(p)
                m //= p
        if m > 1:
            fac.append(m)
        out.append((sign * n, tuple(fac)))
    return out


def expected_density(spec: FamilySpec) -> Optional[float]:
    """Exact member density for congruence-only families (n_L = 1)."""
    if spec.n_L != 1:
        return None
    dens = 6.0 / math.pi ** 2
    for v, c in zip(spec.sigma.places, spec.b.classes):
        if v.kind == "real":
            continue
        if v.kind == "two":
            local = (1.0 / 8) if c.bits[0] == 0 else (1.0 / 16)
            dens *= local / (1 - 0.25)
        else:
            p = v.p
            local = (1 - 1 / p) / 2 * (1.0 if c.bits[0] == 0 else 1 / p)
            dens *= local / (1 - p ** -2)
    return dens


def asymptotic_probe(spec: FamilySpec, X_list: Sequence[int]) -> List[Dict[str, float]]:
    """Counts against X (log X)^{1/n_L - 1}; the ratio should stabilise."""
    if list(X_list) != sorted(X_list):
        raise ValueError("X_list must be ascending")
    exponent = 1.0 / spec.n_L - 1.0
    out = []
    for X in X_list:
        count = len(sieve_family(spec, X))
        norm = X * math.log(X) ** exponent if X > 1 else float("nan")
        out.append({
            "X": X,
            "count": count,
            "ratio": count / norm if count else 0.0,
            "expected_density": expected_density(spec),
        })
    return out


# ---------------------------------------------------------------------------
# census


@dataclass(frozen=True)
class CensusRow:
    d: int
    dim_sel: int
    parity: int
    in_family: bool
    tracked: Tuple[bool, ...]


def wilson_interval(k: int, n: int, z: float = 1.96) -> Tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    phat = k / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def _census_row(args) -> CensusRow:
    spec, d, fac, tracked = args
    grp = selmer_kernel(spec.curve, d, spec.sigma)
    flags = tuple(grp.contains(t) for t in tracked)
    return CensusRow(d, grp.dim, grp.dim & 1, True, flags)


@dataclass
class CensusResult:
    spec: FamilySpec
    X: int
    rows: List[CensusRow]
    n_b: int
    m_b: int
    histogram: Dict[int, int]
    tracked_names: Tuple[str, ...]

    @property
    def total(self) -> int:
        return len(self.rows)

    def r_histogram(self) -> Dict[int, int]:
        """Counts keyed by r where dim = 2 + n_b + m_b + 2r."""
        base = 2 + self.n_b + self.m_b
        out: Dict[int, int] = {}
        for dim, cnt in sorted(self.histogram.items()):
            r2 = dim - base
            if r2 < 0 or r2 % 2:
                raise AssertionError(f"dimension {dim} incompatible with base {base}")
            out[r2 // 2] = cnt
        return out

    def alpha_comparison(self) -> List[Dict[str, float]]:
        from .dist import alpha_float

        n = self.total
        out = []
        for r, cnt in sorted(self.r_histogram().items()):
            lo, hi = wilson_interval(cnt, n)
            out.append({
                "r": r,
                "count": cnt,
                "mass": cnt / n if n else 0.0,
                "wilson_low": lo,
                "wilson_high": hi,
                "alpha": alpha_float(self.m_b + 2 * r),
            })
        return out


def census(spec: FamilySpec, X: int, tracked: Sequence[DescentClass] = (),
           workers: int = 1, check_condition: bool = True) -> CensusResult:
    """dim Sel_2 for every member with |d| < X, plus tracked-class membership.

    The parity law is asserted on every row (any violation raises), and the
    histogram is keyed by the excess rank r.
    """
    import warnings

    if check_condition:
        rep = check_condition_gamma(spec.curve, list(spec.L_gens))
        if not rep.satisfied:
            warnings.warn("curve fails the 4-torsion largeness condition; "
                          "the limiting masses need not apply", stacklevel=2)
    members = sieve_family(spec, X)
    from .selmer import systematic_subspace

    n_b = systematic_subspace(spec.curve, spec.sigma, spec.b, spec.L_gens).n_b
    predicted = parity_kappa(spec.curve, spec.sigma, spec.b)
    jobs = [(spec, d, fac, tuple(tracked)) for d, fac in members]
    if workers > 1 and len(jobs) > 64:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_census_row, jobs, chunksize=64))
    else:
        rows = [_census_row(j) for j in jobs]
    rows.sort(key=lambda r: (abs(r.d), -r.d))
    hist: Dict[int, int] = {}
    for row in rows:
        if row.parity != predicted:
            raise AssertionError(
                f"parity law violated at d = {row.d}: dim {row.dim_sel}, "
                f"predicted parity {predicted}"
            )
        hist[row.dim_sel] = hist.get(row.dim_sel, 0) + 1
    m_b = ((min(hist) - n_b) & 1) if hist else (predicted ^ (n_b & 1))
    result = CensusResult(spec, X, rows, n_b, m_b, hist,
                          tuple(f"tracked{i}" for i in range(len(tracked))))
    return result


def census_tsv(result: CensusResult, tracked_names: Optional[Sequence[str]] = None) -> str:
    names = list(tracked_names or result.tracked_names)
    header = "# d\tdim_sel\tparity" + "".join(f"\ttracked:{n}" for n in names)
    lines = [header]
    for row in result.rows:
        cells = [str(row.d), str(row.dim_sel), str(row.parity)]
        cells += ["1" if f else "0" for f in row.tracked]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def histogram_json(result: CensusResult) -> str:
    payload = {
        "family": result.spec.describe(),
        "X": result.X,
        "total": result.total,
        "n_b": result.n_b,
        "m_b": result.m_b,
        "histogram": {str(r): c for r, c in sorted(result.r_histogram().items())},
        "alpha_comparison": result.alpha_comparison(),
    }
    return json.dumps(payload, sort_keys=True, indent=2)
