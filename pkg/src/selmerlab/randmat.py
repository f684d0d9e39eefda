"""Haar-random alternating matrices over Z/p^e and their kernel statistics.

The model: alternating s x s matrices over Z_p whose first n columns vanish
mod p (the systematic constraint), truncated at precision e.  For odd s the
Z_p-kernel is a line; its reduction mod p is recovered from a full-pivot
column elimination, with an explicit certificate (one dominant elementary
divisor separated from the rest by a valuation margin) and a bottom outcome
when the precision is insufficient.  Bottom samples are retried once with
fresh higher digits, then excluded and counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except Exception:  # pragma: no cover - numba is a hard dependency in practice
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f

        return deco if not (args and callable(args[0])) else args[0]


_CERT_MARGIN = 3


@dataclass(frozen=True)
class PadicAltMatrix:
    s: int
    p: int
    e: int
    entries: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        q = self.p ** self.e
        for i in range(self.s):
            if self.entries[i][i] % q:
                raise ValueError("diagonal must vanish")
            for j in range(self.s):
                if (self.entries[i][j] + self.entries[j][i]) % q:
                    raise ValueError("matrix must be antisymmetric mod p^e")

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)


@dataclass(frozen=True)
class KernelReport:
    rank_mod_p: int
    ker_dim_mod_p: int
    y_line: Optional[Tuple[int, ...]]  # None means undetermined at precision e

    def __post_init__(self):
        pass


@njit(cache=True)
def _analyze_one(B, U, s, p, e, q):
    """Column elimination with full valuation pivoting; fills U with the
    column transform.  Returns (corank mod p, certified flag, dominant col)."""
    # valuation helper inlined: count factors of p, capped at e
    used_row = np.zeros(s, dtype=np.int64)
    diag_val = np.empty(s, dtype=np.int64)
    for t in range(s):
        best_val = e + 1
        best_r = -1
        best_c = -1
        for r in range(s):
            if used_row[r]:
                continue
            for c in range(t, s):
                x = B[r, c]
                if x == 0:
                    continue
                v = 0
                y = x
                while y % p == 0:
                    y //= p
                    v += 1
                if v < best_val:
                    best_val = v
                    best_r = r
                    best_c = c
                    if v == 0:
                        break
            if best_val == 0:
                break
        if best_r < 0:
            for tt in range(t, s):
                diag_val[tt] = e
            break
        # swap columns best_c <-> t
        if best_c != t:
            for r in range(s):
                tmp = B[r, best_c]
                B[r, best_c] = B[r, t]
                B[r, t] = tmp
                tmp = U[r, best_c]
                U[r, best_c] = U[r, t]
                U[r, t] = tmp
        used_row[best_r] = 1
        diag_val[t] = best_val
        piv = B[best_r, t]
        pu = piv
        for _ in range(best_val):
            pu //= p
        # inverse of the unit part mod q by Euclid
        a, b = pu % q, q
        x0, x1 = 1, 0
        while b:
            qq = a // b
            a, b = b, a - qq * b
            x0, x1 = x1, x0 - qq * x1
        inv = x0 % q
        for c in range(t + 1, s):
            x = B[best_r, c]
            if x == 0:
                continue
            xx = x
            for _ in range(best_val):
                xx //= p
            f = (xx * inv) % q
            if f == 0:
                continue
            for r in range(s):
                B[r, c] = (B[r, c] - f * B[r, t]) % q
                U[r, c] = (U[r, c] - f * U[r, t]) % q
    # classify
    corank = 0
    vmax = -1
    v2 = -1
    cmax = -1
    for t in range(s):
        v = diag_val[t]
        if v > 0:
            corank += 1
        if v > vmax:
            v2 = vmax
            vmax = v
            cmax = t
        elif v > v2:
            v2 = v
    cert = 1 if (vmax >= e - 1 and v2 <= e - 1 - _CERT_MARGIN) else 0
    return corank, cert, cmax


@njit(cache=True)
def _analyze_batch(batch, p, e, out_corank, out_cert, out_y):
    N, s, _ = batch.shape
    q = 1
    for _ in range(e):
        q *= p
    for idx in range(N):
        B = batch[idx].copy()
        U = np.zeros((s, s), dtype=np.int64)
        for i in range(s):
            U[i, i] = 1
        corank, cert, cmax = _analyze_one(B, U, s, p, e, q)
        out_corank[idx] = corank
        out_cert[idx] = cert
        if cert:
            # primitive kernel vector mod p, normalised to lead with 1
            lead = -1
            for i in range(s):
                out_y[idx, i] = U[i, cmax] % p
                if lead < 0 and out_y[idx, i] != 0:
                    lead = i
            if lead >= 0:
                linv = 1
                a, b = out_y[idx, lead], p
                x0, x1 = 1, 0
                while b:
                    qq = a // b
                    a, b = b, a - qq * b
                    x0, x1 = x1, x0 - qq * x1
                linv = x0 % p
                for i in range(s):
                    out_y[idx, i] = (out_y[idx, i] * linv) % p
            else:
                out_cert[idx] = 0


def _max_precision(p: int) -> int:
    # q**2 must stay below 2**63 for the numba int64 arithmetic
    e = 1
    while p ** (2 * (e + 1)) < 2 ** 62:
        e += 1
    return e


def default_precision(p: int) -> int:
    return 20 if p == 2 else 12


def sample_alt_batch(N: int, s: int, p: int, e: int, constraint_n: int,
                     rng: np.random.Generator) -> np.ndarray:
    """N alternating matrices mod p^e, first constraint_n columns 0 mod p."""
    if not 0 <= constraint_n < s:
        raise ValueError("need 0 <= constraint_n < s")
    q = p ** e
    M = np.zeros((N, s, s), dtype=np.int64)
    for i in range(s):
        for j in range(i + 1, s):
            if i < constraint_n:
                vals = p * rng.integers(0, q // p, size=N, dtype=np.int64)
            else:
                vals = rng.integers(0, q, size=N, dtype=np.int64)
            M[:, i, j] = vals
            M[:, j, i] = (q - vals) % q
    return M


def lift_batch(M: np.ndarray, p: int, e_old: int, e_new: int, constraint_n: int,
               rng: np.random.Generator) -> np.ndarray:
    """Fresh uniform higher digits on top of an existing truncation."""
    N, s, _ = M.shape
    top = sample_alt_batch(N, s, p, e_new - e_old, constraint_n, rng)
    return M + p ** e_old * top


def sample_alt(s: int, p: int, e: int, constraint_n: int,
               rng: np.random.Generator) -> PadicAltMatrix:
    arr = sample_alt_batch(1, s, p, e, constraint_n, rng)[0]
    return PadicAltMatrix(s, p, e, tuple(tuple(int(x) for x in row) for row in arr))


def kernel_report(M: PadicAltMatrix) -> KernelReport:
    batch = M.to_array()[None, :, :]
    corank = np.zeros(1, dtype=np.int64)
    cert = np.zeros(1, dtype=np.int64)
    y = np.zeros((1, M.s), dtype=np.int64)
    _analyze_batch(batch, M.p, M.e, corank, cert, y)
    ker = int(corank[0])
    line = tuple(int(v) for v in y[0]) if cert[0] else None
    return KernelReport(M.s - ker, ker, line)


def _analyze_with_retry(batch: np.ndarray, p: int, e: int, constraint_n: int,
                        rng: np.random.Generator):
    """Returns (corank array, line ids array with -1 for undetermined, stats)."""
    N, s, _ = batch.shape
    corank = np.zeros(N, dtype=np.int64)
    cert = np.zeros(N, dtype=np.int64)
    y = np.zeros((N, s), dtype=np.int64)
    _analyze_batch(batch, p, e, corank, cert, y)
    stats = {"bottom_first_pass": int(np.sum(cert == 0)), "bottom_final": 0,
             "retried_at": None}
    bad = np.nonzero(cert == 0)[0]
    if len(bad):
        e2 = min(2 * e, _max_precision(p))
        stats["retried_at"] = e2
        if e2 > e:
            lifted = lift_batch(batch[bad], p, e, e2, constraint_n, rng)
            c2 = np.zeros(len(bad), dtype=np.int64)
            cert2 = np.zeros(len(bad), dtype=np.int64)
            y2 = np.zeros((len(bad), s), dtype=np.int64)
            _analyze_batch(lifted, p, e2, c2, cert2, y2)
            corank[bad] = c2
            cert[bad] = cert2
            y[bad] = y2
    stats["bottom_final"] = int(np.sum(cert == 0))
    # encode certified lines as integers base p, -1 otherwise
    ids = np.full(N, -1, dtype=np.int64)
    ok = np.nonzero(cert == 1)[0]
    if len(ok):
        enc = np.zeros(len(ok), dtype=np.int64)
        for i in range(s):
            enc = enc * p + y[ok, s - 1 - i]
        ids[ok] = enc
    return corank, ids, stats


def _line_id(vec: Sequence[int], p: int) -> int:
    v = list(vec)
    lead = next((x for x in v if x % p), None)
    if lead is None:
        raise ValueError("zero vector spans no line")
    inv = pow(lead, -1, p)
    v = [x * inv % p for x in v]
    enc = 0
    for x in reversed(v):
        enc = enc * p + x
    return enc


def gamma_n_exact(n: int, s: int, p: int = 2) -> Fraction:
    """Probability that the kernel line hits the fixed line, at finite s."""
    if s <= n or s % 2 == 0:
        raise ValueError("need odd s > n")
    g = Fraction((p - 1) * p ** (s - 1), p ** s - 1)
    for k in range(2, n + 1):
        g = Fraction(p ** (s - k) * (p - 1), p ** s - p ** (k - 1)) * (
            1 - Fraction(p ** (k - 1) - 1, p - 1) * g
        )
    return g


def gamma_n_empirical(n: int, s: int, p: int, e: int, N: int,
                      rng: np.random.Generator,
                      batch_size: int = 20_000) -> Dict[str, object]:
    """Monte Carlo estimate of the line-hitting probability gamma_n(s)."""
    if s <= n or s % 2 == 0:
        raise ValueError("need odd s > n")
    target = _line_id([1] + [0] * (s - 1), p)
    hits = 0
    determined = 0
    parity_violations = 0
    excluded = 0
    done = 0
    while done < N:
        m = min(batch_size, N - done)
        batch = sample_alt_batch(m, s, p, e, n, rng)
        corank, ids, stats = _analyze_with_retry(batch, p, e, n, rng)
        parity_violations += int(np.sum((corank % 2) != (s % 2)))
        excluded += stats["bottom_final"]
        det = ids >= 0
        determined += int(np.sum(det))
        hits += int(np.sum(ids == target))
        done += m
    estimate = hits / determined if determined else float("nan")
    stderr = math.sqrt(max(estimate * (1 - estimate), 1e-12) / determined) if determined else float("nan")
    return {
        "n": n, "s": s, "p": p, "e": e, "samples": N,
        "determined": determined, "excluded_bottom": excluded,
        "parity_violations": parity_violations,
        "estimate": estimate, "stderr": stderr,
        "exact": float(gamma_n_exact(n, s, p)),
    }


def kernel_dim_distribution(n: int, s: int, p: int, e: int, N: int,
                            rng: np.random.Generator,
                            batch_size: int = 20_000) -> Dict[str, object]:
    """Histogram of dim ker(M mod p) over the constrained ensemble."""
    if s % 2 == 0:
        raise ValueError("the model uses odd s")
    hist: Dict[int, int] = {}
    parity_violations = 0
    done = 0
    while done < N:
        m = min(batch_size, N - done)
        batch = sample_alt_batch(m, s, p, e, n, rng)
        corank = np.zeros(m, dtype=np.int64)
        cert = np.zeros(m, dtype=np.int64)
        y = np.zeros((m, s), dtype=np.int64)
        _analyze_batch(batch, p, e, corank, cert, y)
        parity_violations += int(np.sum((corank % 2) != (s % 2)))
        for c in corank:
            hist[int(c)] = hist.get(int(c), 0) + 1
        done += m
    return {
        "n": n, "s": s, "p": p, "e": e, "samples": N,
        "histogram": dict(sorted(hist.items())),
        "parity_violations": parity_violations,
    }


def line_equidistribution_test(s: int, p: int, e: int, U_dim: int, N: int,
                               rng: np.random.Generator,
                               min_conditioned: int = 500,
                               batch_size: int = 20_000) -> Dict[str, object]:
    """Chi-square of the kernel line against uniform on the lines of U.

    Samples are conditioned on ker(M mod p) being exactly the fixed U of the
    given dimension (columns 1..U_dim); inconclusive when too few survive.
    """
    if U_dim < 1 or U_dim > s or (s - U_dim) % 2:
        raise ValueError("need U_dim <= s with s - U_dim even")
    counts: Dict[int, int] = {}
    conditioned = 0
    done = 0
    while done < N:
        m = min(batch_size, N - done)
        batch = sample_alt_batch(m, s, p, e, U_dim, rng)
        corank, ids, _ = _analyze_with_retry(batch, p, e, U_dim, rng)
        sel = (corank == U_dim) & (ids >= 0)
        conditioned += int(np.sum(corank == U_dim))
        for ident in ids[sel]:
            counts[int(ident)] = counts.get(int(ident), 0) + 1
        done += m
    n_lines = (p ** U_dim - 1) // (p - 1)
    # every observed line must be inside U: coordinates beyond U_dim vanish
    for ident in counts:
        vec = []
        x = ident
        for _ in range(s):
            vec.append(x % p)
            x //= p
        if any(vec[U_dim:]):
            raise AssertionError("kernel line escaped the conditioned kernel")
    total = sum(counts.values())
    if total < max(min_conditioned, 5 * n_lines):
        return {"conclusive": False, "conditioned": total, "lines": n_lines}
    all_lines = _lines_of_subspace(U_dim, s, p)
    observed = [counts.get(l, 0) for l in all_lines]
    if n_lines == 1:
        pvalue = 1.0  # a single line is trivially uniform
    else:
        from scipy.stats import chisquare

        pvalue = float(chisquare(observed).pvalue)
    return {
        "conclusive": True, "conditioned": total, "lines": n_lines,
        "pvalue": pvalue, "counts": observed,
    }


def _lines_of_subspace(U_dim: int, s: int, p: int) -> List[int]:
    out = []
    seen = set()
    for x in range(1, p ** U_dim):
        vec = []
        t = x
        for _ in range(U_dim):
            vec.append(t % p)
            t //= p
        vec += [0] * (s - U_dim)
        ident = _line_id(vec, p)
        if ident not in seen:
            seen.add(ident)
            out.append(ident)
    return sorted(out)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic, splittable generator derived from (seed, stream)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, stream))))
