"""Twist family sieving, membership, censuses."""

import math
import random

import pytest

from selmerlab.arith import square_class, squarefree_sieve
from selmerlab.curve import Curve2T, descent_class, kummer_image_of_point
from selmerlab.family import (
    FamilySpec,
    asymptotic_probe,
    census,
    census_tsv,
    expected_density,
    family_spec,
    histogram_json,
    is_member,
    sieve_family,
    wilson_interval,
)
from selmerlab.selmer import BClass

E027 = Curve2T(0, 2, 7)


def test_membership_congruence_only():
    spec = family_spec(E027, [], 1)
    assert spec.n_L == 1
    for d, fac in squarefree_sieve(400):
        want = spec.b.matches(d)
        assert is_member(spec, d, fac) == want


def test_membership_quadratic_field_hand_list():
    # split condition for Q(i) over a curve with Sigma = {oo, 2}: membership
    # (no matter the congruence class) forces all odd prime factors 1 mod 4
    from selmerlab.arith import kronecker

    hand = [1, 2, 5, 10, 13, 17, 26, 29, 34, 37, 41, 53, 58, 61, 65,
            73, 74, 82, 85, 89, 97]
    assert [n for n, fac in squarefree_sieve(100)
            if all(p == 2 or p % 4 == 1 for p in fac)] == hand
    spec = family_spec(Curve2T(0, 1, -1), [-1], 1)
    got = [n for n, fac in squarefree_sieve(100)
           if all(p == 2 or kronecker(-1, p) == 1 for p in fac)]
    assert got == hand
    # and the family members are exactly the hand list cut by the b-class
    members = {d for d, _ in sieve_family(spec, 100)}
    assert members == {n for n in hand if spec.b.matches(n)}


def test_membership_inert_prime_fails():
    spec = family_spec(E027, [-1], 1)
    # 3 is inert in Q(i); any multiple of 3 outside Sigma is excluded
    assert not is_member(spec, 3 * 13)
    assert not is_member(spec, 3)


def test_sieve_family_matches_is_member():
    spec = family_spec(E027, [-1], 1)
    got = {d for d, _ in sieve_family(spec, 4000)}
    want = set()
    for n, fac in squarefree_sieve(3999):
        for d in (n, -n):
            if is_member(spec, d, fac):
                want.add(d)
    assert got == want


def test_sieve_counts_monotone_and_empty():
    spec = family_spec(E027, [], 1)
    counts = [len(sieve_family(spec, X)) for X in (10, 100, 1000, 5000)]
    assert counts == sorted(counts)
    spec_neg = family_spec(E027, [], -1)
    assert all(d < 0 for d, _ in sieve_family(spec_neg, 2000))
    tiny = family_spec(E027, [], 17)
    assert sieve_family(tiny, 10) == []


def test_membership_multiplicative_structure():
    spec = family_spec(E027, [-1], 1)
    members = [d for d, _ in sieve_family(spec, 2000) if d > 1]
    rng = random.Random(2)
    for _ in range(40):
        a, b = rng.choice(members), rng.choice(members)
        if math.gcd(a, b) != 1:
            continue
        prod = a * b
        from selmerlab.arith import factorize

        fac = sorted(factorize(prod))
        # the splitting condition is inherited primewise
        assert all(p in spec.sigma.finite_primes or p % 4 == 1 for p in fac)


def test_expected_density_matches_brute_count():
    spec = family_spec(E027, [], 1)
    X = 200_000
    count = len(sieve_family(spec, X))
    dens = expected_density(spec)
    assert dens is not None
    assert abs(count - dens * X) / (dens * X) < 0.05


def test_asymptotic_probe_shapes():
    spec = family_spec(E027, [], 1)
    rowz = asymptotic_probe(spec, [10**3, 10**4, 10**5])
    assert [r["X"] for r in rowz] == [10**3, 10**4, 10**5]
    # ratio for n_L = 1 tends to the exact congruence density
    assert abs(rowz[-1]["ratio"] - rowz[-1]["expected_density"]) \
        / rowz[-1]["expected_density"] < 0.1
    with pytest.raises(ValueError):
        asymptotic_probe(spec, [100, 10])


def test_census_smoke_and_tracked_class():
    # family of the worked curve cut by the halving field of P: delta(P)
    # must appear in every member's Selmer group
    E = Curve2T(-1505, -712, 2216)
    dP = descent_class(13, 39)
    spec = family_spec(E, [13, 39], 1)
    res = census(spec, 120_000, tracked=[dP])
    assert res.total >= 5
    assert all(row.tracked[0] for row in res.rows)
    assert len({row.parity for row in res.rows}) == 1
    assert sum(res.histogram.values()) == res.total
    # n_b / m_b bookkeeping: minimal dimension is 2 + n_b + m_b
    assert min(res.histogram) == 2 + res.n_b + res.m_b
    tsv = census_tsv(res, ["deltaP"])
    assert tsv.splitlines()[0] == "# d\tdim_sel\tparity\ttracked:deltaP"
    js = histogram_json(res)
    assert '"n_b": 2' in js


def test_census_workers_deterministic():
    spec = family_spec(E027, [], 1)
    a = census(spec, 20_000)
    b = census(spec, 20_000, workers=2)
    assert [(r.d, r.dim_sel) for r in a.rows] == [(r.d, r.dim_sel) for r in b.rows]


def test_wilson_interval_sane():
    lo, hi = wilson_interval(42, 100)
    assert 0 < lo < 0.42 < hi < 1
    assert wilson_interval(0, 0) == (0.0, 1.0)
