"""Negative Pell: solubility criterion, obstruction group, census implications."""

import pytest

from selmerlab.arith import squarefree_sieve
from selmerlab.pell import (
    cf_period,
    in_classical_family,
    pell_selmer,
    pell_soluble,
    pell_soluble_brute,
    pell_soluble_direct,
    stevenhagen_census,
)


def test_small_cases():
    assert pell_soluble(2) and pell_soluble(5) and pell_soluble(10)
    assert not pell_soluble(3)
    assert not pell_soluble(34)
    with pytest.raises(ValueError):
        pell_soluble(1)
    with pytest.raises(ValueError):
        cf_period(16)


def test_selmer_group_examples():
    s5 = pell_selmer(5)
    assert s5.elements == (1, 5) and s5.dim == 1
    # d with a 3 mod 4 prime divisor is missing from its own group
    s21 = pell_selmer(21)
    assert 21 not in s21
    assert 1 in pell_selmer(30)


def test_selmer_group_structure_exhaustive():
    from selmerlab.arith import square_class

    for d, fac in squarefree_sieve(2000):
        if d < 2:
            continue
        grp = pell_selmer(d, fac)
        els = set(grp.elements)
        assert 1 in els
        for x in els:  # closed under squarefree product
            for y in els:
                assert square_class(x * y).value in els
        assert (d in els) == in_classical_family(d, fac)
        assert len(els) == 1 << grp.dim


def test_cf_matches_certificate_search_to_500():
    for d, _ in squarefree_sieve(500):
        if d < 2:
            continue
        assert pell_soluble(d) == pell_soluble_brute(d), d


def test_direct_search_confirms_small_positives():
    for d, _ in squarefree_sieve(80):
        if d >= 2 and pell_soluble(d):
            assert pell_soluble_direct(d)


def test_census_implications():
    res = stevenhagen_census(20_000)
    assert res.implication_failures == 0
    for d, dim, sol in res.rows:
        if dim == 1:
            assert sol
    # solubility outside the classical family never happens
    for d, fac in squarefree_sieve(3000):
        if d >= 2 and not in_classical_family(d, fac):
            assert not pell_soluble(d), d
    assert 0.0 < res.soluble_fraction < 1.0
    assert abs(sum(res.pr_hat.values()) - 1.0) < 1e-9
    assert "soluble_fraction" in res.aggregates_json()
    assert res.to_tsv().startswith("# d\tdim\tsoluble")
