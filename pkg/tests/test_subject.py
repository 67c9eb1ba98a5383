import numpy as np
import pytest

from nnoracle.subject import (
    DOMAIN_SIZE,
    MUTANTS,
    CustomerRecord,
    Decision,
    DomainError,
    amounts,
    approve,
    domain_array,
    enumerate_domain,
    exposing_mask,
    is_exposing,
    mutant,
)


def rec(**kw):
    base = dict(citizenship=0, state=0, region=0, sex=0, age=30, marital=0, dependents=0, income=0)
    base.update(kw)
    return CustomerRecord(**base)


@pytest.fixture(scope="module")
def domain():
    return domain_array()


@pytest.fixture(scope="module")
def original(domain):
    return amounts(domain)


@pytest.mark.parametrize("region", [5, 6])
def test_excluded_regions_rejected(region):
    assert approve(rec(region=region, income=3, marital=1)) == Decision(False, 0)


def test_hand_executed_citizen0():
    x = rec(region=3, age=30, marital=1, income=2)
    # (5000 + 2000) * 2 + 1000 + 500
    assert approve(x) == Decision(True, 15500)


def test_hand_executed_citizen1():
    x = rec(citizenship=1, state=1, sex=1, age=20, dependents=3)
    # 1000 + 100 * 3 + 200
    assert approve(x) == Decision(True, 1500)


def test_minor_rejected():
    assert approve(rec(age=17)) == Decision(False, 0)


def test_int_cast_truncates():
    # (int)(6000 * 1.10) = 6600, then +1000 (marital=1), +500
    assert approve(rec(state=1, income=1, marital=1)).amount == 8100
    # (int)(5000 * 1.50) = 7500, +500 (no dependents), +500
    assert approve(rec(region=1)).amount == 8500


def test_out_of_range_field():
    with pytest.raises(DomainError):
        approve(rec(region=7))
    with pytest.raises(DomainError):
        approve(rec(age=100))
    with pytest.raises(DomainError):
        mutant(22, rec())


def test_domain_enumeration():
    records = list(enumerate_domain())
    assert len(records) == DOMAIN_SIZE == 224000
    assert records[0] == CustomerRecord(0, 0, 0, 0, 0, 0, 0, 0)
    assert records[-1] == CustomerRecord(1, 1, 6, 1, 99, 1, 4, 3)
    assert len(set(records)) == DOMAIN_SIZE


def test_domain_array_matches_enumeration(domain):
    sample = [0, 1, 99, 12345, DOMAIN_SIZE - 1]
    records = list(enumerate_domain())
    for i in sample:
        assert tuple(domain[i]) == records[i]


def test_max_amount_exhaustive(original):
    assert original.max() == 18000
    assert original.min() == 0


def test_approved_iff_positive_and_zero_cases(domain, original):
    zero = (domain[:, 2] >= 5) | (domain[:, 4] < 18)
    assert np.array_equal(original == 0, zero)
    rng = np.random.default_rng(3)
    for i in rng.choice(DOMAIN_SIZE, 300, replace=False):
        d = approve(domain[i])
        assert d.approved == (d.amount > 0)


def test_scalar_and_vector_agree(domain):
    rng = np.random.default_rng(0)
    idx = rng.choice(DOMAIN_SIZE, 1500, replace=False)
    X = domain[idx]
    for mid in [None, *MUTANTS]:
        vec = amounts(X, mid)
        for x, v in zip(X, vec):
            got = approve(x) if mid is None else mutant(mid, x)
            assert got.amount == v, (mid, x)


def test_m1_region6_approved():
    x = rec(region=6, citizenship=1, income=1, marital=1)
    assert approve(x) == Decision(False, 0)
    # 1000 + 800 + 300 + 100
    assert mutant(1, x) == Decision(True, 2200)
    assert is_exposing(1, x)


def test_m5_age18_not_exposing():
    x = rec(age=18)
    assert mutant(5, x) == approve(x)
    assert not is_exposing(5, x)


def test_m21_differs_by_100():
    x = rec(citizenship=1, sex=0)
    assert mutant(21, x).amount - approve(x).amount == 100


def test_unreached_line_not_exposing():
    x = rec(region=0, age=30)  # citizenship 0 path: lines 20-25 never run
    for mid in (17, 18, 19, 20, 21):
        assert not is_exposing(mid, x)


def test_mutant_table():
    assert len(MUTANTS) == 21
    assert MUTANTS[2].mutated == "Region==5 && Region==6"
    assert MUTANTS[19].mutated == "Dependents<2"
    assert MUTANTS[18].line == 21


@pytest.mark.parametrize("mid", sorted(MUTANTS))
def test_every_mutant_has_enough_exposing_inputs(mid, domain):
    mask = exposing_mask(mid, domain)
    assert mask.sum() >= 500
    assert not mask.all()
