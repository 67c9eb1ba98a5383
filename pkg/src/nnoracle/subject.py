"""The credit-approval program under test, with its 21 mutants.

Two implementations of the program live here: ``approve``/``mutant`` are a
literal scalar transcription (if/else, C-style ``(int)`` casts), while
``amounts`` evaluates whole record arrays with numpy.  The test-suite checks
that both agree on the full domain for every program version.
"""

from __future__ import annotations

from typing import Callable, Iterator, NamedTuple

import numpy as np

FIELDS = (
    "citizenship",
    "state",
    "region",
    "sex",
    "age",
    "marital",
    "dependents",
    "income",
)

# inclusive upper bound of each field; all ranges start at 0
FIELD_MAX = {
    "citizenship": 1,
    "state": 1,
    "region": 6,
    "sex": 1,
    "age": 99,
    "marital": 1,
    "dependents": 4,
    "income": 3,
}

DOMAIN_SHAPE = tuple(FIELD_MAX[f] + 1 for f in FIELDS)
DOMAIN_SIZE = int(np.prod(DOMAIN_SHAPE))
MAX_AMOUNT = 18000
N_MUTANTS = 21


class DomainError(ValueError):
    """Raised for values outside the subject program's input domain."""


class CustomerRecord(NamedTuple):
    citizenship: int
    state: int
    region: int
    sex: int
    age: int
    marital: int
    dependents: int
    income: int

    def validate(self) -> "CustomerRecord":
        for name, value in zip(FIELDS, self):
            if isinstance(value, bool) or int(value) != value:
                raise DomainError(f"{name} must be an integer, got {value!r}")
            if not 0 <= value <= FIELD_MAX[name]:
                raise DomainError(
                    f"{name}={value} outside 0..{FIELD_MAX[name]}"
                )
        return self


class Decision(NamedTuple):
    approved: bool
    amount: int


class Mutation(NamedTuple):
    line: int
    original: str
    mutated: str
    predicate: Callable


# Predicates of the original program, keyed by source line.  Each takes the
# record (or a dict of field arrays) and works on ints and numpy arrays alike.
ORIGINAL = {
    2: ("Region==5 || Region==6", lambda r: (r["region"] == 5) | (r["region"] == 6)),
    3: ("Age<18", lambda r: r["age"] < 18),
    5: ("Citizenship==0", lambda r: r["citizenship"] == 0),
    7: ("State==0", lambda r: r["state"] == 0),
    8: ("Region==3 || Region==4", lambda r: (r["region"] == 3) | (r["region"] == 4)),
    11: ("Marital==0", lambda r: r["marital"] == 0),
    12: ("Dependents>0", lambda r: r["dependents"] > 0),
    15: ("Sex==0", lambda r: r["sex"] == 0),
    20: ("Marital==0", lambda r: r["marital"] == 0),
    21: ("Dependents>2", lambda r: r["dependents"] > 2),
    24: ("Sex==0", lambda r: r["sex"] == 0),
}


def _m(line, mutated, predicate):
    return Mutation(line, ORIGINAL[line][0], mutated, predicate)


MUTANTS = {
    1: _m(2, "Region==5", lambda r: r["region"] == 5),
    2: _m(2, "Region==5 && Region==6", lambda r: (r["region"] == 5) & (r["region"] == 6)),
    3: _m(2, "Region==4 || Region==5", lambda r: (r["region"] == 4) | (r["region"] == 5)),
    4: _m(2, "Region==3 || Region==4", lambda r: (r["region"] == 3) | (r["region"] == 4)),
    5: _m(3, "Age>18", lambda r: r["age"] > 18),
    6: _m(3, "Age<25", lambda r: r["age"] < 25),
    7: _m(5, "Citizenship==1", lambda r: r["citizenship"] == 1),
    8: _m(7, "State==1", lambda r: r["state"] == 1),
    9: _m(8, "Region==3", lambda r: r["region"] == 3),
    10: _m(8, "Region==3 && Region==4", lambda r: (r["region"] == 3) & (r["region"] == 4)),
    11: _m(8, "Region==2 || Region==3", lambda r: (r["region"] == 2) | (r["region"] == 3)),
    12: _m(8, "Region==1 || Region==2", lambda r: (r["region"] == 1) | (r["region"] == 2)),
    13: _m(11, "Marital==1", lambda r: r["marital"] == 1),
    14: _m(12, "Dependents==0", lambda r: r["dependents"] == 0),
    15: _m(12, "Dependents<0", lambda r: r["dependents"] < 0),
    16: _m(15, "Sex==1", lambda r: r["sex"] == 1),
    17: _m(20, "Marital==1", lambda r: r["marital"] == 1),
    18: _m(21, "Dependents>=2", lambda r: r["dependents"] >= 2),
    19: _m(21, "Dependents<2", lambda r: r["dependents"] < 2),
    20: _m(21, "Dependents<=2", lambda r: r["dependents"] <= 2),
    21: _m(24, "Sex==1", lambda r: r["sex"] == 1),
}


def _predicates(mutant_id: int | None) -> dict[int, Callable]:
    preds = {line: fn for line, (_, fn) in ORIGINAL.items()}
    if mutant_id is not None:
        if mutant_id not in MUTANTS:
            raise DomainError(f"unknown mutant id {mutant_id!r}; expected 1..{N_MUTANTS}")
        m = MUTANTS[mutant_id]
        preds[m.line] = m.predicate
    return preds


def _run(x: CustomerRecord, p: dict[int, Callable]) -> Decision:
    r = x._asdict()
    if p[2](r):
        amount = 0
    elif p[3](r):
        amount = 0
    else:
        if p[5](r):
            amount = 5000 + 1000 * x.income
            if p[7](r):
                if p[8](r):
                    amount = amount * 2
                else:
                    amount = int(amount * 1.50)
            else:
                amount = int(amount * 1.10)
            if p[11](r):
                if p[12](r):
                    amount = amount + 200 * x.dependents
                else:
                    amount = amount + 500
            else:
                amount = amount + 1000
            if p[15](r):
                amount = amount + 500
            else:
                amount = amount + 1000
        else:
            amount = 1000 + 800 * x.income
            if p[20](r):
                if p[21](r):
                    amount = amount + 100 * x.dependents
                else:
                    amount = amount + 100
            else:
                amount = amount + 300
            if p[24](r):
                amount = amount + 100
            else:
                amount = amount + 200
    return Decision(amount != 0, amount)


def _as_record(x) -> CustomerRecord:
    if not isinstance(x, CustomerRecord):
        x = CustomerRecord(*(int(v) for v in x))
    return x.validate()


def approve(x) -> Decision:
    """Run the original credit-approval program on one record."""
    return _run(_as_record(x), _predicates(None))


def mutant(mutant_id: int, x) -> Decision:
    """Run mutant ``mutant_id`` (1..21) on one record."""
    p = _predicates(mutant_id)
    return _run(_as_record(x), p)


def is_exposing(mutant_id: int, x) -> bool:
    """True iff the mutant's credit amount differs from the original's on ``x``."""
    return mutant(mutant_id, x).amount != approve(x).amount


def enumerate_domain() -> Iterator[CustomerRecord]:
    """Yield all 224 000 records in lexicographic field order."""
    for idx in np.ndindex(*DOMAIN_SHAPE):
        yield CustomerRecord(*idx)


def domain_array() -> np.ndarray:
    """All domain records as an ``(224000, 8)`` int array, lexicographic order."""
    return index_to_records(np.arange(DOMAIN_SIZE))


def index_to_records(indices) -> np.ndarray:
    cols = np.unravel_index(np.asarray(indices), DOMAIN_SHAPE)
    return np.stack(cols, axis=1).astype(np.int64)


def records_to_index(X) -> np.ndarray:
    X = np.asarray(X)
    return np.ravel_multi_index(tuple(X.T), DOMAIN_SHAPE)


def check_records(X) -> np.ndarray:
    """Validate a record array, returning it as ``int64`` with shape ``(n, 8)``."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != len(FIELDS):
        raise DomainError(f"expected records of shape (n, 8), got {X.shape}")
    Xi = X.astype(np.int64)
    if not np.array_equal(Xi, X):
        raise DomainError("record fields must be integers")
    hi = np.array([FIELD_MAX[f] for f in FIELDS])
    bad = (Xi < 0) | (Xi > hi)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DomainError(
            f"record {row}: {FIELDS[col]}={Xi[row, col]} outside 0..{hi[col]}"
        )
    return Xi


def amounts(X, mutant_id: int | None = None) -> np.ndarray:
    """Vectorised credit amounts for a record array (original program or mutant)."""
    X = check_records(X)
    p = _predicates(mutant_id)
    r = {name: X[:, i] for i, name in enumerate(FIELDS)}
    income, deps = r["income"], r["dependents"]

    a = 5000 + 1000 * income
    a = np.where(
        p[7](r),
        np.where(p[8](r), a * 2, (a * 1.50).astype(np.int64)),
        (a * 1.10).astype(np.int64),
    )
    a = a + np.where(p[11](r), np.where(p[12](r), 200 * deps, 500), 1000)
    a = a + np.where(p[15](r), 500, 1000)

    b = 1000 + 800 * income
    b = b + np.where(p[20](r), np.where(p[21](r), 100 * deps, 100), 300)
    b = b + np.where(p[24](r), 100, 200)

    out = np.where(p[5](r), a, b)
    out = np.where(p[2](r) | p[3](r), 0, out)
    return out.astype(np.int64)


def exposing_mask(mutant_id: int, X) -> np.ndarray:
    return amounts(X, mutant_id) != amounts(X)
