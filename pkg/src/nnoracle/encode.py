"""Input scaling and output abstractions."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .subject import FIELD_MAX, FIELDS, MAX_AMOUNT, DomainError, check_records

_FIELD_SCALE = np.array([FIELD_MAX[f] for f in FIELDS], dtype=float)


class Kind(str, enum.Enum):
    DIRECT = "direct"
    UNIFORM = "uniform"
    LOW_STRETCH = "low"
    CENTER_STRETCH = "center"


@dataclass(frozen=True)
class AbstractionSpec:
    kind: Kind = Kind.UNIFORM
    n: int = 30
    y_max: float = float(MAX_AMOUNT)
    k_low: float = 8000.0
    a_low: float = 100.0
    m_ctr: float = float(MAX_AMOUNT)
    a_ctr: float = 0.0006

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is not Kind.DIRECT and not 2 <= self.n <= 1024:
            raise ValueError(f"n must lie in 2..1024, got {self.n}")
        for name in ("y_max", "k_low", "a_low", "m_ctr", "a_ctr"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def dim(self) -> int:
        return 1 if self.kind is Kind.DIRECT else self.n

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AbstractionSpec":
        return cls(**d)


def normalize_input(X, mode: str = "max") -> np.ndarray:
    """Map records to network inputs.

    ``mode="max"`` divides every field by its domain maximum so inputs lie in
    [0, 1]; ``mode="identity"`` feeds the raw field values.
    """
    X = check_records(X).astype(float)
    if mode == "max":
        return X / _FIELD_SCALE
    if mode == "identity":
        return X
    raise ValueError(f"unknown input scaling mode {mode!r}")


def stretch_low(y, k: float = 8000.0, a: float = 100.0):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("stretch_low is defined for y >= 0 only")
    out = k * np.log1p(y / a)
    return float(out) if out.ndim == 0 else out


def stretch_center(y, m: float = 18000.0, a: float = 0.0006):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("stretch_center is defined for y >= 0 only")
    out = m / (1.0 + np.exp(-a * (y - 0.5 * m)))
    return float(out) if out.ndim == 0 else out


def _stretch(spec: AbstractionSpec, y):
    if spec.kind is Kind.LOW_STRETCH:
        return stretch_low(y, spec.k_low, spec.a_low)
    if spec.kind is Kind.CENTER_STRETCH:
        return stretch_center(y, spec.m_ctr, spec.a_ctr)
    return np.asarray(y, dtype=float)


def interval_index(spec: AbstractionSpec, y) -> np.ndarray:
    """Index of the abstraction interval holding each amount in ``y``."""
    if spec.kind is Kind.DIRECT:
        raise ValueError("direct encoding has no intervals")
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > spec.y_max)):
        raise DomainError(f"amount outside [0, {spec.y_max:g}]")
    lo = _stretch(spec, 0.0)
    hi = _stretch(spec, spec.y_max)
    s = _stretch(spec, y)
    idx = np.floor((s - lo) * spec.n / (hi - lo)).astype(np.int64)
    return np.clip(idx, 0, spec.n - 1)


def encode_output(spec: AbstractionSpec, y) -> np.ndarray:
    """Encode one amount, or an array of amounts (one row each)."""
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if spec.kind is Kind.DIRECT:
        if np.any((y < 0) | (y > spec.y_max)):
            raise DomainError(f"amount outside [0, {spec.y_max:g}]")
        out = (y / spec.y_max)[:, None]
    else:
        out = np.zeros((len(y), spec.n))
        out[np.arange(len(y)), interval_index(spec, y)] = 1.0
    return out[0] if scalar else out


def winner(v) -> int:
    """Index of the largest component; the lowest index wins ties."""
    v = np.asarray(v)
    if v.size == 0:
        raise DomainError("winner of an empty vector is undefined")
    return int(np.argmax(v))
