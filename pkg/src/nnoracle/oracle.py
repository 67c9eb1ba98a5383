"""Comparators that turn a network prediction and an observed output into a verdict."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .encode import winner
from .subject import DomainError


class ComparatorKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    CATEGORICAL = "categorical"


class Verdict(str, enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class Reason(str, enum.Enum):
    OBVIOUS_MATCH = "obvious_match"
    OBVIOUS_MISMATCH = "obvious_mismatch"
    NON_CLEAR_CUT = "non_clear_cut"


class Classification(str, enum.Enum):
    TRUE_POSITIVE = "true_positive"
    TRUE_NEGATIVE = "true_negative"
    FALSE_POSITIVE = "false_positive"
    FALSE_NEGATIVE = "false_negative"


class ConfigError(ValueError):
    pass


# (th_low, th_high) pairs
UNI_THRESHOLDS = (0.2, 0.8)
UNIMIN_THRESHOLDS = (0.1, 0.9)


@dataclass(frozen=True)
class ComparatorSpec:
    kind: ComparatorKind = ComparatorKind.CATEGORICAL
    aggressiveness: int = 0
    eps_max: float = 0.09
    th_low: float = 0.2
    th_high: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "kind", ComparatorKind(self.kind))
        if self.aggressiveness not in range(6):
            raise ConfigError(f"aggressiveness must be 0..5, got {self.aggressiveness}")
        if not 0 < self.th_low < self.th_high < 1:
            raise ConfigError("thresholds must satisfy 0 < th_low < th_high < 1")
        if not self.eps_max > 0:
            raise ConfigError("eps_max must be positive")

    def with_aggressiveness(self, a: int) -> "ComparatorSpec":
        d = asdict(self)
        d["aggressiveness"] = a
        return ComparatorSpec(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


class Judgment(NamedTuple):
    verdict: Verdict
    reason: Reason

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT


def judge_euclidean(spec: ComparatorSpec, predicted: float, observed: float) -> Judgment:
    """Accept iff ``|observed - predicted| < eps_max - 0.01 * A`` (normalised amounts)."""
    if spec.kind is not ComparatorKind.EUCLIDEAN:
        raise ConfigError("judge_euclidean needs a euclidean comparator")
    if abs(observed - predicted) < spec.eps_max - 0.01 * spec.aggressiveness:
        return Judgment(Verdict.ACCEPT, Reason.OBVIOUS_MATCH)
    return Judgment(Verdict.REJECT, Reason.OBVIOUS_MISMATCH)


def _non_clear_cut(a: int, agree: float, c: float, th_low: float, th_high: float) -> bool:
    if a == 0:
        return True
    if a == 1:
        return not (agree and abs(1.0 - c) > th_high)
    if a == 2:
        return bool(agree)
    if a == 3:
        return (not agree) or abs(1.0 - c) > th_high
    if a == 4:
        return abs(agree - c) < th_low
    return False


def judge_categorical(spec: ComparatorSpec, z_obs, z_net) -> Judgment:
    """Compare the observed one-hot output with the network's output vector.

    ``agree`` is 1.0 when both winners coincide, else 0.0; ``c`` is the
    network winner's activation.  Boundary values fall through to the
    non-clear-cut branch.
    """
    if spec.kind is not ComparatorKind.CATEGORICAL:
        raise ConfigError("judge_categorical needs a categorical comparator")
    z_obs = np.asarray(z_obs)
    z_net = np.asarray(z_net)
    if z_obs.shape != z_net.shape:
        raise DomainError(f"dimension mismatch: {z_obs.shape} vs {z_net.shape}")
    j = winner(z_net)
    agree = 1.0 if winner(z_obs) == j else 0.0
    c = float(z_net[j])
    if agree and abs(1.0 - c) < spec.th_low:
        return Judgment(Verdict.ACCEPT, Reason.OBVIOUS_MATCH)
    if not agree and abs(0.0 - c) > spec.th_high:
        return Judgment(Verdict.REJECT, Reason.OBVIOUS_MISMATCH)
    ok = _non_clear_cut(spec.aggressiveness, agree, c, spec.th_low, spec.th_high)
    return Judgment(Verdict.ACCEPT if ok else Verdict.REJECT, Reason.NON_CLEAR_CUT)


def classify(verdict: Verdict, ground_truth_correct: bool) -> Classification:
    """Agreement taxonomy with acceptance as the positive judgment."""
    accepted = Verdict(verdict) is Verdict.ACCEPT
    if accepted:
        return Classification.TRUE_POSITIVE if ground_truth_correct else Classification.FALSE_NEGATIVE
    return Classification.FALSE_POSITIVE if ground_truth_correct else Classification.TRUE_NEGATIVE
