"""scikit-learn style wrapper: a trained network plus comparator acting as an oracle."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import fnn
from .encode import AbstractionSpec, Kind, encode_output, normalize_input
from .oracle import (
    UNI_THRESHOLDS,
    UNIMIN_THRESHOLDS,
    ComparatorKind,
    ComparatorSpec,
    Judgment,
    judge_categorical,
    judge_euclidean,
)
from .subject import MAX_AMOUNT, DomainError, check_records

VARIANTS = ("direct", "uni", "unimin", "lower", "center")

_KIND = {
    "direct": Kind.DIRECT,
    "uni": Kind.UNIFORM,
    "unimin": Kind.UNIFORM,
    "lower": Kind.LOW_STRETCH,
    "center": Kind.CENTER_STRETCH,
}

# (mode, learning_rate, epochs)
TRAIN_DEFAULTS = {
    "direct": ("incremental", 0.1, 10000),
    "uni": ("incremental", 0.5, 1500),
    "unimin": ("incremental", 0.5, 1500),
    "lower": ("incremental", 0.5, 1500),
    "center": ("incremental", 0.5, 1500),
}


def abstraction_for(variant: str, n: int) -> AbstractionSpec:
    if variant not in _KIND:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
    kind = _KIND[variant]
    return AbstractionSpec(kind, 1 if kind is Kind.DIRECT else n)


def comparator_for(variant: str, aggressiveness: int) -> ComparatorSpec:
    if variant == "direct":
        return ComparatorSpec(ComparatorKind.EUCLIDEAN, aggressiveness)
    lo, hi = UNIMIN_THRESHOLDS if variant == "unimin" else UNI_THRESHOLDS
    return ComparatorSpec(ComparatorKind.CATEGORICAL, aggressiveness, th_low=lo, th_high=hi)


class ArtificialSpecification(BaseEstimator):
    """Neural oracle for the credit-approval program.

    ``fit(X, y)`` trains on records ``X`` (shape ``(n, 8)``) and the credit
    amounts ``y`` the program produced for them.  ``judge``/``accepts`` then
    decide whether an observed amount is plausible for each record.
    ``aggressiveness`` is only read at judgment time, so it can be changed
    with ``set_params`` without refitting.

    ``mode``, ``learning_rate`` and ``epochs`` default (``None``) to the
    variant's standard training setup.
    """

    def __init__(
        self,
        variant="uni",
        n=30,
        aggressiveness=0,
        mode=None,
        learning_rate=None,
        epochs=None,
        hidden=24,
        seed=0,
        input_scaling="max",
        shuffle=False,
        derivative_clip=0.01,
    ):
        self.variant = variant
        self.n = n
        self.aggressiveness = aggressiveness
        self.mode = mode
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.hidden = hidden
        self.seed = seed
        self.input_scaling = input_scaling
        self.shuffle = shuffle
        self.derivative_clip = derivative_clip

    def train_config(self) -> fnn.TrainConfig:
        mode, lr, epochs = TRAIN_DEFAULTS[self.variant]
        return fnn.TrainConfig(
            mode=self.mode or mode,
            learning_rate=self.learning_rate if self.learning_rate is not None else lr,
            epochs=self.epochs if self.epochs is not None else epochs,
            seed=self.seed,
            shuffle=self.shuffle,
            derivative_clip=self.derivative_clip,
        )

    @property
    def abstraction(self) -> AbstractionSpec:
        return abstraction_for(self.variant, self.n)

    @property
    def comparator(self) -> ComparatorSpec:
        return comparator_for(self.variant, self.aggressiveness)

    def fit(self, X, y):
        X = check_records(X)
        y = np.asarray(y)
        if y.shape != (len(X),):
            raise ValueError(f"y must have shape ({len(X)},), got {y.shape}")
        spec = self.abstraction
        cfg = self.train_config()
        net = fnn.init_network((8, self.hidden, spec.dim), cfg.seed, cfg.init_range)
        inputs = normalize_input(X, self.input_scaling)
        targets = encode_output(spec, y)
        self.network_, self.history_ = fnn.train(net, inputs, targets, cfg)
        self.mse_ = fnn.mse(self.network_, inputs, targets)
        return self

    def decision_function(self, X) -> np.ndarray:
        """Raw network outputs, one row per record."""
        check_is_fitted(self, "network_")
        return fnn.forward(self.network_, normalize_input(X, self.input_scaling))

    def predict(self, X) -> np.ndarray:
        """Predicted interval index per record; predicted amount for ``direct``."""
        out = self.decision_function(X)
        if self.abstraction.kind is Kind.DIRECT:
            return out[:, 0] * MAX_AMOUNT
        return out.argmax(axis=1)

    def judge(self, X, y) -> list[Judgment]:
        X = check_records(X)
        y = np.asarray(y, dtype=float).reshape(-1)
        if len(y) != len(X):
            raise ValueError("X and y differ in length")
        if np.any((y < 0) | (y > MAX_AMOUNT)):
            raise DomainError(f"observed amount outside [0, {MAX_AMOUNT}]")
        z_net = self.decision_function(X)
        comp = self.comparator
        spec = self.abstraction
        if spec.kind is Kind.DIRECT:
            return [
                judge_euclidean(comp, float(p), float(o))
                for p, o in zip(z_net[:, 0], y / spec.y_max)
            ]
        z_obs = encode_output(spec, y)
        return [judge_categorical(comp, zo, zn) for zo, zn in zip(z_obs, z_net)]

    def accepts(self, X, y) -> np.ndarray:
        return np.array([j.accepted for j in self.judge(X, y)], dtype=bool)
