"""Versioned UTF-8 model files (JSON) for trained oracles.

Floats are written with Python's shortest round-trip repr, so
``save -> load -> save`` reproduces the file byte for byte and a loaded
network computes bit-identical outputs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .encode import AbstractionSpec
from .estimator import ArtificialSpecification, abstraction_for, comparator_for
from .fnn import Network

FORMAT = "nnoracle-model"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def model_document(est: ArtificialSpecification, meta: dict | None = None) -> dict:
    meta = dict(getattr(est, "model_meta_", {}) if meta is None else meta)
    net = est.network_
    return {
        "format": FORMAT,
        "version": VERSION,
        "variant": est.variant,
        "layer_sizes": list(net.layer_sizes),
        "input_scaling": est.input_scaling,
        "abstraction": est.abstraction.to_dict(),
        "comparator": est.comparator.to_dict(),
        "training": est.train_config().to_dict(),
        "mse_final": float(est.mse_),
        "meta": meta,
        "weights": [W.tolist() for W in net.weights],
    }


def dumps(est: ArtificialSpecification, meta: dict | None = None) -> str:
    return json.dumps(model_document(est, meta), indent=1) + "\n"


def save_model(est: ArtificialSpecification, path, meta: dict | None = None) -> None:
    Path(path).write_text(dumps(est, meta), encoding="utf-8")


def loads(text: str) -> ArtificialSpecification:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not a model file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFormatError("not a model file: missing format marker")
    if doc.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    try:
        abstraction = AbstractionSpec.from_dict(doc["abstraction"])
        training = doc["training"]
        est = ArtificialSpecification(
            variant=doc["variant"],
            n=abstraction.n,
            aggressiveness=doc["comparator"]["aggressiveness"],
            mode=training["mode"],
            learning_rate=training["learning_rate"],
            epochs=training["epochs"],
            hidden=doc["layer_sizes"][1],
            seed=training["seed"],
            input_scaling=doc["input_scaling"],
            shuffle=training["shuffle"],
            derivative_clip=training["derivative_clip"],
        )
        if abstraction != abstraction_for(est.variant, est.n):
            raise ModelFormatError("abstraction does not match the variant")
        if doc["comparator"] != comparator_for(est.variant, est.aggressiveness).to_dict():
            raise ModelFormatError("comparator does not match the variant")
        sizes = doc["layer_sizes"]
        if len(sizes) != 3 or sizes[0] != 8 or sizes[-1] != abstraction.dim:
            raise ModelFormatError(f"layer sizes {sizes} do not fit the abstraction")
        weights = [np.array(W, dtype=float) for W in doc["weights"]]
        est.network_ = Network(tuple(doc["layer_sizes"]), weights)
        est.mse_ = float(doc["mse_final"])
        est.history_ = None
        est.model_meta_ = dict(doc.get("meta", {}))
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from None
    return est


def load_model(path) -> ArtificialSpecification:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"cannot read model {path}: {exc}") from None
    return loads(text)
