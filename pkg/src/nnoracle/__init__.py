"""Trained feed-forward networks used as automated test oracles."""

from .estimator import ArtificialSpecification
from .modelio import load_model, save_model

__all__ = ["ArtificialSpecification", "load_model", "save_model"]
__version__ = "0.1.0"
