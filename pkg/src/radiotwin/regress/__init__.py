"""Path-loss regressors over ordered 6-D position features.

Two trainers are provided: gradient-boosted regression trees and
epsilon-insensitive RBF support vector regression.  Both consume feature
rows ``[tx.x, tx.y, tx.z, rx.x, rx.y, rx.z]`` (order fixed; swapping the
halves is a different input, which is what makes the models
direction-sensitive) and predict deterministic path loss in dB.
"""

from .gbrt import GbrtModel, GbrtParams, train_gbrt
from .modelfile import load_model, save_model
from .svr import SvrModel, SvrParams, train_svr

import numpy as np

from ..errors import ValidationError


def predict(model, X) -> np.ndarray:
    """Predict path loss (dB) for one or more feature rows."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return model.predict(X)


def evaluate_mse(model, X, y) -> float:
    """Mean squared prediction error (dB^2) on a test set."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValidationError("test set is empty")
    pred = predict(model, X)
    return float(np.mean((y - pred) ** 2))


__all__ = [
    "GbrtModel",
    "GbrtParams",
    "train_gbrt",
    "SvrModel",
    "SvrParams",
    "train_svr",
    "predict",
    "evaluate_mse",
    "save_model",
    "load_model",
]
