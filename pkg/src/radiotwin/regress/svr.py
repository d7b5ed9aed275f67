"""Epsilon-insensitive support vector regression with an RBF kernel.

Features are standardized to zero mean / unit variance before kernel
evaluation.  The dual is solved by sequential pairwise optimization
(steepest feasible pair plus second-order partner selection) down to a
KKT-gap tolerance; a kernel-row cache bounds the memory footprint.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import ValidationError


@dataclass
class SvrParams:
    C: float = 1.0
    epsilon: float = 0.1
    gamma: float | str = "scale"  # "scale" -> 1 / (n_features * var(standardized X))
    tolerance: float = 1e-3
    max_iterations: int | None = None  # default 10 * N^2
    cache_mb: float = 256.0
    seed: int = 0  # reserved; the solver involves no randomness


@dataclass
class SvrModel:
    support_vectors: np.ndarray  # standardized feature rows
    dual_coefficients: np.ndarray  # in [-C, C], same length as support_vectors
    bias: float
    kernel_gamma: float
    feature_means: np.ndarray
    feature_scales: np.ndarray
    C: float = 1.0
    epsilon: float = 0.1
    converged: bool = True
    iterations: int = 0
    kkt_gap: float = 0.0

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.feature_means) / self.feature_scales

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Xs = np.ascontiguousarray(self.standardize(X))
        out = kernels.rbf_predict(
            Xs, self.support_vectors, self.dual_coefficients, self.kernel_gamma
        )
        return out + self.bias


def _resolve_gamma(gamma, Xs: np.ndarray) -> float:
    if isinstance(gamma, str):
        if gamma != "scale":
            raise ValidationError(f"unknown gamma mode {gamma!r}")
        var = float(Xs.var())
        return 1.0 / (Xs.shape[1] * var) if var > 0 else 1.0
    g = float(gamma)
    if g <= 0:
        raise ValidationError("gamma must be > 0")
    return g


def train_svr(X, y, params: SvrParams | None = None) -> SvrModel:
    params = params or SvrParams()
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
    y = np.ascontiguousarray(np.asarray(y, dtype=float))
    n = X.shape[0]
    if n == 0:
        raise ValidationError("training set is empty")
    if n != y.shape[0]:
        raise ValidationError("feature/target row counts differ")
    if params.C <= 0:
        raise ValidationError("C must be > 0")
    if params.epsilon < 0:
        raise ValidationError("epsilon must be >= 0")

    means = X.mean(axis=0)
    scales = X.std(axis=0)
    scales = np.where(scales == 0.0, 1.0, scales)
    Xs = np.ascontiguousarray((X - means) / scales)
    gamma = _resolve_gamma(params.gamma, Xs)

    max_iter = params.max_iterations
    if max_iter is None:
        max_iter = 10 * n * n
    cache_slots = int(params.cache_mb * 2**20 / (8 * max(n, 1)))
    cache_slots = max(2, min(cache_slots, n))

    beta, bias, iters, gap, converged = kernels.smo_solve(
        Xs, y, params.C, params.epsilon, gamma, params.tolerance, max_iter, cache_slots
    )
    if not converged:
        warnings.warn(
            f"SVR solver stopped after {iters} iterations with KKT gap {gap:.3g} "
            f"(> tolerance {params.tolerance:g})",
            RuntimeWarning,
            stacklevel=2,
        )

    mask = np.abs(beta) > 1e-12
    return SvrModel(
        support_vectors=np.ascontiguousarray(Xs[mask]),
        dual_coefficients=np.ascontiguousarray(beta[mask]),
        bias=float(bias),
        kernel_gamma=gamma,
        feature_means=means,
        feature_scales=scales,
        C=params.C,
        epsilon=params.epsilon,
        converged=bool(converged),
        iterations=int(iters),
        kkt_gap=float(gap),
    )
