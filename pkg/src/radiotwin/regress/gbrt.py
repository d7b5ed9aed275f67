"""Gradient-boosted regression trees with exact, deterministic split search.

Stagewise squared-error boosting: the ensemble starts at the target mean
and every tree fits the current residuals.  Split search is exact over all
midpoints between sorted distinct feature values; ties in gain are broken
by (lowest feature index, lowest threshold) so training is reproducible
across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import ValidationError

_GAIN_EPS = 1e-12


@dataclass
class GbrtParams:
    n_trees: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    min_samples_leaf: int = 1
    seed: int = 0  # reserved; training involves no randomness


@dataclass
class Tree:
    """One regression tree as flat arrays; feature == -1 marks a leaf."""

    feature: np.ndarray  # int64
    threshold: np.ndarray  # float64
    left: np.ndarray  # int64, local child index
    right: np.ndarray  # int64
    value: np.ndarray  # float64, leaf prediction (unscaled residual mean)


@dataclass
class GbrtModel:
    trees: list[Tree]
    learning_rate: float
    base_prediction: float
    train_mse_per_stage: np.ndarray = field(default_factory=lambda: np.empty(0))
    _flat: tuple | None = field(default=None, repr=False, compare=False)

    def _flattened(self):
        if self._flat is None:
            if self.trees:
                roots = []
                offset = 0
                feats, thrs, lefts, rights, vals = [], [], [], [], []
                for t in self.trees:
                    roots.append(offset)
                    feats.append(t.feature)
                    thrs.append(t.threshold)
                    lefts.append(t.left + offset)
                    rights.append(t.right + offset)
                    vals.append(t.value)
                    offset += t.feature.shape[0]
                self._flat = (
                    np.concatenate(feats),
                    np.concatenate(thrs),
                    np.concatenate(lefts),
                    np.concatenate(rights),
                    np.concatenate(vals),
                    np.array(roots, dtype=np.int64),
                )
            else:
                self._flat = (
                    np.array([-1], dtype=np.int64),
                    np.zeros(1),
                    np.zeros(1, dtype=np.int64),
                    np.zeros(1, dtype=np.int64),
                    np.zeros(1),
                    np.empty(0, dtype=np.int64),
                )
        return self._flat

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
        feat, thr, left, right, value, roots = self._flattened()
        if roots.shape[0] == 0:
            return np.full(X.shape[0], self.base_prediction)
        acc = kernels.tree_ensemble_predict(X, feat, thr, left, right, value, roots)
        return self.base_prediction + self.learning_rate * acc


def _fit_tree(X: np.ndarray, resid: np.ndarray, max_depth: int, min_leaf: int):
    """Grow one tree on the residuals; returns (Tree, leaf assignment lists)."""
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    leaf_groups: list[tuple[int, np.ndarray]] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(0)
        right.append(0)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        vals = resid[idx]
        n = idx.shape[0]
        if depth >= max_depth or n < 2 * min_leaf or np.all(vals == vals[0]):
            value[node] = float(np.mean(vals))
            leaf_groups.append((node, idx))
            continue

        total = float(np.sum(vals))
        parent_score = total * total / n
        best_score = -np.inf
        best_f = -1
        best_pos = 0
        best_order = None
        for f in range(X.shape[1]):
            col = X[idx, f]
            order = np.argsort(col, kind="stable")
            score, pos = kernels.best_split(
                np.ascontiguousarray(col[order]),
                np.ascontiguousarray(vals[order]),
                min_leaf,
            )
            if pos > 0 and score > best_score:
                best_score = score
                best_f = f
                best_pos = pos
                best_order = order

        if best_f < 0 or best_score - parent_score <= _GAIN_EPS:
            value[node] = float(np.mean(vals))
            leaf_groups.append((node, idx))
            continue

        sorted_idx = idx[best_order]
        xs = X[sorted_idx, best_f]
        a, b = xs[best_pos - 1], xs[best_pos]
        thr = 0.5 * (a + b)
        if thr >= b:  # midpoint rounded onto the right value
            thr = a
        lchild = new_node()
        rchild = new_node()
        feature[node] = best_f
        threshold[node] = thr
        left[node] = lchild
        right[node] = rchild
        stack.append((rchild, sorted_idx[best_pos:], depth + 1))
        stack.append((lchild, sorted_idx[:best_pos], depth + 1))

    tree = Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value),
    )
    return tree, leaf_groups


def train_gbrt(X, y, params: GbrtParams | None = None) -> GbrtModel:
    """Train the boosted ensemble; deterministic for fixed inputs."""
    params = params or GbrtParams()
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise ValidationError("training set is empty")
    if X.shape[0] != y.shape[0]:
        raise ValidationError("feature/target row counts differ")
    if params.min_samples_leaf < 1:
        raise ValidationError("min_samples_leaf must be >= 1")

    base = float(np.mean(y))
    resid = y - base
    trees: list[Tree] = []
    stage_mse = []
    for _ in range(params.n_trees):
        tree, leaf_groups = _fit_tree(X, resid, params.max_depth, params.min_samples_leaf)
        for node, idx in leaf_groups:
            resid[idx] -= params.learning_rate * tree.value[node]
        trees.append(tree)
        stage_mse.append(float(np.mean(resid**2)))
    return GbrtModel(
        trees=trees,
        learning_rate=params.learning_rate,
        base_prediction=base,
        train_mse_per_stage=np.array(stage_mse),
    )
