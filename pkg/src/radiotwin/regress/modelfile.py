"""Binary model serialization, prediction-exact across save/load.

Self-describing little-endian layout (full byte map in
``docs/model-format.md``): magic ``RTWM``, format version (u16), model
kind (u16: 1 = tree ensemble, 2 = SVR), then the kind-specific payload.
All floats are little-endian IEEE-754 binary64, so a loaded model
reproduces the saved model's predictions bit for bit.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import ModelFileError
from .gbrt import GbrtModel, Tree
from .svr import SvrModel

MAGIC = b"RTWM"
VERSION = 1
KIND_GBRT = 1
KIND_SVR = 2

_KIND_NAMES = {KIND_GBRT: "gbrt", KIND_SVR: "svr"}


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.off = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise ModelFileError(f"{self.path}: truncated model file")
        out = self.data[self.off : self.off + n]
        self.off += n
        return out

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u8(self) -> int:
        return self.take(1)[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def array(self, dtype: str, count: int) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count), dtype=dtype).copy()

    def done(self) -> None:
        if self.off != len(self.data):
            raise ModelFileError(f"{self.path}: {len(self.data) - self.off} trailing bytes")


def _arr(a: np.ndarray, dtype: str) -> bytes:
    return np.ascontiguousarray(a, dtype=dtype).tobytes()


def save_model(model, path) -> None:
    """Serialize a trained GBRT or SVR model."""
    chunks = [MAGIC, struct.pack("<H", VERSION)]
    if isinstance(model, GbrtModel):
        chunks.append(struct.pack("<H", KIND_GBRT))
        chunks.append(struct.pack("<dd", model.learning_rate, model.base_prediction))
        chunks.append(struct.pack("<I", len(model.trees)))
        for t in model.trees:
            chunks.append(struct.pack("<I", t.feature.shape[0]))
            chunks.append(_arr(t.feature, "<i4"))
            chunks.append(_arr(t.threshold, "<f8"))
            chunks.append(_arr(t.left, "<i4"))
            chunks.append(_arr(t.right, "<i4"))
            chunks.append(_arr(t.value, "<f8"))
    elif isinstance(model, SvrModel):
        chunks.append(struct.pack("<H", KIND_SVR))
        chunks.append(
            struct.pack(
                "<ddddd",
                model.kernel_gamma,
                model.bias,
                model.C,
                model.epsilon,
                model.kkt_gap,
            )
        )
        chunks.append(struct.pack("<B", 1 if model.converged else 0))
        chunks.append(struct.pack("<I", model.iterations))
        n_feat = model.feature_means.shape[0]
        chunks.append(struct.pack("<I", n_feat))
        chunks.append(_arr(model.feature_means, "<f8"))
        chunks.append(_arr(model.feature_scales, "<f8"))
        chunks.append(struct.pack("<I", model.support_vectors.shape[0]))
        chunks.append(_arr(model.support_vectors, "<f8"))
        chunks.append(_arr(model.dual_coefficients, "<f8"))
    else:
        raise ModelFileError(f"cannot serialize model of type {type(model).__name__}")
    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))


def load_model(path, expect: str | None = None):
    """Load a model file; ``expect`` ("gbrt" or "svr") enforces the kind."""
    with open(path, "rb") as fh:
        r = _Reader(fh.read(), path)
    if r.take(4) != MAGIC:
        raise ModelFileError(f"{path}: not a model file (bad magic)")
    version = r.u16()
    if version != VERSION:
        raise ModelFileError(f"{path}: unsupported format version {version}")
    kind = r.u16()
    if kind not in _KIND_NAMES:
        raise ModelFileError(f"{path}: unknown model kind tag {kind}")
    if expect is not None and _KIND_NAMES[kind] != expect:
        raise ModelFileError(
            f"{path}: expected a {expect} model, found {_KIND_NAMES[kind]}"
        )

    if kind == KIND_GBRT:
        learning_rate = r.f64()
        base = r.f64()
        n_trees = r.u32()
        trees = []
        for _ in range(n_trees):
            n_nodes = r.u32()
            feature = r.array("<i4", n_nodes).astype(np.int64)
            threshold = r.array("<f8", n_nodes)
            left = r.array("<i4", n_nodes).astype(np.int64)
            right = r.array("<i4", n_nodes).astype(np.int64)
            value = r.array("<f8", n_nodes)
            trees.append(Tree(feature, threshold, left, right, value))
        r.done()
        return GbrtModel(trees=trees, learning_rate=learning_rate, base_prediction=base)

    gamma = r.f64()
    bias = r.f64()
    C = r.f64()
    epsilon = r.f64()
    kkt_gap = r.f64()
    converged = bool(r.u8())
    iterations = r.u32()
    n_feat = r.u32()
    means = r.array("<f8", n_feat)
    scales = r.array("<f8", n_feat)
    n_sv = r.u32()
    sv = r.array("<f8", n_sv * n_feat).reshape(n_sv, n_feat)
    coef = r.array("<f8", n_sv)
    r.done()
    return SvrModel(
        support_vectors=sv,
        dual_coefficients=coef,
        bias=bias,
        kernel_gamma=gamma,
        feature_means=means,
        feature_scales=scales,
        C=C,
        epsilon=epsilon,
        converged=converged,
        iterations=iterations,
        kkt_gap=kkt_gap,
    )
