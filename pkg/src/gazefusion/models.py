"""The fusion regression model and the in-scope baselines.

Fusion architecture: concat(embedding, [tok_len, word_char_len, rel_len])
-> hidden layer (ReLU, inverted dropout at train time) -> 4-output head
(FFDAvg, FFDStd, TRTAvg, TRTStd). The MLP baseline is the same network with
dim = 0, i.e. features only. All arithmetic is 64-bit; stored 32-bit
embeddings are widened on load.

Checkpoint format, little-endian: magic ``GAZEMDL1``, u32 version, model
kind tag u8, dims, then parameters as f64 in declared field order, CRC-32
trailer.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .corpus import Corpus
from .errors import (
    BadMagic,
    ChecksumMismatch,
    DimMismatch,
    EmptyCorpus,
    IoFailure,
    ShapeMismatch,
    SingularSystem,
    StaleCache,
    TruncatedFile,
    UnsupportedVersion,
)
from .features import FeatureVector, featurize_sentence
from .corpus import group_sentences
from .store import EmbeddingStore, lookup

N_TARGETS = 4
N_FEATURES = 3

MODEL_MAGIC = b"GAZEMDL1"
MODEL_VERSION = 1
KIND_FUSION = 1
KIND_MEDIAN = 2
KIND_LINEAR = 3
KIND_MLP = 4


@dataclass
class FusionModel:
    dim: int
    hidden: int
    dropout_rate: float
    W_h: np.ndarray  # (dim+3, hidden)
    b_h: np.ndarray  # (hidden,)
    W_o: np.ndarray  # (hidden, 4)
    b_o: np.ndarray  # (4,)

    def params(self) -> dict[str, np.ndarray]:
        return {"W_h": self.W_h, "b_h": self.b_h, "W_o": self.W_o, "b_o": self.b_o}

    def copy(self) -> "FusionModel":
        return FusionModel(
            self.dim,
            self.hidden,
            self.dropout_rate,
            self.W_h.copy(),
            self.b_h.copy(),
            self.W_o.copy(),
            self.b_o.copy(),
        )


# MLP baseline is structurally a features-only fusion model
MlpBaseline = FusionModel


@dataclass
class MedianBaseline:
    medians: np.ndarray  # (4,)


@dataclass
class LinearModel:
    W: np.ndarray  # (3, 4)
    b: np.ndarray  # (4,)
    ridge_lambda: float


Model = Union[FusionModel, MedianBaseline, LinearModel]


def init_fusion(
    dim: int, hidden: int, dropout_rate: float, rng: np.random.Generator
) -> FusionModel:
    """Seeded uniform init, bounds +-sqrt(6 / (fan_in + fan_out))."""

    def uniform(fan_in: int, fan_out: int, shape) -> np.ndarray:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=shape)

    n_in = dim + N_FEATURES
    return FusionModel(
        dim=dim,
        hidden=hidden,
        dropout_rate=dropout_rate,
        W_h=uniform(n_in, hidden, (n_in, hidden)),
        b_h=np.zeros(hidden),
        W_o=uniform(hidden, N_TARGETS, (hidden, N_TARGETS)),
        b_o=np.zeros(N_TARGETS),
    )


@dataclass
class ForwardCache:
    model: FusionModel
    x: np.ndarray          # (B, dim+3) inputs
    pre: np.ndarray        # (B, hidden) pre-activation
    h: np.ndarray          # (B, hidden) post-activation, post-dropout
    drop_scale: Optional[np.ndarray]  # (B, hidden) mask/(1-p), or None


def forward_batch(
    model: FusionModel,
    X: np.ndarray,
    train: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> tuple[np.ndarray, ForwardCache]:
    if X.ndim != 2 or X.shape[1] != model.dim + N_FEATURES:
        raise DimMismatch(
            f"input shape {X.shape}, expected (B, {model.dim + N_FEATURES})"
        )
    pre = X @ model.W_h + model.b_h
    h = np.maximum(pre, 0.0)
    drop_scale = None
    if train and model.dropout_rate > 0.0:
        keep = rng.random(h.shape) >= model.dropout_rate
        drop_scale = keep / (1.0 - model.dropout_rate)
        h = h * drop_scale
    y = h @ model.W_o + model.b_o
    return y, ForwardCache(model=model, x=X, pre=pre, h=h, drop_scale=drop_scale)


def backward_batch(
    model: FusionModel, cache: ForwardCache, grad_out: np.ndarray
) -> dict[str, np.ndarray]:
    """Exact gradients of sum(output * grad_out) w.r.t. every parameter."""
    if cache.model is not model:
        raise StaleCache("cache was produced by a different model instance")
    if grad_out.shape != (cache.x.shape[0], N_TARGETS):
        raise ShapeMismatch(f"grad_out shape {grad_out.shape}")
    g_Wo = cache.h.T @ grad_out
    g_bo = grad_out.sum(axis=0)
    g_h = grad_out @ model.W_o.T
    if cache.drop_scale is not None:
        g_h = g_h * cache.drop_scale
    g_pre = g_h * (cache.pre > 0.0)
    g_Wh = cache.x.T @ g_pre
    g_bh = g_pre.sum(axis=0)
    return {"W_h": g_Wh, "b_h": g_bh, "W_o": g_Wo, "b_o": g_bo}


def fusion_forward(
    model: FusionModel,
    embedding: np.ndarray,
    features: FeatureVector,
    mode: str = "infer",
    rng: Optional[np.random.Generator] = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Single-token forward pass. Infer mode is deterministic and consumes
    no randomness."""
    emb = np.asarray(embedding, dtype=np.float64).ravel()
    if emb.shape[0] != model.dim:
        raise DimMismatch(f"embedding length {emb.shape[0]}, model dim {model.dim}")
    x = np.concatenate([emb, np.array(features.as_tuple())])[None, :]
    y, cache = forward_batch(model, x, train=(mode == "train"), rng=rng)
    return y[0], cache


def fusion_backward(
    model: FusionModel, cache: ForwardCache, grad_out: np.ndarray
) -> dict[str, np.ndarray]:
    g = np.asarray(grad_out, dtype=np.float64).ravel()
    if g.shape[0] != N_TARGETS:
        raise ShapeMismatch(f"grad_out length {g.shape[0]}")
    return backward_batch(model, cache, g[None, :])


# -- baselines -------------------------------------------------------------


def fit_median(train: Corpus) -> MedianBaseline:
    """Per-target median; even counts take the mean of the two central order
    statistics."""
    if len(train) == 0:
        raise EmptyCorpus("cannot fit median on an empty corpus")
    targets = np.array([r.targets.as_tuple() for r in train.records])
    return MedianBaseline(medians=np.median(targets, axis=0))


def feature_matrix(corpus: Corpus, store: EmbeddingStore) -> np.ndarray:
    """(N, 3) raw feature matrix aligned with corpus record order."""
    by_key: dict[tuple[str, int, int], FeatureVector] = {}
    for group in group_sentences(corpus):
        for record, fv in zip(group, featurize_sentence(group, store)):
            by_key[record.key] = fv
    return np.array([by_key[r.key].as_tuple() for r in corpus.records])


def input_matrix(corpus: Corpus, store: EmbeddingStore, dim: int) -> np.ndarray:
    """(N, dim+3) fusion inputs: widened embeddings then raw features.

    dim = 0 selects the features-only (MLP baseline) input.
    """
    feats = feature_matrix(corpus, store)
    if dim == 0:
        return feats
    if store.dim != dim:
        raise DimMismatch(f"store dim {store.dim}, model dim {dim}")
    emb = np.empty((len(corpus), dim))
    for i, r in enumerate(corpus.records):
        _, vec = lookup(store, r.key)
        emb[i] = vec.astype(np.float64)
    return np.hstack([emb, feats])


def fit_linear(
    train: Corpus, store: EmbeddingStore, ridge_lambda: float = 0.0
) -> LinearModel:
    """Closed-form ridge on the 3 features plus an unpenalized intercept."""
    if len(train) < N_FEATURES + 1:
        raise EmptyCorpus(f"need at least {N_FEATURES + 1} training tokens")
    X = feature_matrix(train, store)
    A = np.hstack([X, np.ones((X.shape[0], 1))])
    Y = np.array([r.targets.as_tuple() for r in train.records])
    gram = A.T @ A
    if ridge_lambda == 0.0 and np.linalg.matrix_rank(A) < A.shape[1]:
        raise SingularSystem("rank-deficient design with ridge_lambda = 0")
    penalty = ridge_lambda * np.diag([1.0, 1.0, 1.0, 0.0])
    coef = np.linalg.solve(gram + penalty, A.T @ Y)  # (4, 4): rows = 3 feats + bias
    return LinearModel(W=coef[:N_FEATURES], b=coef[N_FEATURES], ridge_lambda=ridge_lambda)


# -- shared inference path -------------------------------------------------


def _mask_columns(X: np.ndarray, dim: int, mask) -> np.ndarray:
    """Zero the masked feature columns at the model-input boundary."""
    if mask is None:
        return X
    X = X.copy()
    flags = (mask.zero_tok_len, mask.zero_word_char_len, mask.zero_rel_len)
    for i, flag in enumerate(flags):
        if flag:
            X[:, dim + i] = 0.0
    return X


def predict(
    model: Model, corpus: Corpus, store: EmbeddingStore, mask=None
) -> np.ndarray:
    """Deterministic inference-mode predictions, clipped to [0, 100].

    Masked features are replaced by 0 before the forward pass.
    """
    if isinstance(model, MedianBaseline):
        return np.tile(model.medians, (len(corpus), 1))
    if isinstance(model, LinearModel):
        X = _mask_columns(feature_matrix(corpus, store), 0, mask)
        return np.clip(X @ model.W + model.b, 0.0, 100.0)
    X = _mask_columns(input_matrix(corpus, store, model.dim), model.dim, mask)
    Y, _ = forward_batch(model, X, train=False)
    return np.clip(Y, 0.0, 100.0)


def param_checksum(model: FusionModel) -> int:
    crc = 0
    for name in ("W_h", "b_h", "W_o", "b_o"):
        crc = zlib.crc32(np.ascontiguousarray(model.params()[name]).tobytes(), crc)
    return crc


# -- checkpoint IO ---------------------------------------------------------


def _f64_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def model_to_bytes(model: Model) -> bytes:
    parts = [MODEL_MAGIC, struct.pack("<I", MODEL_VERSION)]
    if isinstance(model, MedianBaseline):
        parts.append(struct.pack("<B", KIND_MEDIAN))
        parts.append(_f64_bytes(model.medians))
    elif isinstance(model, LinearModel):
        parts.append(struct.pack("<B", KIND_LINEAR))
        parts.append(struct.pack("<d", model.ridge_lambda))
        parts.append(_f64_bytes(model.W))
        parts.append(_f64_bytes(model.b))
    else:
        kind = KIND_MLP if model.dim == 0 else KIND_FUSION
        parts.append(struct.pack("<B", kind))
        parts.append(struct.pack("<IId", model.dim, model.hidden, model.dropout_rate))
        for name in ("W_h", "b_h", "W_o", "b_o"):
            parts.append(_f64_bytes(model.params()[name]))
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def model_from_bytes(data: bytes) -> Model:
    if len(data) < len(MODEL_MAGIC):
        raise TruncatedFile("shorter than magic")
    if data[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise BadMagic(f"bad magic {data[:len(MODEL_MAGIC)]!r}")
    if len(data) < len(MODEL_MAGIC) + 4 + 1 + 4:
        raise TruncatedFile("missing header")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise ChecksumMismatch("CRC-32 trailer does not match")
    off = len(MODEL_MAGIC)
    (version,) = struct.unpack_from("<I", body, off)
    off += 4
    if version != MODEL_VERSION:
        raise UnsupportedVersion(f"version {version}")
    (kind,) = struct.unpack_from("<B", body, off)
    off += 1

    def floats(n: int) -> np.ndarray:
        nonlocal off
        if off + 8 * n > len(body):
            raise TruncatedFile("parameter block truncated")
        out = np.frombuffer(body, dtype="<f8", count=n, offset=off).copy()
        off += 8 * n
        return out

    if kind == KIND_MEDIAN:
        return MedianBaseline(medians=floats(N_TARGETS))
    if kind == KIND_LINEAR:
        lam = floats(1)[0]
        W = floats(N_FEATURES * N_TARGETS).reshape(N_FEATURES, N_TARGETS)
        return LinearModel(W=W, b=floats(N_TARGETS), ridge_lambda=lam)
    if kind in (KIND_FUSION, KIND_MLP):
        if off + 16 > len(body):
            raise TruncatedFile("fusion header truncated")
        dim, hidden, dropout = struct.unpack_from("<IId", body, off)
        off += 16
        n_in = dim + N_FEATURES
        return FusionModel(
            dim=dim,
            hidden=hidden,
            dropout_rate=dropout,
            W_h=floats(n_in * hidden).reshape(n_in, hidden),
            b_h=floats(hidden),
            W_o=floats(hidden * N_TARGETS).reshape(hidden, N_TARGETS),
            b_o=floats(N_TARGETS),
        )
    raise UnsupportedVersion(f"unknown model kind {kind}")


def save_model(model: Model, path: str | Path) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(model_to_bytes(model))
    except OSError as exc:
        raise IoFailure(str(exc))


def load_model(path: str | Path) -> Model:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc))
    return model_from_bytes(data)
