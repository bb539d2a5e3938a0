"""MSE training loop: AdamW, linear warmup then linear decay, epoch-wise dev
evaluation, best-checkpoint selection.

Determinism contract: (corpus, store, hyperparameters incl. seed) fully
determine the returned model, bitwise. All randomness is drawn from labeled
streams derived from the single seed, so adding a consumer never perturbs
unrelated streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .corpus import Corpus, TargetVector
from .errors import ConfigError, NonFiniteLoss, ShapeMismatch
from .evaluation import EvalReport, evaluate_sliced
from .models import (
    FusionModel,
    backward_batch,
    forward_batch,
    init_fusion,
    input_matrix,
    predict,
)
from .store import EmbeddingStore

# fixed stream labels: adding a consumer must not shift existing streams
_STREAM_LABELS = {"init": 0, "shuffle": 1, "dropout": 2}


def rng_stream(seed: int, label: str) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed, _STREAM_LABELS[label]]))
    )


@dataclass(frozen=True)
class HyperParams:
    learning_rate: float = 5e-2
    weight_decay: float = 1e-2
    epochs: int = 100
    batch_size: int = 64
    warmup_fraction: float = 0.10
    dropout: float = 0.5
    hidden: int = 1024
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.hidden < 1:
            raise ConfigError("epochs >= 0, batch_size >= 1, hidden >= 1 required")
        if not (0.0 <= self.warmup_fraction <= 1.0):
            raise ConfigError("warmup_fraction must lie in [0, 1]")
        if not (0.0 <= self.dropout < 1.0):
            raise ConfigError("dropout must lie in [0, 1)")


_INT_FIELDS = {"epochs", "batch_size", "hidden", "seed"}


def load_config(path: str | Path, **overrides) -> HyperParams:
    """Flat ``key = value`` config file; keys are HyperParams field names,
    unknown keys are errors."""
    known = {f.name for f in fields(HyperParams)}
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, _, value = (part.strip() for part in line.partition("="))
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            try:
                values[key] = int(value) if key in _INT_FIELDS else float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad value {value!r} for {key!r}")
    values.update(overrides)
    return HyperParams(**values)


@dataclass
class OptimizerState:
    step_count: int
    first_moment: dict[str, np.ndarray]
    second_moment: dict[str, np.ndarray]


def init_optimizer(params: dict[str, np.ndarray]) -> OptimizerState:
    return OptimizerState(
        step_count=0,
        first_moment={k: np.zeros_like(v) for k, v in params.items()},
        second_moment={k: np.zeros_like(v) for k, v in params.items()},
    )


# biases are exempt from decoupled weight decay
_DECAY_EXEMPT = {"b_h", "b_o"}


def adamw_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    hp: HyperParams,
    lr_t: float,
) -> None:
    """One decoupled-weight-decay Adam update, in place."""
    state.step_count += 1
    t = state.step_count
    b1, b2, eps = hp.adam_beta1, hp.adam_beta2, hp.adam_eps
    for name, theta in params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ShapeMismatch(f"{name}: grad {g.shape} vs param {theta.shape}")
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        wd = 0.0 if name in _DECAY_EXEMPT else hp.weight_decay
        theta -= lr_t * (m_hat / (np.sqrt(v_hat) + eps) + wd * theta)


def lr_at(step: int, total_steps: int, hp: HyperParams) -> float:
    """Linear ramp 0 -> learning_rate over the warmup steps, then linear
    decay to 0 at total_steps."""
    warmup = math.ceil(hp.warmup_fraction * total_steps)
    if step <= warmup:
        if warmup == 0:
            return hp.learning_rate
        return hp.learning_rate * step / warmup
    return hp.learning_rate * (total_steps - step) / (total_steps - warmup)


def mse_loss(pred, target) -> tuple[float, np.ndarray]:
    """Mean over the 4 components of squared error, plus gradient w.r.t. pred."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(
        target.as_tuple() if isinstance(target, TargetVector) else target,
        dtype=np.float64,
    )
    diff = p - t
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


@dataclass(frozen=True)
class TrainLogEntry:
    epoch: int
    train_mse: float
    dev_report: EvalReport
    lr: float


TrainLog = list[TrainLogEntry]

TRAIN_LOG_HEADER = "epoch,train_mse,dev_ffd_avg,dev_ffd_std,dev_trt_avg,dev_trt_std,dev_overall,lr"


def train_log_lines(log: TrainLog) -> list[str]:
    lines = [TRAIN_LOG_HEADER]
    for e in log:
        r = e.dev_report
        values = [str(e.epoch)] + [
            repr(v) for v in (e.train_mse, *r.per_target, r.overall, e.lr)
        ]
        lines.append(",".join(values))
    return lines


def train(
    train_corpus: Corpus,
    dev_corpus: Corpus,
    store: EmbeddingStore,
    hp: HyperParams,
    features_only: bool = False,
) -> tuple[FusionModel, TrainLog]:
    """Train the fusion head (or the features-only MLP baseline) and return
    the checkpoint with the lowest overall dev MAE plus the full log."""
    dim = 0 if features_only else store.dim
    model = init_fusion(dim, hp.hidden, hp.dropout, rng_stream(hp.seed, "init"))
    if hp.epochs == 0:
        return model, []

    X = input_matrix(train_corpus, store, dim)
    T = np.array([r.targets.as_tuple() for r in train_corpus.records])
    n = X.shape[0]
    n_batches = math.ceil(n / hp.batch_size)
    total_steps = hp.epochs * n_batches

    shuffle_rng = rng_stream(hp.seed, "shuffle")
    dropout_rng = rng_stream(hp.seed, "dropout")
    params = model.params()
    state = init_optimizer(params)

    log: TrainLog = []
    best: Optional[FusionModel] = None
    best_overall = math.inf
    global_step = 0
    for epoch in range(hp.epochs):
        perm = shuffle_rng.permutation(n)
        epoch_sq_sum = 0.0
        lr_t = 0.0
        for b in range(n_batches):
            idx = perm[b * hp.batch_size : (b + 1) * hp.batch_size]
            global_step += 1
            lr_t = lr_at(global_step, total_steps, hp)
            preds, cache = forward_batch(model, X[idx], train=True, rng=dropout_rng)
            diff = preds - T[idx]
            batch_loss = float(np.mean(diff * diff))
            if not math.isfinite(batch_loss):
                raise NonFiniteLoss(f"epoch {epoch}, step {global_step}: loss {batch_loss}")
            grads = backward_batch(model, cache, 2.0 * diff / diff.size)
            adamw_step(params, grads, state, hp, lr_t)
            epoch_sq_sum += batch_loss * len(idx)
        dev_preds = predict(model, dev_corpus, store)
        dev_report = evaluate_sliced(dev_preds, dev_corpus)[0]
        log.append(
            TrainLogEntry(
                epoch=epoch,
                train_mse=epoch_sq_sum / n,
                dev_report=dev_report,
                lr=lr_t,
            )
        )
        if dev_report.overall < best_overall:
            best_overall = dev_report.overall
            best = model.copy()
    return best, log
