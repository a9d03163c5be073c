"""Epoch/mini-batch training loop, metric tracking, and checkpointing."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset, NormStats, SchemaError, SplitSet
from .filters import FrequencyGrid
from .mlp import (
    HIDDEN_SIZES,
    AdamState,
    MlpModel,
    TrainConfig,
    adam_step,
    backward,
    cross_entropy_with_logits,
    forward,
    one_hot,
    xavier_init,
)

CHECKPOINT_SCHEMA_VERSION = 1


class NonFiniteParameterError(RuntimeError):
    """Optimization produced a NaN or infinite parameter."""


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    train_acc: float
    dev_loss: float
    dev_acc: float
    seconds: float


@dataclass
class TrainHistory:
    """Per-epoch metrics plus the final whole-split evaluation.

    Per-epoch train loss/accuracy are running means over that epoch's
    mini-batches (measured before each update); dev metrics and the final
    numbers come from full evaluation passes.
    """

    epochs: list[EpochMetrics] = field(default_factory=list)
    final: dict = field(default_factory=dict)
    config: TrainConfig | None = None

    @property
    def final_test_acc(self) -> float:
        return self.final["test_acc"]


def epoch_permutation(seed: int, epoch: int, n: int) -> np.ndarray:
    """Training order for one epoch; reproducible, different per epoch."""
    return np.random.default_rng((seed, epoch)).permutation(n)


def evaluate(model: MlpModel, data: Dataset, chunk: int = 65536):
    """Mean loss and argmax accuracy of a model over a whole dataset."""
    if data.n_records == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    loss_sum = 0.0
    correct = 0
    for start in range(0, data.n_records, chunk):
        x = data.features[start : start + chunk]
        y = data.labels[start : start + chunk]
        logits, _ = forward(model, x)
        loss_sum += float(cross_entropy_with_logits(logits, one_hot(y)).sum())
        correct += int((logits.argmax(axis=1) == y).sum())
    return loss_sum / data.n_records, correct / data.n_records


def _check_finite(model: MlpModel, epoch: int) -> None:
    for arr in (*model.weights, *model.biases):
        if not np.all(np.isfinite(arr)):
            raise NonFiniteParameterError(f"non-finite parameter after epoch {epoch}")


def train(splits: SplitSet, cfg: TrainConfig, hidden=HIDDEN_SIZES):
    """Train a fresh model on the split dataset.

    Per epoch: reshuffle the train order (seeded by config seed + epoch
    index), then run forward/backward/Adam over mini-batches of
    cfg.batch_size, final partial batch included. Returns the model (with the
    split's normalization stats and grid attached) and the history.
    """
    train_set, dev_set, test_set = splits.train, splits.dev, splits.test
    n_features = train_set.n_features
    if dev_set.n_features != n_features or test_set.n_features != n_features:
        raise ValueError("splits disagree on feature count")
    dims = [n_features, *hidden, 3]

    model = xavier_init(dims, cfg.seed, norm=train_set.norm, grid=train_set.grid)
    state = AdamState.zeros(model)
    targets = one_hot(train_set.labels)
    history = TrainHistory(config=cfg)

    n = train_set.n_records
    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        order = epoch_permutation(cfg.seed, epoch, n)
        loss_sum = 0.0
        correct = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x = train_set.features[idx]
            y = targets[idx]
            logits, cache = forward(model, x)
            loss_sum += float(cross_entropy_with_logits(logits, y).sum())
            correct += int((logits.argmax(axis=1) == train_set.labels[idx]).sum())
            grads = backward(model, cache, y)
            adam_step(model, grads, state, cfg)
        _check_finite(model, epoch)
        dev_loss, dev_acc = evaluate(model, dev_set)
        history.epochs.append(
            EpochMetrics(
                epoch=epoch,
                train_loss=loss_sum / n,
                train_acc=correct / n,
                dev_loss=dev_loss,
                dev_acc=dev_acc,
                seconds=time.perf_counter() - started,
            )
        )

    final_train = evaluate(model, train_set)
    final_dev = evaluate(model, dev_set)
    final_test = evaluate(model, test_set)
    history.final = {
        "train_loss": final_train[0],
        "train_acc": final_train[1],
        "dev_loss": final_dev[0],
        "dev_acc": final_dev[1],
        "test_loss": final_test[0],
        "test_acc": final_test[1],
    }
    return model, history


def save_history_csv(history: TrainHistory, path) -> None:
    lines = ["epoch,train_loss,train_acc,dev_loss,dev_acc,seconds"]
    for m in history.epochs:
        lines.append(
            f"{m.epoch},{m.train_loss!r},{m.train_acc!r},{m.dev_loss!r},{m.dev_acc!r},{m.seconds!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def save_checkpoint(model: MlpModel, history: TrainHistory, path) -> None:
    """Persist the model as JSON; floats keep full value (exact round-trip)."""
    payload = {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "dims": list(model.dims),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "norm_max_abs": model.norm.max_abs.tolist() if model.norm is not None else None,
        "grid": model.grid.to_dict() if model.grid is not None else None,
        "train_config": history.config.to_dict() if history.config is not None else None,
        "final_metrics": history.final,
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_checkpoint(path):
    """Read a checkpoint back; returns (model, history-with-final-metrics)."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"checkpoint is not valid JSON: {e}") from e
    if payload.get("schema_version") != CHECKPOINT_SCHEMA_VERSION:
        raise SchemaError(f"unsupported checkpoint schema_version {payload.get('schema_version')!r}")
    dims = [int(d) for d in payload["dims"]]
    try:
        weights = [np.asarray(w, dtype=np.float64) for w in payload["weights"]]
        biases = [np.asarray(b, dtype=np.float64) for b in payload["biases"]]
        model = MlpModel(
            dims,
            weights,
            biases,
            norm=NormStats(np.asarray(payload["norm_max_abs"], dtype=np.float64))
            if payload.get("norm_max_abs") is not None
            else None,
            grid=FrequencyGrid.from_dict(payload["grid"])
            if payload.get("grid") is not None
            else None,
        )
    except ValueError as e:
        raise SchemaError(f"checkpoint contents do not match declared dims: {e}") from e
    history = TrainHistory(
        final=payload.get("final_metrics") or {},
        config=TrainConfig.from_dict(payload["train_config"])
        if payload.get("train_config") is not None
        else None,
    )
    return model, history
