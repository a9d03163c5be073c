"""From-scratch two-hidden-layer perceptron with tanh units and Adam.

Forward pass:  a1 = tanh(W1 x + b1), a2 = tanh(W2 a1 + b2), z = W3 a2 + b3.
The output stays in logit space; softmax is applied by the loss and by
``predict``. The loss is softmax cross-entropy in its fused log-sum-exp form,
and ``backward`` returns analytic gradients averaged over the batch, so the
learning rate is independent of batch size.

All math is float64. Weight matrices are (fan_out, fan_in); batches are rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import NormStats
from .filters import FrequencyGrid, MicClass

HIDDEN_SIZES = (25, 12)
N_CLASSES = 3


@dataclass
class TrainConfig:
    """Optimization hyperparameters."""

    learning_rate: float = 1e-4
    batch_size: int = 128
    epochs: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 7

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass(eq=False)
class MlpModel:
    """Network parameters plus the preprocessing needed for standalone inference.

    ``norm`` and ``grid`` describe how raw amplitude/phase sweeps must be
    prepared before they are fed to the network.
    """

    dims: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    norm: NormStats | None = None
    grid: FrequencyGrid | None = None

    def __post_init__(self):
        if len(self.dims) != 4 or self.dims[-1] != N_CLASSES:
            raise ValueError(f"dims must be [n_in, h1, h2, {N_CLASSES}], got {self.dims}")
        if len(self.weights) != 3 or len(self.biases) != 3:
            raise ValueError("expected three weight matrices and three bias vectors")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.dims[i + 1], self.dims[i]):
                raise ValueError(f"layer {i} weight shape {w.shape} != {(self.dims[i+1], self.dims[i])}")
            if b.shape != (self.dims[i + 1],):
                raise ValueError(f"layer {i} bias shape {b.shape} != {(self.dims[i+1],)}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i} has non-finite parameters")

    @property
    def n_inputs(self) -> int:
        return self.dims[0]

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "MlpModel":
        return MlpModel(
            list(self.dims),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.norm,
            self.grid,
        )


@dataclass
class ForwardCache:
    """Intermediates kept from a forward pass for backpropagation."""

    x: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    logits: np.ndarray


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class AdamState:
    """First/second moment accumulators, shaped like the model parameters."""

    m_weights: list[np.ndarray]
    v_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_biases: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros(cls, model: MlpModel) -> "AdamState":
        return cls(
            [np.zeros_like(w) for w in model.weights],
            [np.zeros_like(w) for w in model.weights],
            [np.zeros_like(b) for b in model.biases],
            [np.zeros_like(b) for b in model.biases],
        )


def xavier_init(dims, seed: int, norm: NormStats | None = None,
                grid: FrequencyGrid | None = None) -> MlpModel:
    """Glorot-uniform weights, zero biases, deterministic under the seed.

    Each layer draws from U[-L, L] with L = sqrt(6 / (fan_in + fan_out)).
    """
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(list(dims), weights, biases, norm, grid)


def forward(model: MlpModel, x_batch: np.ndarray):
    """Batch forward pass. Returns (logits, cache); logits shape (B, 3)."""
    x = np.asarray(x_batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_inputs:
        raise ValueError(f"expected input shape (B, {model.n_inputs}), got {x.shape}")
    w1, w2, w3 = model.weights
    b1, b2, b3 = model.biases
    a1 = np.tanh(x @ w1.T + b1)
    a2 = np.tanh(a1 @ w2.T + b2)
    logits = a2 @ w3.T + b3
    return logits, ForwardCache(x, a1, a2, logits)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-shifted softmax along the last axis; safe for large logits."""
    z = np.asarray(logits, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_with_logits(logits: np.ndarray, y_onehot: np.ndarray):
    """Fused softmax cross-entropy: log-sum-exp(z) - z_true.

    A (3,) input returns a scalar; a (B, 3) batch returns per-sample losses.
    """
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(y_onehot, dtype=np.float64)
    if z.shape != y.shape:
        raise ValueError(f"logits shape {z.shape} != labels shape {y.shape}")
    zmax = z.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(z - zmax).sum(axis=-1)) + np.squeeze(zmax, axis=-1)
    z_true = (z * y).sum(axis=-1)
    loss = lse - z_true
    return float(loss) if loss.ndim == 0 else loss


def backward(model: MlpModel, cache: ForwardCache, y_batch: np.ndarray) -> Gradients:
    """Analytic gradients of the mean batch loss for every weight and bias.

    Output delta is softmax(logits) - y per sample; hidden deltas use
    tanh' = 1 - a^2.
    """
    y = np.asarray(y_batch, dtype=np.float64)
    if y.shape != cache.logits.shape:
        raise ValueError(f"labels shape {y.shape} != logits shape {cache.logits.shape}")
    batch = y.shape[0]
    w2, w3 = model.weights[1], model.weights[2]

    d3 = (softmax(cache.logits) - y) / batch
    g_w3 = d3.T @ cache.a2
    g_b3 = d3.sum(axis=0)
    d2 = (d3 @ w3) * (1.0 - cache.a2 * cache.a2)
    g_w2 = d2.T @ cache.a1
    g_b2 = d2.sum(axis=0)
    d1 = (d2 @ w2) * (1.0 - cache.a1 * cache.a1)
    g_w1 = d1.T @ cache.x
    g_b1 = d1.sum(axis=0)
    return Gradients([g_w1, g_w2, g_w3], [g_b1, g_b2, g_b3])


def adam_step(model: MlpModel, grads: Gradients, state: AdamState,
              cfg: TrainConfig):
    """One Adam update, in place: theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)."""
    state.t += 1
    c1 = 1.0 - cfg.beta1 ** state.t
    c2 = 1.0 - cfg.beta2 ** state.t
    for params, gs, ms, vs in (
        (model.weights, grads.weights, state.m_weights, state.v_weights),
        (model.biases, grads.biases, state.m_biases, state.v_biases),
    ):
        for i, g in enumerate(gs):
            ms[i] = cfg.beta1 * ms[i] + (1.0 - cfg.beta1) * g
            vs[i] = cfg.beta2 * vs[i] + (1.0 - cfg.beta2) * (g * g)
            params[i] -= cfg.learning_rate * (ms[i] / c1) / (np.sqrt(vs[i] / c2) + cfg.epsilon)
    return model, state


def predict(model: MlpModel, record_features: np.ndarray):
    """Classify one already-normalized record.

    Returns (label, probabilities); argmax ties break toward the lowest index.
    """
    x = np.asarray(record_features, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} features, got shape {x.shape}")
    logits, _ = forward(model, x[None, :])
    probs = softmax(logits[0])
    return MicClass(int(np.argmax(logits[0]))), probs


def one_hot(labels: np.ndarray, n_classes: int = N_CLASSES) -> np.ndarray:
    return np.eye(n_classes)[np.asarray(labels, dtype=np.int64)]


def gradient_check(model: MlpModel, x: np.ndarray, y_onehot: np.ndarray,
                   step: float = 1e-4) -> float:
    """Max relative disagreement between backward() and central differences.

    Perturbs every parameter by +-step, differencing the mean batch loss.
    Relative error per parameter is |a - n| / max(|a|, |n|, 1e-12).
    """
    def batch_loss() -> float:
        logits, _ = forward(model, x)
        return float(np.mean(cross_entropy_with_logits(logits, y_onehot)))

    logits, cache = forward(model, x)
    grads = backward(model, cache, y_onehot)
    worst = 0.0
    for arrays, g_arrays in ((model.weights, grads.weights), (model.biases, grads.biases)):
        for arr, g in zip(arrays, g_arrays):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                ix = it.multi_index
                orig = arr[ix]
                arr[ix] = orig + step
                loss_plus = batch_loss()
                arr[ix] = orig - step
                loss_minus = batch_loss()
                arr[ix] = orig
                numeric = (loss_plus - loss_minus) / (2.0 * step)
                analytic = g[ix]
                rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)
                worst = max(worst, rel)
    return worst
