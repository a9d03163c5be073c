"""Reports: range experiments, independent off-grid tests, latency, curves."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import (
    Dataset,
    build_dataset,
    compute_norm_stats,
    make_offgrid_tests,
    mic_grid_specs,
    normalize,
    shuffle_split,
)
from .filters import (
    FrequencyGrid,
    MicParams,
    full_range_grid,
    restricted_range_grid,
    sweep_batch,
)
from .mlp import MlpModel, TrainConfig, forward, predict
from .training import TrainHistory, evaluate, train


@dataclass
class ConfusionMatrix:
    """3x3 counts; rows are true classes, columns predicted classes."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (3, 3) or np.any(c < 0):
            raise ValueError("confusion matrix must be 3x3 non-negative counts")
        self.counts = c

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total


@dataclass
class LatencyReport:
    """Single-record inference wall times, milliseconds."""

    repetitions: int
    median_ms: float
    p95_ms: float
    max_ms: float


@dataclass
class RangeExperimentResult:
    range_name: str
    f_min: float
    f_max: float
    feature_count: int
    train_acc: float
    dev_acc: float
    test_acc: float
    epochs: int
    model: MlpModel = field(repr=False, default=None)
    history: TrainHistory = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "range_name": self.range_name,
            "f_min": self.f_min,
            "f_max": self.f_max,
            "feature_count": self.feature_count,
            "train_acc": self.train_acc,
            "dev_acc": self.dev_acc,
            "test_acc": self.test_acc,
            "epochs": self.epochs,
        }


@dataclass
class IndependentTestReport:
    """Outcome of the off-grid battery: per-class predictions and latency."""

    seed: int
    true_labels: list[int]
    predicted_labels: list[int]
    n_correct: int
    accuracy: float
    latency: LatencyReport | None

    def to_dict(self) -> dict:
        d = {
            "seed": self.seed,
            "true_labels": self.true_labels,
            "predicted_labels": self.predicted_labels,
            "n_correct": self.n_correct,
            "accuracy": self.accuracy,
        }
        if self.latency is not None:
            d["latency_ms"] = {
                "repetitions": self.latency.repetitions,
                "median": self.latency.median_ms,
                "p95": self.latency.p95_ms,
                "max": self.latency.max_ms,
            }
        return d


def accuracy(model: MlpModel, data: Dataset) -> float:
    """Fraction of records whose argmax prediction matches the label."""
    return evaluate(model, data)[1]


def confusion(model: MlpModel, data: Dataset, chunk: int = 65536) -> ConfusionMatrix:
    if data.n_records == 0:
        raise ValueError("cannot build a confusion matrix from an empty dataset")
    counts = np.zeros((3, 3), dtype=np.int64)
    for start in range(0, data.n_records, chunk):
        logits, _ = forward(model, data.features[start : start + chunk])
        preds = logits.argmax(axis=1)
        true = data.labels[start : start + chunk]
        np.add.at(counts, (true, preds), 1)
    return ConfusionMatrix(counts)


def grid_for_range(range_name: str) -> FrequencyGrid:
    if range_name == "full":
        return full_range_grid()
    if range_name == "restricted":
        return restricted_range_grid()
    raise ValueError(f"unknown range {range_name!r} (expected 'full' or 'restricted')")


def run_range_experiments(cfg: TrainConfig, ranges=("full", "restricted")):
    """Generate, normalize, split, and train each frequency-range variant.

    Returns one RangeExperimentResult per range, each carrying its trained
    model for downstream use.
    """
    specs = mic_grid_specs()
    results = []
    for name in ranges:
        grid = grid_for_range(name)
        raw = build_dataset(specs, grid)
        stats = compute_norm_stats(raw)
        data = normalize(raw, stats)
        del raw
        splits = shuffle_split(data, cfg.seed)
        del data
        model, history = train(splits, cfg)
        results.append(
            RangeExperimentResult(
                range_name=name,
                f_min=grid.f_min,
                f_max=grid.f_max,
                feature_count=2 * grid.count,
                train_acc=history.final["train_acc"],
                dev_acc=history.final["dev_acc"],
                test_acc=history.final["test_acc"],
                epochs=cfg.epochs,
                model=model,
                history=history,
            )
        )
    return results


def time_callable(fn, repetitions: int = 1000, warmup: int = 50) -> LatencyReport:
    """Median/p95/max wall time of repeated warm calls, in milliseconds."""
    for _ in range(warmup):
        fn()
    times = np.empty(repetitions)
    for i in range(repetitions):
        t0 = time.perf_counter()
        fn()
        times[i] = time.perf_counter() - t0
    times *= 1e3
    return LatencyReport(
        repetitions=repetitions,
        median_ms=float(np.median(times)),
        p95_ms=float(np.percentile(times, 95)),
        max_ms=float(times.max()),
    )


def measure_latency(model: MlpModel, features: np.ndarray,
                    repetitions: int = 1000, warmup: int = 50) -> LatencyReport:
    """Time warm single-record predictions; inference only, no I/O."""
    return time_callable(lambda: predict(model, features), repetitions, warmup)


def run_independent_tests(model: MlpModel, seed: int, per_class: int = 5,
                          latency_repetitions: int = 1000) -> IndependentTestReport:
    """Classify off-grid parameter draws with a trained model.

    Draws per_class tuples per microphone type strictly inside the training
    ranges but off the training grid, normalizes them with the model's stats,
    and predicts each. Set latency_repetitions=0 to skip timing.
    """
    if model.norm is None or model.grid is None:
        raise ValueError("model must carry normalization stats and a frequency grid")
    tests = make_offgrid_tests(mic_grid_specs(), model.grid, seed, per_class=per_class)
    feats = tests.features / model.norm.max_abs
    preds = [int(predict(model, feats[i])[0]) for i in range(tests.n_records)]
    true = tests.labels.tolist()
    n_correct = sum(int(p == t) for p, t in zip(preds, true))
    latency = None
    if latency_repetitions > 0:
        latency = measure_latency(model, feats[0], repetitions=latency_repetitions)
    return IndependentTestReport(
        seed=seed,
        true_labels=true,
        predicted_labels=preds,
        n_correct=n_correct,
        accuracy=n_correct / len(true),
        latency=latency,
    )


def curve_parameter_samples(spec, per_class: int = 10):
    """Deterministic parameter tuples used for curve emission.

    Curve k keeps f2 central, walks f3/f4 across their values, and walks the
    damping ladder end to end, so the sample spans both resonance spread and
    the damping extremes.
    """
    f3v, f4v = spec.f3_values, spec.f4_values
    xiv = spec.xi_values
    f2_central = sorted(spec.f2_values)[len(spec.f2_values) // 2]
    out = []
    for k in range(per_class):
        fi = round(k * (len(f3v) - 1) / max(per_class - 1, 1))
        xi = xiv[round(k * (len(xiv) - 1) / max(per_class - 1, 1))]
        out.append(MicParams(f2_central, float(f3v[fi]), float(f4v[fi]), xi, xi))
    return out


def emit_curves(specs, grid: FrequencyGrid, path, per_class: int = 10) -> int:
    """Write long-format amplitude/phase curves for external plotting.

    CSV columns: class,curve_id,frequency_hz,amplitude,phase_rad. Returns the
    number of data rows (classes x curves x grid points).
    """
    lines = ["class,curve_id,frequency_hz,amplitude,phase_rad"]
    for spec in specs:
        samples = curve_parameter_samples(spec, per_class)
        amp, phase = sweep_batch(
            np.array([p.f2 for p in samples]),
            np.array([p.f3 for p in samples]),
            np.array([p.f4 for p in samples]),
            np.array([p.xi3 for p in samples]),
            np.array([p.xi4 for p in samples]),
            grid.points,
        )
        for k in range(len(samples)):
            for j, f in enumerate(grid.points):
                lines.append(
                    f"{int(spec.mic_class)},{k},{f:.17g},{amp[k, j]:.17g},{phase[k, j]:.17g}"
                )
    Path(path).write_text("\n".join(lines) + "\n")
    return len(lines) - 1


def range_results_text(results) -> str:
    """Human-readable accuracy table for the range experiments."""
    header = (
        f"{'Frequency range':<18}{'Features':>9}  "
        f"{'Accuracy (train, dev, test)':<34}{'Epochs':>7}"
    )
    rows = [header, "-" * len(header)]
    for r in results:
        accs = f"{r.train_acc:.2%}, {r.dev_acc:.2%}, {r.test_acc:.2%}"
        rows.append(
            f"{f'{r.f_min:g}-{r.f_max:g} Hz':<18}{r.feature_count:>9}  {accs:<34}{r.epochs:>7}"
        )
    return "\n".join(rows)


def independent_tests_text(report: IndependentTestReport) -> str:
    """Human-readable summary of the off-grid battery."""
    lines = [f"Independent off-grid tests (seed {report.seed})"]
    per_class: dict[int, list[int]] = {}
    for t, p in zip(report.true_labels, report.predicted_labels):
        per_class.setdefault(t, []).append(p)
    for label in sorted(per_class):
        name = {0: "ECM30B", 1: "ECM60", 2: "WM66"}[label]
        preds = " ".join(str(int(p)) for p in per_class[label])
        lines.append(f"  {name:<7} (class {label}) predictions: {preds}")
    lines.append(
        f"  correct: {report.n_correct}/{len(report.true_labels)}"
        f" ({report.accuracy:.0%})"
    )
    if report.latency is not None:
        lines.append(
            f"  single-record prediction time over {report.latency.repetitions} runs:"
            f" median {report.latency.median_ms:.3f} ms,"
            f" p95 {report.latency.p95_ms:.3f} ms,"
            f" max {report.latency.max_ms:.3f} ms"
        )
    return "\n".join(lines)
