"""Synthetic frequency-response dataset: parameter grids, records, splits, I/O.

Each record is one microphone curve sampled on a frequency grid: the first
half of the feature vector holds amplitudes, the second half phases, and the
class label (0/1/2) rides along. The built-in grids enumerate 67,500
parameter tuples per microphone type (3 f2 x 10 f3 x 10 f4 x 15 xi3 x 15 xi4),
202,500 records in total.

On disk a dataset is a CSV of raw feature values plus a JSON sidecar carrying
the frequency grid, the generating parameter grids, the per-column
normalization maxima, and the run seed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .filters import FrequencyGrid, MicClass, MicParams, sweep_batch

SCHEMA_VERSION = 1

# 15 damping values spread unevenly over [0.015, 0.99]: a geometric ladder,
# dense near the sharp-resonance end.
XI_VALUES = tuple(0.015 * (0.99 / 0.015) ** (k / 14.0) for k in range(15))


class SchemaError(ValueError):
    """A persisted file does not match the expected layout or declarations."""


@dataclass(frozen=True)
class ClassGridSpec:
    """Parameter grid for one microphone class.

    f3/f4 values are spread at equal distances over their ranges (endpoints
    included); xi3 and xi4 share ``xi_values``. The Cartesian product of all
    five axes defines the class's records.
    """

    mic_class: MicClass
    f2_values: tuple
    f3_range: tuple
    f4_range: tuple
    f3_count: int = 10
    f4_count: int = 10
    xi_values: tuple = XI_VALUES

    def __post_init__(self):
        if len(self.f2_values) < 1 or self.f3_count < 1 or self.f4_count < 1:
            raise ValueError("every parameter axis needs at least one value")
        if len(self.xi_values) < 1:
            raise ValueError("xi_values must not be empty")
        for lo, hi in (self.f3_range, self.f4_range):
            if not (0.0 < lo <= hi):
                raise ValueError(f"bad range ({lo}, {hi})")
        if any(not (0.0 < v and math.isfinite(v)) for v in self.f2_values):
            raise ValueError("f2_values must be finite and > 0")
        if any(not (0.0 < x <= 1.0) for x in self.xi_values):
            raise ValueError("xi_values must lie in (0, 1]")

    @property
    def f3_values(self) -> np.ndarray:
        return np.linspace(self.f3_range[0], self.f3_range[1], self.f3_count)

    @property
    def f4_values(self) -> np.ndarray:
        return np.linspace(self.f4_range[0], self.f4_range[1], self.f4_count)

    @property
    def record_count(self) -> int:
        return (
            len(self.f2_values)
            * self.f3_count
            * self.f4_count
            * len(self.xi_values) ** 2
        )

    def to_dict(self) -> dict:
        return {
            "mic_class": int(self.mic_class),
            "f2_values": list(self.f2_values),
            "f3_range": list(self.f3_range),
            "f4_range": list(self.f4_range),
            "f3_count": self.f3_count,
            "f4_count": self.f4_count,
            "xi_values": list(self.xi_values),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassGridSpec":
        return cls(
            mic_class=MicClass(d["mic_class"]),
            f2_values=tuple(d["f2_values"]),
            f3_range=tuple(d["f3_range"]),
            f4_range=tuple(d["f4_range"]),
            f3_count=int(d["f3_count"]),
            f4_count=int(d["f4_count"]),
            xi_values=tuple(d["xi_values"]),
        )


def mic_grid_specs() -> list[ClassGridSpec]:
    """The built-in parameter grids for the three microphone types.

    f2 takes its central value plus/minus 5 percent; f3 and f4 take 10 equally
    spaced values over per-type ranges (for ECM60 and WM66 both resonances
    share one range). All types share the 15-value damping ladder.
    """
    return [
        ClassGridSpec(MicClass.ECM30B, (23.75, 25.0, 26.25), (8930.0, 9866.0), (13965.0, 15432.0)),
        ClassGridSpec(MicClass.ECM60, (14.25, 15.0, 15.75), (7980.0, 8817.0), (7980.0, 8817.0)),
        ClassGridSpec(MicClass.WM66, (61.75, 65.0, 68.25), (13015.0, 14383.0), (13015.0, 14383.0)),
    ]


def _param_columns(spec: ClassGridSpec):
    """Lexicographic Cartesian product of one class grid, as five flat columns.

    Order: f2 outermost, then f3, f4, xi3, and xi4 innermost.
    """
    grids = np.meshgrid(
        np.asarray(spec.f2_values, dtype=np.float64),
        spec.f3_values,
        spec.f4_values,
        np.asarray(spec.xi_values, dtype=np.float64),
        np.asarray(spec.xi_values, dtype=np.float64),
        indexing="ij",
    )
    return [g.ravel() for g in grids]


def enumerate_params(spec: ClassGridSpec) -> list[tuple[MicClass, MicParams]]:
    """All (class, params) tuples of one grid, in deterministic lexicographic order."""
    f2, f3, f4, xi3, xi4 = _param_columns(spec)
    return [
        (spec.mic_class, MicParams(f2[i], f3[i], f4[i], xi3[i], xi4[i]))
        for i in range(f2.size)
    ]


@dataclass
class NormStats:
    """Per-feature-column maximum absolute values used for max-abs scaling."""

    max_abs: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.max_abs, dtype=np.float64)
        if m.ndim != 1 or not np.all(np.isfinite(m)) or np.any(m <= 0.0):
            raise ValueError("max_abs entries must be finite and strictly positive")
        self.max_abs = m

    def __eq__(self, other):
        return isinstance(other, NormStats) and np.array_equal(self.max_abs, other.max_abs)


@dataclass
class Record:
    """One dataset row: amplitude samples then phase samples, plus its label."""

    features: np.ndarray
    label: MicClass


@dataclass(eq=False)
class Dataset:
    """A stack of records sharing one frequency grid.

    ``features`` is (n_records, 2 * grid.count): amplitudes at grid.points in
    the first half of each row, phases in the second half. ``norm`` carries
    the max-abs stats associated with the data (computed from it, or the
    stats that were applied to it).
    """

    features: np.ndarray
    labels: np.ndarray
    grid: FrequencyGrid
    norm: NormStats | None = None
    provenance: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.labels.ndim != 1:
            raise ValueError("features must be 2-D and labels 1-D")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on record count")
        if self.features.shape[1] != 2 * self.grid.count:
            raise ValueError(
                f"feature width {self.features.shape[1]} != 2 x grid count {self.grid.count}"
            )

    @property
    def n_records(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def record(self, i: int) -> Record:
        return Record(self.features[i], MicClass(int(self.labels[i])))

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=3)


@dataclass
class SplitSet:
    """Train/dev/test partition of one dataset."""

    train: Dataset
    dev: Dataset
    test: Dataset
    seed: int


def generation_digest(specs, grid: FrequencyGrid, seed=None) -> str:
    """Stable hex digest of the generation configuration."""
    payload = json.dumps(
        {
            "specs": [s.to_dict() for s in specs],
            "grid": grid.to_dict(),
            "seed": seed,
            "schema_version": SCHEMA_VERSION,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def build_dataset(specs, grid: FrequencyGrid, chunk: int = 16384) -> Dataset:
    """Synthesize one record per parameter tuple of every spec.

    Output order is deterministic: specs in the given order, tuples in
    lexicographic order within each spec, regardless of chunking.
    """
    total = sum(s.record_count for s in specs)
    width = 2 * grid.count
    features = np.empty((total, width), dtype=np.float64)
    labels = np.empty(total, dtype=np.int64)
    row = 0
    for spec in specs:
        cols = _param_columns(spec)
        n = cols[0].size
        for start in range(0, n, chunk):
            sl = slice(start, min(start + chunk, n))
            amp, phase = sweep_batch(*(c[sl] for c in cols), grid.points)
            block = slice(row + start, row + sl.stop)
            features[block, : grid.count] = amp
            features[block, grid.count :] = phase
        labels[row : row + n] = int(spec.mic_class)
        row += n
    return Dataset(
        features,
        labels,
        grid,
        norm=None,
        provenance=generation_digest(specs, grid),
    )


def compute_norm_stats(d: Dataset) -> NormStats:
    """Column-wise maximum of absolute raw values across all records."""
    if d.n_records == 0:
        raise ValueError("cannot compute normalization stats of an empty dataset")
    max_abs = np.abs(d.features).max(axis=0)
    if np.any(max_abs == 0.0):
        raise ValueError("a feature column is identically zero; cannot scale by its maximum")
    return NormStats(max_abs)


def normalize(d: Dataset, s: NormStats) -> Dataset:
    """Divide every feature column by its max-abs value; labels untouched."""
    if s.max_abs.shape[0] != d.n_features:
        raise ValueError(
            f"stats length {s.max_abs.shape[0]} != feature count {d.n_features}"
        )
    return Dataset(d.features / s.max_abs, d.labels.copy(), d.grid, norm=s, provenance=d.provenance)


def shuffle_split(d: Dataset, seed: int, fractions=(0.90, 0.05, 0.05)) -> SplitSet:
    """Seeded shuffle, then contiguous slicing into train/dev/test.

    Train and dev sizes are floored; the remainder goes to test.
    """
    if d.n_records == 0:
        raise ValueError("cannot split an empty dataset")
    if not math.isclose(sum(fractions), 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"fractions must sum to 1, got {fractions}")
    perm = np.random.default_rng(seed).permutation(d.n_records)
    n_train = int(d.n_records * fractions[0])
    n_dev = int(d.n_records * fractions[1])

    def take(idx):
        return Dataset(d.features[idx], d.labels[idx], d.grid, d.norm, d.provenance)

    return SplitSet(
        train=take(perm[:n_train]),
        dev=take(perm[n_train : n_train + n_dev]),
        test=take(perm[n_train + n_dev :]),
        seed=seed,
    )


def draw_offgrid_params(specs, seed: int, per_class: int = 5) -> list[tuple[MicClass, MicParams]]:
    """Parameter tuples inside the class ranges but off the training grids.

    Each parameter is drawn uniformly within its class range; a draw that
    lands exactly on a grid value is rejected and redrawn.
    """
    rng = np.random.default_rng(seed)

    def draw(lo: float, hi: float, taken: np.ndarray) -> float:
        while True:
            v = float(rng.uniform(lo, hi))
            if not np.any(taken == v):
                return v

    out = []
    for spec in specs:
        f2v = np.asarray(spec.f2_values, dtype=np.float64)
        xiv = np.asarray(spec.xi_values, dtype=np.float64)
        for _ in range(per_class):
            p = MicParams(
                f2=draw(f2v.min(), f2v.max(), f2v),
                f3=draw(*spec.f3_range, spec.f3_values),
                f4=draw(*spec.f4_range, spec.f4_values),
                xi3=draw(xiv.min(), xiv.max(), xiv),
                xi4=draw(xiv.min(), xiv.max(), xiv),
            )
            out.append((spec.mic_class, p))
    return out


def make_offgrid_tests(specs, grid: FrequencyGrid, seed: int, per_class: int = 5) -> Dataset:
    """Synthesize labeled records for off-grid parameter draws."""
    drawn = draw_offgrid_params(specs, seed, per_class)
    params = [p for _, p in drawn]
    amp, phase = sweep_batch(
        np.array([p.f2 for p in params]),
        np.array([p.f3 for p in params]),
        np.array([p.f4 for p in params]),
        np.array([p.xi3 for p in params]),
        np.array([p.xi4 for p in params]),
        grid.points,
    )
    return Dataset(
        np.concatenate([amp, phase], axis=1),
        np.asarray([int(cls) for cls, _ in drawn], dtype=np.int64),
        grid,
        norm=None,
        provenance=f"offgrid-seed{seed}",
    )


def _feature_names(count: int) -> list[str]:
    return [f"f{i + 1:04d}_amp" for i in range(count)] + [
        f"f{i + 1:04d}_phi" for i in range(count)
    ]


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_dataset(d: Dataset, path, specs=None, seed=None) -> None:
    """Write the record CSV plus its JSON sidecar (same stem, .json suffix).

    Features are written as decimal text with 17 significant digits, which
    round-trips float64 exactly.
    """
    path = Path(path)
    frame = pd.DataFrame(d.features, columns=_feature_names(d.grid.count), copy=False)
    frame["label"] = d.labels
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "grid": d.grid.to_dict(),
        "specs": [s.to_dict() for s in specs] if specs is not None else None,
        "norm_max_abs": d.norm.max_abs.tolist() if d.norm is not None else None,
        "seed": seed,
        "n_records": d.n_records,
        "provenance": d.provenance,
    }
    sidecar_path(path).write_text(json.dumps(sidecar, indent=1) + "\n")


def load_dataset(path) -> Dataset:
    """Read a dataset CSV and its sidecar back into memory, value-exact."""
    path = Path(path)
    try:
        meta = json.loads(sidecar_path(path).read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"sidecar is not valid JSON: {e}") from e
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {meta.get('schema_version')!r}")
    grid = FrequencyGrid.from_dict(meta["grid"])
    expected = _feature_names(grid.count) + ["label"]
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise SchemaError(f"malformed dataset CSV: {e}") from e
    if list(frame.columns) != expected:
        raise SchemaError(
            f"CSV columns do not match sidecar grid (expected {len(expected)} "
            f"columns for a {grid.count}-point grid, found {len(frame.columns)})"
        )
    if "n_records" in meta and len(frame) != int(meta["n_records"]):
        raise SchemaError(
            f"dataset CSV holds {len(frame)} records, sidecar declares {meta['n_records']}"
        )
    features = frame[expected[:-1]].to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(features)):
        raise SchemaError("dataset CSV contains missing or non-finite feature values")
    labels = frame["label"].to_numpy()
    if not np.isin(labels, [0, 1, 2]).all():
        raise SchemaError("label column must contain only 0, 1 or 2")
    norm = None
    if meta.get("norm_max_abs") is not None:
        norm = NormStats(np.asarray(meta["norm_max_abs"], dtype=np.float64))
        if norm.max_abs.shape[0] != features.shape[1]:
            raise SchemaError("norm_max_abs length does not match feature count")
    return Dataset(
        features,
        labels.astype(np.int64),
        grid,
        norm=norm,
        provenance=meta.get("provenance", ""),
    )
