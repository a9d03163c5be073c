"""Command-line entry point: generate, train, eval, classify, bench, curves.

Option precedence is command line > --config JSON file > built-in defaults;
the PAMICNET_SEED environment variable is the lowest-precedence seed source.
The defaults chain `generate && train && eval` into the reference experiment.

Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .dataset import (
    SchemaError,
    build_dataset,
    compute_norm_stats,
    load_dataset,
    mic_grid_specs,
    normalize,
    save_dataset,
    shuffle_split,
)
from .evaluation import (
    confusion,
    emit_curves,
    grid_for_range,
    independent_tests_text,
    measure_latency,
    run_independent_tests,
    time_callable,
)
from .mlp import TrainConfig, predict
from .training import (
    NonFiniteParameterError,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    save_history_csv,
    train,
)

CONFIG_KEYS = ("dataset", "checkpoint", "out", "seed", "range", "epochs", "lr", "batch_size")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    dataset: Path
    checkpoint: Path
    out: Path
    seed: int
    range_name: str
    epochs: int
    lr: float
    batch_size: int
    sweep: Path | None = None

    @property
    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.lr,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.seed,
        )


def _build_parser() -> _Parser:
    parser = _Parser(prog="pamicnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand")
    for name, extra in (
        ("generate", "synthesize the record CSV and its JSON sidecar"),
        ("train", "train a classifier on a generated dataset"),
        ("eval", "report split accuracies and the off-grid test battery"),
        ("classify", "classify one raw amplitude/phase sweep CSV"),
        ("bench", "measure single-record prediction latency"),
        ("curves", "write per-class amplitude/phase curve data"),
    ):
        p = sub.add_parser(name, help=extra)
        p.add_argument("--dataset", type=Path, default=None)
        p.add_argument("--checkpoint", type=Path, default=None)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--range", dest="range_name", choices=("full", "restricted"), default=None)
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--lr", type=float, default=None)
        p.add_argument("--batch-size", type=int, default=None)
        p.add_argument("--config", type=Path, default=None)
        if name == "classify":
            p.add_argument("sweep", type=Path, help="CSV with columns frequency_hz,amplitude,phase_rad")
    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    file_cfg = {}
    if args.config is not None:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as e:
            raise SchemaError(f"config file is not valid JSON: {e}") from e
        unknown = set(file_cfg) - set(CONFIG_KEYS)
        if unknown:
            raise SchemaError(f"unknown config keys: {sorted(unknown)}")

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        if key in file_cfg:
            return file_cfg[key]
        return default

    env_seed = os.environ.get("PAMICNET_SEED")
    seed = int(pick(args.seed, "seed", env_seed if env_seed is not None else 7))
    range_name = pick(args.range_name, "range", "full")
    out = Path(pick(args.out, "out", "."))
    defaults = TrainConfig()
    return RunConfig(
        subcommand=args.subcommand,
        dataset=Path(pick(args.dataset, "dataset", out / f"dataset_{range_name}.csv")),
        checkpoint=Path(pick(args.checkpoint, "checkpoint", out / f"model_{range_name}.json")),
        out=out,
        seed=seed,
        range_name=range_name,
        epochs=int(pick(args.epochs, "epochs", defaults.epochs)),
        lr=float(pick(args.lr, "lr", defaults.learning_rate)),
        batch_size=int(pick(args.batch_size, "batch_size", defaults.batch_size)),
        sweep=getattr(args, "sweep", None),
    )


def _require_file(path: Path, role: str) -> None:
    if not path.is_file():
        raise FileNotFoundError(f"{role} not found: {path}")


def _history_path(checkpoint: Path) -> Path:
    return checkpoint.with_name(checkpoint.stem + "_history.csv")


def _cmd_generate(cfg: RunConfig) -> None:
    cfg.dataset.parent.mkdir(parents=True, exist_ok=True)
    grid = grid_for_range(cfg.range_name)
    specs = mic_grid_specs()
    data = build_dataset(specs, grid)
    data.norm = compute_norm_stats(data)
    save_dataset(data, cfg.dataset, specs=specs, seed=cfg.seed)
    print(f"wrote {data.n_records} records x {data.n_features} features to {cfg.dataset}")


def _load_normalized_splits(cfg: RunConfig, seed: int):
    _require_file(cfg.dataset, "dataset CSV")
    data = load_dataset(cfg.dataset)
    if data.norm is None:
        data.norm = compute_norm_stats(data)
    return shuffle_split(normalize(data, data.norm), seed)


def _cmd_train(cfg: RunConfig) -> None:
    splits = _load_normalized_splits(cfg, cfg.seed)
    cfg.checkpoint.parent.mkdir(parents=True, exist_ok=True)
    model, history = train(splits, cfg.train_config)
    save_checkpoint(model, history, cfg.checkpoint)
    save_history_csv(history, _history_path(cfg.checkpoint))
    f = history.final
    print(
        f"trained {cfg.epochs} epochs; accuracy train {f['train_acc']:.4%}"
        f" dev {f['dev_acc']:.4%} test {f['test_acc']:.4%}"
    )
    print(f"checkpoint: {cfg.checkpoint}")


def _cmd_eval(cfg: RunConfig) -> None:
    _require_file(cfg.checkpoint, "checkpoint")
    model, saved = load_checkpoint(cfg.checkpoint)
    split_seed = saved.config.seed if saved.config is not None else cfg.seed
    splits = _load_normalized_splits(cfg, split_seed)
    rows = {}
    for name, part in (("train", splits.train), ("dev", splits.dev), ("test", splits.test)):
        loss, acc = evaluate(model, part)
        rows[name] = {"loss": loss, "accuracy": acc}
    grid = model.grid
    text = [
        f"Range {grid.f_min:g}-{grid.f_max:g} Hz, {model.n_inputs} features,"
        f" {saved.config.epochs if saved.config else '?'} epochs:",
        "  accuracy (train, dev, test): "
        + ", ".join(f"{rows[k]['accuracy']:.4%}" for k in ("train", "dev", "test")),
        "  test confusion matrix (rows true, cols predicted):",
    ]
    for row in confusion(model, splits.test).counts:
        text.append("    " + " ".join(f"{v:7d}" for v in row))
    report = run_independent_tests(model, cfg.seed)
    text.append(independent_tests_text(report))
    body = "\n".join(text)
    print(body)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "eval_report.txt").write_text(body + "\n")
    payload = {"splits": rows, "independent_tests": report.to_dict()}
    (cfg.out / "eval_report.json").write_text(json.dumps(payload, indent=1) + "\n")


def _read_sweep(path: Path, model) -> np.ndarray:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise SchemaError(f"malformed sweep CSV: {e}") from e
    expected = ["frequency_hz", "amplitude", "phase_rad"]
    if list(frame.columns) != expected:
        raise SchemaError(f"sweep CSV must have columns {expected}, got {list(frame.columns)}")
    freqs = frame["frequency_hz"].to_numpy(dtype=np.float64)
    grid = model.grid
    if freqs.shape[0] != grid.count:
        raise SchemaError(f"sweep has {freqs.shape[0]} rows, checkpoint grid has {grid.count}")
    if np.any(np.abs(freqs - grid.points) > 1e-6 * grid.points):
        raise SchemaError("sweep frequencies do not match the checkpoint grid (1e-6 relative)")
    features = np.concatenate(
        [frame["amplitude"].to_numpy(dtype=np.float64), frame["phase_rad"].to_numpy(dtype=np.float64)]
    )
    if not np.all(np.isfinite(features)):
        raise SchemaError("sweep CSV contains missing or non-finite values")
    return features


def _cmd_classify(cfg: RunConfig) -> None:
    _require_file(cfg.checkpoint, "checkpoint")
    _require_file(cfg.sweep, "sweep CSV")
    model, _ = load_checkpoint(cfg.checkpoint)
    if model.norm is None or model.grid is None:
        raise SchemaError("checkpoint lacks normalization stats or grid; cannot classify raw sweeps")
    raw = _read_sweep(cfg.sweep, model)
    label, probs = predict(model, raw / model.norm.max_abs)
    name = {0: "ECM30B", 1: "ECM60", 2: "WM66"}[label]
    print(f"label: {label} ({name})")
    print("probabilities: " + " ".join(f"{p:.6f}" for p in probs))


def _cmd_bench(cfg: RunConfig) -> None:
    _require_file(cfg.checkpoint, "checkpoint")
    model, _ = load_checkpoint(cfg.checkpoint)
    rng = np.random.default_rng(cfg.seed)
    features = rng.uniform(-1.0, 1.0, size=model.n_inputs)
    report = measure_latency(model, features)
    print(
        f"single-record prediction over {report.repetitions} runs:"
        f" median {report.median_ms:.3f} ms, p95 {report.p95_ms:.3f} ms,"
        f" max {report.max_ms:.3f} ms"
    )
    if model.norm is not None:
        # same input presented raw, with max-abs scaling inside the timed path
        raw = features * model.norm.max_abs
        e2e = time_callable(lambda: predict(model, raw / model.norm.max_abs))
        print(
            f"normalize + predict: median {e2e.median_ms:.3f} ms,"
            f" p95 {e2e.p95_ms:.3f} ms, max {e2e.max_ms:.3f} ms"
        )


def _cmd_curves(cfg: RunConfig) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"curves_{cfg.range_name}.csv"
    rows = emit_curves(mic_grid_specs(), grid_for_range(cfg.range_name), path)
    print(f"wrote {rows} curve rows to {path}")


_COMMANDS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "classify": _cmd_classify,
    "bench": _cmd_bench,
    "curves": _cmd_curves,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            raise UsageError("a subcommand is required")
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = _resolve(args)
        _COMMANDS[cfg.subcommand](cfg)
    except NonFiniteParameterError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    except (SchemaError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
