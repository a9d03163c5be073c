#!/usr/bin/env python3
"""Run both frequency-range experiments plus the independent off-grid battery.

Trains the full-range (300-feature) and restricted-range (140-feature)
classifiers at the reference configuration, prints the accuracy table, then
scores 15 off-grid draws with the full-range model and reports prediction
latency. Writes reports (text + JSON) into --out.

Takes a few minutes; pass --epochs to shorten exploratory runs.
"""

import argparse
import json
import time
from pathlib import Path

from pamicnet.evaluation import (
    independent_tests_text,
    range_results_text,
    run_independent_tests,
    run_range_experiments,
)
from pamicnet.mlp import TrainConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--epochs", type=int, default=100)
    parser.add_argument("--battery-seed", type=int, default=2000)
    parser.add_argument("--out", type=Path, default=Path("reports"))
    args = parser.parse_args()

    cfg = TrainConfig(epochs=args.epochs, seed=args.seed)
    started = time.time()
    results = run_range_experiments(cfg)
    table = range_results_text(results)
    print(table)

    full = next(r for r in results if r.range_name == "full")
    battery = run_independent_tests(full.model, args.battery_seed)
    text = independent_tests_text(battery)
    print(text)
    print(f"total time: {time.time() - started:.0f}s")

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "range_experiments.txt").write_text(table + "\n\n" + text + "\n")
    payload = {
        "range_experiments": [r.to_dict() for r in results],
        "independent_tests": battery.to_dict(),
    }
    (args.out / "range_experiments.json").write_text(json.dumps(payload, indent=1) + "\n")
    print(f"reports written to {args.out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
