#!/usr/bin/env python3
"""Dump per-class amplitude/phase curves to CSV for plotting.

Ten deterministic parameter samples per microphone type, spanning the
resonance ranges and the damping-ladder extremes, evaluated on the chosen
frequency grid. Output is long-format:
class,curve_id,frequency_hz,amplitude,phase_rad.
"""

import argparse
from pathlib import Path

from pamicnet.dataset import mic_grid_specs
from pamicnet.evaluation import emit_curves, grid_for_range


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--range", choices=("full", "restricted"), default="full")
    parser.add_argument("--out", type=Path, default=Path("curves.csv"))
    parser.add_argument("--per-class", type=int, default=10)
    args = parser.parse_args()

    rows = emit_curves(
        mic_grid_specs(), grid_for_range(args.range), args.out, per_class=args.per_class
    )
    print(f"wrote {rows} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
