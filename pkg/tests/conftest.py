import pytest

from pamicnet.dataset import (
    ClassGridSpec,
    build_dataset,
    compute_norm_stats,
    normalize,
    shuffle_split,
)
from pamicnet.filters import FrequencyGrid, MicClass
from pamicnet.mlp import TrainConfig
from pamicnet.training import train


def small_specs(xi_values=(0.015, 0.1219, 0.99)):
    """Reduced parameter grids: same ranges as the builtin ones, fewer points."""
    return [
        ClassGridSpec(MicClass.ECM30B, (23.75, 25.0, 26.25), (8930.0, 9866.0),
                      (13965.0, 15432.0), f3_count=3, f4_count=3, xi_values=xi_values),
        ClassGridSpec(MicClass.ECM60, (14.25, 15.0, 15.75), (7980.0, 8817.0),
                      (7980.0, 8817.0), f3_count=3, f4_count=3, xi_values=xi_values),
        ClassGridSpec(MicClass.WM66, (61.75, 65.0, 68.25), (13015.0, 14383.0),
                      (13015.0, 14383.0), f3_count=3, f4_count=3, xi_values=xi_values),
    ]


@pytest.fixture(scope="session")
def small_grid():
    return FrequencyGrid.linear(20.0, 20000.0, 12)


@pytest.fixture(scope="session")
def small_splits(small_grid):
    raw = build_dataset(small_specs(), small_grid)
    stats = compute_norm_stats(raw)
    return shuffle_split(normalize(raw, stats), seed=3)


@pytest.fixture(scope="session")
def small_trained(small_splits):
    """A quickly trained model on the reduced grids; classifies near-perfectly."""
    cfg = TrainConfig(learning_rate=3e-3, batch_size=64, epochs=30, seed=3)
    model, history = train(small_splits, cfg, hidden=(16, 8))
    return model, history
