"""Microphone-type classification from synthesized frequency responses.

Pipeline: an analytic electret-microphone filter model synthesizes
amplitude/phase records over parameter grids for three microphone types, a
from-scratch tanh MLP is trained with Adam on the normalized records, and the
result is evaluated on held-out splits, off-grid parameter draws, and a
latency benchmark.
"""

from .dataset import (
    ClassGridSpec,
    Dataset,
    NormStats,
    Record,
    SchemaError,
    SplitSet,
    build_dataset,
    compute_norm_stats,
    draw_offgrid_params,
    enumerate_params,
    load_dataset,
    make_offgrid_tests,
    mic_grid_specs,
    normalize,
    save_dataset,
    shuffle_split,
)
from .evaluation import (
    ConfusionMatrix,
    LatencyReport,
    accuracy,
    confusion,
    emit_curves,
    measure_latency,
    run_independent_tests,
    run_range_experiments,
)
from .filters import (
    FrequencyGrid,
    MicClass,
    MicParams,
    amplitude_phase_sweep,
    full_range_grid,
    hp_response,
    lp2_response,
    mic_response,
    restricted_range_grid,
    sweep_batch,
)
from .mlp import (
    AdamState,
    ForwardCache,
    Gradients,
    MlpModel,
    TrainConfig,
    adam_step,
    backward,
    cross_entropy_with_logits,
    forward,
    gradient_check,
    one_hot,
    predict,
    softmax,
    xavier_init,
)
from .training import (
    EpochMetrics,
    NonFiniteParameterError,
    TrainHistory,
    epoch_permutation,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    save_history_csv,
    train,
)

__version__ = "0.1.0"
