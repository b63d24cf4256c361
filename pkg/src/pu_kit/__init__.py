"""Estimate the hidden positive fraction of unlabeled data and train PU classifiers."""

from .core import (
    EstimationFailure,
    ExperimentRecord,
    InvalidInputError,
    PUDataset,
    PUKitError,
    SchemaError,
    TrainHoldoutSplit,
    TrainingDivergence,
    UnsupportedOperationError,
    pvn_accuracy,
    pvn_error,
    split_pu,
)
from .ecdf import TailCDF, ThresholdGrid, bbe_penalty, binomial_inversion, build_tail_cdf, threshold_grid
from .learn import (
    LogisticModel,
    MLPModel,
    TrainConfig,
    cvir_train,
    loss_neg,
    loss_pos,
    pvu_warm_start,
    rank_and_discard,
    sgd_epoch,
    train_error,
)
from .mpe import (
    BBEConfig,
    MixtureEstimate,
    bbe_estimate,
    naive_ratio_estimate,
    scott_estimate,
    top_bin_diagnostics,
)
from .synth import TaskSpec, gen_anchor_task, gen_gaussian_task, gen_triangle_task, generate
from .tedn import TEDNConfig, TEDNTrace, evaluate_epochwise, tedn_train

__version__ = "0.1.0"
