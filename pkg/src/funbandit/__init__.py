"""Functional best-arm identification by Batch Elimination."""

__version__ = "0.1.0"

from .bounds import BoundConstants, QFunction, Q_MEAN  # noqa: E402
from .distributions import (  # noqa: E402
    Bernoulli,
    Beta,
    Categorical,
    Rng,
    TruncatedGaussian,
    Uniform,
    quantile,
    sample_n,
    true_functional,
)
from .elimination import (  # noqa: E402
    BanditInstance,
    Schedule,
    run_batch_elimination,
    schedule_sequential_halving,
    schedule_successive_rejects,
)
from .estimators import (  # noqa: E402
    AverageValueAtRisk,
    Mean,
    MeanVariance,
    SampleBuffer,
    ShannonEntropy,
    ValueAtRisk,
    estimate,
)
from .harness import ExperimentConfig, run_trials, sweep_budgets  # noqa: E402

__all__ = [
    "AverageValueAtRisk",
    "BanditInstance",
    "Bernoulli",
    "Beta",
    "BoundConstants",
    "Categorical",
    "ExperimentConfig",
    "Mean",
    "MeanVariance",
    "QFunction",
    "Q_MEAN",
    "Rng",
    "SampleBuffer",
    "Schedule",
    "ShannonEntropy",
    "TruncatedGaussian",
    "Uniform",
    "ValueAtRisk",
    "estimate",
    "quantile",
    "run_batch_elimination",
    "run_trials",
    "sample_n",
    "schedule_sequential_halving",
    "schedule_successive_rejects",
    "sweep_budgets",
    "true_functional",
]
