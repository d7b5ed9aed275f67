"""Trace-trained radio propagation loss models with a deterministic Wi-Fi link replay.

The toolkit covers the whole chain: ingest experimental loss traces, split the
loss into a deterministic position-dependent part and a zero-mean fast-fading
part, train a regressor on the deterministic part, fit an empirical CDF to the
fading residuals, and replay the composite channel (with a memoizing
prediction cache) inside a discrete-event 802.11a link simulator.
"""

__version__ = "0.1.0"

from .dataset import (
    LinkBudget,
    Position,
    PositionPair,
    RawSample,
    decompose,
    derive_loss,
    load_dataset,
    remove_outliers,
    split_samples,
)
from .errors import DataFormatError, ModelFileError, ValidationError
from .fading import FadingCdf, FadingSampler, cdf_fit_mse, export_cdf, fit_cdf, import_cdf
from .channel import (
    FriisChannel,
    LearnedChannel,
    LogDistanceChannel,
    NormalFading,
    PathLossCache,
    free_space_path_loss,
)
from .linksim import LinkSimConfig, SimResult, airtime_us, benchmark, per_success, run_scenario
from .metrics import ErrorSeries, error_cdf, loss_errors, percentile, throughput_errors
from .regress import (
    GbrtModel,
    GbrtParams,
    SvrModel,
    SvrParams,
    evaluate_mse,
    load_model,
    save_model,
    train_gbrt,
    train_svr,
)

__all__ = [
    "__version__",
    "Position",
    "PositionPair",
    "LinkBudget",
    "RawSample",
    "load_dataset",
    "derive_loss",
    "remove_outliers",
    "decompose",
    "split_samples",
    "ValidationError",
    "DataFormatError",
    "ModelFileError",
    "FadingCdf",
    "FadingSampler",
    "fit_cdf",
    "cdf_fit_mse",
    "export_cdf",
    "import_cdf",
    "FriisChannel",
    "LogDistanceChannel",
    "LearnedChannel",
    "NormalFading",
    "PathLossCache",
    "free_space_path_loss",
    "LinkSimConfig",
    "SimResult",
    "airtime_us",
    "per_success",
    "run_scenario",
    "benchmark",
    "ErrorSeries",
    "loss_errors",
    "error_cdf",
    "throughput_errors",
    "percentile",
    "GbrtModel",
    "GbrtParams",
    "SvrModel",
    "SvrParams",
    "train_gbrt",
    "train_svr",
    "evaluate_mse",
    "save_model",
    "load_model",
]
