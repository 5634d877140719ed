"""Implied probabilities from bookmaker odds, fitted favourite-longshot
models, and the statistics used to compare them."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ConvergenceError,
    DataFormatError,
    FitError,
    OddsDomainError,
    OddsProbError,
    UnsupportedMarketError,
)
from .glm import FittedModel, TrainingSet, fit_fl_glm, fit_fl_glm_two_beta, fit_model  # noqa: E402
from .odds_core import (  # noqa: E402
    METHODS,
    BatchConversion,
    MarketOdds,
    ProbabilityVector,
    convert,
    convert_batch,
)
from .stats import (  # noqa: E402
    bootstrap_paired_test,
    expected_draws,
    log_loss,
    pearson_correlation,
    poisson_two_tailed_test,
)

__all__ = [
    "BatchConversion",
    "ConfigError",
    "ConvergenceError",
    "DataFormatError",
    "FitError",
    "FittedModel",
    "METHODS",
    "MarketOdds",
    "OddsDomainError",
    "OddsProbError",
    "ProbabilityVector",
    "TrainingSet",
    "UnsupportedMarketError",
    "__version__",
    "bootstrap_paired_test",
    "convert",
    "convert_batch",
    "expected_draws",
    "fit_fl_glm",
    "fit_fl_glm_two_beta",
    "fit_model",
    "log_loss",
    "pearson_correlation",
    "poisson_two_tailed_test",
]
