"""Herd-behaviour indices for multi-asset price panels.

CIX, HIX and RHIX compare observed co-movement of a weighted basket of
assets against the comonotonic (maximally herded) coupling of the same
marginals.  The package provides the index mathematics, rolling-window
estimation with bootstrap confidence intervals, a correlated GBM
simulator for synthetic panels and oracles, a scikit-learn style
transformer, and a CLI (``herdindex``).
"""

from .core import (
    IndexValue,
    MomentSummary,
    cix,
    empirical_comono_cov,
    empirical_moments,
    hix,
    rhix,
    rhix_from_variances,
    weighted_cov,
)
from .errors import (
    DegeneracyError,
    HerdIndexError,
    InputOutputError,
    ValidationError,
)
from .estimator import HerdIndexEstimator, as_price_panel
from .gbm import (
    GbmParams,
    comono_corr,
    gbm_corr,
    lognormal_moments,
    lognormal_sd,
    simulate,
    simulate_comonotonic,
    two_asset_hix,
    two_asset_rhix,
)
from .panel import (
    AggregateValues,
    PricePanel,
    WeightVector,
    calibrate_dollar,
    load_panel,
    weights_from_aggregates,
)
from .rolling import (
    IndexSeries,
    ReturnPanel,
    WindowSpec,
    bootstrap_ci,
    estimate_params,
    log_returns,
    windowed_index,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateValues",
    "DegeneracyError",
    "GbmParams",
    "HerdIndexError",
    "HerdIndexEstimator",
    "IndexSeries",
    "IndexValue",
    "InputOutputError",
    "MomentSummary",
    "PricePanel",
    "ReturnPanel",
    "ValidationError",
    "WeightVector",
    "WindowSpec",
    "as_price_panel",
    "bootstrap_ci",
    "calibrate_dollar",
    "cix",
    "comono_corr",
    "empirical_comono_cov",
    "empirical_moments",
    "estimate_params",
    "gbm_corr",
    "hix",
    "lognormal_moments",
    "lognormal_sd",
    "load_panel",
    "log_returns",
    "rhix",
    "rhix_from_variances",
    "simulate",
    "simulate_comonotonic",
    "two_asset_hix",
    "two_asset_rhix",
    "weighted_cov",
    "weights_from_aggregates",
    "windowed_index",
]
