"""Scikit-learn style front end for the rolling index pipeline.

``HerdIndexEstimator`` is a transformer: ``fit`` validates the panel and
resolves per-asset weights, ``transform`` maps a price panel to a
DataFrame of rolling index values (one column per requested index, plus
interval columns when bootstrapping).  Construction parameters follow
the scikit-learn convention — stored verbatim, validated in ``fit`` —
so the estimator composes with ``Pipeline``, ``get_params`` /
``set_params``, and ``clone``.
"""

from __future__ import annotations

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DimensionMismatch, ValidationError
from .panel import AggregateValues, PricePanel, WeightVector, load_panel, weights_from_aggregates
from .rolling import WindowSpec, windowed_index

__all__ = ["HerdIndexEstimator", "as_price_panel"]


def as_price_panel(X) -> PricePanel:
    """Coerce estimator input into a validated :class:`PricePanel`.

    Accepts a PricePanel, a date-indexed (or ``date``-columned)
    DataFrame, or a CSV path.  Bare arrays are rejected: windows are
    anchored on dates, so input must carry them.
    """
    if isinstance(X, PricePanel):
        return X
    if isinstance(X, pd.DataFrame):
        return PricePanel.from_frame(X)
    if isinstance(X, (str, bytes)) or hasattr(X, "__fspath__"):
        return load_panel(X)
    raise ValidationError(
        f"cannot interpret {type(X).__name__} as a price panel; "
        "pass a PricePanel, a date-indexed DataFrame, or a CSV path"
    )


class HerdIndexEstimator(BaseEstimator, TransformerMixin):
    """Rolling herd-behaviour indices as a transformer.

    Parameters
    ----------
    index : str or sequence of str, default "rhix"
        Which indices to emit: any of "cix", "hix", "rhix".
    epsilon, step : int
        Rolling-window half-width and stride.
    weights : array-like, optional
        Explicit per-asset weights.
    aggregates : array-like, optional
        Aggregate values to calibrate weights from at ``ref_date``
        (mutually exclusive with ``weights``; with neither, weights
        default to 1 for every asset).
    ref_date : datetime.date, optional
        Calibration date for ``aggregates``; defaults to the last date
        of the fitted panel.
    moments : {"lognormal", "empirical"}
        Per-window moment route.
    bootstrap : bool
        Attach percentile-interval columns.
    replicates, level, seed
        Bootstrap configuration.

    Attributes
    ----------
    weights_ : WeightVector
        Resolved weights.
    feature_names_in_ : ndarray of str
        Asset labels seen in ``fit``.

    Examples
    --------
    >>> est = HerdIndexEstimator(index="rhix", epsilon=25)
    >>> series = est.fit_transform(panel_frame)        # doctest: +SKIP
    """

    def __init__(
        self,
        index="rhix",
        epsilon: int = 25,
        step: int = 1,
        weights=None,
        aggregates=None,
        ref_date=None,
        moments: str = "lognormal",
        bootstrap: bool = False,
        replicates: int = 1000,
        level: float = 0.95,
        seed=None,
    ):
        self.index = index
        self.epsilon = epsilon
        self.step = step
        self.weights = weights
        self.aggregates = aggregates
        self.ref_date = ref_date
        self.moments = moments
        self.bootstrap = bootstrap
        self.replicates = replicates
        self.level = level
        self.seed = seed

    # - fitting ------------------------------------------------------------

    def _kinds(self) -> tuple[str, ...]:
        kinds = (self.index,) if isinstance(self.index, str) else tuple(self.index)
        return tuple(str(k).lower() for k in kinds)

    def fit(self, X, y=None):
        """Validate the panel and resolve per-asset weights."""
        panel = as_price_panel(X)
        if self.weights is not None and self.aggregates is not None:
            raise ValidationError("pass either weights or aggregates, not both")
        if self.weights is not None:
            w = WeightVector(np.asarray(self.weights, float))
            if len(w) != panel.n_assets:
                raise DimensionMismatch(
                    f"{len(w)} weights for {panel.n_assets} assets"
                )
        elif self.aggregates is not None:
            agg = AggregateValues(
                values=np.asarray(self.aggregates, float),
                as_of=self.ref_date or panel.dates[-1],
            )
            w = weights_from_aggregates(panel, agg)
        else:
            w = WeightVector(np.ones(panel.n_assets))
        self.weights_ = w
        self.n_features_in_ = panel.n_assets
        self.feature_names_in_ = np.asarray(panel.labels, dtype=object)
        return self

    def transform(self, X) -> pd.DataFrame:
        """Rolling index values for ``X``, one row per window center."""
        check_is_fitted(self, "weights_")
        panel = as_price_panel(X)
        if panel.labels != tuple(self.feature_names_in_):
            raise ValidationError(
                "panel labels differ from those seen in fit",
                fitted=list(self.feature_names_in_),
                got=list(panel.labels),
            )
        spec = WindowSpec(epsilon=self.epsilon, step=self.step)
        columns: dict[str, np.ndarray] = {}
        idx = None
        for ordinal, kind in enumerate(self._kinds()):
            series = windowed_index(
                panel,
                self.weights_,
                spec,
                kind,
                moments=self.moments,
                bootstrap=self.bootstrap,
                replicates=self.replicates,
                level=self.level,
                seed=None if self.seed is None else [self.seed, ordinal],
            )
            if idx is None:
                idx = pd.Index(series.centers, name="center_date")
            columns[kind] = series.values
            if series.ci_lower is not None:
                columns[f"{kind}_lower"] = series.ci_lower
                columns[f"{kind}_upper"] = series.ci_upper
        return pd.DataFrame(columns, index=idx)
