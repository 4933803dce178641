"""Rolling-window index estimation and bootstrap confidence intervals.

For every center date t0 the window covers the ``2*epsilon + 1`` price
rows in ``[t0 - epsilon, t0 + epsilon]``.  The default ("lognormal")
route fits a local GBM to the window's log-returns — per-week mean,
sample variance (ddof=1) and sample correlation — and plugs the fitted
parameters into the closed-form level moments at horizon ``tau =
2*epsilon`` weeks, starting from the window's first price row.  The
"empirical" route skips the model and takes sample moments of the price
levels themselves, with the sorted-coupling comonotonic covariance.

Confidence intervals resample whole return rows (preserving the
cross-sectional dependence within a week) and recompute the index per
replicate; the interval is the percentile interval of the replicated
statistics.
"""

from __future__ import annotations

import datetime as _dt
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .core import MomentSummary, cix, empirical_moments, hix, rhix
from .errors import (
    CIConsistencyError,
    DegeneracyError,
    DegenerateResample,
    DimensionMismatch,
    InsufficientSamples,
    InvalidParameter,
    PanelTooShort,
    ValidationError,
    ZeroVariance,
)
from .gbm import GbmParams, lognormal_moments
from .panel import PricePanel, WeightVector

__all__ = [
    "WindowSpec",
    "ReturnPanel",
    "IndexSeries",
    "log_returns",
    "estimate_params",
    "windowed_index",
    "bootstrap_ci",
]

_INDEX_FUNCS = {"CIX": cix, "HIX": hix, "RHIX": rhix}


def _canonical_kind(kind: str) -> str:
    k = str(kind).upper()
    if k not in _INDEX_FUNCS:
        raise InvalidParameter(
            f"unknown index kind {kind!r}; expected one of cix, hix, rhix"
        )
    return k


@dataclass(frozen=True)
class WindowSpec:
    """Rolling-window geometry: half-width and stride between centers."""

    epsilon: int = 25
    step: int = 1

    def __post_init__(self):
        object.__setattr__(self, "epsilon", int(self.epsilon))
        object.__setattr__(self, "step", int(self.step))
        if self.epsilon < 2:
            raise InvalidParameter(
                "epsilon must be >= 2 (need at least 4 returns per window)",
                epsilon=self.epsilon,
            )
        if self.step < 1:
            raise InvalidParameter("step must be >= 1", step=self.step)

    @property
    def width(self) -> int:
        """Price rows per window, 2*epsilon + 1."""
        return 2 * self.epsilon + 1

    @property
    def tau(self) -> float:
        """Window horizon in weeks, 2*epsilon."""
        return float(2 * self.epsilon)


@dataclass(frozen=True)
class ReturnPanel:
    """Dated matrix of log-returns plus the originating start levels.

    ``start_levels`` is the price row at the window's first date; the
    plug-in moment formulas need it to place the level distribution.
    """

    dates: tuple[_dt.date, ...]
    values: np.ndarray
    start_levels: np.ndarray
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        v = np.asarray(self.values, float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        s = np.atleast_1d(np.asarray(self.start_levels, float))
        s.setflags(write=False)
        object.__setattr__(self, "start_levels", s)
        if v.ndim != 2:
            raise DimensionMismatch("returns must be a matrix", shape=list(v.shape))
        if v.shape[0] < 1:
            raise InsufficientSamples("need at least one return row")
        if len(self.dates) != v.shape[0]:
            raise DimensionMismatch(
                f"{len(self.dates)} dates for {v.shape[0]} return rows"
            )
        if s.shape != (v.shape[1],):
            raise DimensionMismatch(
                f"start_levels shape {s.shape} for {v.shape[1]} columns"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("returns must be finite")
        if not np.all(np.isfinite(s)) or np.any(s <= 0.0):
            raise ValidationError("start levels must be finite and positive")

    @property
    def n_returns(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class IndexSeries:
    """Per-window index values, optionally with bootstrap bounds.

    Windows that hit numerical degeneracy carry NaN (a flagged gap, not
    a zero).  When intervals are present, each should contain its point
    estimate; isolated misses are recorded in ``ci_violations`` and
    warned about, but more than 1% of windows missing is an error.
    """

    centers: tuple[_dt.date, ...]
    values: np.ndarray
    kind: str
    ci_lower: np.ndarray | None = field(default=None)
    ci_upper: np.ndarray | None = field(default=None)
    ci_violations: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(self.centers))
        object.__setattr__(self, "kind", _canonical_kind(self.kind))
        v = np.atleast_1d(np.asarray(self.values, float))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        n = v.shape[0]
        if len(self.centers) != n:
            raise DimensionMismatch(f"{len(self.centers)} centers for {n} values")
        if (self.ci_lower is None) != (self.ci_upper is None):
            raise ValidationError("ci_lower and ci_upper must be supplied together")
        if self.ci_lower is not None:
            lo = np.atleast_1d(np.asarray(self.ci_lower, float))
            hi = np.atleast_1d(np.asarray(self.ci_upper, float))
            lo.setflags(write=False)
            hi.setflags(write=False)
            object.__setattr__(self, "ci_lower", lo)
            object.__setattr__(self, "ci_upper", hi)
            if lo.shape != (n,) or hi.shape != (n,):
                raise DimensionMismatch("interval arrays must match the value count")
            usable = np.isfinite(v) & np.isfinite(lo) & np.isfinite(hi)
            bad = usable & ~((lo <= v) & (v <= hi))
            object.__setattr__(self, "ci_violations", tuple(int(i) for i in np.flatnonzero(bad)))
            n_usable = int(usable.sum())
            if n_usable and bad.sum() / n_usable > 0.01:
                raise CIConsistencyError(
                    f"{int(bad.sum())} of {n_usable} intervals exclude their "
                    "point estimate (over 1%)",
                    violations=[int(i) for i in np.flatnonzero(bad)],
                )
            if self.ci_violations:
                warnings.warn(
                    f"{self.kind}: intervals exclude the point estimate at "
                    f"windows {list(self.ci_violations)}",
                    RuntimeWarning,
                    stacklevel=2,
                )

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_flagged(self) -> int:
        """Number of windows flagged as numerically degenerate."""
        return int(np.isnan(self.values).sum())

    def to_frame(self) -> pd.DataFrame:
        """Serialize as rows of center_date, value[, ci_lower, ci_upper]."""
        data: dict = {
            "center_date": [d.isoformat() for d in self.centers],
            "value": self.values.copy(),
        }
        if self.ci_lower is not None:
            data["ci_lower"] = self.ci_lower.copy()
            data["ci_upper"] = self.ci_upper.copy()
        return pd.DataFrame(data)


# --- estimation -------------------------------------------------------------


def log_returns(panel: PricePanel) -> ReturnPanel:
    """Log-returns Z_i(t) = log(X_i(t+1) / X_i(t)); dates are the left
    endpoints, start levels the panel's first row."""
    v = panel.values
    if v.shape[0] < 2:
        raise InsufficientSamples("need at least 2 price rows for returns")
    return ReturnPanel(
        dates=panel.dates[:-1],
        values=np.log(v[1:] / v[:-1]),
        start_levels=v[0],
        labels=panel.labels,
    )


def _fit_params(z: np.ndarray, start_levels: np.ndarray, labels=None) -> GbmParams:
    """Per-week GBM parameters from a window of log-returns.

    The drift slot holds the plain mean log-return (no sigma^2/2
    adjustment); every index ratio is invariant to that convention, and
    reported variance levels simply adopt it.
    """
    n = z.shape[0]
    if n < 3:
        raise InsufficientSamples(f"need at least 3 return rows, got {n}")
    rhat = z.mean(axis=0)
    covz = np.cov(z, rowvar=False, ddof=1)
    var = np.diag(covz)
    if np.any(var <= 0.0):
        j = int(np.argmin(var))
        name = labels[j] if labels else f"column {j}"
        raise ZeroVariance(f"constant return column: {name}", column=j)
    s = np.sqrt(var)
    corr = covz / np.outer(s, s)
    np.fill_diagonal(corr, 1.0)
    return GbmParams(drifts=rhat, vols=s, corr=corr, x0=start_levels)


def estimate_params(window: ReturnPanel) -> GbmParams:
    """Fit the local GBM of one window; see :func:`_fit_params`."""
    return _fit_params(window.values, window.start_levels, window.labels)


def _moments_for_window(
    levels: np.ndarray, tau: float, moments: str, labels, check: bool = True
) -> MomentSummary:
    if moments == "lognormal":
        z = np.log(levels[1:] / levels[:-1])
        params = _fit_params(z, levels[0], labels)
        return lognormal_moments(params, tau, check=check)
    if moments == "empirical":
        return empirical_moments(levels, check=check)
    raise InvalidParameter(
        f"unknown moments route {moments!r}; expected 'lognormal' or 'empirical'"
    )


def windowed_index(
    panel: PricePanel,
    w,
    spec: WindowSpec | None = None,
    kind: str = "rhix",
    *,
    moments: str = "lognormal",
    bootstrap: bool = False,
    replicates: int = 1000,
    level: float = 0.95,
    seed=None,
) -> IndexSeries:
    """Index value for every rolling window of the panel.

    Parameters
    ----------
    panel : PricePanel
    w : WeightVector or array-like
    spec : WindowSpec, optional
        Defaults to epsilon=25, step=1.
    kind : {"cix", "hix", "rhix"}
    moments : {"lognormal", "empirical"}
        Moment route per window (see the module docstring).
    bootstrap : bool
        Attach percentile intervals (lognormal route only; the
        replicates resample return rows).
    replicates, level, seed
        Bootstrap configuration; streams are derived per window as
        ``(seed, window ordinal)``, so results do not depend on
        evaluation order.

    Windows with a degenerate moment estimate (for example a constant
    column on the lognormal route) yield NaN and are flagged, not fatal.
    """
    spec = spec or WindowSpec()
    kind = _canonical_kind(kind)
    func = _INDEX_FUNCS[kind]
    wv = w if isinstance(w, WeightVector) else WeightVector(np.asarray(w, float))
    if len(wv) != panel.n_assets:
        raise DimensionMismatch(f"{len(wv)} weights for {panel.n_assets} assets")
    if bootstrap and moments != "lognormal":
        raise InvalidParameter(
            "bootstrap intervals resample return rows and are only defined "
            "for the lognormal moment route"
        )
    t = panel.n_rows
    if t < spec.width:
        raise PanelTooShort(
            f"panel has {t} rows; a window needs {spec.width} (epsilon={spec.epsilon})",
            rows=t,
            required=spec.width,
        )
    if bootstrap and seed is None:
        # one random base, then per-window derived streams stay reproducible
        seed = int(np.random.default_rng().integers(2**63))

    centers = range(spec.epsilon, t - spec.epsilon, spec.step)
    values = np.full(len(centers), np.nan)
    lo = np.full(len(centers), np.nan) if bootstrap else None
    hi = np.full(len(centers), np.nan) if bootstrap else None
    center_dates = []
    v = panel.values
    for ordinal, c in enumerate(centers):
        center_dates.append(panel.dates[c])
        levels = v[c - spec.epsilon : c + spec.epsilon + 1]
        try:
            ms = _moments_for_window(levels, spec.tau, moments, panel.labels)
            values[ordinal] = func(wv, ms).value
        except DegeneracyError:
            continue
        if bootstrap:
            z = np.log(levels[1:] / levels[:-1])
            lo[ordinal], hi[ordinal] = _bootstrap_interval(
                z,
                levels[0],
                wv,
                kind,
                int(replicates),
                float(level),
                np.random.default_rng([seed, ordinal]),
            )
    return IndexSeries(
        centers=tuple(center_dates),
        values=values,
        kind=kind,
        ci_lower=lo,
        ci_upper=hi,
    )


# --- bootstrap --------------------------------------------------------------


def _bootstrap_interval(
    z: np.ndarray,
    start_levels: np.ndarray,
    wv: WeightVector,
    kind: str,
    b: int,
    level: float,
    rng: np.random.Generator,
) -> tuple[float, float]:
    func = _INDEX_FUNCS[kind]
    n = z.shape[0]
    tau = float(n)
    stats = np.empty(b)
    draws = 0
    for i in range(b):
        while True:
            draws += 1
            if draws > 10 * b:
                raise DegenerateResample(
                    f"no non-degenerate resample after {draws - 1} draws",
                    replicates=b,
                )
            idx = rng.integers(0, n, n)
            try:
                params = _fit_params(z[idx], start_levels)
                ms = lognormal_moments(params, tau, check=False)
                stats[i] = func(wv, ms).value
                break
            except DegeneracyError:
                continue
    alpha = (1.0 - level) / 2.0
    qlo, qhi = np.quantile(stats, [alpha, 1.0 - alpha])
    return float(qlo), float(qhi)


def bootstrap_ci(
    window: ReturnPanel,
    w,
    kind: str = "rhix",
    B: int = 1000,
    level: float = 0.95,
    seed=None,
) -> tuple[float, float]:
    """Percentile bootstrap interval for one window's index value.

    Resamples the window's return rows with replacement ``B`` times,
    refits the window parameters per replicate, recomputes the index
    through the closed-form moments, and returns the empirical
    ``(1-level)/2`` and ``1-(1-level)/2`` quantiles.  Replicates with a
    zero-variance column are redrawn (at most ``10*B`` draws in total).
    Deterministic for a given ``seed``.
    """
    kind = _canonical_kind(kind)
    B = int(B)
    if B < 100:
        raise InvalidParameter("need at least 100 bootstrap replicates", replicates=B)
    level = float(level)
    if not 0.0 < level < 1.0:
        raise InvalidParameter("level must lie strictly between 0 and 1", level=level)
    if window.n_returns < 3:
        raise InsufficientSamples("need at least 3 return rows to bootstrap")
    wv = w if isinstance(w, WeightVector) else WeightVector(np.asarray(w, float))
    if len(wv) != window.values.shape[1]:
        raise DimensionMismatch(
            f"{len(wv)} weights for {window.values.shape[1]} assets"
        )
    return _bootstrap_interval(
        window.values,
        window.start_levels,
        wv,
        kind,
        B,
        level,
        np.random.default_rng(seed),
    )
