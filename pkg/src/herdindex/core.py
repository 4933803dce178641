"""Index mathematics: weighted covariances, CIX/HIX/RHIX, and the
empirical comonotonic coupling.

All three indices compare the observed co-movement of a weighted basket
against the strongest co-movement the same marginals could exhibit:

* ``cix``  — weighted average pairwise correlation of levels,
* ``hix``  — basket variance over comonotonic basket variance,
* ``rhix`` — off-diagonal weighted covariance mass over its comonotonic
  counterpart; 0 under pairwise uncorrelatedness, 1 under comonotonicity.

Inputs arrive as a :class:`MomentSummary` (means, covariance matrix, and
the covariance matrix of the comonotonically coupled marginals); the
summary can come from closed-form lognormal moments (module ``gbm``),
from rolling-window estimation (module ``rolling``), or directly from
samples via :func:`empirical_moments`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDenominator,
    DimensionMismatch,
    InsufficientSamples,
    ValidationError,
)
from .panel import WeightVector

__all__ = [
    "MomentSummary",
    "IndexValue",
    "weighted_cov",
    "cix",
    "hix",
    "rhix",
    "rhix_from_variances",
    "empirical_comono_cov",
    "empirical_moments",
]

#: relative tolerance used by matrix sanity checks
_RTOL = 1e-10

KINDS = ("CIX", "HIX", "RHIX")


def _scale(*arrays: np.ndarray) -> float:
    return max(1.0, *(float(np.max(np.abs(a))) for a in arrays if a.size))


@dataclass(frozen=True)
class MomentSummary:
    """First and second moments of a d-asset snapshot.

    Parameters
    ----------
    means : ndarray, shape (d,)
        Expected levels.
    cov : ndarray, shape (d, d)
        Covariance matrix of the levels; positive semidefinite within a
        relative eigenvalue tolerance of 1e-10.
    comono_cov : ndarray, shape (d, d)
        Covariance matrix of the comonotonically coupled marginals.  The
        coupling preserves marginals, so its diagonal equals ``cov``'s,
        and no pairwise covariance can exceed it (Fréchet upper bound).
    check : bool
        Skip validation when False (hot loops rebuilding summaries from
        already-validated parameters).
    """

    means: np.ndarray
    cov: np.ndarray
    comono_cov: np.ndarray
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "means", np.atleast_1d(np.asarray(self.means, float)))
        object.__setattr__(self, "cov", np.asarray(self.cov, float))
        object.__setattr__(self, "comono_cov", np.asarray(self.comono_cov, float))
        if not self.check:
            return
        d = self.means.shape[0]
        if self.cov.shape != (d, d) or self.comono_cov.shape != (d, d):
            raise DimensionMismatch(
                f"moment shapes inconsistent: means ({d},), cov {self.cov.shape}, "
                f"comono_cov {self.comono_cov.shape}"
            )
        if not (
            np.all(np.isfinite(self.means))
            and np.all(np.isfinite(self.cov))
            and np.all(np.isfinite(self.comono_cov))
        ):
            raise ValidationError("moments must be finite")
        tol = _RTOL * _scale(self.cov, self.comono_cov)
        if np.max(np.abs(self.cov - self.cov.T)) > tol:
            raise ValidationError("cov is not symmetric")
        if np.max(np.abs(self.comono_cov - self.comono_cov.T)) > tol:
            raise ValidationError("comono_cov is not symmetric")
        dv, dc = np.diag(self.cov), np.diag(self.comono_cov)
        if np.max(np.abs(dv - dc)) > tol:
            raise ValidationError(
                "comonotonic coupling must preserve marginal variances",
                max_diagonal_gap=float(np.max(np.abs(dv - dc))),
            )
        eig = np.linalg.eigvalsh((self.cov + self.cov.T) / 2.0)
        if eig[0] < -_RTOL * max(1.0, float(eig[-1])):
            raise ValidationError(
                "cov is not positive semidefinite within tolerance",
                min_eigenvalue=float(eig[0]),
            )
        if np.min(self.comono_cov - self.cov) < -tol:
            raise ValidationError(
                "cov exceeds its comonotonic counterpart somewhere "
                "(upper Fréchet bound violated)",
                max_excess=float(np.max(self.cov - self.comono_cov)),
            )

    @property
    def d(self) -> int:
        return self.means.shape[0]

    @property
    def asset_sds(self) -> np.ndarray:
        """Marginal standard deviations (from the diagonal of ``cov``)."""
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))


@dataclass(frozen=True)
class IndexValue:
    """One index observation with its attainable analytic bounds."""

    kind: str
    value: float
    lower_bound: float
    upper_bound: float

    def __post_init__(self):
        object.__setattr__(self, "kind", str(self.kind).upper())
        for f in ("value", "lower_bound", "upper_bound"):
            object.__setattr__(self, f, float(getattr(self, f)))
        if self.kind not in KINDS:
            raise ValidationError(f"unknown index kind {self.kind!r}")
        tol = _RTOL * max(1.0, abs(self.value), abs(self.lower_bound), abs(self.upper_bound))
        if not (self.lower_bound - tol <= self.value <= self.upper_bound + tol):
            raise ValidationError(
                f"{self.kind} value {self.value} outside "
                f"[{self.lower_bound}, {self.upper_bound}]",
                value=self.value,
                lower=self.lower_bound,
                upper=self.upper_bound,
            )


def _as_weight_array(w, d: int) -> np.ndarray:
    wv = w if isinstance(w, WeightVector) else WeightVector(np.asarray(w, float))
    if len(wv) != d:
        raise DimensionMismatch(f"{len(wv)} weights for {d} assets")
    return wv.weights


def weighted_cov(w, cov: np.ndarray) -> float:
    """Off-diagonal weighted covariance mass, sum_{i != j} w_i w_j cov[i, j].

    Equals the full quadratic form minus its diagonal part.
    """
    cov = np.asarray(cov, float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DimensionMismatch("cov must be a square matrix", shape=list(cov.shape))
    wa = _as_weight_array(w, cov.shape[0])
    return float(wa @ cov @ wa - (wa * wa) @ np.diag(cov))


def _quadratic(wa: np.ndarray, cov: np.ndarray) -> float:
    return float(wa @ cov @ wa)


def cix(w, m: MomentSummary) -> IndexValue:
    """Weighted average pairwise correlation of the asset levels.

    For two assets this is exactly ``corr(X1, X2)``; it is 0 when the
    assets are pairwise uncorrelated.
    """
    wa = _as_weight_array(w, m.d)
    s = m.asset_sds
    den = weighted_cov(wa, np.outer(s, s))
    if not den > 0.0:
        raise DegenerateDenominator(
            "CIX denominator not positive: need at least two positively "
            "weighted assets with positive variance",
            denominator=den,
        )
    num = weighted_cov(wa, m.cov)
    lower = -float((wa * wa) @ (s * s)) / den
    upper = weighted_cov(wa, m.comono_cov) / den
    return IndexValue("CIX", num / den, lower, upper)


def hix(w, m: MomentSummary) -> IndexValue:
    """Basket variance over comonotonic basket variance, in [0, 1]."""
    wa = _as_weight_array(w, m.d)
    den = _quadratic(wa, m.comono_cov)
    if not den > 0.0:
        raise DegenerateDenominator(
            "comonotonic basket variance is not positive", denominator=den
        )
    return IndexValue("HIX", _quadratic(wa, m.cov) / den, 0.0, 1.0)


def rhix(w, m: MomentSummary) -> IndexValue:
    """Off-diagonal covariance mass over its comonotonic counterpart.

    0 under pairwise uncorrelatedness, 1 under comonotonicity; may be
    negative when the basket hedges itself.
    """
    wa = _as_weight_array(w, m.d)
    den = weighted_cov(wa, m.comono_cov)
    if not den > 0.0:
        raise DegenerateDenominator(
            "comonotonic off-diagonal covariance mass is not positive",
            denominator=den,
        )
    s = m.asset_sds
    lower = -float((wa * wa) @ (s * s)) / den
    return IndexValue("RHIX", weighted_cov(wa, m.cov) / den, lower, 1.0)


def rhix_from_variances(varS: float, varSc: float, w, asset_vars) -> float:
    """RHIX from basket variances alone.

    ``(varS - sum(w_i^2 var_i)) / (varSc - sum(w_i^2 var_i))`` — the same
    ratio as :func:`rhix`, expressed through the variance of the weighted
    basket and of its comonotonic counterpart.
    """
    asset_vars = np.atleast_1d(np.asarray(asset_vars, float))
    wa = _as_weight_array(w, asset_vars.shape[0])
    m = float((wa * wa) @ asset_vars)
    den = float(varSc) - m
    if not den > 0.0:
        raise DegenerateDenominator(
            "comonotonic basket variance does not exceed the diagonal part",
            denominator=den,
        )
    return (float(varS) - m) / den


def empirical_comono_cov(samples: np.ndarray) -> np.ndarray:
    """Sample covariance of the comonotonic coupling of the columns.

    Each column is sorted ascending (stable, so ties keep input order)
    and the ordinary sample covariance (ddof=1) of the sorted columns is
    returned.  Sorting permutes within columns only, so marginal moments
    are preserved; by the rearrangement inequality every off-diagonal
    entry dominates the raw sample covariance.
    """
    x = np.asarray(samples, float)
    if x.ndim != 2:
        raise DimensionMismatch("samples must be a T x d matrix", shape=list(x.shape))
    if x.shape[0] < 2:
        raise InsufficientSamples(
            f"need at least 2 rows for a covariance, got {x.shape[0]}"
        )
    return np.cov(np.sort(x, axis=0, kind="stable"), rowvar=False, ddof=1)


def empirical_moments(samples: np.ndarray, check: bool = True) -> MomentSummary:
    """Distribution-free :class:`MomentSummary` straight from samples.

    Rows are observations, columns assets: means and covariance are the
    ordinary sample estimates, the comonotonic covariance comes from
    :func:`empirical_comono_cov` on the same rows.
    """
    x = np.asarray(samples, float)
    if x.ndim != 2:
        raise DimensionMismatch("samples must be a T x d matrix", shape=list(x.shape))
    if x.shape[0] < 2:
        raise InsufficientSamples(
            f"need at least 2 rows for a covariance, got {x.shape[0]}"
        )
    return MomentSummary(
        means=x.mean(axis=0),
        cov=np.cov(x, rowvar=False, ddof=1),
        comono_cov=empirical_comono_cov(x),
        check=check,
    )
