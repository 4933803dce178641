"""Multivariate geometric Brownian motion: closed-form level moments,
two-asset index formulas, and panel simulation.

Levels follow ``dX_i/X_i = r_i dt + sigma_i dB_i`` with ``corr(B_i, B_j)
= rho_ij``, so ``X_i(t0 + tau)`` given ``X_i(t0) = x0`` is lognormal.
Everything here is exact in that model — the simulator steps with the
exact lognormal increment (no Euler bias), which is what makes these
functions usable as oracles for the estimation pipeline.
"""

from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InvalidParameter, NonPsdCorrelation
from .panel import PricePanel

__all__ = [
    "GbmParams",
    "lognormal_sd",
    "gbm_corr",
    "comono_corr",
    "two_asset_rhix",
    "two_asset_hix",
    "lognormal_moments",
    "simulate",
    "simulate_comonotonic",
]

#: eigenvalues below this are treated as exactly zero when factorizing
_EIG_CLIP = 1e-12
#: eigenvalues below -this mean the matrix is not acceptably PSD
_EIG_NEG = 1e-10


def _require(cond: bool, message: str, **details):
    if not cond:
        raise InvalidParameter(message, **details)


@dataclass(frozen=True)
class GbmParams:
    """Parameters of a d-asset geometric Brownian motion (per-week units).

    ``drifts`` may hold either the model drift r or an estimated mean
    log-return; the index formulas are invariant to that choice because
    drift cancels from every correlation ratio.
    """

    drifts: np.ndarray
    vols: np.ndarray
    corr: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        for name in ("drifts", "vols", "x0"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), float)))
        object.__setattr__(self, "corr", np.asarray(self.corr, float))
        d = self.drifts.shape[0]
        _require(d >= 2, f"need at least 2 assets, got {d}")
        _require(
            self.vols.shape == (d,) and self.x0.shape == (d,) and self.corr.shape == (d, d),
            "drifts, vols, x0 must be length-d vectors and corr a d x d matrix",
            d=d,
            vols=list(self.vols.shape),
            x0=list(self.x0.shape),
            corr=list(self.corr.shape),
        )
        _require(
            bool(
                np.all(np.isfinite(self.drifts))
                and np.all(np.isfinite(self.vols))
                and np.all(np.isfinite(self.corr))
                and np.all(np.isfinite(self.x0))
            ),
            "parameters must be finite",
        )
        _require(bool(np.all(self.vols > 0.0)), "volatilities must be strictly positive")
        _require(bool(np.all(self.x0 > 0.0)), "initial levels must be strictly positive")
        c = self.corr
        _require(float(np.max(np.abs(c - c.T))) <= 1e-12, "correlation matrix must be symmetric")
        _require(
            float(np.max(np.abs(np.diag(c) - 1.0))) <= 1e-12,
            "correlation matrix must have unit diagonal",
        )
        _require(
            float(np.max(np.abs(c))) <= 1.0 + 1e-12,
            "correlation entries must lie in [-1, 1]",
        )
        eig = np.linalg.eigvalsh((c + c.T) / 2.0)
        _require(
            float(eig[0]) >= -_EIG_NEG,
            "correlation matrix is not positive semidefinite within tolerance",
            min_eigenvalue=float(eig[0]),
        )

    @property
    def d(self) -> int:
        return self.drifts.shape[0]

    @classmethod
    def from_dict(cls, cfg: dict) -> "GbmParams":
        """Build from a config mapping with keys drifts/vols/corr/x0.

        Unknown keys are ignored so a single config file can also carry
        simulation settings (steps, dt, seed, labels).
        """
        missing = [k for k in ("drifts", "vols", "corr", "x0") if k not in cfg]
        _require(not missing, f"config missing keys: {missing}", missing=missing)
        return cls(
            drifts=np.asarray(cfg["drifts"], float),
            vols=np.asarray(cfg["vols"], float),
            corr=np.asarray(cfg["corr"], float),
            x0=np.asarray(cfg["x0"], float),
        )


# --- closed forms -----------------------------------------------------------


def lognormal_sd(x0: float, r: float, sigma: float, tau: float) -> float:
    """Standard deviation of the level after horizon tau, given start x0.

    ``x0 * exp(r*tau) * sqrt(exp(sigma^2*tau) - 1)``; the corresponding
    mean is ``x0 * exp(r*tau)``.
    """
    x0, r, sigma, tau = float(x0), float(r), float(sigma), float(tau)
    _require(x0 > 0.0, "x0 must be positive", x0=x0)
    _require(sigma > 0.0, "sigma must be positive", sigma=sigma)
    _require(tau > 0.0, "tau must be positive", tau=tau)
    return x0 * math.exp(r * tau) * math.sqrt(math.expm1(sigma * sigma * tau))


def gbm_corr(sigma_i: float, sigma_j: float, rho: float, tau: float) -> float:
    """Correlation of two lognormal levels at horizon tau.

    ``(exp(rho*si*sj*tau) - 1) / sqrt((exp(si^2*tau)-1)(exp(sj^2*tau)-1))``.
    """
    sigma_i, sigma_j, rho, tau = map(float, (sigma_i, sigma_j, rho, tau))
    _require(sigma_i > 0.0 and sigma_j > 0.0, "sigmas must be positive")
    _require(tau > 0.0, "tau must be positive", tau=tau)
    _require(-1.0 <= rho <= 1.0, "rho must lie in [-1, 1]", rho=rho)
    den = math.sqrt(math.expm1(sigma_i**2 * tau) * math.expm1(sigma_j**2 * tau))
    return math.expm1(rho * sigma_i * sigma_j * tau) / den


def comono_corr(sigma_i: float, sigma_j: float, tau: float) -> float:
    """Correlation of the comonotonic coupling of the two lognormal levels.

    The rho=1 case of :func:`gbm_corr`; equals 1 exactly when the two
    volatilities coincide.
    """
    sigma_i, sigma_j, tau = map(float, (sigma_i, sigma_j, tau))
    _require(sigma_i > 0.0 and sigma_j > 0.0, "sigmas must be positive")
    _require(tau > 0.0, "tau must be positive", tau=tau)
    den = math.sqrt(math.expm1(sigma_i**2 * tau) * math.expm1(sigma_j**2 * tau))
    return math.expm1(sigma_i * sigma_j * tau) / den


def two_asset_rhix(rho: float, sigma1: float, sigma2: float, tau: float) -> float:
    """Two-asset RHIX: ``(exp(rho*s1*s2*tau) - 1) / (exp(s1*s2*tau) - 1)``.

    Independent of weights, drifts, and starting levels; equal to
    ``gbm_corr / comono_corr``.
    """
    rho, sigma1, sigma2, tau = map(float, (rho, sigma1, sigma2, tau))
    _require(sigma1 > 0.0 and sigma2 > 0.0, "sigmas must be positive")
    _require(tau > 0.0, "tau must be positive", tau=tau)
    _require(-1.0 <= rho <= 1.0, "rho must lie in [-1, 1]", rho=rho)
    return math.expm1(rho * sigma1 * sigma2 * tau) / math.expm1(sigma1 * sigma2 * tau)


def two_asset_hix(
    rho: float,
    sigma1: float,
    sigma2: float,
    w1: float,
    w2: float,
    r1: float,
    r2: float,
    x0_1: float,
    x0_2: float,
    tau: float,
) -> float:
    """Two-asset HIX from the lognormal closed forms.

    Composes :func:`lognormal_sd`, :func:`gbm_corr` and
    :func:`comono_corr`; unlike RHIX it depends on weights and starting
    levels, which is exactly the pathology the weight/volatility curves
    illustrate.
    """
    w1, w2 = float(w1), float(w2)
    _require(w1 >= 0.0 and w2 >= 0.0 and (w1 + w2) > 0.0, "weights must be nonnegative, not both 0")
    s1 = lognormal_sd(x0_1, r1, sigma1, tau)
    s2 = lognormal_sd(x0_2, r2, sigma2, tau)
    cross = 2.0 * w1 * w2 * s1 * s2
    num = w1**2 * s1**2 + w2**2 * s2**2 + cross * gbm_corr(sigma1, sigma2, rho, tau)
    den = w1**2 * s1**2 + w2**2 * s2**2 + cross * comono_corr(sigma1, sigma2, tau)
    return num / den


def lognormal_moments(params: GbmParams, tau: float, *, check: bool = True):
    """Closed-form :class:`~herdindex.core.MomentSummary` at horizon tau.

    Means ``u_i = x0_i exp(r_i tau)``; covariances
    ``u_i u_j (exp(rho_ij s_i s_j tau) - 1)`` and the comonotonic
    counterpart with rho forced to 1.
    """
    from .core import MomentSummary

    tau = float(tau)
    _require(tau > 0.0, "tau must be positive", tau=tau)
    u = params.x0 * np.exp(params.drifts * tau)
    uu = np.outer(u, u)
    ss = np.outer(params.vols, params.vols)
    return MomentSummary(
        means=u,
        cov=uu * np.expm1(tau * (params.corr * ss)),
        comono_cov=uu * np.expm1(tau * ss),
        check=check,
    )


# --- simulation -------------------------------------------------------------


def _corr_factor(corr: np.ndarray) -> np.ndarray:
    """Matrix L with L @ L.T = corr.

    Cholesky when positive definite; otherwise a symmetric-eigenvalue
    factorization with eigenvalues below 1e-12 clipped to zero (the
    comonotonic all-ones matrix is rank one, so this path is routine).
    """
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        pass
    vals, vecs = np.linalg.eigh((corr + corr.T) / 2.0)
    if float(vals[0]) < -_EIG_NEG:
        raise NonPsdCorrelation(
            "correlation matrix is not factorizable within tolerance",
            min_eigenvalue=float(vals[0]),
        )
    vals = np.where(vals < _EIG_CLIP, 0.0, vals)
    return vecs * np.sqrt(vals)


def _weekly_dates(start: _dt.date, n: int) -> tuple[_dt.date, ...]:
    return tuple(start + _dt.timedelta(days=7 * k) for k in range(n))


def simulate(
    params: GbmParams,
    n_steps: int,
    dt: float = 1.0,
    seed=None,
    *,
    labels: Sequence[str] | None = None,
    start: _dt.date = _dt.date(2000, 1, 3),
) -> PricePanel:
    """Simulate one panel of correlated GBM paths.

    Uses the exact lognormal step
    ``X(t+dt) = X(t) * exp((r - sigma^2/2) dt + sigma sqrt(dt) eps)``
    with ``eps`` jointly normal under ``params.corr``, so closed-form
    moments hold at every dt.  Deterministic for a given ``seed``
    (NumPy ``default_rng``, PCG64; determinism is promised within this
    implementation, not bit-for-bit across libraries).  Callers running
    replicates in parallel should derive one stream per replicate, e.g.
    ``seed=[base_seed, replicate_index]``.

    Output dates advance 7 days per step from ``start`` — dates label
    positions; ``dt`` only scales the step distribution.
    """
    n_steps = int(n_steps)
    _require(n_steps >= 1, "n_steps must be >= 1", n_steps=n_steps)
    dt = float(dt)
    _require(dt > 0.0, "dt must be positive", dt=dt)
    if labels is None:
        labels = tuple(f"A{i + 1}" for i in range(params.d))
    factor = _corr_factor(params.corr)
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((n_steps, params.d)) @ factor.T
    steps = (params.drifts - 0.5 * params.vols**2) * dt + params.vols * math.sqrt(dt) * eps
    log_path = np.vstack([np.zeros(params.d), np.cumsum(steps, axis=0)])
    return PricePanel(
        dates=_weekly_dates(start, n_steps + 1),
        labels=tuple(labels),
        values=params.x0 * np.exp(log_path),
    )


def simulate_comonotonic(
    params: GbmParams,
    n_steps: int,
    dt: float = 1.0,
    seed=None,
    *,
    labels: Sequence[str] | None = None,
    start: _dt.date = _dt.date(2000, 1, 3),
) -> PricePanel:
    """Simulate with every asset driven by one common shock per step.

    Identical to :func:`simulate` with the correlation matrix replaced
    by all ones: marginal laws are unchanged, dependence is the
    strongest possible.
    """
    ones = np.ones((params.d, params.d))
    return simulate(
        replace(params, corr=ones), n_steps, dt, seed, labels=labels, start=start
    )
