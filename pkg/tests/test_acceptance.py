"""Acceptance suite: one test (or pair) per shipped guarantee.

Each test states its tolerance and runtime budget inline; the conftest
hook turns the outcomes into a per-criterion PASS/FAIL report at the
end of the run.  Criterion 2 carries one deliberately failing sub-claim
(strict xfail) — the constancy it asserts contradicts the closed form;
the analysis lives in ../notes/decisions.md.
"""

import math
import time

import numpy as np
import pytest

from herdindex import (
    GbmParams,
    MomentSummary,
    WindowSpec,
    bootstrap_ci,
    cix,
    empirical_comono_cov,
    gbm_corr,
    hix,
    log_returns,
    lognormal_moments,
    rhix,
    rhix_from_variances,
    simulate,
    two_asset_hix,
    two_asset_rhix,
    windowed_index,
)

from conftest import make_panel, random_moments

VOL_GRID = [0.2 * k for k in range(1, 16)]  # 0.2, 0.4, ..., 3.0


def offdiag_mass(w: np.ndarray, m: np.ndarray) -> float:
    return float(w @ m @ w - (w * w) @ np.diag(m))


# --- criterion 1 -------------------------------------------------------------


def test_criterion_01_two_asset_closed_form_vs_monte_carlo():
    """10^6 simulated lognormal pairs, sorted coupling for the denominator;
    agreement within 0.5% relative error, under 10 s."""
    t0 = time.perf_counter()
    rho, sigma = 0.95, 0.2
    rng = np.random.default_rng(20240801)
    eps = rng.standard_normal((1_000_000, 2))
    z1 = sigma * eps[:, 0]
    z2 = sigma * (rho * eps[:, 0] + math.sqrt(1.0 - rho * rho) * eps[:, 1])
    x1 = np.exp(z1 - 0.5 * sigma**2)
    x2 = np.exp(z2 - 0.5 * sigma**2)
    num = np.cov(x1, x2, ddof=1)[0, 1]
    den = np.cov(np.sort(x1), np.sort(x2), ddof=1)[0, 1]
    mc = num / den
    closed = two_asset_rhix(rho, sigma, sigma, 1.0)
    assert abs(mc - closed) / abs(closed) < 0.005
    assert time.perf_counter() - t0 < 10.0


# --- criterion 2 -------------------------------------------------------------


def test_criterion_02_pathology_curves():
    """Volatility sweep, sigma2 in {0.2, ..., 3.0}: at rho=0 HIX rises
    toward 1 while RHIX stays pinned at 0; at rho=0.95 CIX decays.
    Under 1 s."""
    t0 = time.perf_counter()
    hix_vals = [
        two_asset_hix(0.0, 0.2, s2, 1.0, 1.0, 0.03, 0.03, 1.0, 1.0, 1.0)
        for s2 in VOL_GRID
    ]
    assert all(b > a for a, b in zip(hix_vals, hix_vals[1:]))
    assert hix_vals[-1] > 0.9
    for s2 in VOL_GRID:
        assert abs(two_asset_rhix(0.0, 0.2, s2, 1.0)) <= 1e-12
    cix_vals = [gbm_corr(0.2, s2, 0.95, 1.0) for s2 in VOL_GRID]
    assert all(b < a for a, b in zip(cix_vals, cix_vals[1:]))
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.xfail(
    strict=True,
    reason=(
        "stated sub-claim is contradictory: at rho=0.95 the closed-form "
        "RHIX varies with sigma2 (range ~1.45e-2 over this grid), so it "
        "cannot be constant to 1e-12; see ../notes/decisions.md"
    ),
)
def test_criterion_02_rhix_constant_claim():
    rhix_vals = [two_asset_rhix(0.95, 0.2, s2, 1.0) for s2 in VOL_GRID]
    assert float(np.ptp(rhix_vals)) <= 1e-12


# --- criterion 3 -------------------------------------------------------------


def test_criterion_03_bounds_and_attainment():
    """1,000 random moment summaries stay inside the analytic intervals
    (1e-10); the mixable construction attains both lower bounds; the
    comonotonic coupling scores HIX = RHIX = 1."""
    rng = np.random.default_rng(303)
    for _ in range(1000):
        w, m = random_moments(rng)
        wa = w.weights
        s = np.sqrt(np.diag(m.cov))
        diag_mass = float((wa * wa) @ (s * s))
        den_c = offdiag_mass(wa, np.outer(s, s))
        den_r = offdiag_mass(wa, m.comono_cov)
        val_c = offdiag_mass(wa, m.cov) / den_c
        val_r = offdiag_mass(wa, m.cov) / den_r
        lo_c, up_c = -diag_mass / den_c, offdiag_mass(wa, m.comono_cov) / den_c
        lo_r, up_r = -diag_mass / den_r, 1.0
        tol_c = 1e-10 * max(1.0, abs(lo_c), abs(up_c))
        tol_r = 1e-10 * max(1.0, abs(lo_r))
        assert lo_c - tol_c <= val_c <= up_c + tol_c
        assert lo_r - tol_r <= val_r <= up_r + tol_r
        # the library agrees with the recomputed ratios and bounds
        vc, vr = cix(w, m), rhix(w, m)
        assert vc.value == pytest.approx(val_c, rel=1e-12, abs=1e-12)
        assert vc.lower_bound == pytest.approx(lo_c, rel=1e-12, abs=1e-12)
        assert vc.upper_bound == pytest.approx(up_c, rel=1e-12, abs=1e-12)
        assert vr.value == pytest.approx(val_r, rel=1e-12, abs=1e-12)
        assert vr.lower_bound == pytest.approx(lo_r, rel=1e-12, abs=1e-12)

    # mixable pair: X2 = c - X1, equal weights and marginal variances
    for _ in range(10):
        v = float(rng.uniform(0.2, 9.0))
        q = float(rng.uniform(0.3, 4.0))
        c = float(rng.uniform(-5.0, 5.0))
        mu = float(rng.uniform(-2.0, 2.0))
        mix = MomentSummary(
            [mu, c - mu],
            [[v, -v], [-v, v]],
            [[v, v], [v, v]],
        )
        vc, vr = cix([q, q], mix), rhix([q, q], mix)
        assert abs(vc.value - vc.lower_bound) <= 1e-10
        assert abs(vr.value - vr.lower_bound) <= 1e-10

    # comonotonic coupling: both herd indices are exactly 1
    for _ in range(10):
        w, m0 = random_moments(rng)
        m = MomentSummary(m0.means, m0.comono_cov, m0.comono_cov)
        assert abs(hix(w, m).value - 1.0) <= 1e-10
        assert abs(rhix(w, m).value - 1.0) <= 1e-10


# --- criterion 4 -------------------------------------------------------------


def test_criterion_04_affine_invariance_and_duality():
    """500 random panels through the rolling pipeline: indices unchanged
    (1e-10) by level maps x -> alpha*x + b (alpha != 0; distribution-free
    moment route) and by the weight/currency swap (a*w on X equals w on
    a*X; both moment routes)."""
    rng = np.random.default_rng(404)
    spec = WindowSpec(epsilon=3, step=2)
    kinds = ("cix", "hix", "rhix")
    for _ in range(500):
        d = int(rng.integers(2, 5))
        t = 13
        steps = rng.normal(0.0, 0.03, size=(t - 1, d))
        base = rng.uniform(50.0, 150.0, size=d)
        values = base * np.exp(np.vstack([np.zeros(d), np.cumsum(steps, axis=0)]))
        panel = make_panel(values)
        w = rng.uniform(0.2, 3.0, size=d)

        alpha = float(rng.uniform(0.5, 2.0)) * (1.0 if rng.random() < 0.5 else -1.0)
        if alpha > 0:
            b = rng.uniform(1.0, 200.0, size=d)
        else:
            b = -alpha * values.max(axis=0) + rng.uniform(1.0, 50.0, size=d)
        moved = make_panel(alpha * values + b)

        a = rng.uniform(0.25, 4.0, size=d)
        scaled = make_panel(values * a)

        for kind in kinds:
            before = windowed_index(panel, w, spec, kind, moments="empirical").values
            after = windowed_index(moved, w, spec, kind, moments="empirical").values
            assert np.all(np.isfinite(before))
            np.testing.assert_allclose(after, before, rtol=0.0, atol=1e-10)

            lhs = windowed_index(panel, a * w, spec, kind).values
            rhs = windowed_index(scaled, w, spec, kind).values
            assert np.all(np.isfinite(lhs))
            np.testing.assert_allclose(rhs, lhs, rtol=0.0, atol=1e-10)

            lhs_e = windowed_index(panel, a * w, spec, kind, moments="empirical").values
            rhs_e = windowed_index(scaled, w, spec, kind, moments="empirical").values
            np.testing.assert_allclose(rhs_e, lhs_e, rtol=0.0, atol=1e-10)


# --- criterion 5 -------------------------------------------------------------

SIGMA5 = np.array([0.018, 0.022, 0.025, 0.02, 0.03])
R5 = np.array([0.0008, 0.0012, 0.001, 0.0005, 0.0015])
LOADINGS5 = np.array([0.55, 0.65, 0.75, 0.6, 0.85])
X05 = np.array([100.0, 80.0, 120.0, 90.0, 110.0])
W5 = np.array([1.0, 2.0, 1.5, 1.0, 0.8])


def factor_corr(loadings: np.ndarray) -> np.ndarray:
    corr = np.outer(loadings, loadings)
    np.fill_diagonal(corr, 1.0)
    return corr


def analytic_rhix_series(panel, w, r, sigma, corr, eps):
    """Generating-model RHIX per window, anchored at each window's
    observed start levels."""
    tau = 2.0 * eps
    e_cov = np.expm1(tau * corr * np.outer(sigma, sigma))
    e_com = np.expm1(tau * np.outer(sigma, sigma))
    growth = np.exp(r * tau)
    out = np.empty(len(range(eps, panel.n_rows - eps)))
    for i, c in enumerate(range(eps, panel.n_rows - eps)):
        u = w * panel.values[c - eps] * growth
        num = u @ e_cov @ u - (u * u) @ np.diag(e_cov)
        den = u @ e_com @ u - (u * u) @ np.diag(e_com)
        out[i] = num / den
    return out


def test_criterion_05_windowed_estimates_recover_model():
    """d=5 factor model, T=10,000 weekly steps: windowed RHIX tracks the
    generating model's closed form — MAE < 0.1 at eps=25, < 0.03 at
    eps=250.  Under 60 s."""
    t0 = time.perf_counter()
    corr = factor_corr(LOADINGS5)
    params = GbmParams(drifts=R5, vols=SIGMA5, corr=corr, x0=X05)
    panel = simulate(params, 10_000, seed=505)

    series_25 = windowed_index(panel, W5, WindowSpec(epsilon=25), "rhix")
    truth_25 = analytic_rhix_series(panel, W5, R5, SIGMA5, corr, 25)
    assert not np.isnan(series_25.values).any()
    mae_25 = float(np.mean(np.abs(series_25.values - truth_25)))
    assert mae_25 < 0.1

    series_250 = windowed_index(panel, W5, WindowSpec(epsilon=250), "rhix")
    truth_250 = analytic_rhix_series(panel, W5, R5, SIGMA5, corr, 250)
    mae_250 = float(np.mean(np.abs(series_250.values - truth_250)))
    assert mae_250 < 0.03
    assert mae_250 < mae_25  # widening the window tightens the estimate
    assert time.perf_counter() - t0 < 60.0


# --- criterion 6 -------------------------------------------------------------

SIGMA4 = np.array([0.02, 0.025, 0.022, 0.028])
R4 = np.array([0.001, 0.0008, 0.0012, 0.0005])
LOADINGS4 = np.array([0.7, 0.6, 0.75, 0.65])
X04 = np.array([100.0, 90.0, 110.0, 95.0])
W4 = np.array([1.0, 1.2, 0.9, 1.1])


def test_criterion_06_bootstrap_coverage():
    """200 independent n=50 windows: the 95% percentile interval
    (B=1,000) covers the model RHIX in at least 88%; with an identity
    correlation it contains 0 in at least 90%.  Under 5 min."""
    t0 = time.perf_counter()
    n, runs = 50, 200

    corr = factor_corr(LOADINGS4)
    params = GbmParams(drifts=R4, vols=SIGMA4, corr=corr, x0=X04)
    truth = rhix(W4, lognormal_moments(params, float(n))).value
    hits = 0
    for k in range(runs):
        window = log_returns(simulate(params, n, seed=[606, k]))
        lo, hi = bootstrap_ci(window, W4, "rhix", B=1000, level=0.95, seed=[707, k])
        hits += lo <= truth <= hi
    assert hits >= int(0.88 * runs)

    params0 = GbmParams(drifts=R4, vols=SIGMA4, corr=np.eye(4), x0=X04)
    zero_hits = 0
    for k in range(runs):
        window = log_returns(simulate(params0, n, seed=[616, k]))
        lo, hi = bootstrap_ci(window, W4, "rhix", B=1000, level=0.95, seed=[717, k])
        zero_hits += lo <= 0.0 <= hi
    assert zero_hits >= int(0.90 * runs)
    assert time.perf_counter() - t0 < 300.0


# --- criterion 7 -------------------------------------------------------------


def test_criterion_07_variance_form_identity():
    """rhix and rhix_from_variances agree to 1e-12 on 1,000 random
    moment summaries."""
    rng = np.random.default_rng(707)
    for _ in range(1000):
        w, m = random_moments(rng)
        wa = w.weights
        direct = rhix(w, m).value
        implied = rhix_from_variances(
            float(wa @ m.cov @ wa),
            float(wa @ m.comono_cov @ wa),
            w,
            np.diag(m.cov),
        )
        assert abs(direct - implied) <= 1e-12 * max(1.0, abs(direct))


# --- criterion 8 -------------------------------------------------------------


def test_criterion_08_sorted_coupling_covariance():
    """1,000 random panels: sorted coupling keeps marginal variances
    (1e-12), its off-diagonals dominate the raw covariance (within 3
    standard errors; in fact exactly), and comonotone input reproduces
    the raw covariance bit for bit."""
    rng = np.random.default_rng(808)
    for _ in range(1000):
        t = int(rng.integers(10, 80))
        d = int(rng.integers(2, 7))
        scale = rng.uniform(0.5, 50.0, size=d)
        x = rng.normal(size=(t, d)) * scale
        if rng.random() < 0.3:
            x = np.exp(x / np.max(scale))  # occasionally skewed positive data
        raw = np.cov(x, rowvar=False, ddof=1)
        m = empirical_comono_cov(x)
        np.testing.assert_allclose(np.diag(m), np.diag(raw), rtol=1e-12)
        se = np.sqrt(
            (np.outer(np.diag(raw), np.diag(raw)) + raw**2) / (t - 1)
        )
        gap = m - raw
        assert np.all(gap >= -3.0 * se)
        assert np.min(gap) >= -1e-12 * max(1.0, float(np.max(np.abs(m))))

    for _ in range(50):
        t = int(rng.integers(5, 60))
        driver = np.sort(rng.standard_normal(t))
        x = np.column_stack(
            [np.exp(0.4 * driver), driver**3 + 2.0 * driver, 5.0 + 0.1 * driver]
        )
        np.testing.assert_array_equal(
            empirical_comono_cov(x), np.cov(x, rowvar=False, ddof=1)
        )
        shuffled = x[rng.permutation(t)]
        np.testing.assert_allclose(
            empirical_comono_cov(shuffled),
            np.cov(x, rowvar=False, ddof=1),
            rtol=1e-12,
            atol=1e-14,
        )
