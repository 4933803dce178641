"""Shared generators and the acceptance-criteria report.

The helpers build random-but-valid inputs: correlation matrices from
factor loadings (guaranteed PSD, mixed-sign entries), moment summaries
from closed-form lognormal families (so the Fréchet dominance and PSD
invariants hold by construction), and small positive price panels.

A terminal-summary hook prints one PASS/FAIL line per acceptance
criterion after the run, derived from the outcomes of the tests in
``test_acceptance.py``.
"""

from __future__ import annotations

import datetime as dt
import re

import numpy as np

from herdindex import GbmParams, MomentSummary, PricePanel, WeightVector, lognormal_moments


def random_corr(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random PSD correlation matrix with mixed-sign off-diagonals."""
    k = int(rng.integers(1, d + 1))
    loadings = rng.uniform(-0.95, 0.95, size=(d, k))
    noise = rng.uniform(0.05, 1.0, size=d)
    cov = loadings @ loadings.T + np.diag(noise)
    s = np.sqrt(np.diag(cov))
    corr = cov / np.outer(s, s)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return corr


def random_lognormal_family(rng: np.random.Generator, d: int | None = None):
    """Random GbmParams plus weights and horizon (a valid moment family)."""
    if d is None:
        d = int(rng.integers(2, 7))
    params = GbmParams(
        drifts=rng.uniform(-0.05, 0.08, size=d),
        vols=rng.uniform(0.05, 0.8, size=d),
        corr=random_corr(rng, d),
        x0=rng.uniform(0.5, 150.0, size=d),
    )
    w = WeightVector(rng.uniform(0.1, 5.0, size=d))
    tau = float(rng.uniform(0.25, 4.0))
    return params, w, tau


def random_moments(rng: np.random.Generator, d: int | None = None):
    """(weights, MomentSummary) drawn from a random lognormal family."""
    params, w, tau = random_lognormal_family(rng, d)
    return w, lognormal_moments(params, tau)


def weekly_dates(n: int, start: dt.date = dt.date(2000, 1, 3)) -> tuple[dt.date, ...]:
    return tuple(start + dt.timedelta(days=7 * k) for k in range(n))


def make_panel(values: np.ndarray, labels=None) -> PricePanel:
    values = np.asarray(values, float)
    t, d = values.shape
    return PricePanel(
        dates=weekly_dates(t),
        labels=labels or tuple(f"A{i + 1}" for i in range(d)),
        values=values,
    )


def random_walk_panel(rng: np.random.Generator, t: int, d: int, scale: float = 0.02) -> PricePanel:
    """Positive panel from exponentiated random walks around level 100."""
    steps = rng.normal(0.0, scale, size=(t - 1, d))
    logs = np.vstack([np.zeros(d), np.cumsum(steps, axis=0)])
    base = rng.uniform(80.0, 120.0, size=d)
    return make_panel(base * np.exp(logs))


# --- acceptance report ------------------------------------------------------

_CRITERIA = {
    1: "two-asset closed form vs 1e6-pair Monte-Carlo oracle (0.5% rel, <10 s)",
    2: "volatility-sweep pathology curves (HIX rises, RHIX pinned; <1 s)",
    3: "bound + attainment suite on 1,000 random moment summaries (1e-10)",
    4: "linear invariance / weight-scale duality through the rolling pipeline (500 panels, 1e-10)",
    5: "windowed RHIX recovers the generating model (MAE<0.1 at eps=25, <0.03 at eps=250, <60 s)",
    6: "bootstrap coverage on 200 simulated windows (>=88% / >=90%, <5 min)",
    7: "rhix vs rhix_from_variances identity on 1,000 summaries (1e-12)",
    8: "sorted-coupling covariance: marginals kept, off-diagonals dominate, exact on comonotone input",
}

_NODE_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[int, list[str]] = {}
    for category in ("passed", "failed", "error", "xfailed", "xpassed", "skipped"):
        for rep in terminalreporter.stats.get(category, []):
            m = _NODE_RE.search(getattr(rep, "nodeid", ""))
            if m:
                outcomes.setdefault(int(m.group(1)), []).append(category)
    if not outcomes:
        return
    tw = terminalreporter
    tw.section("acceptance criteria", sep="=")
    for num in sorted(_CRITERIA):
        cats = outcomes.get(num, [])
        if not cats:
            line = f"criterion {num}: NOT RUN — {_CRITERIA[num]}"
        elif "failed" in cats or "error" in cats or "xpassed" in cats:
            line = f"criterion {num}: FAIL — {_CRITERIA[num]}"
        elif "xfailed" in cats:
            line = (
                f"criterion {num}: FAIL (expected) — one sub-claim is "
                "contradictory as stated and is pinned by a strict xfail; "
                "remaining sub-claims pass.  Analysis: ../notes/decisions.md"
            )
        elif "skipped" in cats:
            line = f"criterion {num}: SKIPPED — {_CRITERIA[num]}"
        else:
            line = f"criterion {num}: PASS — {_CRITERIA[num]}"
        tw.write_line(line)
