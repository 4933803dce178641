"""Command-line front door.

Subcommands
-----------
compute    rolling index series from a price-panel CSV
simulate   write a correlated (or comonotonic) GBM panel
bootstrap  whole-panel index estimate with a percentile interval
figures    analytic two-asset comparison curves (volatility / weight)
summarize  per-period mean and standard deviation of a series file

Every flag can instead come from a JSON config file (``--config``);
explicit flags win.  Errors are printed to stderr as a single JSON
object and map to exit codes 1 (I/O), 2 (validation), 3 (numerical
degeneracy).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    DateNotInPanel,
    HerdIndexError,
    InputOutputError,
    UnparseableDate,
    ValidationError,
)
from .gbm import GbmParams, gbm_corr, simulate, simulate_comonotonic, two_asset_hix, two_asset_rhix
from .panel import AggregateValues, PricePanel, WeightVector, load_panel, calibrate_dollar, weights_from_aggregates
from .rolling import WindowSpec, bootstrap_ci, log_returns, windowed_index

__all__ = ["main"]

_KINDS = ("cix", "hix", "rhix")

# defaults applied after flag/config merging
_DEFAULTS = {
    "epsilon": 25,
    "step": 1,
    "indices": list(_KINDS),
    "moments": "lognormal",
    "bootstrap": False,
    "replicates": 1000,
    "level": 0.95,
    "format": "csv",
    "drop_incomplete_assets": False,
    "steps": 500,
    "dt": 1.0,
    "start_date": "2000-01-03",
    "comonotonic": False,
}


@dataclass(frozen=True)
class RunConfig:
    """Merged settings for one invocation (flags over config over defaults)."""

    command: str
    input: str | None = None
    fx: str | None = None
    aggregates: str | None = None
    ref_date: _dt.date | None = None
    weights: tuple[float, ...] | None = None
    epsilon: int = 25
    step: int = 1
    indices: tuple[str, ...] = _KINDS
    moments: str = "lognormal"
    bootstrap: bool = False
    replicates: int = 1000
    level: float = 0.95
    seed: int | None = None
    output: str | None = None
    format: str = "csv"
    drop_incomplete_assets: bool = False
    # simulate
    model: dict | None = None
    steps: int = 500
    dt: float = 1.0
    start_date: _dt.date | None = None
    comonotonic: bool = False
    # figures
    x0: tuple[float, float] = (1.0, 1.0)
    # summarize
    periods: dict | None = None

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ValidationError(
                f"unknown output format {self.format!r}; expected csv or json"
            )
        for k in self.indices:
            if k not in _KINDS:
                raise ValidationError(
                    f"unknown index kind {k!r}; expected a comma list of {', '.join(_KINDS)}"
                )
        if self.command in ("compute", "bootstrap"):
            if (self.weights is None) == (self.aggregates is None):
                raise ValidationError(
                    "exactly one weight source is required: "
                    "--weights or --aggregates"
                )


# --- flag/config merging ----------------------------------------------------


def _parse_date(text) -> _dt.date:
    if isinstance(text, _dt.date):
        return text
    try:
        return _dt.date.fromisoformat(str(text))
    except ValueError:
        raise UnparseableDate(f"cannot parse date {text!r}") from None


def _parse_floats(value) -> tuple[float, ...]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
    else:
        parts = list(value)
    try:
        out = tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise ValidationError(f"cannot parse number list {value!r}") from None
    if not out:
        raise ValidationError("empty number list")
    return out


def _parse_kinds(value) -> tuple[str, ...]:
    items = value.split(",") if isinstance(value, str) else list(value)
    return tuple(str(k).strip().lower() for k in items if str(k).strip())


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise InputOutputError(f"no such file: {path}", file=path) from None
    except OSError as exc:
        raise InputOutputError(f"cannot read {path}: {exc}", file=path) from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}", file=path) from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top-level JSON must be an object", file=path)
    return data


def _merge(args: argparse.Namespace) -> RunConfig:
    cfg = _load_json(args.config) if getattr(args, "config", None) else {}

    def pick(key, default=None):
        flag = getattr(args, key, None)
        if flag is not None:
            return flag
        if key in cfg:
            return cfg[key]
        return _DEFAULTS.get(key, default)

    weights = pick("weights")
    indices = pick("indices")
    ref_date = pick("ref_date")
    start_date = pick("start_date")
    if getattr(args, "periods", None) is not None:
        periods = _load_json(args.periods)
    else:
        periods = cfg.get("periods")
    if args.command == "simulate":
        model = cfg.get("model", cfg) or None
    else:
        model = cfg.get("model")
    return RunConfig(
        command=args.command,
        input=pick("input"),
        fx=pick("fx"),
        aggregates=pick("aggregates"),
        ref_date=_parse_date(ref_date) if ref_date is not None else None,
        weights=_parse_floats(weights) if weights is not None else None,
        epsilon=int(pick("epsilon")),
        step=int(pick("step")),
        indices=_parse_kinds(indices),
        moments=str(pick("moments")),
        bootstrap=bool(pick("bootstrap")),
        replicates=int(pick("replicates")),
        level=float(pick("level")),
        seed=int(pick("seed")) if pick("seed") is not None else None,
        output=pick("output"),
        format=str(pick("format")),
        drop_incomplete_assets=bool(pick("drop_incomplete_assets")),
        model=model,
        steps=int(pick("steps")),
        dt=float(pick("dt")),
        start_date=_parse_date(start_date) if start_date is not None else None,
        comonotonic=bool(pick("comonotonic")),
        x0=tuple(float(v) for v in (pick("x0") or (1.0, 1.0))),
        periods=periods,
    )


# --- shared helpers ---------------------------------------------------------


def _load_input_panel(cfg: RunConfig) -> PricePanel:
    if not cfg.input:
        raise ValidationError("--input is required")
    panel = load_panel(cfg.input, drop_incomplete_assets=cfg.drop_incomplete_assets)
    if cfg.fx:
        fx = load_panel(cfg.fx, drop_incomplete_assets=cfg.drop_incomplete_assets)
        panel = calibrate_dollar(panel, fx)
    return panel


def _resolve_weights(cfg: RunConfig, panel: PricePanel) -> WeightVector:
    if cfg.weights is not None:
        return WeightVector(np.asarray(cfg.weights, float))
    agg_panel = load_panel(cfg.aggregates)
    ref = cfg.ref_date or panel.dates[-1]
    try:
        row = agg_panel.dates.index(ref)
    except ValueError:
        raise DateNotInPanel(
            f"reference date {ref} not in aggregates file {cfg.aggregates}",
            date=ref,
            file=cfg.aggregates,
        ) from None
    agg = AggregateValues(values=agg_panel.values[row], as_of=ref, labels=agg_panel.labels)
    return weights_from_aggregates(panel, agg)


def _records(df: pd.DataFrame) -> list[dict]:
    out = []
    for rec in df.to_dict(orient="records"):
        out.append(
            {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in rec.items()}
        )
    return out


def _write_frame(df: pd.DataFrame, path: str | None, fmt: str) -> None:
    if fmt == "json":
        text = json.dumps(_records(df), indent=2, allow_nan=False) + "\n"
    else:
        text = df.to_csv(index=False, lineterminator="\n")
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    try:
        target.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputOutputError(f"cannot write {path}: {exc}", file=str(path)) from None
    print(f"wrote {path} ({len(df)} rows)")


def _series_paths(cfg: RunConfig) -> dict[str, str | None]:
    kinds = cfg.indices
    if cfg.output is None:
        stem = "indices"
    else:
        stem = cfg.output
    suffix = "." + cfg.format
    if len(kinds) == 1 and stem.endswith(suffix):
        return {kinds[0]: stem}
    if stem.endswith(suffix):
        stem = stem[: -len(suffix)]
    return {k: f"{stem}_{k}{suffix}" for k in kinds}


# --- subcommands ------------------------------------------------------------


def cmd_compute(cfg: RunConfig) -> int:
    panel = _load_input_panel(cfg)
    w = _resolve_weights(cfg, panel)
    spec = WindowSpec(epsilon=cfg.epsilon, step=cfg.step)
    paths = _series_paths(cfg)
    for ordinal, kind in enumerate(cfg.indices):
        series = windowed_index(
            panel,
            w,
            spec,
            kind,
            moments=cfg.moments,
            bootstrap=cfg.bootstrap,
            replicates=cfg.replicates,
            level=cfg.level,
            seed=None if cfg.seed is None else [cfg.seed, ordinal],
        )
        _write_frame(series.to_frame(), paths[kind], cfg.format)
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    if not cfg.model:
        raise ValidationError(
            "simulate needs a --config JSON file with drifts, vols, corr, x0"
        )
    params = GbmParams.from_dict(cfg.model)
    labels = cfg.model.get("labels")
    sim = simulate_comonotonic if cfg.comonotonic else simulate
    panel = sim(
        params,
        n_steps=cfg.steps,
        dt=cfg.dt,
        seed=cfg.seed,
        labels=labels,
        start=cfg.start_date or _dt.date(2000, 1, 3),
    )
    df = panel.to_frame().reset_index()
    df["date"] = [d.isoformat() for d in panel.dates]
    _write_frame(df, cfg.output or ("panel." + cfg.format), cfg.format)
    return 0


def cmd_bootstrap(cfg: RunConfig) -> int:
    """Whole-panel estimate: the entire panel is one window at horizon
    n returns, with a percentile interval per requested index."""
    from .gbm import lognormal_moments
    from .rolling import _INDEX_FUNCS, estimate_params

    panel = _load_input_panel(cfg)
    w = _resolve_weights(cfg, panel)
    window = log_returns(panel)
    params = estimate_params(window)
    ms = lognormal_moments(params, float(window.n_returns))
    rows = []
    for ordinal, kind in enumerate(cfg.indices):
        value = _INDEX_FUNCS[kind.upper()](w, ms).value
        lo, hi = bootstrap_ci(
            window,
            w,
            kind,
            B=cfg.replicates,
            level=cfg.level,
            seed=None if cfg.seed is None else [cfg.seed, ordinal],
        )
        rows.append(
            {
                "kind": kind,
                "value": value,
                "ci_lower": lo,
                "ci_upper": hi,
                "n_returns": window.n_returns,
                "replicates": cfg.replicates,
                "level": cfg.level,
            }
        )
    _write_frame(pd.DataFrame(rows), cfg.output, cfg.format)
    return 0


#: fixed two-asset comparison parameters for the analytic curves
_CURVE_SIGMA1 = 0.2
_CURVE_R = 0.03
_CURVE_TAU = 1.0
_VOL_GRID = [round(0.2 * k, 10) for k in range(1, 16)]  # 0.2 .. 3.0
_WEIGHT_GRID = list(range(1, 51))


def cmd_figures(cfg: RunConfig) -> int:
    out_dir = Path(cfg.output or "figures")
    out_dir.mkdir(parents=True, exist_ok=True)
    x0_1, x0_2 = cfg.x0
    suffix = "." + cfg.format

    def hix_at(rho, sigma2, w2=1.0):
        return two_asset_hix(
            rho, _CURVE_SIGMA1, sigma2, 1.0, w2, _CURVE_R, _CURVE_R, x0_1, x0_2, _CURVE_TAU
        )

    for rho, name in ((0.0, "curves_vol_rho00"), (0.95, "curves_vol_rho095")):
        df = pd.DataFrame(
            {
                "sigma2": _VOL_GRID,
                "hix": [hix_at(rho, s2) for s2 in _VOL_GRID],
                "rhix": [two_asset_rhix(rho, _CURVE_SIGMA1, s2, _CURVE_TAU) for s2 in _VOL_GRID],
            }
        )
        _write_frame(df, str(out_dir / (name + suffix)), cfg.format)

    df = pd.DataFrame(
        {
            "sigma2": _VOL_GRID,
            "cix": [gbm_corr(_CURVE_SIGMA1, s2, 0.95, _CURVE_TAU) for s2 in _VOL_GRID],
            "rhix": [two_asset_rhix(0.95, _CURVE_SIGMA1, s2, _CURVE_TAU) for s2 in _VOL_GRID],
        }
    )
    _write_frame(df, str(out_dir / ("curves_cix_vol" + suffix)), cfg.format)

    df = pd.DataFrame(
        {
            "w2": _WEIGHT_GRID,
            "hix": [hix_at(0.0, _CURVE_SIGMA1, w2) for w2 in _WEIGHT_GRID],
            "rhix": [two_asset_rhix(0.0, _CURVE_SIGMA1, _CURVE_SIGMA1, _CURVE_TAU)] * len(_WEIGHT_GRID),
        }
    )
    _write_frame(df, str(out_dir / ("curves_weight" + suffix)), cfg.format)
    return 0


def cmd_summarize(cfg: RunConfig) -> int:
    if not cfg.input:
        raise ValidationError("--input is required (a series file from compute)")
    if not cfg.periods:
        raise ValidationError(
            "summarize needs --periods: a JSON file mapping labels to "
            "[start, end] date pairs (the AFC/DBB/GFC/entire labels are "
            "conventional but their dates must be supplied)"
        )
    try:
        df = pd.read_csv(cfg.input)
    except FileNotFoundError:
        raise InputOutputError(f"no such file: {cfg.input}", file=cfg.input) from None
    except OSError as exc:
        raise InputOutputError(f"cannot read {cfg.input}: {exc}", file=cfg.input) from None
    if "center_date" not in df.columns or "value" not in df.columns:
        raise ValidationError(
            f"{cfg.input}: expected columns center_date and value",
            columns=list(df.columns),
        )
    dates = [_parse_date(d) for d in df["center_date"]]
    values = df["value"].to_numpy(dtype=float)

    rows = []
    for label, bounds in cfg.periods.items():
        if not isinstance(bounds, (list, tuple)) or len(bounds) != 2:
            raise ValidationError(
                f"period {label!r} must map to a [start, end] pair", period=label
            )
        start, end = _parse_date(bounds[0]), _parse_date(bounds[1])
        mask = np.array([(start <= d <= end) for d in dates]) & np.isfinite(values)
        picked = values[mask]
        if picked.size == 0:
            rows.append(
                {"period": label, "start": start.isoformat(), "end": end.isoformat(),
                 "n": 0, "mean": "NA", "sd": "NA"}
            )
        else:
            rows.append(
                {
                    "period": label,
                    "start": start.isoformat(),
                    "end": end.isoformat(),
                    "n": int(picked.size),
                    "mean": float(picked.mean()),
                    "sd": float(picked.std(ddof=0)),
                }
            )
    _write_frame(pd.DataFrame(rows), cfg.output, cfg.format)
    return 0


_DISPATCH = {
    "compute": cmd_compute,
    "simulate": cmd_simulate,
    "bootstrap": cmd_bootstrap,
    "figures": cmd_figures,
    "summarize": cmd_summarize,
}


# --- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="herdindex",
        description="Herd-behaviour indices (CIX/HIX/RHIX) on price panels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, io=True, window=True, boot=True):
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--output", help="output path (stem for multi-index runs)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--seed", type=int, default=None)
        if io:
            p.add_argument("--input", help="price panel CSV (date + one column per asset)")
            p.add_argument("--fx", help="exchange-rate panel CSV (same dates/labels)")
            p.add_argument(
                "--drop-incomplete-assets",
                dest="drop_incomplete_assets",
                action="store_const",
                const=True,
                default=None,
                help="drop asset columns with missing cells instead of failing",
            )
            p.add_argument("--aggregates", help="aggregate-values CSV (weight source)")
            p.add_argument("--ref-date", dest="ref_date", help="ISO date for weight calibration")
            p.add_argument("--weights", help="comma list of explicit weights (weight source)")
            p.add_argument("--indices", help="comma list from: cix,hix,rhix (default all)")
        if window:
            p.add_argument("--epsilon", type=int, default=None, help="window half-width (default 25)")
            p.add_argument("--step", type=int, default=None, help="stride between centers (default 1)")
            p.add_argument(
                "--moments",
                choices=("lognormal", "empirical"),
                default=None,
                help="per-window moment route (default lognormal)",
            )
        if boot:
            p.add_argument("--replicates", type=int, default=None, help="bootstrap resamples (default 1000)")
            p.add_argument("--level", type=float, default=None, help="interval level (default 0.95)")

    p = sub.add_parser("compute", help="rolling index series from a panel")
    common(p)
    p.add_argument(
        "--bootstrap",
        action="store_const",
        const=True,
        default=None,
        help="attach percentile bootstrap intervals",
    )

    p = sub.add_parser("simulate", help="write a simulated GBM panel")
    common(p, io=False, window=False, boot=False)
    p.add_argument("--steps", type=int, default=None, help="number of weekly steps (default 500)")
    p.add_argument("--dt", type=float, default=None, help="step size in weeks (default 1)")
    p.add_argument("--start-date", dest="start_date", help="ISO date of the first row")
    p.add_argument(
        "--comonotonic",
        action="store_const",
        const=True,
        default=None,
        help="drive all assets with one common shock per step",
    )

    p = sub.add_parser("bootstrap", help="whole-panel estimate with interval")
    common(p, window=False)

    p = sub.add_parser("figures", help="analytic two-asset comparison curves")
    common(p, io=False, window=False, boot=False)

    p = sub.add_parser("summarize", help="per-period mean/sd of a series file")
    common(p, io=False, window=False, boot=False)
    p.add_argument("--input", help="series CSV produced by compute")
    p.add_argument("--periods", help="JSON file mapping period labels to [start, end]")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge(args)
        return _DISPATCH[cfg.command](cfg)
    except HerdIndexError as exc:
        print(exc.to_json(), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(InputOutputError(str(exc)).to_json(), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
