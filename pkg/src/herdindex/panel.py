"""Price-panel ingestion, validation, and calibration.

A *panel* is a dated ``T x d`` matrix of strictly positive asset levels,
one column per asset.  This module loads panels from CSV, converts
local-currency levels to a common currency (elementwise product with an
exchange-rate panel), and turns aggregate market values into per-asset
weights.

CSV convention: UTF-8, decimal point ``.``, one ISO-8601 column named
``date`` (or remapped via a schema), remaining headers are asset labels.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import (
    DateMismatch,
    DateNotInPanel,
    DimensionMismatch,
    DuplicateDate,
    InputOutputError,
    LabelMismatch,
    MissingCell,
    NonPositivePrice,
    UnparseableDate,
    ValidationError,
)

__all__ = [
    "PricePanel",
    "WeightVector",
    "AggregateValues",
    "load_panel",
    "calibrate_dollar",
    "weights_from_aggregates",
]


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PricePanel:
    """Dated matrix of strictly positive asset levels.

    Parameters
    ----------
    dates : tuple of datetime.date
        Strictly increasing observation dates, one per row.
    labels : tuple of str
        Unique asset names, one per column.
    values : ndarray, shape (T, d)
        Levels; every cell must be finite and strictly positive.
    """

    dates: tuple[_dt.date, ...]
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "labels", tuple(str(c) for c in self.labels))
        object.__setattr__(self, "values", _freeze(self.values))
        v = self.values
        if v.ndim != 2:
            raise DimensionMismatch("panel values must be a 2-D matrix", shape=list(v.shape))
        t, d = v.shape
        if d < 2:
            raise ValidationError(f"panel needs at least 2 assets, got {d}")
        if len(self.dates) != t:
            raise DimensionMismatch(
                f"{len(self.dates)} dates for {t} rows", rows=t, dates=len(self.dates)
            )
        if len(self.labels) != d:
            raise DimensionMismatch(
                f"{len(self.labels)} labels for {d} columns", columns=d, labels=len(self.labels)
            )
        if len(set(self.labels)) != d:
            raise LabelMismatch("asset labels must be unique", labels=list(self.labels))
        for i in range(1, t):
            if self.dates[i] <= self.dates[i - 1]:
                raise DuplicateDate(
                    f"dates not strictly increasing at row {i}: "
                    f"{self.dates[i - 1]} -> {self.dates[i]}",
                    row=i,
                )
        if not np.all(np.isfinite(v)):
            r, c = np.argwhere(~np.isfinite(v))[0]
            raise MissingCell(
                f"non-finite value at {self.dates[r]}/{self.labels[c]}",
                date=self.dates[r],
                column=self.labels[c],
            )
        if np.any(v <= 0.0):
            r, c = np.argwhere(v <= 0.0)[0]
            raise NonPositivePrice(
                f"non-positive level {v[r, c]} at {self.dates[r]}/{self.labels[c]}",
                date=self.dates[r],
                column=self.labels[c],
                value=float(v[r, c]),
            )

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_assets(self) -> int:
        return self.values.shape[1]

    def to_frame(self) -> pd.DataFrame:
        """Return a DataFrame indexed by date with one column per asset."""
        idx = pd.Index(self.dates, name="date")
        return pd.DataFrame(self.values.copy(), index=idx, columns=list(self.labels))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "PricePanel":
        """Build a panel from a date-indexed (or ``date``-columned) DataFrame."""
        df = frame
        if "date" in df.columns:
            df = df.set_index("date")
        dates = [_coerce_date(x, row=i) for i, x in enumerate(df.index)]
        order = np.argsort(dates, kind="stable")
        df = df.iloc[order]
        return cls(
            dates=tuple(dates[i] for i in order),
            labels=tuple(str(c) for c in df.columns),
            values=df.to_numpy(dtype=float),
        )


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative per-asset weights (counts of index units)."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _freeze(np.atleast_1d(self.weights)))
        w = self.weights
        if w.ndim != 1:
            raise DimensionMismatch("weights must be a 1-D vector", shape=list(w.shape))
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite")
        if np.any(w < 0.0):
            raise ValidationError("weights must be nonnegative", weights=w.tolist())
        if int(np.count_nonzero(w > 0.0)) < 2:
            raise ValidationError(
                "need at least two strictly positive weights", weights=w.tolist()
            )

    def __len__(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class AggregateValues:
    """Per-asset aggregate dollar values observed on a single date."""

    values: np.ndarray
    as_of: _dt.date
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(np.atleast_1d(self.values)))
        v = self.values
        if v.ndim != 1:
            raise DimensionMismatch("aggregate values must be a 1-D vector", shape=list(v.shape))
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ValidationError("aggregate values must be finite and strictly positive")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(c) for c in self.labels))
            if len(self.labels) != v.shape[0]:
                raise DimensionMismatch(
                    f"{len(self.labels)} labels for {v.shape[0]} aggregate values"
                )


# --- CSV ingestion ----------------------------------------------------------

_NA_TOKENS = {"", "na", "n/a", "nan", "null", "none", "-"}


def _parse_levels(text: pd.Series) -> np.ndarray:
    """Parse one column of level strings to float64, NaN where unparseable.

    Uses Python ``float`` (correctly rounded per IEEE 754) instead of
    ``pd.to_numeric`` so that values written with ``repr`` survive a CSV
    round trip bit-exactly.  Underscore digit separators are rejected.
    """
    out = np.full(len(text), np.nan)
    for i, cell in enumerate(text):
        if "_" in cell:
            continue
        try:
            out[i] = float(cell)
        except ValueError:
            continue
    return out


def _coerce_date(x, row: int | None = None) -> _dt.date:
    if isinstance(x, _dt.datetime):
        return x.date()
    if isinstance(x, _dt.date):
        return x
    try:
        return _dt.date.fromisoformat(str(x).strip())
    except ValueError:
        raise UnparseableDate(f"cannot parse date {x!r}", row=row) from None


def load_panel(
    path,
    schema: Mapping[str, object] | None = None,
    *,
    drop_incomplete_assets: bool = False,
) -> PricePanel:
    """Read a CSV file into a validated :class:`PricePanel`.

    Parameters
    ----------
    path : path-like
        CSV file with a date column and one numeric column per asset.
    schema : mapping, optional
        Column mapping with keys ``"date"`` (name of the date column,
        default ``"date"``) and ``"assets"`` (ordered subset of asset
        columns to keep, default: all remaining columns).
    drop_incomplete_assets : bool
        When True, asset columns containing missing cells are dropped
        instead of rejected.  Dates are never dropped; at least two
        complete assets must remain.

    Returns
    -------
    PricePanel
        Rows sorted by date ascending.

    Raises
    ------
    InputOutputError
        File absent or unreadable.
    MissingCell, NonPositivePrice, UnparseableDate, DuplicateDate
        Content violations; details carry file, row (1-based CSV line,
        counting the header as line 1) and column.
    """
    fname = str(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except FileNotFoundError:
        raise InputOutputError(f"no such file: {fname}", file=fname) from None
    except OSError as exc:
        raise InputOutputError(f"cannot read {fname}: {exc}", file=fname) from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise ValidationError(f"malformed CSV {fname}: {exc}", file=fname) from None

    schema = dict(schema or {})
    date_col = str(schema.get("date", "date"))
    if date_col not in raw.columns:
        raise ValidationError(
            f"no '{date_col}' column in {fname}", file=fname, columns=list(raw.columns)
        )
    asset_cols = [str(c) for c in schema.get("assets") or [c for c in raw.columns if c != date_col]]
    missing_cols = [c for c in asset_cols if c not in raw.columns]
    if missing_cols:
        raise LabelMismatch(
            f"columns {missing_cols} not present in {fname}", file=fname, columns=missing_cols
        )

    dates = []
    for i, cell in enumerate(raw[date_col]):
        try:
            dates.append(_coerce_date(cell))
        except UnparseableDate:
            raise UnparseableDate(
                f"{fname} line {i + 2}: cannot parse date {cell!r}",
                file=fname,
                row=i + 2,
                column=date_col,
            ) from None
    seen: dict[_dt.date, int] = {}
    for i, d in enumerate(dates):
        if d in seen:
            raise DuplicateDate(
                f"{fname}: date {d} on lines {seen[d] + 2} and {i + 2}",
                file=fname,
                row=i + 2,
                date=d,
            )
        seen[d] = i

    cols = {}
    for label in asset_cols:
        text = raw[label].str.strip()
        num = _parse_levels(text)
        bad = pd.Series(np.isnan(num), index=text.index) | text.str.lower().isin(_NA_TOKENS)
        if bad.any():
            if drop_incomplete_assets:
                continue
            i = int(np.flatnonzero(bad.to_numpy())[0])
            raise MissingCell(
                f"{fname} line {i + 2}, column {label!r}: "
                f"missing or unparseable value {text.iloc[i]!r}",
                file=fname,
                row=i + 2,
                column=label,
            )
        cols[label] = num

    if len(cols) < 2:
        raise ValidationError(
            f"{fname}: fewer than 2 complete asset columns remain",
            file=fname,
            kept=sorted(cols),
        )

    values = np.column_stack([cols[c] for c in cols])
    labels = tuple(cols)
    bad = (values <= 0.0) | ~np.isfinite(values)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise NonPositivePrice(
            f"{fname} line {r + 2}, column {labels[c]!r}: non-positive level {values[r, c]}",
            file=fname,
            row=int(r) + 2,
            column=labels[c],
            value=float(values[r, c]),
        )

    order = np.argsort(dates, kind="stable")
    return PricePanel(
        dates=tuple(dates[i] for i in order),
        labels=labels,
        values=values[order],
    )


# --- calibration ------------------------------------------------------------


def calibrate_dollar(local: PricePanel, fx: PricePanel) -> PricePanel:
    """Convert local-currency levels with an exchange-rate panel.

    ``fx`` column *i* is the dollar price of one unit of asset *i*'s
    currency; the output is the elementwise product, on the same dates.
    """
    if local.dates != fx.dates:
        n = min(local.n_rows, fx.n_rows)
        where = next(
            (i for i in range(n) if local.dates[i] != fx.dates[i]),
            n,
        )
        raise DateMismatch(
            f"panel and fx dates differ (first difference at row {where})",
            row=where,
            panel_rows=local.n_rows,
            fx_rows=fx.n_rows,
        )
    if set(local.labels) != set(fx.labels):
        raise LabelMismatch(
            "panel and fx asset labels differ",
            panel_only=sorted(set(local.labels) - set(fx.labels)),
            fx_only=sorted(set(fx.labels) - set(local.labels)),
        )
    # align fx columns to the local panel's order before multiplying
    perm = [fx.labels.index(c) for c in local.labels]
    return PricePanel(
        dates=local.dates,
        labels=local.labels,
        values=local.values * fx.values[:, perm],
    )


def weights_from_aggregates(panel: PricePanel, agg: AggregateValues) -> WeightVector:
    """Weights w_i = V_i / X_i(as_of): index units held per asset.

    ``w . X(as_of)`` reconstructs the aggregate values; the weights are
    treated as constant afterwards.
    """
    try:
        row = panel.dates.index(agg.as_of)
    except ValueError:
        raise DateNotInPanel(
            f"reference date {agg.as_of} not in panel "
            f"({panel.dates[0]} .. {panel.dates[-1]})",
            date=agg.as_of,
        ) from None
    v = agg.values
    if agg.labels is not None:
        if set(agg.labels) != set(panel.labels):
            raise LabelMismatch(
                "aggregate labels do not match panel labels",
                panel_only=sorted(set(panel.labels) - set(agg.labels)),
                aggregates_only=sorted(set(agg.labels) - set(panel.labels)),
            )
        v = v[[agg.labels.index(c) for c in panel.labels]]
    elif v.shape[0] != panel.n_assets:
        raise DimensionMismatch(
            f"{v.shape[0]} aggregate values for {panel.n_assets} assets"
        )
    return WeightVector(v / panel.values[row])
