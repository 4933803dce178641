"""Exception taxonomy shared by every module.

Two broad families matter to callers:

* :class:`ValidationError` — the input violates a documented contract
  (bad file contents, mismatched shapes, out-of-range parameters).
* :class:`DegeneracyError` — the input is well-formed but numerically
  degenerate (zero variances, vanishing denominators, factorization
  failures), so the requested quantity does not exist.

The CLI maps these onto process exit codes via :attr:`HerdIndexError.exit_code`
(1 = I/O, 2 = validation, 3 = numerical degeneracy) and serializes them as
JSON through :meth:`HerdIndexError.to_json`.
"""

from __future__ import annotations

import json
from typing import Any

__all__ = [
    "HerdIndexError",
    "InputOutputError",
    "ValidationError",
    "DegeneracyError",
    "MissingCell",
    "NonPositivePrice",
    "UnparseableDate",
    "DuplicateDate",
    "DateMismatch",
    "LabelMismatch",
    "DateNotInPanel",
    "DimensionMismatch",
    "InvalidParameter",
    "InsufficientSamples",
    "PanelTooShort",
    "CIConsistencyError",
    "DegenerateDenominator",
    "ZeroVariance",
    "DegenerateResample",
    "NonPsdCorrelation",
]


class HerdIndexError(Exception):
    """Base class; carries a structured ``details`` dict for reporting."""

    exit_code = 2

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = {k: v for k, v in details.items() if v is not None}

    def to_json(self) -> str:
        """Serialize as a single JSON object (used on the CLI's stderr)."""
        payload = {
            "error": type(self).__name__,
            "exit_code": self.exit_code,
            "message": self.message,
        }
        if self.details:
            payload["details"] = {k: _plain(v) for k, v in self.details.items()}
        return json.dumps(payload, sort_keys=True)


def _plain(value: Any) -> Any:
    """Coerce numpy scalars / dates to JSON-friendly builtins."""
    if hasattr(value, "item"):
        return value.item()
    if hasattr(value, "isoformat"):
        return value.isoformat()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


class InputOutputError(HerdIndexError):
    """File could not be read or written."""

    exit_code = 1


class ValidationError(HerdIndexError):
    """Input violates a documented contract."""

    exit_code = 2


class DegeneracyError(HerdIndexError):
    """Numerically degenerate input: the requested quantity is undefined."""

    exit_code = 3


# --- validation family ------------------------------------------------------


class MissingCell(ValidationError):
    """A cell inside the stored date range is empty or unparseable."""


class NonPositivePrice(ValidationError):
    """A price level is zero or negative (log-returns would not exist)."""


class UnparseableDate(ValidationError):
    """A value in the date column does not parse as an ISO-8601 date."""


class DuplicateDate(ValidationError):
    """The same date appears on more than one row."""


class DateMismatch(ValidationError):
    """Two panels that must share a date grid do not."""


class LabelMismatch(ValidationError):
    """Two panels that must share asset labels do not."""


class DateNotInPanel(ValidationError):
    """A reference date is not present in the panel."""


class DimensionMismatch(ValidationError):
    """Vector/matrix shapes are incompatible."""


class InvalidParameter(ValidationError):
    """A numeric parameter is outside its documented domain."""


class InsufficientSamples(ValidationError):
    """Too few observations for the requested estimate."""


class PanelTooShort(ValidationError):
    """Panel has fewer rows than one full rolling window."""


class CIConsistencyError(ValidationError):
    """More than 1% of bootstrap intervals exclude their point estimate."""


# --- degeneracy family ------------------------------------------------------


class DegenerateDenominator(DegeneracyError):
    """An index denominator is not strictly positive."""


class ZeroVariance(DegeneracyError):
    """A return column is constant, so its variance estimate is zero."""


class DegenerateResample(DegeneracyError):
    """Bootstrap redraw budget exhausted without a non-degenerate replicate."""


class NonPsdCorrelation(DegeneracyError):
    """Correlation matrix failed factorization beyond tolerance."""
