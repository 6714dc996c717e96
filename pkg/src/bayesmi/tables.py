"""Contingency counts for two categorical variables.

A :class:`CountTable` holds the joint counts ``n_ij`` of an r x s table and,
optionally, the margin-only counts of incomplete observations:

* ``row_missing[i]`` counts units where the row variable was observed as ``i``
  but the column variable is missing (``n_i?``),
* ``col_missing[j]`` counts units where only the column variable was observed
  as ``j`` (``n_?j``).

Counts are reals so that fractional prior pseudo-counts need no special case.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPriorError, InvalidTableError, ParseError


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CountTable:
    counts: np.ndarray
    row_missing: np.ndarray = None
    col_missing: np.ndarray = None

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.float64)
        if counts.ndim != 2:
            raise InvalidTableError(f"counts must be a matrix, got shape {counts.shape}")
        r, s = counts.shape
        if r < 2 or s < 2:
            raise InvalidTableError(f"need r >= 2 and s >= 2, got {r}x{s}")
        rm = np.zeros(r) if self.row_missing is None else np.asarray(self.row_missing, dtype=np.float64)
        cm = np.zeros(s) if self.col_missing is None else np.asarray(self.col_missing, dtype=np.float64)
        if rm.shape != (r,):
            raise InvalidTableError(f"row_missing must have length {r}, got shape {rm.shape}")
        if cm.shape != (s,):
            raise InvalidTableError(f"col_missing must have length {s}, got shape {cm.shape}")
        for name, arr in (("counts", counts), ("row_missing", rm), ("col_missing", cm)):
            if not np.all(np.isfinite(arr)):
                raise InvalidTableError(f"{name} contains non-finite entries")
            if np.any(arr < 0):
                raise InvalidTableError(f"{name} contains negative entries")
        if counts.sum() + rm.sum() + cm.sum() <= 0:
            raise InvalidTableError("table is empty (total count is zero)")
        object.__setattr__(self, "counts", _frozen(counts))
        object.__setattr__(self, "row_missing", _frozen(rm))
        object.__setattr__(self, "col_missing", _frozen(cm))

    @classmethod
    def parse(cls, text: str, row_missing=None, col_missing=None) -> "CountTable":
        """Build a table from ``"a,b;c,d"`` (rows separated by ``;``)."""
        rows = [r for r in text.strip().split(";")]
        try:
            values = [[float(x) for x in row.split(",")] for row in rows]
        except ValueError as exc:
            raise ParseError(f"malformed counts {text!r}: {exc}") from None
        widths = {len(v) for v in values}
        if len(widths) != 1:
            raise ParseError(f"ragged counts {text!r}: row lengths {sorted(widths)}")
        return cls(np.array(values), row_missing, col_missing)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    @property
    def r(self) -> int:
        return self.counts.shape[0]

    @property
    def s(self) -> int:
        return self.counts.shape[1]

    @property
    def n(self) -> float:
        """Total sample size, complete and incomplete units together."""
        return float(self.counts.sum() + self.row_missing.sum() + self.col_missing.sum())

    @property
    def n_complete(self) -> float:
        return float(self.counts.sum())

    @property
    def is_complete(self) -> bool:
        return not (np.any(self.row_missing > 0) or np.any(self.col_missing > 0))

    @property
    def i_max(self) -> float:
        return float(min(np.log(self.r), np.log(self.s)))

    def marginals(self):
        return marginals(self)

    def with_prior(self, prior) -> "CountTable":
        return with_prior(self, prior)

    def transpose(self) -> "CountTable":
        return CountTable(self.counts.T, self.col_missing, self.row_missing)

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.row_missing, other.row_missing)
            and np.array_equal(self.col_missing, other.col_missing)
        )

    __hash__ = None

    def __repr__(self):
        body = ";".join(",".join(f"{x:g}" for x in row) for row in self.counts)
        extra = ""
        if not self.is_complete:
            extra = f", row_missing={self.row_missing.tolist()}, col_missing={self.col_missing.tolist()}"
        return f"CountTable({body!r}{extra})"


@dataclass(frozen=True)
class PriorSpec:
    """Uniform Dirichlet pseudo-count added to every joint cell.

    Common non-informative choices are 0, 1/(rs), 1/2 and 1.
    """

    pseudo_count_per_cell: float = 0.0

    def __post_init__(self):
        v = float(self.pseudo_count_per_cell)
        if not np.isfinite(v) or v < 0:
            raise InvalidPriorError(f"pseudo-count must be a nonnegative real, got {self.pseudo_count_per_cell!r}")
        object.__setattr__(self, "pseudo_count_per_cell", v)


def _as_prior(prior) -> PriorSpec:
    if isinstance(prior, PriorSpec):
        return prior
    if prior is None:
        return PriorSpec(0.0)
    return PriorSpec(prior)


def with_prior(table: CountTable, prior) -> CountTable:
    """Return a new table with the prior pseudo-count added to every joint cell.

    Margin-only counts are left untouched.  ``table`` may also be a bare count
    matrix, which allows an all-zero matrix to be lifted by a positive prior.
    """
    p = _as_prior(prior).pseudo_count_per_cell
    if not isinstance(table, CountTable):
        return CountTable(np.asarray(table, dtype=np.float64) + p)
    if p == 0.0:
        return table
    return CountTable(table.counts + p, table.row_missing, table.col_missing)


def marginals(table: CountTable):
    """Row sums ``n_i+``, column sums ``n_+j`` of the joint part, and total ``n``.

    The total includes the margin-only counts.
    """
    return table.counts.sum(axis=1), table.counts.sum(axis=0), table.n
