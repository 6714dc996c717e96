"""Categorical datasets: CSV ingestion, attribute-class tables, synthetic data.

Values are stored as integer codes per column, with ``-1`` marking a missing
attribute value.  The class column may never be missing.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParseError
from .tables import CountTable

MISSING = -1


@dataclass(frozen=True, eq=False)
class Dataset:
    attribute_names: tuple
    domains: tuple  # tuple of tuples of value labels, one per attribute
    class_name: str
    class_domain: tuple
    X: np.ndarray  # (n, a) int codes, MISSING for unobserved
    y: np.ndarray  # (n,) int codes

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.int64).reshape(-1, len(self.attribute_names))
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if len(X) != len(y):
            raise InputError("X and y differ in length")
        if len(self.domains) != X.shape[1]:
            raise InputError("one domain per attribute is required")
        for a, dom in enumerate(self.domains):
            col = X[:, a]
            if np.any((col < MISSING) | (col >= len(dom))):
                raise InputError(f"attribute {self.attribute_names[a]!r} has codes outside its domain")
        if np.any((y < 0) | (y >= len(self.class_domain))):
            raise InputError("class codes outside the class domain (the class may not be missing)")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def n_attributes(self) -> int:
        return len(self.attribute_names)

    def attribute_index(self, attribute) -> int:
        if isinstance(attribute, (int, np.integer)):
            if not 0 <= attribute < self.n_attributes:
                raise InputError(f"attribute index {attribute} out of range")
            return int(attribute)
        try:
            return self.attribute_names.index(attribute)
        except ValueError:
            raise InputError(f"unknown attribute {attribute!r}") from None

    def head(self, k: int) -> "Dataset":
        return Dataset(self.attribute_names, self.domains, self.class_name, self.class_domain, self.X[:k], self.y[:k])


def read_schema(path) -> dict:
    """Sidecar schema: JSON object mapping column name to its ordered value list."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or not all(isinstance(v, list) for v in raw.values()):
        raise ParseError(f"schema {path} must map column names to value lists")
    return {k: [str(x) for x in v] for k, v in raw.items()}


def _looks_continuous(values) -> bool:
    saw_fraction = False
    for v in values:
        try:
            f = float(v)
        except ValueError:
            return False
        if not math.isfinite(f) or f != math.floor(f):
            saw_fraction = True
    return saw_fraction


def read_csv(path, delimiter: str = ",", missing_token: str = "?", header: bool = True, class_column=-1, schema=None) -> Dataset:
    """Read a delimited categorical dataset.

    ``class_column`` is a column index (negative counts from the end) or a
    header name.  Domains follow first appearance unless ``schema`` (a mapping
    or a path to a JSON sidecar) fixes them.  Columns holding non-integer
    numbers are rejected since discretization is not performed here.
    """
    if schema is not None and not isinstance(schema, dict):
        schema = read_schema(schema)
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter)]
    rows = [(k + 1, [c.strip() for c in row]) for k, row in enumerate(rows) if any(c.strip() for c in row)]
    if not rows:
        raise ParseError(f"{path}: empty file", row=0)
    if header:
        names = rows[0][1]
        rows = rows[1:]
    else:
        names = [f"a{k}" for k in range(len(rows[0][1]))]
    width = len(names)
    if width < 2:
        raise ParseError(f"{path}: need at least one attribute and a class column", row=1)
    for line, row in rows:
        if len(row) != width:
            raise ParseError(f"{path}: {len(row)} fields, expected {width}", row=line)
    if isinstance(class_column, str):
        if class_column not in names:
            raise ParseError(f"{path}: no column named {class_column!r}")
        cidx = names.index(class_column)
    else:
        cidx = int(class_column) % width
    columns = list(zip(*[row for _, row in rows])) if rows else [() for _ in range(width)]
    domains = []
    codes = []
    for c in range(width):
        col = columns[c]
        observed = [v for v in col if v != missing_token]
        if schema and names[c] in schema:
            dom = list(schema[names[c]])
        else:
            if _looks_continuous(observed):
                raise ParseError(f"{path}: column {names[c]!r} holds non-integer numbers; discretize it first", column=c)
            dom = list(dict.fromkeys(observed))
        lookup = {v: k for k, v in enumerate(dom)}
        col_codes = []
        for (line, _), v in zip(rows, col):
            if v == missing_token:
                if c == cidx:
                    raise ParseError(f"{path}: missing class value", row=line, column=c)
                col_codes.append(MISSING)
            elif v in lookup:
                col_codes.append(lookup[v])
            else:
                raise ParseError(f"{path}: value {v!r} not in the declared domain of {names[c]!r}", row=line, column=c)
        domains.append(tuple(dom))
        codes.append(col_codes)
    attr = [c for c in range(width) if c != cidx]
    X = np.array([codes[c] for c in attr], dtype=np.int64).T.reshape(len(rows), len(attr))
    return Dataset(
        tuple(names[c] for c in attr),
        tuple(domains[c] for c in attr),
        names[cidx],
        domains[cidx],
        X,
        np.array(codes[cidx], dtype=np.int64),
    )


def write_csv(dataset: Dataset, path, delimiter: str = ",", missing_token: str = "?"):
    """Write with a header; the class is the last column."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(list(dataset.attribute_names) + [dataset.class_name])
        for x, y in zip(dataset.X, dataset.y):
            vals = [missing_token if v == MISSING else dataset.domains[a][v] for a, v in enumerate(x)]
            w.writerow(vals + [dataset.class_domain[y]])


def attribute_counts(dataset: Dataset, attribute) -> tuple[np.ndarray, np.ndarray]:
    """(attribute value x class joint counts, per-class missing tally)."""
    a = dataset.attribute_index(attribute)
    v = len(dataset.domains[a])
    c = len(dataset.class_domain)
    x = dataset.X[:, a]
    obs = x != MISSING
    joint = np.zeros((v, c))
    np.add.at(joint, (x[obs], dataset.y[obs]), 1.0)
    miss = np.bincount(dataset.y[~obs], minlength=c).astype(np.float64)
    return joint, miss


def attribute_class_table(dataset: Dataset, attribute) -> CountTable:
    """Attribute (rows) by class (columns) counts.

    Instances with a missing attribute value count towards ``col_missing``
    since only their class was observed.  Domains of size one are padded with
    an empty category so the table is at least 2 x 2.
    """
    if dataset.n == 0:
        raise InputError("dataset has no instances")
    joint, miss = attribute_counts(dataset, attribute)
    joint, miss = pad_table(joint, miss)
    return CountTable(joint, None, miss)


def pad_table(joint: np.ndarray, col_missing: np.ndarray):
    r, s = joint.shape
    if r < 2:
        joint = np.vstack([joint, np.zeros((2 - r, s))])
    if s < 2:
        joint = np.hstack([joint, np.zeros((joint.shape[0], 2 - s))])
        col_missing = np.concatenate([col_missing, np.zeros(2 - s)])
    return joint, col_missing


@dataclass(frozen=True)
class SyntheticSpec:
    r: int
    s: int
    n: int
    pi: tuple | None = None  # row-major joint chances; None with independent=True means uniform
    independent: bool = False
    row_mask_rate: float = 0.0  # fraction of units whose row variable is hidden
    col_mask_rate: float = 0.0  # fraction of units whose column variable is hidden
    seed: int = 0

    def __post_init__(self):
        if self.r < 2 or self.s < 2 or self.n < 1:
            raise InputError("need r, s >= 2 and n >= 1")
        for rate in (self.row_mask_rate, self.col_mask_rate):
            if not 0.0 <= rate < 1.0:
                raise InputError("mask rates must lie in [0, 1)")
        if self.row_mask_rate + self.col_mask_rate >= 1.0:
            raise InputError("mask rates must sum to less than 1")
        if self.pi is None and not self.independent:
            raise InputError("give pi or set independent=True")
        if self.pi is not None:
            p = np.asarray(self.pi, dtype=np.float64)
            if p.size != self.r * self.s or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
                raise InputError("pi must be r*s nonnegative chances summing to 1")

    def joint(self) -> np.ndarray:
        if self.pi is None:
            return np.full((self.r, self.s), 1.0 / (self.r * self.s))
        p = np.asarray(self.pi, dtype=np.float64).reshape(self.r, self.s)
        if self.independent:
            return np.outer(p.sum(axis=1), p.sum(axis=0))
        return p


def _draw_pairs(spec: SyntheticSpec):
    rng = np.random.default_rng(spec.seed)
    cells = rng.choice(spec.r * spec.s, size=spec.n, p=spec.joint().ravel())
    rows, cols = np.divmod(cells, spec.s)
    u = rng.random(spec.n)
    row_hidden = u < spec.row_mask_rate
    col_hidden = (~row_hidden) & (u < spec.row_mask_rate + spec.col_mask_rate)
    return rows, cols, row_hidden, col_hidden


def generate_table(spec: SyntheticSpec) -> CountTable:
    """Counts of ``n`` i.i.d. draws from ``pi`` after exclusive MAR masking."""
    rows, cols, rh, ch = _draw_pairs(spec)
    both = ~(rh | ch)
    counts = np.zeros((spec.r, spec.s))
    np.add.at(counts, (rows[both], cols[both]), 1.0)
    row_missing = np.bincount(rows[ch], minlength=spec.r).astype(np.float64)
    col_missing = np.bincount(cols[rh], minlength=spec.s).astype(np.float64)
    return CountTable(counts, row_missing, col_missing)


def generate(spec: SyntheticSpec) -> Dataset:
    """A one-attribute dataset: the row variable is the attribute, the column the class.

    The class cannot be missing, so ``col_mask_rate`` must be 0.
    """
    if spec.col_mask_rate > 0:
        raise InputError("the class (column variable) may not be masked in a Dataset")
    rows, cols, rh, _ = _draw_pairs(spec)
    x = np.where(rh, MISSING, rows)
    return Dataset(
        ("x",),
        (tuple(str(k) for k in range(spec.r)),),
        "class",
        tuple(str(k) for k in range(spec.s)),
        x.reshape(-1, 1),
        cols,
    )


def generate_stream(
    n: int = 500,
    n_attributes: int = 10,
    n_informative: int = 3,
    n_values: int = 3,
    n_classes: int = 2,
    strength: float = 0.6,
    missing_rate: float = 0.0,
    seed: int = 0,
) -> Dataset:
    """Synthetic classification stream for filter benchmarks.

    Informative attribute ``k`` draws its value from a class-dependent
    distribution mixing a uniform with a class-specific peak; the mixing
    weight decays as ``strength / (k + 1)`` so informative attributes differ in
    signal.  The remaining attributes are independent uniform noise.  Each
    attribute value is hidden independently with probability ``missing_rate``.
    """
    if not 0 <= n_informative <= n_attributes:
        raise InputError("n_informative must lie in [0, n_attributes]")
    rng = np.random.default_rng(seed)
    y = rng.integers(0, n_classes, size=n)
    X = np.empty((n, n_attributes), dtype=np.int64)
    uniform = np.full(n_values, 1.0 / n_values)
    for a in range(n_attributes):
        if a < n_informative:
            w = strength / (a + 1)
            peaks = rng.permutation(n_values)[: n_classes] if n_classes <= n_values else rng.integers(0, n_values, n_classes)
            cond = np.tile((1.0 - w) * uniform, (n_classes, 1))
            cond[np.arange(n_classes), peaks] += w
            cum = np.cumsum(cond, axis=1)
            X[:, a] = np.minimum((rng.random(n)[:, None] > cum[y]).sum(axis=1), n_values - 1)
        else:
            X[:, a] = rng.integers(0, n_values, size=n)
    if missing_rate > 0:
        X[rng.random((n, n_attributes)) < missing_rate] = MISSING
    return Dataset(
        tuple(f"a{k}" for k in range(n_attributes)),
        tuple(tuple(str(v) for v in range(n_values)) for _ in range(n_attributes)),
        "class",
        tuple(str(c) for c in range(n_classes)),
        X,
        y,
    )
