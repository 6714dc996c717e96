"""Incremental naive Bayes and the sequential filter-evaluation protocol.

Instances are read one at a time.  Before each prediction every filter picks
its attributes from the attribute-by-class tables accumulated so far; the
classifier then predicts with those attributes only, is scored, and absorbs
the instance.  All filters share the same counts, so a single pass serves
every filter under comparison.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import distfit, filters, moments
from .dataio import MISSING, Dataset, pad_table
from .errors import InputError
from .tables import CountTable


class NaiveBayesState:
    """Counts behind a naive Bayes classifier with uniform-prior smoothing.

    ``cond[a]`` is the (value x class) count matrix for attribute ``a`` and
    ``missing[a]`` the per-class tally of instances whose value of ``a`` was
    not observed.  Attribute domains grow when a new value is first seen.
    """

    def __init__(self, n_classes: int, n_attributes: int, prior: float = 1.0, n_values=None):
        if n_classes < 1 or n_attributes < 0:
            raise InputError("need at least one class and a nonnegative attribute count")
        self.prior = float(prior)
        self.class_counts = np.zeros(n_classes)
        sizes = [0] * n_attributes if n_values is None else list(n_values)
        self.cond = [np.zeros((v, n_classes)) for v in sizes]
        self.missing = [np.zeros(n_classes) for _ in range(n_attributes)]
        self.unseen_events = 0

    @property
    def n_classes(self) -> int:
        return len(self.class_counts)

    @property
    def n_attributes(self) -> int:
        return len(self.cond)

    @property
    def n_seen(self) -> float:
        return float(self.class_counts.sum())

    def _grow(self, a: int, value: int):
        v = self.cond[a].shape[0]
        if value >= v:
            self.cond[a] = np.vstack([self.cond[a], np.zeros((value + 1 - v, self.n_classes))])

    def log_posterior(self, x, selected=None) -> tuple[np.ndarray, bool]:
        """Normalized log class posterior and whether an unseen value occurred."""
        logp = np.log(self.class_counts + self.prior)
        unseen = False
        attrs = range(self.n_attributes) if selected is None else selected
        for a in attrs:
            v = int(x[a])
            if v == MISSING:
                continue
            table = self.cond[a]
            n_vals = table.shape[0]
            if v >= n_vals:
                # An unseen value counts as one extra smoothed category.
                unseen = True
                num = np.full(self.n_classes, self.prior)
                n_vals = v + 1
            else:
                num = table[v] + self.prior
            logp = logp + np.log(num) - np.log(table.sum(axis=0) + self.prior * n_vals)
        logp = logp - np.logaddexp.reduce(logp)
        return logp, unseen

    def predict(self, x, selected=None) -> tuple[int, np.ndarray]:
        logp, _ = self.log_posterior(x, selected)
        post = np.exp(logp)
        return int(np.argmax(post)), post / post.sum()

    def update(self, x, y: int, weight: float = 1.0) -> "NaiveBayesState":
        y = int(y)
        if not 0 <= y < self.n_classes:
            raise InputError(f"class code {y} out of range")
        if len(x) != self.n_attributes:
            raise InputError(f"instance has {len(x)} attributes, expected {self.n_attributes}")
        self.class_counts[y] += weight
        for a, v in enumerate(x):
            v = int(v)
            if v == MISSING:
                self.missing[a][y] += weight
            else:
                self._grow(a, v)
                self.cond[a][v, y] += weight
        return self

    def table(self, a: int) -> CountTable:
        """Attribute ``a`` by class counts (no prior) with the missing tally as ``col_missing``."""
        joint, miss = pad_table(self.cond[a], self.missing[a])
        return CountTable(joint, None, miss)

    def table_with_prior(self, a: int, prior: float) -> CountTable:
        joint, miss = pad_table(self.cond[a], self.missing[a])
        return CountTable(joint + prior, None, miss)


@dataclass(frozen=True, eq=False)
class SequentialRunResult:
    kind: str
    predictions: np.ndarray
    correct: np.ndarray
    n_selected: np.ndarray
    unseen_events: int = 0

    @property
    def accuracy_curve(self) -> np.ndarray:
        return np.cumsum(self.correct) / np.arange(1, len(self.correct) + 1)

    @property
    def accuracy(self) -> float:
        return float(np.mean(self.correct)) if len(self.correct) else math.nan

    @property
    def mean_attributes(self) -> float:
        return float(np.mean(self.n_selected)) if len(self.n_selected) else math.nan


def _statistics(state: NaiveBayesState, config: filters.FilterConfig, kinds):
    """Per-attribute inclusion decisions for every filter kind.

    Posterior fits are shared between FF and BF.
    """
    out = {k: [] for k in kinds}
    need_fit = any(k != "F" for k in kinds)
    for a in range(state.n_attributes):
        t = state.table_with_prior(a, config.prior)
        if "F" in kinds:
            out["F"].append(moments.empirical_mi(t) > config.epsilon)
        if need_fit:
            dist, mean, _ = filters.posterior_fit(t, config.family)
            if dist is None:
                below = 1.0 if mean < config.epsilon else 0.0
                above = 1.0 - below
            else:
                below = distfit.cdf(dist, config.epsilon)
                above = distfit.tail_above(dist, config.epsilon)
            if "FF" in kinds:
                out["FF"].append(above > config.p_bar)
            if "BF" in kinds:
                out["BF"].append(not below > config.p_bar)
    return {k: np.flatnonzero(v) for k, v in out.items()}


def run_sequential(dataset: Dataset, kinds=("F", "FF", "BF"), config: filters.FilterConfig | None = None,
                   nb_prior: float = 1.0) -> dict:
    """Run the sequential protocol for each filter kind in ``kinds``.

    ``config`` supplies epsilon, p_bar, family and the filters' prior; its
    ``kind`` field is ignored.  ``kinds`` may also contain ``"all"`` (every
    attribute) as a baseline.  Returns ``{kind: SequentialRunResult}``.
    """
    config = config or filters.FilterConfig()
    kinds = tuple(kinds)
    for k in kinds:
        if k not in filters.KINDS + ("all",):
            raise InputError(f"unknown filter kind {k!r}")
    n = dataset.n
    state = NaiveBayesState(max(len(dataset.class_domain), 2), dataset.n_attributes, nb_prior)
    preds = {k: np.empty(n, dtype=np.int64) for k in kinds}
    nsel = {k: np.empty(n, dtype=np.int64) for k in kinds}
    unseen = {k: 0 for k in kinds}
    filter_kinds = tuple(k for k in kinds if k != "all")
    everything = np.arange(dataset.n_attributes)
    for i in range(n):
        x = dataset.X[i]
        chosen = _statistics(state, config, filter_kinds) if filter_kinds else {}
        chosen["all"] = everything
        for k in kinds:
            sel = chosen[k]
            logp, flag = state.log_posterior(x, sel)
            preds[k][i] = int(np.argmax(logp))
            nsel[k][i] = len(sel)
            unseen[k] += int(flag)
        state.update(x, dataset.y[i])
    return {
        k: SequentialRunResult(k, preds[k], preds[k] == dataset.y, nsel[k], unseen[k])
        for k in kinds
    }


@dataclass(frozen=True)
class TTestResult:
    t: float
    p_value: float
    significant: bool
    degenerate: bool
    df: int


def paired_t_test(a, b, alpha: float = 0.05) -> TTestResult:
    """Two-tailed paired t-test on per-instance 0/1 correctness indicators.

    When every difference is equal the statistic is undefined: a zero common
    difference is reported as not significant, a nonzero one as significant,
    both with ``degenerate=True``.
    """
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    k = len(d)
    if k < 2 or len(np.asarray(a)) != len(np.asarray(b)):
        raise InputError("paired t-test needs two sequences of equal length >= 2")
    mean = float(np.mean(d))
    var = float(np.var(d, ddof=1))
    if var == 0.0:
        if mean == 0.0:
            return TTestResult(math.nan, 1.0, False, True, k - 1)
        return TTestResult(math.copysign(math.inf, mean), 0.0, True, True, k - 1)
    t = mean / math.sqrt(var / k)
    p = float(2.0 * stats.t.sf(abs(t), k - 1))
    return TTestResult(t, p, p < alpha, False, k - 1)


def prefix_t_tests(a, b, alpha: float = 0.05):
    """Paired t-test on the first ``k`` instances for every ``k``.

    Returns ``(t, significant, degenerate)`` arrays of the full length; the
    entry for ``k = 1`` is undefined and reported as not significant.
    """
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    n = len(d)
    k = np.arange(1, n + 1, dtype=np.float64)
    s1 = np.cumsum(d)
    s2 = np.cumsum(d * d)
    mean = s1 / k
    with np.errstate(divide="ignore", invalid="ignore"):
        # Differences are integers, so these sums are exact and var == 0 is reliable.
        var = (s2 - s1 * s1 / k) / (k - 1)
        var = np.where(np.abs(var) < 1e-12, 0.0, var)
        t = mean / np.sqrt(var / k)
    valid = k >= 2
    degenerate = valid & (var == 0)
    p = np.ones(n)
    ok = valid & ~degenerate
    p[ok] = 2.0 * stats.t.sf(np.abs(t[ok]), k[ok] - 1)
    significant = (ok & (p < alpha)) | (degenerate & (mean != 0))
    t = np.where(degenerate & (mean != 0), np.copysign(np.inf, mean), t)
    t = np.where(~valid | (degenerate & (mean == 0)), np.nan, t)
    return t, significant, degenerate


def write_accuracy_csv(path, results: dict, kinds=None):
    """Rows ``k, acc_<kind>..., significant_flag``.

    The flag is the paired prefix test between the first two listed kinds.
    """
    kinds = list(kinds or results)
    curves = [results[k].accuracy_curve for k in kinds]
    if len(kinds) >= 2:
        _, sig, _ = prefix_t_tests(results[kinds[0]].correct, results[kinds[1]].correct)
    else:
        sig = np.zeros(len(curves[0]), dtype=bool)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + [f"acc_{k}" for k in kinds] + ["significant_flag"])
        for i in range(len(curves[0])):
            w.writerow([i + 1] + [repr(float(c[i])) for c in curves] + [int(sig[i])])


def write_usage_csv(path, results: dict, kinds=None):
    kinds = list(kinds or results)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + [f"attrs_{k}" for k in kinds])
        for i in range(len(results[kinds[0]].n_selected)):
            w.writerow([i + 1] + [int(results[k].n_selected[i]) for k in kinds])
