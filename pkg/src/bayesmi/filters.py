"""Feature-selection filters on attribute-by-class count tables.

``F``  includes an attribute when its empirical mutual information exceeds eps.
``FF`` includes it when the posterior mass above eps exceeds p_bar.
``BF`` discards it when the posterior mass below eps exceeds p_bar.

Posterior masses come from a moment-matched distribution (Beta by default,
Gamma when the Beta moments are infeasible).  Complete tables use the exact
mean and the order-2 variance; tables with missing attribute values use the
leading-order mean ``I(pi_hat)`` and variance from the missing-data routines.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import distfit, missing, moments
from .errors import InfeasibleFitError
from .tables import CountTable, PriorSpec, with_prior

KINDS = ("F", "FF", "BF")


@dataclass(frozen=True)
class FilterConfig:
    kind: str = "FF"
    epsilon: float = 0.003
    p_bar: float = 0.95
    family: str = "beta"
    prior: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"filter kind must be one of {KINDS}, got {self.kind!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.p_bar < 1:
            raise ValueError("p_bar must lie in (0, 1)")
        if self.family not in distfit.FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        PriorSpec(self.prior)


@dataclass(frozen=True)
class FilterDecision:
    attribute: object
    kind: str
    include: bool
    statistic: float
    mean: float
    variance: float
    family: str | None = None
    notes: tuple = field(default_factory=tuple)

    @property
    def verdict(self) -> str:
        return "include" if self.include else "discard"


def posterior_moments(table: CountTable) -> tuple[float, float]:
    """(mean, variance) used to fit the posterior of I for the filters."""
    if table.is_complete:
        stats = moments.core_stats(table)
        return moments.mean_exact(table), moments.variance(stats, table, order=2)
    return missing.leading_moments(table)


def posterior_fit(table: CountTable, family: str = "beta"):
    """Fitted posterior of I, or a point mass when the variance vanishes.

    Returns ``(dist_or_None, mean, variance)``; ``None`` signals a point mass at
    ``mean``.
    """
    mean, var = posterior_moments(table)
    if not var > 0:
        return None, mean, var
    try:
        return distfit.fit_with_fallback(mean, var, table.i_max, family), mean, var
    except InfeasibleFitError:
        # Leading-order mean on the boundary (exactly independent MLE under
        # missing data): no Beta or Gamma matches, the Gaussian always does.
        d = distfit.fit(mean, var, table.i_max, "gaussian")
        return distfit.FittedDist(d.family, d.params, d.support, d.source_moments, fallback_from=family), mean, var


def decide(table: CountTable, config: FilterConfig = FilterConfig(), attribute=None) -> FilterDecision:
    t = with_prior(table, config.prior)
    if config.kind == "F":
        stat = moments.empirical_mi(t)
        return FilterDecision(attribute, "F", stat > config.epsilon, stat, math.nan, math.nan)
    dist, mean, var = posterior_fit(t, config.family)
    notes = []
    if dist is None:
        notes.append("point-mass")
        below = 1.0 if mean < config.epsilon else 0.0
        above = 1.0 - below
        family = None
    else:
        below = distfit.cdf(dist, config.epsilon)
        above = distfit.tail_above(dist, config.epsilon)
        family = dist.family
        if dist.fallback_from is not None:
            notes.append(f"fallback-from-{dist.fallback_from}")
    if config.kind == "FF":
        return FilterDecision(attribute, "FF", above > config.p_bar, above, mean, var, family, tuple(notes))
    return FilterDecision(attribute, "BF", not below > config.p_bar, below, mean, var, family, tuple(notes))


def decide_all(tables, config: FilterConfig = FilterConfig()) -> list[FilterDecision]:
    """Decisions for a mapping ``id -> table`` or a sequence of tables (ids are positions)."""
    items = tables.items() if hasattr(tables, "items") else enumerate(tables)
    decisions = []
    n_classes = None
    for key, tbl in items:
        if n_classes is None:
            n_classes = tbl.s
        elif tbl.s != n_classes:
            raise ValueError(f"attribute {key!r} has {tbl.s} classes, expected {n_classes}")
        decisions.append(decide(tbl, config, key))
    return decisions


def select(tables, config: FilterConfig = FilterConfig()) -> list:
    """Ids of the included attributes, in input order."""
    return [d.attribute for d in decide_all(tables, config) if d.include]


def ff_equivalent_threshold(summary, epsilon: float) -> float:
    """``eps + 2 sqrt(Var)``: the F threshold that mimics a Gaussian FF at p_bar ~ 0.977."""
    var = summary.variance if hasattr(summary, "variance") else float(summary)
    if var < 0:
        raise ValueError("variance must be nonnegative")
    return float(epsilon + 2.0 * math.sqrt(var))


def write_decision_log(path, decisions):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["attribute", "kind", "statistic", "verdict"])
        for d in decisions:
            w.writerow([d.attribute, d.kind, repr(float(d.statistic)), d.verdict])


def decision_rows(decisions) -> list[dict]:
    return [
        {
            "attribute": d.attribute if not isinstance(d.attribute, np.integer) else int(d.attribute),
            "kind": d.kind,
            "statistic": d.statistic,
            "verdict": d.verdict,
            "mean": d.mean,
            "variance": d.variance,
            "family": d.family,
            "notes": list(d.notes),
        }
        for d in decisions
    ]
