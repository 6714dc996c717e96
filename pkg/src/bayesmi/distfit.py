"""Moment-matched Gaussian, Gamma and Beta approximations of p(I|n).

The Beta is placed on ``[0, i_max]`` by linear rescaling.  cdfs are built on
the regularized incomplete Beta/Gamma functions from scipy; quantiles invert
the cdf by bisection on a finite bracket.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InfeasibleFitError, NumericalDomainError

FAMILIES = ("gaussian", "gamma", "beta")


@dataclass(frozen=True)
class FittedDist:
    family: str
    params: tuple  # gaussian (loc, scale); gamma (shape, rate); beta (alpha, beta)
    support: tuple
    source_moments: tuple  # (mean, variance)
    fallback_from: str | None = None

    # -- analytic moments -------------------------------------------------
    @property
    def mean(self) -> float:
        a, b = self.params
        if self.family == "gaussian":
            return a
        if self.family == "gamma":
            return a / b
        return self.support[1] * a / (a + b)

    @property
    def variance(self) -> float:
        a, b = self.params
        if self.family == "gaussian":
            return b * b
        if self.family == "gamma":
            return a / (b * b)
        s = a + b
        return self.support[1] ** 2 * a * b / (s * s * (s + 1.0))

    # -- densities ---------------------------------------------------------
    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        a, b = self.params
        if self.family == "gaussian":
            z = (x - a) / b
            out = np.exp(-0.5 * z * z) / (b * math.sqrt(2.0 * math.pi))
        elif self.family == "gamma":
            with np.errstate(divide="ignore", invalid="ignore"):
                logp = a * math.log(b) + special.xlogy(a - 1.0, x) - b * x - special.gammaln(a)
                out = np.where(x > 0, np.exp(logp), 0.0)
                if a == 1.0:
                    out = np.where(x == 0, b, out)
        else:
            c = self.support[1]
            u = x / c
            with np.errstate(divide="ignore", invalid="ignore"):
                logp = special.xlogy(a - 1.0, u) + special.xlog1py(b - 1.0, -u) - special.betaln(a, b)
                out = np.where((u > 0) & (u < 1), np.exp(logp) / c, 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        a, b = self.params
        if self.family == "gaussian":
            out = special.ndtr((x - a) / b)
        elif self.family == "gamma":
            out = special.gammainc(a, np.maximum(x, 0.0) * b)
        else:
            out = special.betainc(a, b, np.clip(x / self.support[1], 0.0, 1.0))
        out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def sf(self, x):
        x = np.asarray(x, dtype=np.float64)
        a, b = self.params
        # Complementary functions keep precision in the upper tail.
        if self.family == "gaussian":
            out = special.ndtr((a - x) / b)
        elif self.family == "gamma":
            out = special.gammaincc(a, np.maximum(x, 0.0) * b)
        else:
            out = special.betaincc(a, b, np.clip(x / self.support[1], 0.0, 1.0))
        out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, p: float) -> float:
        return quantile(self, p)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": list(self.params),
            "support": [float(x) for x in self.support],
            "mean": self.source_moments[0],
            "variance": self.source_moments[1],
            "fallback_from": self.fallback_from,
        }


def fit(mean: float, variance: float, i_max: float, family: str = "beta") -> FittedDist:
    """Match a distribution of ``family`` to the given mean and variance."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    mean = float(mean)
    variance = float(variance)
    if not (variance > 0 and math.isfinite(variance)):
        raise NumericalDomainError(f"variance must be positive and finite, got {variance}")
    moments = (mean, variance)
    if family == "gaussian":
        return FittedDist("gaussian", (mean, math.sqrt(variance)), (-math.inf, math.inf), moments)
    if family == "gamma":
        if not mean > 0:
            raise InfeasibleFitError(f"gamma fit needs a positive mean, got {mean}")
        return FittedDist("gamma", (mean * mean / variance, mean / variance), (0.0, math.inf), moments)
    if not (0 < mean < i_max):
        raise InfeasibleFitError(f"beta fit needs 0 < mean < i_max={i_max}, got {mean}; use gamma instead")
    m = mean / i_max
    v = variance / (i_max * i_max)
    if not v < m * (1.0 - m):
        raise InfeasibleFitError("beta moments infeasible: variance >= mean*(i_max-mean); use gamma instead")
    common = m * (1.0 - m) / v - 1.0
    return FittedDist("beta", (m * common, (1.0 - m) * common), (0.0, float(i_max)), moments)


def fit_with_fallback(mean: float, variance: float, i_max: float, family: str = "beta") -> FittedDist:
    """:func:`fit`, retrying with gamma when the requested family is infeasible."""
    try:
        return fit(mean, variance, i_max, family)
    except InfeasibleFitError:
        if family == "gamma":
            raise
        d = fit(mean, variance, i_max, "gamma")
        return FittedDist(d.family, d.params, d.support, d.source_moments, fallback_from=family)


def cdf(dist: FittedDist, x):
    return dist.cdf(x)


def tail_above(dist: FittedDist, threshold):
    """Posterior mass above ``threshold``, i.e. ``1 - cdf``."""
    return dist.sf(threshold)


def _bracket(dist: FittedDist, p: float) -> tuple[float, float]:
    lo, hi = dist.support
    if dist.family == "beta":
        return lo, hi
    mean, sd = dist.mean, math.sqrt(dist.variance)
    if dist.family == "gaussian":
        lo, hi = mean - 10.0 * sd, mean + 10.0 * sd
    else:
        hi = mean + 10.0 * sd
    while dist.cdf(lo) > p:
        lo -= 10.0 * sd
    while dist.cdf(hi) < p:
        hi += 10.0 * sd
    return lo, hi


def quantile(dist: FittedDist, p: float, max_iter: int = 2000) -> float:
    """Inverse cdf by bisection; stops when the bracket can shrink no further."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    lo, hi = _bracket(dist, p)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if dist.cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def curve(dist: FittedDist, grid_size: int = 201, x_max: float | None = None):
    """``(x, pdf, cdf)`` on an equally spaced grid over ``[0, x_max]``."""
    if x_max is None:
        x_max = dist.support[1] if math.isfinite(dist.support[1]) else dist.mean + 8.0 * math.sqrt(dist.variance)
    x = np.linspace(0.0, x_max, grid_size)
    return x, np.atleast_1d(dist.pdf(x)), np.atleast_1d(dist.cdf(x))


def write_curve_csv(path, dist: FittedDist, grid_size: int = 201, x_max: float | None = None):
    x, p, c = curve(dist, grid_size, x_max)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "pdf", "cdf"])
        for row in zip(x, p, c):
            w.writerow([repr(float(v)) for v in row])
