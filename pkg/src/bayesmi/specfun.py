"""Digamma and log-Gamma.

Count data makes integer and half-integer arguments the common case, so those
are served from a precomputed table of exact finite sums.  Everything else goes
through the upward recurrence ``psi(z+1) = psi(z) + 1/z`` into the asymptotic
regime ``z >= 10`` where the Stirling-type series is accurate to ~1e-15.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060651209008240243

_ASYMPTOTIC_CUTOFF = 10.0
# B_2k / (2k) for k = 1..7
_BERNOULLI_TERMS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def _kahan_cumsum(terms):
    out = np.empty(len(terms) + 1)
    out[0] = 0.0
    total = 0.0
    comp = 0.0
    for k, t in enumerate(terms, start=1):
        y = t - comp
        nxt = total + y
        comp = (nxt - total) - y
        total = nxt
        out[k] = total
    return out


class PsiTable:
    """psi at z = k/2 for k = 1 .. 2*max_index.

    Integers use ``psi(n) = -gamma + sum_{k<n} 1/k`` and half-integers use
    ``psi(m + 1/2) = -gamma - 2 ln 2 + 2 sum_{k<=m} 1/(2k-1)``.
    """

    def __init__(self, max_index: int = 4096):
        if max_index < 1:
            raise ValueError("max_index must be positive")
        self.max_index = int(max_index)
        m = self.max_index
        harmonic = _kahan_cumsum([1.0 / k for k in range(1, m)])  # H_0 .. H_{m-1}
        odd = _kahan_cumsum([1.0 / (2 * k - 1) for k in range(1, m)])  # S_0 .. S_{m-1}
        values = np.empty(2 * m + 1)
        values[0] = np.nan
        values[2::2] = -EULER_GAMMA + harmonic  # psi(1) .. psi(m)
        values[1::2] = -EULER_GAMMA - 2.0 * math.log(2.0) + 2.0 * odd  # psi(1/2) .. psi(m - 1/2)
        values.setflags(write=False)
        self.values = values

    def lookup(self, z):
        """Table value at ``z``; ``z`` must be a positive multiple of 1/2 not above max_index."""
        return self.values[np.asarray(np.rint(2.0 * np.asarray(z)), dtype=np.int64)]

    def covers(self, z: np.ndarray) -> np.ndarray:
        twice = 2.0 * z
        return (twice == np.floor(twice)) & (z <= self.max_index)


_TABLE = PsiTable()


def _psi_series(z: np.ndarray) -> np.ndarray:
    x = np.array(z, dtype=np.float64, copy=True)
    acc = np.zeros_like(x)
    low = x < _ASYMPTOTIC_CUTOFF
    while np.any(low):
        acc[low] -= 1.0 / x[low]
        x[low] += 1.0
        low = x < _ASYMPTOTIC_CUTOFF
    inv2 = 1.0 / (x * x)
    poly = np.zeros_like(x)
    for c in reversed(_BERNOULLI_TERMS):
        poly = (poly + c) * inv2
    return acc + np.log(x) - 0.5 / x - poly


def psi(z, table: PsiTable | None = None):
    """Digamma function for positive real (scalar or array) arguments."""
    tbl = _TABLE if table is None else table
    arr = np.asarray(z, dtype=np.float64)
    if not np.all(arr > 0):
        raise DomainError("psi is only implemented for z > 0")
    flat = arr.ravel()
    out = np.empty_like(flat)
    hit = tbl.covers(flat)
    if np.any(hit):
        out[hit] = tbl.lookup(flat[hit])
    miss = ~hit
    if np.any(miss):
        out[miss] = _psi_series(flat[miss])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def psi_integer(n: int, table: PsiTable | None = None) -> float:
    """``psi(n) = -gamma + H_{n-1}`` for a positive integer ``n``."""
    if isinstance(n, float) and not n.is_integer():
        raise DomainError(f"psi_integer needs an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise DomainError(f"psi_integer needs n >= 1, got {n}")
    tbl = _TABLE if table is None else table
    if n <= tbl.max_index:
        return float(tbl.values[2 * n])
    m = tbl.max_index
    return float(tbl.values[2 * m] + math.fsum(1.0 / k for k in range(m, n)))


def ln_gamma(z):
    """Natural log of the Gamma function for z > 0."""
    arr = np.asarray(z, dtype=np.float64)
    if not np.all(arr > 0):
        raise DomainError("ln_gamma is only implemented for z > 0")
    out = gammaln(arr)
    return float(out) if np.ndim(out) == 0 else out
