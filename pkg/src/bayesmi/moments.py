"""Posterior moments of mutual information under a Dirichlet posterior.

All quantities are in nats.  With ``n_ij`` the (prior-augmented) counts, the
posterior over the chances is Dirichlet(n_ij), the mean of ``I`` is known in
closed form through digamma values, and the variance, third and fourth central
moments are given as expansions in ``1/n`` built from six table statistics
J, K, L, M, P, Q, each an O(rs) sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .errors import UndefinedDistributionError, UnsupportedInputError, ZeroCellError
from .specfun import psi
from .tables import CountTable, PriorSpec, with_prior


def mutual_information(pi: np.ndarray) -> float:
    """``I(pi)`` for a joint probability matrix (0 ln 0 = 0)."""
    pi = np.asarray(pi, dtype=np.float64)
    rows = pi.sum(axis=1)
    cols = pi.sum(axis=0)
    val = xlogy(pi, pi).sum() - xlogy(rows, rows).sum() - xlogy(cols, cols).sum()
    return float(max(val, 0.0))


def empirical_mi(table: CountTable) -> float:
    """Descriptive mutual information ``I(pi_hat)`` of the joint counts."""
    n = table.counts.sum()
    if n <= 0:
        raise UndefinedDistributionError("joint counts are all zero; empirical MI undefined")
    return mutual_information(table.counts / n)


@dataclass(frozen=True, eq=False)
class CoreStats:
    J: float
    K: float
    L: float
    M: float
    P: float
    Q: float
    J_cells: np.ndarray
    J_rows: np.ndarray
    J_cols: np.ndarray


def _require_complete(table: CountTable, what: str):
    if not table.is_complete:
        raise UnsupportedInputError(f"{what} needs complete data; use the missing-data routines")


_BLOCK_CELLS = 1 << 14


def _row_blocks(r: int, s: int):
    """Row slices holding about ``_BLOCK_CELLS`` cells each.

    Per-cell work runs block by block so temporaries stay in cache and the
    cost per cell does not grow with the table size.
    """
    step = max(1, _BLOCK_CELLS // max(s, 1))
    for start in range(0, r, step):
        yield slice(start, min(start + step, r))


def core_stats(table: CountTable) -> CoreStats:
    """J, K, L, M, P, Q and the per-cell terms ``J_ij``; needs every n_ij > 0."""
    nij = table.counts
    zero = np.argwhere(nij <= 0)
    if len(zero):
        raise ZeroCellError(tuple(int(x) for x in zero[0]))
    n = nij.sum()
    ni = nij.sum(axis=1)
    nj = nij.sum(axis=0)
    log_nj = np.log(nj)
    inv_nj = 1.0 / nj
    J_cells = np.empty_like(nij)
    J = K = L = M = Q = 0.0
    for rows in _row_blocks(*nij.shape):
        c = nij[rows]
        n_row = ni[rows][:, None]
        log_ratio = np.log(c) + (math.log(n) - np.log(n_row)) - log_nj
        jc = c * log_ratio / n
        J_cells[rows] = jc
        jl = jc * log_ratio
        J += jc.sum()
        K += jl.sum()
        L += (jl * log_ratio).sum()
        M += ((1.0 - c / n_row - c * inv_nj + c / n) * log_ratio).sum()
        Q += (c * c / n_row * inv_nj).sum()
    Q = 1.0 - Q
    J_rows = J_cells.sum(axis=1)
    J_cols = J_cells.sum(axis=0)
    P = n * ((J_rows**2 / ni).sum() + (J_cols**2 / nj).sum())
    return CoreStats(float(J), float(K), float(L), float(M), float(P), float(Q), J_cells, J_rows, J_cols)


def mean_exact(table: CountTable) -> float:
    """Exact posterior mean of I via digamma values.

    ``E[I] = (1/n) sum n_ij [psi(n_ij+1) - psi(n_i+ +1) - psi(n_+j +1) + psi(n+1)]``.
    Cells with n_ij = 0 contribute nothing.
    """
    _require_complete(table, "mean_exact")
    nij = table.counts
    n = nij.sum()
    if n <= 0:
        raise UndefinedDistributionError("joint counts are all zero")
    ni = nij.sum(axis=1)
    nj = nij.sum(axis=0)
    # Grouped sums avoid evaluating psi for every cell more than once.
    cell = sum(float((nij[rows] * psi(nij[rows] + 1.0)).sum()) for rows in _row_blocks(*nij.shape))
    row = (ni * psi(ni + 1.0)).sum()
    col = (nj * psi(nj + 1.0)).sum()
    val = (cell - row - col) / n + psi(n + 1.0)
    return float(min(max(val, 0.0), table.i_max))


def _dof(table: CountTable) -> int:
    return (table.r - 1) * (table.s - 1)


def mean_order2(stats: CoreStats, table: CountTable) -> float:
    """``J + (r-1)(s-1) / (2(n+1))``."""
    n = table.counts.sum()
    return stats.J + _dof(table) / (2.0 * (n + 1.0))


def variance(stats: CoreStats, table: CountTable, order: int = 2, return_flag: bool = False):
    """Approximate posterior variance of I.

    ``order=1`` gives ``(K - J^2)/(n+1)``; ``order=2`` adds
    ``[M + (r-1)(s-1)(1/2 - J) - Q] / ((n+1)(n+2))``.  A negative result (possible
    for extreme tables at small n) is clamped to 0; with ``return_flag=True`` the
    function returns ``(value, clamped)``.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    n = table.counts.sum()
    val = (stats.K - stats.J**2) / (n + 1.0)
    if order == 2:
        val += (stats.M + _dof(table) * (0.5 - stats.J) - stats.Q) / ((n + 1.0) * (n + 2.0))
    clamped = val < 0
    if clamped:
        val = 0.0
    val = float(val)
    return (val, bool(clamped)) if return_flag else val


@dataclass(frozen=True)
class HigherMoments:
    central3: float
    central4: float
    skewness: float
    kurtosis: float
    defined: bool


def central_moments_34(stats: CoreStats, table: CountTable) -> HigherMoments:
    """Leading-order third and fourth central moments, skewness and kurtosis.

    Skewness and kurtosis divide by the order-2 variance; when that is zero they
    are reported as NaN with ``defined=False``.
    """
    n = table.counts.sum()
    J, K, L, P = stats.J, stats.K, stats.L, stats.P
    c3 = 2.0 / n**2 * (2.0 * J**3 - 3.0 * K * J + L) + 3.0 / n**2 * (K + J**2 - P)
    c4 = 3.0 / n**2 * (K - J**2) ** 2
    var = variance(stats, table, order=2)
    if var > 0:
        return HigherMoments(float(c3), float(c4), float(c3 / var**1.5), float(c4 / var**2), True)
    return HigherMoments(float(c3), float(c4), math.nan, math.nan, False)


@dataclass(frozen=True)
class MomentSummary:
    mean_exact: float
    mean_order2: float
    var_order1: float
    var_order2: float
    central3: float
    central4: float
    skewness: float
    kurtosis: float
    i_max: float
    n: float
    complete: bool = True
    flags: tuple = field(default_factory=tuple)

    @property
    def mean(self) -> float:
        return self.mean_exact

    @property
    def variance(self) -> float:
        return self.var_order2

    def to_dict(self) -> dict:
        return {
            "mean_exact": self.mean_exact,
            "mean_order2": self.mean_order2,
            "var_order1": self.var_order1,
            "var_order2": self.var_order2,
            "central3": self.central3,
            "central4": self.central4,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "i_max": self.i_max,
            "n": self.n,
            "complete": self.complete,
            "flags": list(self.flags),
        }


def summarize(table: CountTable, prior=None) -> MomentSummary:
    """All moment information for a table after applying ``prior``.

    Complete data gives the exact mean and the order-1/order-2 variances plus
    higher moments.  Incomplete data gives the leading-order mean ``I(pi_hat)``
    and leading-order variance from the maximum-likelihood chances; the
    higher-order fields are NaN and flagged.
    """
    t = with_prior(table, prior if prior is not None else PriorSpec(0.0))
    flags = []
    if not t.is_complete:
        from .missing import leading_moments

        mean, var = leading_moments(t)
        flags.append("incomplete-data-leading-order")
        return MomentSummary(
            mean_exact=mean,
            mean_order2=mean,
            var_order1=var,
            var_order2=var,
            central3=math.nan,
            central4=math.nan,
            skewness=math.nan,
            kurtosis=math.nan,
            i_max=t.i_max,
            n=t.n,
            complete=False,
            flags=tuple(flags),
        )
    mean = mean_exact(t)
    if np.any(t.counts <= 0):
        # The expansion statistics need every cell positive; only the exact mean survives.
        flags.append("zero-cells-no-expansion")
        return MomentSummary(mean, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan,
                             t.i_max, t.n, True, tuple(flags))
    stats = core_stats(t)
    v1, c1 = variance(stats, t, order=1, return_flag=True)
    v2, c2 = variance(stats, t, order=2, return_flag=True)
    if c1 or c2:
        flags.append("variance-clamped")
    hm = central_moments_34(stats, t)
    if not hm.defined:
        flags.append("zero-variance-shape-undefined")
    return MomentSummary(
        mean_exact=mean,
        mean_order2=mean_order2(stats, t),
        var_order1=v1,
        var_order2=v2,
        central3=hm.central3,
        central4=hm.central4,
        skewness=hm.skewness,
        kurtosis=hm.kurtosis,
        i_max=t.i_max,
        n=t.n,
        complete=True,
        flags=tuple(flags),
    )
