"""Leading-order posterior of mutual information under data missing at random.

The table carries joint counts ``n_ij`` together with margin-only counts
``n_i?`` (row observed, column missing) and ``n_?j`` (column observed, row
missing).  The maximum-likelihood chances solve the EM fixed point

    pi_ij = (n_ij + n_i? pi_ij / pi_i+ + n_?j pi_ij / pi_+j) / n,

and the posterior covariance of ``pi`` to leading order is the inverse of the
Hessian kernel ``A`` projected onto ``sum(pi) = 1``.  ``A`` is diagonal plus a
row-block part plus a column-block part, so its inverse is assembled from an
r x r-free row-wise closed form and a single s x s matrix ``G`` (Woodbury).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .errors import ConvergenceError, SingularMatrixError, UnsupportedInputError, ZeroCellError
from .moments import mutual_information
from .tables import CountTable


@dataclass(frozen=True, eq=False)
class MleEstimate:
    pi_hat: np.ndarray
    iterations: int
    final_residual: float
    loglik_trace: tuple

    @property
    def row_marginal(self) -> np.ndarray:
        return self.pi_hat.sum(axis=1)

    @property
    def col_marginal(self) -> np.ndarray:
        return self.pi_hat.sum(axis=0)


def _require_positive_cells(table: CountTable):
    zero = np.argwhere(table.counts <= 0)
    if len(zero):
        raise ZeroCellError(tuple(int(x) for x in zero[0]))


def log_likelihood(table: CountTable, pi: np.ndarray) -> float:
    """``sum n_ij ln pi_ij + sum n_i? ln pi_i+ + sum n_?j ln pi_+j``."""
    return float(
        xlogy(table.counts, pi).sum()
        + xlogy(table.row_missing, pi.sum(axis=1)).sum()
        + xlogy(table.col_missing, pi.sum(axis=0)).sum()
    )


def _em_map(table: CountTable, pi: np.ndarray, n: float) -> np.ndarray:
    rows = pi.sum(axis=1)
    cols = pi.sum(axis=0)
    return (
        table.counts
        + table.row_missing[:, None] * pi / rows[:, None]
        + table.col_missing[None, :] * pi / cols[None, :]
    ) / n


def em_mle(table: CountTable, tol: float = 1e-10, max_iter: int = 10_000, init=None) -> MleEstimate:
    """Maximum-likelihood chances by EM iteration of the fixed-point equation.

    Starts from the complete-data proportions renormalized to sum one unless
    ``init`` is given.  Stops when the largest cellwise change of one map
    application is at most ``tol``.
    """
    _require_positive_cells(table)
    n = table.n
    if init is None:
        pi = table.counts / table.counts.sum()
    else:
        pi = np.asarray(init, dtype=np.float64)
        if pi.shape != table.shape or np.any(pi <= 0):
            raise ValueError("init must be a strictly positive matrix of the table's shape")
        pi = pi / pi.sum()
    trace = [log_likelihood(table, pi)]
    residual = np.inf
    for it in range(1, max_iter + 1):
        nxt = _em_map(table, pi, n)
        residual = float(np.max(np.abs(nxt - pi)))
        pi = nxt
        trace.append(log_likelihood(table, pi))
        if residual <= tol:
            return MleEstimate(pi, it, residual, tuple(trace))
    raise ConvergenceError(
        f"EM did not reach tolerance {tol:g} within {max_iter} iterations (residual {residual:.3g})",
        trace=tuple(trace),
    )


def _one_side_orientation(table: CountTable) -> bool:
    """True when the table has to be transposed so that only ``row_missing`` is used."""
    has_row = np.any(table.row_missing > 0)
    has_col = np.any(table.col_missing > 0)
    if has_row and has_col:
        raise UnsupportedInputError("both variables have missing values; use em_mle / variance_general")
    return has_col


def mle_one_side(table: CountTable) -> MleEstimate:
    """Closed-form chances when only one variable is ever missing.

    With ``n_?j = 0``: ``pi_ij = (n_i+ + n_i?)/n * n_ij/n_i+``; the symmetric
    form is used when instead ``n_i? = 0``.
    """
    flip = _one_side_orientation(table)
    t = table.transpose() if flip else table
    ni = t.counts.sum(axis=1)
    if np.any(ni <= 0):
        raise ZeroCellError((int(np.argmin(ni)), -1))
    pi = ((ni + t.row_missing) / t.n)[:, None] * t.counts / ni[:, None]
    if flip:
        pi = pi.T
    residual = float(np.max(np.abs(_em_map(table, pi, table.n) - pi)))
    return MleEstimate(pi, 0, residual, (log_likelihood(table, pi),))


@dataclass(frozen=True, eq=False)
class RhoCoefficients:
    """``rho_ij = n pi_ij^2 / n_ij`` and the margin terms.

    Margin coefficients are infinite when the corresponding missing count is 0;
    they are stored through their reciprocals (kernel weights), which are then
    exactly zero, so the infinite terms drop out without IEEE infinities.
    """

    rho: np.ndarray
    inv_rho_row: np.ndarray
    inv_rho_col: np.ndarray

    @property
    def rho_row(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.inv_rho_row > 0, 1.0 / np.where(self.inv_rho_row > 0, self.inv_rho_row, 1.0), np.inf)

    @property
    def rho_col(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.inv_rho_col > 0, 1.0 / np.where(self.inv_rho_col > 0, self.inv_rho_col, 1.0), np.inf)

    def transpose(self) -> "RhoCoefficients":
        return RhoCoefficients(self.rho.T, self.inv_rho_col, self.inv_rho_row)


def rho_coefficients(table: CountTable, mle: MleEstimate) -> RhoCoefficients:
    _require_positive_cells(table)
    n = table.n
    pi = mle.pi_hat
    rho = n * pi * pi / table.counts
    rows = pi.sum(axis=1)
    cols = pi.sum(axis=0)
    inv_row = table.row_missing / (n * rows * rows)
    inv_col = table.col_missing / (n * cols * cols)
    return RhoCoefficients(rho, inv_row, inv_col)


def log_ratios(pi: np.ndarray) -> np.ndarray:
    """``l_ij = ln(pi_ij / (pi_i+ pi_+j))``."""
    return np.log(pi) - np.log(pi.sum(axis=1))[:, None] - np.log(pi.sum(axis=0))[None, :]


def variance_one_side(table: CountTable, mle: MleEstimate | None = None) -> float:
    """Leading-order variance when only one variable has missing values.

    ``Var[I] ~ (K~ - J~^2/Q~ - P~) / n`` with the rho-weighted statistics;
    O(rs) time.  Reduces to ``(K - J^2)/n`` on complete data.
    """
    flip = _one_side_orientation(table)
    _require_positive_cells(table)
    if mle is None:
        mle = mle_one_side(table)
    t = table.transpose() if flip else table
    pi = mle.pi_hat.T if flip else mle.pi_hat
    co = rho_coefficients(t, MleEstimate(pi, mle.iterations, mle.final_residual, mle.loglik_trace))
    rho = co.rho
    w = co.inv_rho_row  # 1/rho_i?, zero when n_i? = 0
    rho_rows = rho.sum(axis=1)
    l = log_ratios(pi)
    q_row = 1.0 / (1.0 + rho_rows * w)  # Q~_i? = rho_i?/(rho_i? + rho_i+)
    j_rows = (rho * l).sum(axis=1)
    k_t = (rho * l * l).sum()
    j_t = (j_rows * q_row).sum()
    q_t = (rho_rows * q_row).sum()
    p_t = (j_rows**2 * w * q_row).sum()  # Q~_i?/rho_i? = w * Q~_i?
    return float(max((k_t - j_t**2 / q_t - p_t) / table.n, 0.0))


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Structured leading-order covariance of the chances.

    Internally the table is oriented so that the number of columns does not
    exceed the number of rows (``transposed`` records whether that required a
    transpose); every public method takes and returns arrays in the caller's
    orientation.
    """

    n: float
    coefficients: RhoCoefficients  # internal orientation
    log_ratios: np.ndarray  # caller orientation
    transposed: bool
    active_cols: np.ndarray  # internal columns with n_?j > 0
    g_cholesky: np.ndarray | None
    _ae: np.ndarray = field(repr=False, default=None)

    @property
    def shape(self) -> tuple[int, int]:
        return self.log_ratios.shape

    def _row_inverse(self, x: np.ndarray) -> np.ndarray:
        # Block-diagonal part B^{-1}: per row, F_jl = rho_ij d_jl - rho_ij rho_il / (rho_i? + rho_i+).
        co = self.coefficients
        rho = co.rho
        w = co.inv_rho_row
        scale = w / (1.0 + rho.sum(axis=1) * w)  # 1/(rho_i? + rho_i+)
        return rho * x - rho * (scale * (rho * x).sum(axis=1))[:, None]

    def _kernel_inverse_internal(self, x: np.ndarray) -> np.ndarray:
        y = self._row_inverse(x)
        if self.g_cholesky is not None:
            z = y.sum(axis=0)[self.active_cols]
            t_active = _cho_solve(self.g_cholesky, z)
            t = np.zeros(x.shape[1])
            t[self.active_cols] = t_active
            y = y - self._row_inverse(np.broadcast_to(t, x.shape))
        return y / self.n

    def kernel_inverse_apply(self, x) -> np.ndarray:
        """``A^{-1} x`` for an r x s array ``x``."""
        x = np.asarray(x, dtype=np.float64)
        if self.transposed:
            return self._kernel_inverse_internal(x.T).T
        return self._kernel_inverse_internal(x)

    def _a_inv_e(self) -> np.ndarray:
        if self._ae is None:
            object.__setattr__(self, "_ae", self.kernel_inverse_apply(np.ones(self.shape)))
        return self._ae

    def covariance_apply(self, x) -> np.ndarray:
        """``Cov x`` with ``Cov = A^-1 - A^-1 e e^T A^-1 / (e^T A^-1 e)``."""
        x = np.asarray(x, dtype=np.float64)
        ae = self._a_inv_e()
        return self.kernel_inverse_apply(x) - ae * ((ae * x).sum() / ae.sum())

    def quadratic(self, x, y=None) -> float:
        """``x^T Cov y``."""
        y = x if y is None else y
        return float((np.asarray(x) * self.covariance_apply(y)).sum())

    def dense_covariance(self) -> np.ndarray:
        """Full (rs x rs) covariance, row-major cell order; for small tables."""
        r, s = self.shape
        out = np.empty((r * s, r * s))
        basis = np.zeros((r, s))
        for k in range(r * s):
            basis.flat[k] = 1.0
            out[:, k] = self.covariance_apply(basis).ravel()
            basis.flat[k] = 0.0
        return out


def _cho_solve(chol: np.ndarray, b: np.ndarray) -> np.ndarray:
    from scipy.linalg import solve_triangular

    y = solve_triangular(chol, b, lower=True)
    return solve_triangular(chol.T, y, lower=False)


def covariance_general(table: CountTable, mle: MleEstimate) -> CovarianceModel:
    """Structured covariance for arbitrary missingness.

    Only the s x s matrix ``G_mn = rho_?n d_mn + F_+mn`` is formed and factored
    (restricted to columns with missing-row counts), costing O(s^2 r + s^3)
    with the orientation chosen so that s <= r.
    """
    _require_positive_cells(table)
    co = rho_coefficients(table, mle)
    l = log_ratios(mle.pi_hat)
    transposed = table.s > table.r
    if transposed:
        co = co.transpose()
    rho = co.rho
    w_row = co.inv_rho_row
    active = np.flatnonzero(co.inv_rho_col > 0)
    chol = None
    if active.size:
        scale = w_row / (1.0 + rho.sum(axis=1) * w_row)
        ra = rho[:, active]
        # F_+mn = d_mn sum_i rho_im - sum_i rho_im rho_in / (rho_i? + rho_i+)
        g = np.diag(ra.sum(axis=0) + 1.0 / co.inv_rho_col[active]) - (ra * scale[:, None]).T @ ra
        try:
            chol = np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise SingularMatrixError("Woodbury capacitance matrix G is not positive definite") from None
    return CovarianceModel(table.n, co, l, transposed, active, chol)


def variance_general(table: CountTable, mle: MleEstimate, cov: CovarianceModel | None = None) -> float:
    """``l^T A^-1 l - (l^T A^-1 e)^2 / (e^T A^-1 e)`` with ``l`` the log-ratios."""
    if cov is None:
        cov = covariance_general(table, mle)
    l = cov.log_ratios
    al = cov.kernel_inverse_apply(l)
    ae = cov._a_inv_e()
    val = (l * al).sum() - (l * ae).sum() ** 2 / ae.sum()
    return float(max(val, 0.0))


def mean_leading(mle: MleEstimate) -> float:
    """Leading-order posterior mean ``I(pi_hat)``."""
    return mutual_information(mle.pi_hat)


def leading_moments(table: CountTable, tol: float = 1e-10, max_iter: int = 10_000) -> tuple[float, float]:
    """Leading-order (mean, variance), using the closed forms when possible."""
    has_row = np.any(table.row_missing > 0)
    has_col = np.any(table.col_missing > 0)
    if has_row and has_col:
        mle = em_mle(table, tol=tol, max_iter=max_iter)
        return mean_leading(mle), variance_general(table, mle)
    mle = mle_one_side(table)
    return mean_leading(mle), variance_one_side(table, mle)


def hessian_quadratic(table: CountTable, pi: np.ndarray, v: np.ndarray) -> float:
    """``v^T H v`` of the negative log-likelihood at ``pi``."""
    return float(
        (table.counts * v * v / (pi * pi)).sum()
        + (table.row_missing * v.sum(axis=1) ** 2 / pi.sum(axis=1) ** 2).sum()
        + (table.col_missing * v.sum(axis=0) ** 2 / pi.sum(axis=0) ** 2).sum()
    )
