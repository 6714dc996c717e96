import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bayesmi import missing, moments
from bayesmi.errors import ConvergenceError, UnsupportedInputError, ZeroCellError
from bayesmi.mc import sample_incomplete_posterior
from bayesmi.tables import CountTable
from oracles import dense_covariance, dense_covariance_mp, random_incomplete_table

shapes = st.tuples(st.integers(2, 4), st.integers(2, 4))


def _table(seed, r, s, both=True, miss_frac=0.3, n_complete=60):
    c, rm, cm = random_incomplete_table(np.random.default_rng(seed), r, s, n_complete, miss_frac, both)
    return CountTable(c, rm, cm)


def test_em_complete_data_is_immediate():
    t = CountTable.parse("3,5;7,2")
    mle = missing.em_mle(t)
    assert mle.iterations == 1
    np.testing.assert_allclose(mle.pi_hat, t.counts / t.n, atol=1e-16)


def test_one_side_closed_form_example():
    t = CountTable.parse("2,2;2,2", row_missing=[4, 0])
    np.testing.assert_allclose(missing.mle_one_side(t).pi_hat, [[1 / 3, 1 / 3], [1 / 6, 1 / 6]], atol=1e-15)
    np.testing.assert_allclose(missing.em_mle(t).pi_hat, [[1 / 3, 1 / 3], [1 / 6, 1 / 6]], atol=1e-12)
    assert missing.variance_one_side(t) == pytest.approx(0, abs=1e-15)


def test_one_side_rejects_both_sides():
    with pytest.raises(UnsupportedInputError):
        missing.mle_one_side(CountTable.parse("2,2;2,2", row_missing=[1, 0], col_missing=[0, 1]))


def test_zero_cells_rejected():
    t = CountTable.parse("0,2;2,2", row_missing=[1, 0])
    with pytest.raises(ZeroCellError):
        missing.em_mle(t)
    with pytest.raises(ZeroCellError):
        missing.variance_one_side(t)


def test_em_nonconvergence_carries_trace():
    t = _table(3, 3, 3, miss_frac=2.0)
    with pytest.raises(ConvergenceError) as exc:
        missing.em_mle(t, tol=1e-15, max_iter=3)
    assert len(exc.value.trace) == 4


def test_no_missing_reduces_to_complete_variance():
    t = CountTable.parse("40,10,7;20,80,12")
    st_ = moments.core_stats(t)
    ref = (st_.K - st_.J**2) / t.n
    mle = missing.em_mle(t)
    assert missing.variance_one_side(t, mle) == pytest.approx(ref, rel=1e-12)
    assert missing.variance_general(t, mle) == pytest.approx(ref, rel=1e-12)
    assert missing.mean_leading(mle) == pytest.approx(moments.empirical_mi(t), rel=1e-14)


def test_complete_covariance_is_dirichlet_form():
    t = CountTable.parse("4,9,2;6,3,8")
    mle = missing.em_mle(t)
    pi = mle.pi_hat.ravel()
    cov = missing.covariance_general(t, mle).dense_covariance()
    np.testing.assert_allclose(cov, (np.diag(pi) - np.outer(pi, pi)) / t.n, atol=1e-15)


@pytest.mark.parametrize("shape", [(2, 2), (3, 3), (4, 2), (2, 4), (4, 4)])
@pytest.mark.parametrize("seed", range(3))
def test_woodbury_matches_dense(shape, seed):
    t = _table(seed, *shape)
    mle = missing.em_mle(t)
    cov = missing.covariance_general(t, mle)
    ref = dense_covariance(t.counts, t.row_missing, t.col_missing, mle.pi_hat)
    got = cov.dense_covariance()
    scale = np.abs(ref).max()
    assert np.abs(got - ref).max() <= 1e-10 * scale
    assert cov.transposed == (shape[1] > shape[0])


@pytest.mark.parametrize("seed", range(2))
def test_woodbury_matches_high_precision_limit(seed):
    t = _table(10 + seed, 3, 3)
    mle = missing.em_mle(t)
    ref = dense_covariance_mp(t.counts, t.row_missing, t.col_missing, mle.pi_hat)
    got = missing.covariance_general(t, mle).dense_covariance()
    assert np.abs(got - ref).max() <= 1e-10 * np.abs(ref).max()


def test_covariance_rows_sum_to_zero():
    t = _table(4, 3, 4)
    cov = missing.covariance_general(t, missing.em_mle(t)).dense_covariance()
    assert np.abs(cov.sum(axis=1)).max() <= 1e-14 * np.abs(cov).max() * cov.shape[0]


def test_independent_mle_variance_vanishes():
    t = CountTable.parse("2,4;3,6", row_missing=[2, 3], col_missing=[5, 10])
    mle = missing.em_mle(t)
    assert missing.variance_general(t, mle) <= 1e-12
    assert missing.mean_leading(mle) <= 1e-12


def test_one_side_variance_against_posterior_sampling():
    # dependent 2x2 with 20% of units missing the column variable, n = 200
    t = CountTable(np.array([[56.0, 16.0], [24.0, 64.0]]), row_missing=np.array([22.0, 18.0]))
    draws = sample_incomplete_posterior(t, 400_000, seed=5)
    assert missing.variance_one_side(t) == pytest.approx(draws.var(), rel=0.10)


@given(st.integers(0, 10_000), shapes)
def test_one_side_paths_agree(seed, shape):
    t = _table(seed, *shape, both=False)
    mle = missing.mle_one_side(t)
    em = missing.em_mle(t)
    np.testing.assert_allclose(em.pi_hat, mle.pi_hat, atol=1e-10)
    v1 = missing.variance_one_side(t, mle)
    assert missing.variance_general(t, mle) == pytest.approx(v1, rel=1e-10, abs=1e-16)
    # symmetric orientation: only the column variable observed on the extra units
    tt = t.transpose()
    assert missing.variance_one_side(tt) == pytest.approx(v1, rel=1e-12, abs=1e-16)


@given(st.integers(0, 10_000), shapes)
def test_em_invariants(seed, shape):
    t = _table(seed, *shape)
    mle = missing.em_mle(t)
    assert np.all(mle.pi_hat > 0)
    assert abs(mle.pi_hat.sum() - 1) <= 1e-12
    assert np.all(np.diff(mle.loglik_trace) >= -1e-9)
    assert mle.final_residual <= 1e-10


@given(st.integers(0, 10_000), shapes)
def test_hessian_positive_definite(seed, shape):
    t = _table(seed, *shape)
    pi = missing.em_mle(t).pi_hat
    v = np.random.default_rng(seed).normal(size=shape)
    assert missing.hessian_quadratic(t, pi, v) > 0


@given(st.integers(0, 10_000), shapes)
def test_structured_inverse_solves_kernel(seed, shape):
    t = _table(seed, *shape)
    mle = missing.em_mle(t)
    cov = missing.covariance_general(t, mle)
    x = np.random.default_rng(seed).normal(size=shape)
    # apply A to A^{-1} x through the quadratic-form definition
    y = cov.kernel_inverse_apply(x)
    pi = mle.pi_hat
    h = t.counts * y / pi**2 + (t.row_missing * y.sum(1) / pi.sum(1) ** 2)[:, None] \
        + (t.col_missing * y.sum(0) / pi.sum(0) ** 2)[None, :]
    np.testing.assert_allclose(h, x, atol=1e-9 * np.abs(x).max())
