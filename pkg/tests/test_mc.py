import math

import numpy as np
import pytest

from bayesmi import mc, moments
from bayesmi.errors import InputError, UnsupportedInputError
from bayesmi.tables import CountTable


def _mean_se(x, axis=0):
    return x.mean(axis=axis), x.std(axis=axis, ddof=1) / math.sqrt(x.shape[axis])


@pytest.mark.parametrize("alphas", [(1, 1, 1, 1), (40, 10, 20, 80)])
def test_dirichlet_means(alphas):
    a = np.array(alphas, float)
    x = mc.sample_dirichlet(a, seed=3, size=100_000)
    m, se = _mean_se(x)
    assert np.all(np.abs(m - a / a.sum()) <= 3 * se)
    np.testing.assert_allclose(x.sum(axis=1), 1.0, atol=1e-12)


def test_dirichlet_concentrates_with_dirichlet_covariance():
    a = np.array([1e6, 2e6, 3e6, 4e6])
    x = mc.sample_dirichlet(a, seed=4, size=200_000)
    p = a / a.sum()
    ref = (np.diag(p) - np.outer(p, p)) / (a.sum() + 1)
    np.testing.assert_allclose(np.cov(x.T), ref, rtol=0.02, atol=1e-3 * np.abs(ref).max())


def test_dirichlet_rejects_nonpositive():
    with pytest.raises(InputError):
        mc.sample_dirichlet([1.0, 0.0], seed=0)
    assert mc.sample_dirichlet([2.0, 3.0], seed=0).shape == (2,)


def test_mc_mean_uniform_table():
    t = CountTable(np.full((2, 2), 25.0))
    res = mc.mi_posterior_mc(t, 300_000, seed=1)
    assert abs(res.mean - moments.mean_exact(t)) <= 3 * res.se["mean"]


def test_histogram_and_support():
    t = CountTable.parse("40,10;20,80")
    res = mc.mi_posterior_mc(t, 100_000, seed=2, bins=50)
    assert res.histogram_mass.sum() == pytest.approx(1.0, abs=1e-12)
    assert res.sorted_samples.max() <= t.i_max + 1e-12
    assert 0 <= res.mean <= t.i_max
    assert np.all(np.diff(res.sorted_samples) >= 0)
    # density integrates to one
    assert (res.histogram_density * np.diff(res.histogram_edges)).sum() == pytest.approx(1.0)


def test_boundaries():
    t = CountTable.parse("3,4;5,6")
    with pytest.raises(InputError):
        mc.mi_posterior_mc(t, 0, seed=0)
    res = mc.mi_posterior_mc(t, 1, seed=0)
    assert "degenerate" in res.flags and res.sample_count == 1
    with pytest.raises(UnsupportedInputError):
        mc.mi_posterior_mc(CountTable.parse("3,4;5,6", row_missing=[1, 0]), 10, seed=0)


def test_reproducible_across_workers_and_runs():
    t = CountTable.parse("4,6,2;3,9,7")
    a = mc.mi_posterior_mc(t, 150_000, seed=9, workers=1)
    b = mc.mi_posterior_mc(t, 150_000, seed=9, workers=4)
    c = mc.mi_posterior_mc(t, 150_000, seed=9, workers=2)
    for other in (b, c):
        assert np.array_equal(a.sorted_samples, other.sorted_samples)
        assert a.to_dict() == other.to_dict()
    assert mc.mi_posterior_mc(t, 150_000, seed=10).mean != a.mean


def test_se_shrinks_with_samples():
    t = CountTable.parse("8,2;4,16")
    small = mc.mi_posterior_mc(t, 20_000, seed=1)
    big = mc.mi_posterior_mc(t, 2_000_000, seed=1)
    ratio = small.se["mean"] / big.se["mean"]
    assert 6 < ratio < 16  # sqrt(100) = 10
    assert abs(big.mean - moments.mean_exact(t)) <= 3 * big.se["mean"]


def test_tail_probe_dependent_is_inconclusive():
    probe = mc.tail_exponent_probe(CountTable.parse("40,10;20,80"), 200_000, seed=1)
    assert not probe.conclusive


def test_tail_probe_independent_small():
    probe = mc.tail_exponent_probe(CountTable(np.full((2, 2), 10.0)), 1_000_000, seed=1)
    assert probe.conclusive
    assert probe.exponent == pytest.approx(-0.5, abs=0.15)


def test_incomplete_sampler_one_side_and_gibbs_agree():
    # one side only: exact factorized sampler versus the augmentation sampler run on the same target
    t = CountTable(np.array([[30.0, 10.0], [12.0, 40.0]]), row_missing=np.array([10.0, 8.0]))
    exact = mc.sample_incomplete_posterior(t, 200_000, seed=1)
    gibbs = mc._gibbs_chains(t, 200_000, seed=2, chains=2000, burn_in=200)
    assert gibbs.mean() == pytest.approx(exact.mean(), rel=0.02)
    assert gibbs.var() == pytest.approx(exact.var(), rel=0.05)


def test_incomplete_sampler_limits():
    with pytest.raises(UnsupportedInputError):
        mc.sample_incomplete_posterior(CountTable(np.ones((4, 3))), 10, seed=0)


def test_csv_exports(tmp_path):
    res = mc.mi_posterior_mc(CountTable.parse("4,6;3,9"), 10_000, seed=1, bins=20)
    mc.write_histogram_csv(tmp_path / "h.csv", res)
    mc.write_cdf_csv(tmp_path / "c.csv", res, points=11)
    assert (tmp_path / "h.csv").read_text().splitlines()[0] == "x,density"
    rows = (tmp_path / "c.csv").read_text().splitlines()
    assert rows[0] == "x,cumulative" and rows[-1].endswith(",1.0")
