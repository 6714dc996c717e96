import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bayesmi import dataio, filters, moments
from bayesmi.tables import CountTable

tables = st.integers(2, 3).flatmap(
    lambda r: arrays(np.float64, (r, 2), elements=st.integers(0, 40).map(float))
).filter(lambda a: a.sum() > 0)


def test_config_validation():
    with pytest.raises(ValueError):
        filters.FilterConfig(epsilon=0)
    with pytest.raises(ValueError):
        filters.FilterConfig(kind="XF")
    with pytest.raises(ValueError):
        filters.FilterConfig(p_bar=1.0)
    c = filters.FilterConfig()
    assert (c.epsilon, c.p_bar, c.family) == (0.003, 0.95, "beta")


def test_dependent_attribute_included_by_ff():
    d = filters.decide(CountTable.parse("50,0;0,50"), filters.FilterConfig("FF"))
    assert d.include and d.statistic > 0.999


def test_independent_attribute_discarded_by_bf():
    d = filters.decide(CountTable.parse("250,250;250,250"), filters.FilterConfig("BF"))
    assert not d.include and d.statistic > 0.95


def test_f_and_ff_can_disagree():
    # small n: empirical MI a little above eps but posterior mass above eps is not decisive
    t = CountTable.parse("12,8;8,12")
    f = filters.decide(t, filters.FilterConfig("F"))
    ff = filters.decide(t, filters.FilterConfig("FF"))
    assert f.include and not ff.include
    assert f.statistic > 0.003 and ff.statistic <= 0.95


def test_missing_attribute_values_use_leading_order():
    t = CountTable.parse("30,5;5,30", col_missing=[6, 4])
    d = filters.decide(t, filters.FilterConfig("FF"))
    assert d.include
    assert not math.isnan(d.mean)


def test_select_and_ordering():
    tabs = {"a": CountTable.parse("50,0;0,50"), "b": CountTable.parse("300,300;300,300"), "c": CountTable.parse("40,5;6,38")}
    assert filters.select(tabs, filters.FilterConfig("FF")) == ["a", "c"]
    assert filters.select([], filters.FilterConfig("FF")) == []
    with pytest.raises(ValueError):
        filters.select([CountTable.parse("1,2;3,4"), CountTable.parse("1,2,3;3,4,5")])


def test_all_independent_large_n_ff_selects_nothing():
    picks = 0
    for seed in range(10):
        spec = dataio.SyntheticSpec(3, 2, 4000, independent=True, seed=seed)
        picks += len(filters.select([dataio.generate_table(spec)], filters.FilterConfig("FF")))
    assert picks == 0


def test_ff_equivalent_threshold():
    assert filters.ff_equivalent_threshold(0.0, 0.003) == 0.003
    assert filters.ff_equivalent_threshold(2.5e-5, 0.003) == pytest.approx(0.013)
    s = moments.summarize(CountTable.parse("40,10;20,80"))
    assert filters.ff_equivalent_threshold(s, 0.003) == pytest.approx(0.003 + 2 * math.sqrt(s.var_order2))


def test_gaussian_ff_matches_adapted_f():
    rng = np.random.default_rng(0)
    agree = total = 0
    for _ in range(400):
        t = CountTable(rng.integers(1, 30, size=(2, 2)).astype(float))
        pt = t.with_prior(1.0)
        s = moments.summarize(pt)
        eps2 = filters.ff_equivalent_threshold(s, 0.003)
        if abs(moments.empirical_mi(pt) - eps2) <= 0.1 * math.sqrt(s.variance):
            continue
        total += 1
        ff = filters.decide(t, filters.FilterConfig("FF", p_bar=0.977, family="gaussian")).include
        f = filters.decide(t, filters.FilterConfig("F", epsilon=eps2)).include
        agree += ff == f
    assert total > 200 and agree / total >= 0.95


def test_decision_log(tmp_path):
    ds = [filters.decide(CountTable.parse("5,1;1,5"), filters.FilterConfig(k), "x") for k in filters.KINDS]
    filters.write_decision_log(tmp_path / "d.csv", ds)
    rows = (tmp_path / "d.csv").read_text().splitlines()
    assert rows[0] == "attribute,kind,statistic,verdict" and len(rows) == 4


def test_large_n_convergence_to_truth():
    dep = (0.3, 0.2, 0.2, 0.3)  # I ~ 0.02 > eps
    indep = (0.25, 0.25, 0.25, 0.25)
    for pi, truth in ((dep, True), (indep, False)):
        t = dataio.generate_table(dataio.SyntheticSpec(2, 2, 200_000, pi=pi, seed=1))
        for k in filters.KINDS:
            assert filters.decide(t, filters.FilterConfig(k)).include == truth


@given(tables, st.floats(0.5, 0.98), st.floats(0.5, 0.98))
def test_monotone_in_p_bar(c, p1, p2):
    lo, hi = sorted((p1, p2))
    t = CountTable(c)
    ff_hi = filters.decide(t, filters.FilterConfig("FF", p_bar=hi)).include
    ff_lo = filters.decide(t, filters.FilterConfig("FF", p_bar=lo)).include
    assert ff_lo or not ff_hi
    bf_hi = filters.decide(t, filters.FilterConfig("BF", p_bar=hi)).include
    bf_lo = filters.decide(t, filters.FilterConfig("BF", p_bar=lo)).include
    assert bf_hi or not bf_lo


@given(tables, st.floats(1e-4, 0.05), st.floats(1e-4, 0.05))
def test_f_shrinks_with_epsilon(c, e1, e2):
    lo, hi = sorted((e1, e2))
    t = CountTable(c)
    assert filters.decide(t, filters.FilterConfig("F", epsilon=lo)).include or not \
        filters.decide(t, filters.FilterConfig("F", epsilon=hi)).include


@given(tables, st.sampled_from(filters.KINDS))
def test_deterministic(c, kind):
    t = CountTable(c)
    assert filters.decide(t, filters.FilterConfig(kind)) == filters.decide(t, filters.FilterConfig(kind))


def test_boundary_mean_under_missing_data_falls_back_to_gaussian():
    # MLE exactly independent: leading-order mean 0 with positive variance
    t = CountTable.parse("2,4;3,6", row_missing=[2, 3], col_missing=[5, 10])
    for kind in ("FF", "BF"):
        d = filters.decide(t, filters.FilterConfig(kind, prior=0.0))
        assert d.family == "gaussian" and "fallback-from-beta" in d.notes
    assert not filters.decide(t, filters.FilterConfig("FF", prior=0.0)).include
