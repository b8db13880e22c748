import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wristmatch.matching import ScoreTable
from wristmatch.metarec import (DegenerateFitError, WeibullFit, fit_tail, meta_select, tail_length,
                                weibull_cdf, weibull_fit)


def inverse_cdf_grid(a, b, n=1000):
    p = (np.arange(1, n + 1) - 0.5) / n
    return a * (-np.log1p(-p)) ** (1.0 / b)


@pytest.mark.parametrize("a,b", [(2.0, 1.5), (1.0, 1.0), (5.0, 0.8)])
def test_weibull_recovers_grid_parameters(a, b):
    f = weibull_fit(inverse_cdf_grid(a, b))
    assert abs(f.a - a) / a < 0.02
    assert abs(f.b - b) / b < 0.02


@pytest.mark.parametrize("a,b", [(2.0, 1.5), (1.0, 1.0), (5.0, 0.8), (0.3, 4.0)])
def test_weibull_cdf_identities(a, b):
    f = WeibullFit(a, b)
    assert abs(weibull_cdf(a, f) - (1 - np.exp(-1))) < 1e-12
    assert abs(weibull_cdf(a * np.log(2) ** (1 / b), f) - 0.5) < 1e-12
    assert weibull_cdf(-1.0, f) == 0.0


def test_cdf_respects_shift():
    f = WeibullFit(2.0, 1.5, shift=-3.0)
    assert abs(weibull_cdf(-1.0, f) - (1 - np.exp(-1))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.01, 100))
def test_weibull_fit_scale_equivariant(seed, c):
    x = np.random.default_rng(seed).weibull(1.7, size=30) + 0.05
    f1, f2 = weibull_fit(x), weibull_fit(c * x)
    assert abs(f2.a - c * f1.a) <= 1e-8 * c * f1.a
    assert abs(f2.b - f1.b) <= 1e-8 * f1.b


def test_weibull_fit_errors():
    with pytest.raises(DegenerateFitError):
        weibull_fit([1.0, 2.0])
    with pytest.raises(DegenerateFitError):
        weibull_fit([1.0, 1.0, 1.0, 1.0])
    with pytest.raises(DegenerateFitError):
        weibull_fit([1.0, 2.0, 0.0])


def test_tail_length_and_sample_count():
    assert tail_length(20, 0.5) == 10
    assert tail_length(20, 0.1) == 4        # raised to the minimum
    assert tail_length(3, 0.5) == 3
    s = np.sort(np.random.default_rng(0).normal(size=20))[::-1]
    assert fit_tail(s, 0.5).sample_count == 9     # ranks 2..10


def table(name, scores):
    return ScoreTable(name, tuple("w%02d" % i for i in range(len(scores))), np.asarray(scores, float))


def test_outlier_system_is_selected():
    rng = np.random.default_rng(0)
    hits = 0
    for case in range(100):
        k = int(rng.integers(2, 5))
        m = int(rng.integers(15, 40))
        target = int(rng.integers(k))
        tabs = []
        for s in range(k):
            mu, sd = rng.normal(), rng.uniform(0.1, 2)
            sc = rng.normal(mu, sd, size=m)
            if s == target:
                sc[rng.integers(m)] = sc.max() + 100 * sd
            tabs.append(table("S%d" % s, sc))
        hits += meta_select(tabs).chosen == target
    assert hits == 100


def test_identical_systems_pick_the_first():
    sc = np.random.default_rng(1).normal(size=25)
    d = meta_select([table("A", sc), table("B", sc.copy()), table("C", sc.copy())])
    assert d.chosen == 0 and d.system == "A"


def test_selection_returns_table_untouched():
    rng = np.random.default_rng(2)
    tabs = [table("A", rng.normal(size=20)), table("B", rng.normal(size=20))]
    before = [t.scores.copy() for t in tabs]
    for frac in (0.5, 0.1, 1.0):
        d = meta_select(tabs, frac)
        assert d.table is tabs[d.chosen]
    for t, b in zip(tabs, before):
        assert np.array_equal(t.scores, b)


def test_degenerate_systems_are_skipped():
    rng = np.random.default_rng(3)
    flat = table("flat", np.r_[2.0, np.zeros(19)])
    good = table("good", rng.normal(size=20))
    d = meta_select([flat, good])
    assert d.chosen == 1 and d.fits[0] is None and np.isnan(d.cdf[0])
    assert meta_select([flat, flat]).chosen == 0


def test_decision_json_record():
    rng = np.random.default_rng(4)
    tabs = [table("A", rng.normal(size=12)), table("B", rng.normal(size=12))]
    rec = json.loads(meta_select(tabs).to_json("probe1"))
    assert rec["probe"] == "probe1" and rec["chosen"] in ("A", "B")
    assert set(rec["cdf"]) == {"A", "B"} and len(rec["top"]) == 10
