"""Acceptance criteria, each run at its stated tolerance and time budget.

The terminal summary prints one PASS/FAIL line per criterion.
"""
import time

import numpy as np
import pytest

from oracles import bellman_ford_many, random_mask
from wristmatch.config import RunConfig
from wristmatch.evaluation import run_experiment, synth_dataset
from wristmatch.features import (DSIFT_DIM, FEATURE_DIM, GABOR_DIM, LBP_DIM, extract_features)
from wristmatch.features.lbp import RIU2, U2, transitions
from wristmatch.matching import ScoreTable, nipals, pls_train
from wristmatch.metarec import WeibullFit, meta_select, weibull_cdf, weibull_fit
from wristmatch.roi import PathTable, RoiImage, WristGraph, boundaries, cpd_affine_register

BENCH = dict(n=20, images_per_id=6, gallery_per_id=4, difficulty=0.2, seed=0)


def test_absolute_accuracies_not_targets(criterion):
    with criterion("absolute accuracies of the original database are not acceptance targets") as c:
        c.detail = "informational: the database is not distributed; the suites below substitute"


def test_shortest_path_oracle(criterion):
    with criterion("shortest-path costs equal Bellman-Ford on 200 random masks, < 60 s") as c:
        rng = np.random.default_rng(2024)
        t0 = time.perf_counter()
        pairs = 0
        for _ in range(200):
            h, w = int(rng.integers(2, 41)), int(rng.integers(1, 21))
            mask = random_mask(rng, h, w)
            gx = rng.random((h, w))
            g = WristGraph.from_mask(gx, mask)
            b = boundaries(mask)
            table = PathTable(g)
            ref = bellman_ford_many(mask, gx, list(b.b_up))
            for s in b.b_up:
                for f in b.b_down:
                    assert table.cost(g.node(*s), g.node(*f)) == ref[s][f]
                    pairs += 1
        dt = time.perf_counter() - t0
        c.detail = "%d pairs exact, %.1f s" % (pairs, dt)
        assert dt < 60


def rotate(code, k, D=8):
    return ((code >> k) | (code << (D - k))) & ((1 << D) - 1)


def test_lbp_exhaustive(criterion):
    with criterion("LBP riu2 has 10 rotation-invariant classes, u2 has 59 with catch-all iff > 2 transitions") as c:
        t0 = time.perf_counter()
        codes = range(256)
        assert len({int(RIU2[x]) for x in codes}) == 10
        assert all(RIU2[x] == RIU2[rotate(x, k)] for x in codes for k in range(8))
        assert len({int(U2[x]) for x in codes}) == 59
        catch = int(U2[0b01010101])
        assert all((U2[x] == catch) == (transitions(x) > 2) for x in codes)
        dt = time.perf_counter() - t0
        c.detail = "%.3f s" % dt
        assert dt < 1


def test_feature_dimensions(criterion):
    with criterion("feature segments 13074/2112/1280, total 16466, on 100 ROIs") as c:
        from scipy import ndimage
        rng = np.random.default_rng(7)
        for i in range(100):
            px = ndimage.gaussian_filter(rng.random((128, 80, 3)), (rng.uniform(0.5, 3),) * 2 + (0,))
            fv = extract_features(RoiImage(np.clip(px, 0, 1), ("ROI#1", "ROI#2")[i % 2]))
            assert fv.values.shape == (FEATURE_DIM,) == (16466,)
            assert [fv.segment(s).size for s in ("lbp", "gabor", "dsift")] == [13074, 2112, 1280]
        assert (LBP_DIM, GABOR_DIM, DSIFT_DIM) == (13074, 2112, 1280)
        c.detail = "100 vectors"


def test_pls_oracle(criterion):
    with criterion("single-predictor PLS equals OLS within 1e-10; NIPALS scores orthogonal within 1e-8, < 5 s") as c:
        t0 = time.perf_counter()
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(5, 60))
            x = rng.normal(size=n) * rng.uniform(0.1, 10) + rng.normal()
            y = rng.normal() * x + rng.normal(size=n) + rng.normal()
            xc = x - x.mean()
            ols = xc @ (y - y.mean()) / (xc @ xc)
            rel = abs(pls_train(x[:, None], y, k=1).beta[0] - ols) / abs(ols)
            worst = max(worst, rel)
        X = rng.normal(size=(50, 200))
        yv = np.where(rng.random(50) < 0.2, 1.0, -1.0)
        Xs = (X - X.mean(0)) / X.std(0, ddof=1)
        st = nipals(Xs, (yv - yv.mean()) / yv.std(ddof=1), 5)
        G = st.T.T @ st.T
        ortho = np.max(np.abs(G - np.diag(np.diag(G)))) / np.max(np.diag(G))
        dt = time.perf_counter() - t0
        c.detail = "max rel OLS gap %.1e, orthogonality %.1e, %.2f s" % (worst, ortho, dt)
        assert worst <= 1e-10 and ortho <= 1e-8 and dt < 5


def test_weibull_recovery(criterion):
    with criterion("Weibull MLE recovers (a, b) from 1000-point inverse-CDF grids within 2%, < 1 s") as c:
        t0 = time.perf_counter()
        errs = []
        p = (np.arange(1, 1001) - 0.5) / 1000
        for a, b in ((2, 1.5), (1, 1), (5, 0.8)):
            f = weibull_fit(a * (-np.log1p(-p)) ** (1 / b))
            errs.append(max(abs(f.a - a) / a, abs(f.b - b) / b))
        dt = time.perf_counter() - t0
        c.detail = "worst %.2f%%, %.3f s" % (100 * max(errs), dt)
        assert max(errs) < 0.02 and dt < 1


def test_weibull_identities(criterion):
    with criterion("F(a) = 1 - 1/e and F(median) = 0.5 within 1e-12") as c:
        worst = 0.0
        for a, b in ((2, 1.5), (1, 1), (5, 0.8), (0.7, 3.0)):
            f = WeibullFit(a, b)
            worst = max(worst, abs(weibull_cdf(a, f) - (1 - np.exp(-1))),
                        abs(weibull_cdf(a * np.log(2) ** (1 / b), f) - 0.5))
        c.detail = "max error %.1e" % worst
        assert worst <= 1e-12


def test_cpd_sanity(criterion):
    with criterion("CPD identity within 1e-6; scale 2, shear 0.3, shift (5, -3) within 1e-3, < 5 s") as c:
        t0 = time.perf_counter()
        rng = np.random.default_rng(5)
        X = rng.normal(size=(100, 2)) * 10
        T0 = cpd_affine_register(X, X)
        e0 = max(np.abs(T0.A - np.eye(2)).max(), np.abs(T0.t).max())
        A = np.array([[2.0, 0.3], [0.0, 2.0]])
        t = np.array([5.0, -3.0])
        T1 = cpd_affine_register(X, X @ A.T + t)
        e1 = max(np.abs(T1.A - A).max(), np.abs(T1.t - t).max())
        dt = time.perf_counter() - t0
        c.detail = "identity %.1e, affine %.1e, %.2f s" % (e0, e1, dt)
        assert e0 <= 1e-6 and e1 <= 1e-3 and dt < 5


def run_benchmark(root):
    t0 = time.perf_counter()
    ds = synth_dataset(BENCH["n"], BENCH["images_per_id"], BENCH["difficulty"], BENCH["seed"],
                       BENCH["gallery_per_id"])
    res = run_experiment(ds.write(root), RunConfig(seed=BENCH["seed"]))
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def benchmark(tmp_path_factory):
    return run_benchmark(tmp_path_factory.mktemp("bench"))


@pytest.mark.slow
def test_end_to_end_benchmark(criterion, benchmark):
    with criterion("synthetic benchmark: WMM rank-1 >= 0.90, CMC monotone, WMM >= min RS, < 10 min") as c:
        res, dt = benchmark
        r1 = res.report["rank1"]
        rs_min = min(r1[s] for s in ("RS_PLS1", "RS_PLS2", "RS_SVM1", "RS_SVM2"))
        c.detail = "WMM %.3f, min RS %.3f, %d probes, %.0f s on %d worker(s)" % (
            r1["WMM"], rs_min, len(res.report["probes"]), dt, res.config.workers)
        assert len(res.report["curves"]) == 7
        for v in res.report["curves"].values():
            assert np.all(np.diff(v) >= 0) and v[-1] == 1.0
        assert r1["WMM"] >= 0.90
        assert r1["WMM"] >= rs_min
        assert dt < 600


def test_meta_selection_outlier(criterion):
    with criterion("a 100-sigma tail outlier system is selected in 100/100 cases") as c:
        rng = np.random.default_rng(99)
        hits = 0
        for _ in range(100):
            k, m = int(rng.integers(2, 5)), int(rng.integers(10, 60))
            target = int(rng.integers(k))
            tabs = []
            for s in range(k):
                mu, sd = rng.normal(0, 3), rng.uniform(0.05, 3)
                sc = rng.normal(mu, sd, size=m)
                if s == target:
                    sc[rng.integers(m)] = mu + 100 * sd
                tabs.append(ScoreTable("S%d" % s, tuple("w%d" % i for i in range(m)), sc))
            hits += meta_select(tabs).chosen == target
        c.detail = "%d/100" % hits
        assert hits == 100


@pytest.mark.slow
def test_tail_fraction_sensitivity(criterion, benchmark):
    with criterion("tail 0.5 vs 0.1 changes only system choices, never a returned table") as c:
        res, _ = benchmark
        before = [{s: t.scores.copy() for s, t in tables.items()} for tables in res.tables]
        alt = res.reselect(0.1)
        changed = 0
        for tables, snap, d5, d1 in zip(res.tables, before, res.decisions, alt):
            for name in d5:
                for d in (d5[name], d1[name]):
                    assert d.table is tables[d.system]
                changed += d5[name].system != d1[name].system
            for s, t in tables.items():
                assert np.array_equal(t.scores, snap[s])
        c.detail = "%d of %d choices changed" % (changed, sum(len(d) for d in res.decisions))


@pytest.mark.slow
def test_determinism(criterion, benchmark, tmp_path):
    with criterion("two full pipeline runs with the same seed give byte-identical reports") as c:
        res, _ = benchmark
        again, dt = run_benchmark(tmp_path)
        a, b = res.report_bytes(), again.report_bytes()
        c.detail = "%d bytes, second run %.0f s" % (len(a), dt)
        assert a == b
