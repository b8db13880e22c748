import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wristmatch.matching import (GalleryError, GalleryFormatError, GalleryModel, ScoreTable,
                                 TrainingError, match_probe, nipals, pls_train, svm_train,
                                 train_gallery)
from wristmatch.matching.pls import standardize


def ols_slope(x, y):
    """Independent oracle: closed-form simple regression slope."""
    xc = x - x.mean()
    return float(xc @ (y - y.mean()) / (xc @ xc))


def test_single_predictor_pls_equals_ols():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(5, 40))
        x = rng.normal(size=n) * rng.uniform(0.1, 10)
        y = 3 * rng.normal() * x + rng.normal(size=n)
        m = pls_train(x[:, None], y, k=1)
        ref = ols_slope(x, y)
        assert abs(m.beta[0] - ref) <= 1e-10 * abs(ref)


def test_full_rank_pls_matches_least_squares():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 4))
    y = X @ np.array([1.0, -2.0, 0.5, 3.0]) + 0.7
    m = pls_train(X, y, k=4)
    resid = X @ m.beta + m.intercept - y
    assert np.max(np.abs(resid)) < 1e-8
    A = np.column_stack([X, np.ones(len(X))])
    coef = np.linalg.lstsq(A, y, rcond=None)[0]
    np.testing.assert_allclose(m.beta, coef[:4], atol=1e-8)


def test_prediction_at_mean_is_mean_label():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(25, 12))
    y = np.where(rng.random(25) < 0.3, 1.0, -1.0)
    m = pls_train(X, y, k=5)
    assert abs(m.score(X.mean(axis=0)) - y.mean()) < 1e-12


def test_nipals_scores_orthogonal():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 60))
    y = rng.normal(size=40)
    Xs = (X - X.mean(0)) / X.std(0, ddof=1)
    ys = (y - y.mean()) / y.std(ddof=1)
    s = nipals(Xs, ys, 5)
    G = s.T.T @ s.T
    off = G - np.diag(np.diag(G))
    assert np.max(np.abs(off)) <= 1e-8 * np.max(np.diag(G))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-5, 5), st.floats(0.2, 5))
def test_pls_model_is_affine(seed, shift, gain):
    # scores of raw vectors equal scores of their standardized form
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(12, 6)) * gain + shift
    y = np.where(np.arange(12) < 4, 1.0, -1.0)
    m = pls_train(X, y, k=3)
    a, b = rng.normal(size=6), rng.normal(size=6)
    lam = rng.uniform(-2, 2)
    lhs = m.score(lam * a + (1 - lam) * b)
    rhs = lam * m.score(a) + (1 - lam) * m.score(b)
    assert abs(lhs - rhs) < 1e-9 * (1 + abs(lhs))


def test_pls_rank_exhaustion_warns_and_truncates():
    X = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0], [4.0, 8.0]])
    y = np.array([1.0, -1.0, 1.0, -1.0])
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        m = pls_train(X, y, k=3)
    assert m.components == 1
    assert any("rank" in str(x.message) for x in w)


def test_pls_errors():
    with pytest.raises(TrainingError):
        pls_train(np.ones((4, 2)), np.ones(4))
    with pytest.raises(TrainingError):
        pls_train(np.ones((4, 2)), np.ones(3))
    m = pls_train(np.random.default_rng(0).normal(size=(6, 3)), [1, 1, -1, -1, -1, -1], k=2)
    with pytest.raises(ValueError):
        m.score(np.ones(4))


def test_svm_three_points_hand_solution():
    # x = 0 negative, 1 and 2 positive: the margin sits on 0 and 1,
    # so w = 2, b = -1 (alpha = 2 on each support vector)
    m = svm_train(np.array([[0.0], [1.0], [2.0]]), [-1, 1, 1], C=10.0)
    assert abs(m.weights[0] - 2.0) < 1e-6
    assert abs(m.bias + 1.0) < 1e-6


def test_svm_agrees_with_reference_solver():
    from sklearn.svm import SVC
    rng = np.random.default_rng(4)
    X = np.vstack([rng.normal(size=(20, 5)) + 1.0, rng.normal(size=(25, 5)) - 1.0])
    y = np.r_[np.ones(20), -np.ones(25)]
    for C in (0.05, 1.0):
        m = svm_train(X, y, C=C)
        ref = SVC(kernel="linear", C=C, tol=1e-10).fit(X, y)
        np.testing.assert_allclose(m.weights, ref.coef_[0], atol=1e-4)
        assert abs(m.bias - ref.intercept_[0]) < 1e-3


def test_svm_separable_margin():
    rng = np.random.default_rng(5)
    X = np.vstack([rng.normal(size=(15, 3)) + 4, rng.normal(size=(15, 3)) - 4])
    y = np.r_[np.ones(15), -np.ones(15)]
    m = svm_train(X, y, C=1e4)
    assert np.all(y * m.decision(X) >= 1 - 1e-6)


def test_svm_scaling_relation():
    # (cX, C / c^2) has solution (w / c, b)
    rng = np.random.default_rng(6)
    X = rng.normal(size=(30, 4))
    y = np.where(X[:, 0] + 0.3 * rng.normal(size=30) > 0, 1.0, -1.0)
    m1 = svm_train(X, y, C=1.0)
    m2 = svm_train(2 * X, y, C=0.25)
    np.testing.assert_allclose(m2.weights, m1.weights / 2, atol=1e-6)
    assert abs(m2.bias - m1.bias) < 1e-6


def test_svm_errors():
    with pytest.raises(TrainingError):
        svm_train(np.ones((3, 2)), [1, 1, 1])
    with pytest.raises(TrainingError):
        svm_train(np.eye(2), [1, -1], C=0)


def make_samples(n_wrists=4, per=3, d=40, seed=0):
    rng = np.random.default_rng(seed)
    centres = rng.normal(size=(n_wrists, d)) * 3
    out = []
    for w in range(n_wrists):
        for _ in range(per):
            out.append(("w%d" % w, {"ROI#1": centres[w] + rng.normal(size=d),
                                    "ROI#2": centres[w] + rng.normal(size=d)}))
    return out, centres


def test_gallery_counts_and_meta():
    samples, _ = make_samples()
    g = train_gallery(samples, k=3)
    assert g.wrist_ids == ("w0", "w1", "w2", "w3")
    assert {k: len(v) for k, v in g.classifiers.items()} == {
        (v, m): 4 for v in ("ROI#1", "ROI#2") for m in ("PLS", "SVM")}
    assert g.meta["positives"] == {w: 3 for w in g.wrist_ids}
    assert g.meta["negatives"] == {w: 9 for w in g.wrist_ids}


def test_gallery_identifies_class_centres():
    samples, centres = make_samples()
    g = train_gallery(samples, k=3)
    for w, c in enumerate(centres):
        tables = match_probe(g, {"ROI#1": c, "ROI#2": c})
        assert list(tables) == ["RS_PLS1", "RS_PLS2", "RS_SVM1", "RS_SVM2"]
        for t in tables.values():
            assert t.sorted_ids[0] == "w%d" % w


def test_gallery_independent_of_wrist_order():
    samples, _ = make_samples()
    by_wrist = {}
    for s in samples:
        by_wrist.setdefault(s[0], []).append(s)
    shuffled = [s for w in ("w2", "w0", "w3", "w1") for s in by_wrist[w]]
    assert train_gallery(samples, k=3).to_bytes() == train_gallery(shuffled, k=3).to_bytes()


def test_gallery_round_trip_bit_exact(tmp_path):
    samples, _ = make_samples()
    g = train_gallery(samples, k=3)
    g = GalleryModel(g.wrist_ids, g.variants, g.dim, g.classifiers, g.meta, {"note": b"\x00abc"})
    g.save(tmp_path / "g.model")
    h = GalleryModel.load(tmp_path / "g.model")
    assert h.to_bytes() == g.to_bytes()
    assert h.sections == {"note": b"\x00abc"}
    for key in g.classifiers:
        for a, b in zip(g.classifiers[key], h.classifiers[key]):
            assert np.array_equal(a.weights, b.weights) and a.offset == b.offset


def test_gallery_rejects_bad_input():
    samples, _ = make_samples()
    g = train_gallery(samples, k=2)
    with pytest.raises(ValueError):
        match_probe(g, {"ROI#1": np.ones(41), "ROI#2": np.ones(41)})
    with pytest.raises(GalleryError, match="at least 2"):
        train_gallery([s for s in samples if s[0] == "w0"])
    with pytest.raises(GalleryError, match="w1"):
        train_gallery(samples[:3] + [("w1", {"ROI#1": np.ones(40)})])
    with pytest.raises(GalleryFormatError):
        GalleryModel.from_bytes(b"nonsense" * 4)


def test_score_table_stable_order():
    t = ScoreTable("X", ("a", "b", "c", "d"), np.array([0.5, 1.0, 0.5, -1.0]))
    assert t.sorted_ids == ("b", "a", "c", "d")
    assert t.rank_of("c") == 3


def test_standardize_zero_variance():
    mean, scale = standardize(np.array([[1.0, 2.0], [1.0, 4.0]]))
    assert scale[0] == 1.0 and mean[1] == 3.0
