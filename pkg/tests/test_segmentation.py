import itertools

import numpy as np
import pytest

from wristmatch.segmentation import (FEATURE_DIM, SkinClassifier, TrainingError,
                                     describe_superpixels, plane_stack, segment, slic,
                                     superpixel_features, superpixel_stats,
                                     superpixel_targets, train_skin_classifier)
from wristmatch.segmentation.slic import SuperpixelLabeling, adjacency


def patch_image(rng, h=200, w=260):
    """Skin-coloured blob on a bluish background, with its true mask."""
    yy, xx = np.mgrid[:h, :w]
    cy, cx = h * rng.uniform(0.4, 0.6), w * rng.uniform(0.4, 0.6)
    ry, rx = h * rng.uniform(0.25, 0.35), w * rng.uniform(0.25, 0.35)
    mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    skin = np.array([0.85, 0.62, 0.5]) * rng.uniform(0.85, 1.1)
    bg = np.array([0.2, 0.35, 0.6]) * rng.uniform(0.8, 1.2)
    img = np.where(mask[..., None], skin, bg) + 0.02 * rng.standard_normal((h, w, 3))
    return np.clip(img, 0, 1), mask


@pytest.fixture(scope="module")
def trained():
    rng = np.random.default_rng(3)
    X, y = [], []
    for _ in range(4):
        img, mask = patch_image(rng)
        _, lab, feats = describe_superpixels(img)
        X.append(feats)
        y.append(superpixel_targets(lab, mask))
    return train_skin_classifier(np.concatenate(X), np.concatenate(y), tree_count=25, seed=1)


def test_uniform_image_k4_gives_quadrants():
    lab = slic(np.full((200, 200, 3), 0.6), k=4)
    sizes = lab.sizes()
    assert lab.count == 4
    n_over_k = 200 * 200 / 4
    assert np.all(sizes <= 2 * n_over_k) and np.all(sizes >= n_over_k / 2)


def two_means_oracle(values):
    """Exhaustive 2-means over a tiny set of pixel colours."""
    best = None
    n = len(values)
    for bits in itertools.product([0, 1], repeat=n):
        bits = np.array(bits)
        if bits.all() or not bits.any():
            continue
        cost = sum(((values[bits == g] - values[bits == g].mean(0)) ** 2).sum() for g in (0, 1))
        if best is None or cost < best[0] - 1e-12:
            best = (cost, bits)
    return best[1]


def test_two_tone_k2_matches_two_means():
    left, right = np.array([0.1, 0.3, 0.8]), np.array([0.9, 0.2, 0.1])
    img = np.zeros((3, 6, 3))
    img[:, :3] = left
    img[:, 3:] = right
    lab = slic(img, k=2)
    assert lab.count == 2
    # oracle on the 6 column colours (rows are identical)
    groups = two_means_oracle(img[0])
    oracle_means = sorted(tuple(img[0][groups == g].mean(0)) for g in (0, 1))
    got = sorted(tuple(img.reshape(-1, 3)[lab.labels.ravel() == g].mean(0)) for g in (0, 1))
    np.testing.assert_allclose(got, oracle_means, atol=1e-12)


def test_labeling_is_partition_with_contiguous_ids():
    rng = np.random.default_rng(0)
    img, _ = patch_image(rng)
    lab = slic(img, k=200)
    assert lab.sizes().sum() == img.shape[0] * img.shape[1]
    assert set(np.unique(lab.labels)) == set(range(lab.count))
    assert 160 <= lab.count <= 240
    for i, nb in enumerate(lab.adjacency):
        for j in nb:
            assert i in lab.adjacency[j]


def test_k_larger_than_pixels_is_error():
    with pytest.raises(ValueError):
        slic(np.zeros((3, 3, 3)), k=10)


def test_constant_image_features():
    img = np.full((40, 40, 3), 0.4)
    lab = slic(img, k=16)
    planes = plane_stack(img)
    feats = superpixel_features(lab, planes)
    assert feats.shape == (lab.count, FEATURE_DIM)
    assert np.allclose(feats[:, 1::2], 0.0, atol=1e-12)
    np.testing.assert_allclose(feats[:, 0:36:2], np.tile(planes[:18, 0, 0], (lab.count, 1)))


def test_two_pixel_mean_and_population_std():
    labels = np.zeros((1, 2), dtype=int)
    planes = np.array([[[0.0, 1.0]]])
    stats = superpixel_stats(labels, planes)
    assert stats[0, 0] == 0.5
    assert stats[0, 1] == 0.5


def test_feature_length_on_real_image():
    img, _ = patch_image(np.random.default_rng(5))
    _, lab, feats = describe_superpixels(img)
    assert feats.shape == (lab.count, 450)
    assert np.all(np.isfinite(feats))


def test_lone_superpixel_pads_with_itself():
    labels = np.zeros((4, 4), dtype=int)
    lab = SuperpixelLabeling(labels, 1, adjacency(labels))
    feats = superpixel_features(lab, np.random.default_rng(0).random((25, 4, 4)))
    np.testing.assert_array_equal(feats[0, 50:100], feats[0, :50])


def separable_set(rng, n=200, d=450):
    y = rng.integers(0, 2, n)
    X = rng.standard_normal((n, d))
    X[:, :10] += 10.0 * y[:, None]
    return X, y


def test_separable_oob_accuracy():
    X, y = separable_set(np.random.default_rng(0))
    clf = train_skin_classifier(X, y, tree_count=50, seed=0)
    assert clf.oob_accuracy >= 0.95
    assert all(int(t.feature.max()) < 450 for t in clf.trees)


def test_single_tree_vote():
    X, y = separable_set(np.random.default_rng(1))
    clf = train_skin_classifier(X, y, tree_count=1, seed=0)
    np.testing.assert_array_equal(clf.predict(X), clf.trees[0].predict(X) == 1)


def test_fixed_seed_is_deterministic():
    X, y = separable_set(np.random.default_rng(2))
    a = train_skin_classifier(X, y, tree_count=10, seed=7)
    b = train_skin_classifier(X.copy(), y.copy(), tree_count=10, seed=7)
    assert a.to_bytes() == b.to_bytes()
    np.testing.assert_array_equal(a.votes(X), b.votes(X))


def test_vote_invariant_to_tree_order():
    X, y = separable_set(np.random.default_rng(4))
    clf = train_skin_classifier(X, y, tree_count=9, seed=3)
    rev = SkinClassifier(clf.trees[::-1], clf.feature_dim)
    np.testing.assert_array_equal(clf.predict(X), rev.predict(X))


def test_single_class_is_error():
    with pytest.raises(TrainingError):
        train_skin_classifier(np.zeros((5, 450)), np.ones(5), tree_count=3)


def test_model_file_round_trip(tmp_path):
    X, y = separable_set(np.random.default_rng(6))
    clf = train_skin_classifier(X, y, tree_count=5, seed=0)
    clf.save(tmp_path / "skin.model")
    raw = (tmp_path / "skin.model").read_bytes()
    assert raw.startswith(b"WMSKIN")
    back = SkinClassifier.load(tmp_path / "skin.model")
    assert back.tree_count == 5
    np.testing.assert_array_equal(back.votes(X), clf.votes(X))


class _Constant:
    def __init__(self, value):
        self.value = value

    def predict(self, X):
        return np.full(len(X), self.value)


def test_all_skin_vote_gives_full_mask():
    img, _ = patch_image(np.random.default_rng(0))
    m = segment(img, _Constant(True))
    assert m.mask.all() and not m.empty


def test_no_skin_vote_gives_flagged_empty_mask():
    img, _ = patch_image(np.random.default_rng(0))
    m = segment(img, _Constant(False))
    assert m.empty and not m.mask.any()
    assert m.mask.shape == img.shape[:2]


def test_segmentation_iou_on_generator(trained):
    rng = np.random.default_rng(99)
    for _ in range(3):
        img, truth = patch_image(rng)
        m = segment(img, trained).mask
        iou = (m & truth).sum() / (m | truth).sum()
        assert iou >= 0.9
