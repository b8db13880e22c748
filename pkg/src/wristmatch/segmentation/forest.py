"""Bagged ensemble of decision trees for skin/non-skin superpixels.

Trees are grown with scikit-learn's CART and then frozen into flat node
arrays; prediction and serialization only use those arrays.
"""
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.tree import DecisionTreeClassifier

MAGIC = b"WMSKIN\x00\x01"
FORMAT_VERSION = 1


class TrainingError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Tree:
    """Flat binary tree; ``left[i] == -1`` marks a leaf voting ``vote[i]``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    vote: np.ndarray

    def predict(self, X):
        X = np.asarray(X, dtype=np.float32).astype(np.float64)
        node = np.zeros(len(X), dtype=np.int64)
        active = self.left[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.left[node] >= 0
        return self.vote[node]

    @classmethod
    def from_sklearn(cls, est):
        t = est.tree_
        leaf = t.children_left < 0
        cls_idx = np.argmax(t.value[:, 0, :], axis=1)
        vote = est.classes_[cls_idx].astype(np.int8)
        return cls(
            feature=np.where(leaf, 0, t.feature).astype(np.int32),
            threshold=np.where(leaf, 0.0, t.threshold).astype(np.float64),
            left=t.children_left.astype(np.int32),
            right=t.children_right.astype(np.int32),
            vote=vote,
        )


@dataclass(frozen=True)
class SkinClassifier:
    trees: tuple
    feature_dim: int
    class_priors: tuple = (0.5, 0.5)
    oob_accuracy: float = float("nan")
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def tree_count(self):
        return len(self.trees)

    def votes(self, X):
        """Number of trees voting skin for each row of ``X``."""
        X = np.atleast_2d(X)
        if X.shape[1] != self.feature_dim:
            raise ValueError("expected %d features, got %d" % (self.feature_dim, X.shape[1]))
        total = np.zeros(len(X), dtype=np.int64)
        for t in self.trees:
            total += t.predict(X)
        return total

    def predict(self, X):
        """Strict majority vote; True means skin."""
        return 2 * self.votes(X) > self.tree_count

    def to_bytes(self):
        parts = [MAGIC, struct.pack("<III", FORMAT_VERSION, self.tree_count, self.feature_dim)]
        parts.append(struct.pack("<ddd", *self.class_priors, self.oob_accuracy))
        for t in self.trees:
            parts.append(struct.pack("<I", len(t.feature)))
            parts.append(t.feature.astype("<i4").tobytes())
            parts.append(t.threshold.astype("<f8").tobytes())
            parts.append(t.left.astype("<i4").tobytes())
            parts.append(t.right.astype("<i4").tobytes())
            parts.append(t.vote.astype("i1").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data):
        if data[:8] != MAGIC:
            raise ModelFormatError("not a skin classifier file")
        version, count, dim = struct.unpack_from("<III", data, 8)
        if version != FORMAT_VERSION:
            raise ModelFormatError("unsupported format version %d" % version)
        p0, p1, oob = struct.unpack_from("<ddd", data, 20)
        off = 44
        trees = []
        for _ in range(count):
            (n,) = struct.unpack_from("<I", data, off)
            off += 4
            arrays = []
            for dt, size in (("<i4", 4), ("<f8", 8), ("<i4", 4), ("<i4", 4), ("i1", 1)):
                arrays.append(np.frombuffer(data, dtype=dt, count=n, offset=off).copy())
                off += n * size
            feat, thr, left, right, vote = arrays
            trees.append(Tree(feat.astype(np.int32), thr.astype(np.float64),
                              left.astype(np.int32), right.astype(np.int32), vote.astype(np.int8)))
        return cls(tuple(trees), dim, (p0, p1), oob)

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def train_skin_classifier(X, y, tree_count=300, seed=0, min_leaf=5, max_features=None, jobs=1):
    """Bagging: each tree sees a bootstrap sample of the full training set.

    Parameters
    ----------
    X : ndarray (n, d)
        Superpixel features (d = 450 in the pipeline).
    y : array of bool/int
        1 for skin, 0 for non-skin.
    tree_count, seed : int
        Ensemble size and the seed of the bootstrap draws.
    min_leaf : int
        Minimum samples per leaf.
    max_features : int, optional
        Features examined per split; defaults to ``floor(sqrt(d))``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64).ravel()
    if len(X) != len(y):
        raise TrainingError("X has %d rows but y has %d" % (len(X), len(y)))
    if len(np.unique(y)) < 2:
        raise TrainingError("training data contains a single class")
    if tree_count < 1:
        raise TrainingError("tree_count must be >= 1")
    n, d = X.shape
    if max_features is None:
        max_features = max(1, int(np.sqrt(d)))

    rng = np.random.default_rng(seed)
    boots = [rng.integers(0, n, size=n) for _ in range(tree_count)]
    tree_seeds = rng.integers(0, 2 ** 31 - 1, size=tree_count)

    def grow(i):
        est = DecisionTreeClassifier(
            min_samples_leaf=min_leaf,
            max_features=max_features,
            random_state=int(tree_seeds[i]),
        )
        est.fit(X[boots[i]], y[boots[i]])
        return Tree.from_sklearn(est)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            trees = list(ex.map(grow, range(tree_count)))
    else:
        trees = [grow(i) for i in range(tree_count)]

    skin_votes = np.zeros(n)
    n_votes = np.zeros(n)
    for t, b in zip(trees, boots):
        oob = np.ones(n, dtype=bool)
        oob[b] = False
        if oob.any():
            skin_votes[oob] += t.predict(X[oob])
            n_votes[oob] += 1
    has = n_votes > 0
    oob_acc = float(np.mean((2 * skin_votes[has] > n_votes[has]) == y[has])) if has.any() else float("nan")
    priors = (float(np.mean(y == 0)), float(np.mean(y == 1)))
    return SkinClassifier(tuple(trees), d, priors, oob_acc)
