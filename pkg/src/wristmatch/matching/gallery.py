"""One-vs-all gallery of PLS and SVM classifiers per ROI variant."""
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .pls import TrainingError, pls_train, standardize
from .svm import svm_train

VARIANTS = ("ROI#1", "ROI#2")
MATCHERS = ("PLS", "SVM")
SYSTEMS = (("RS_PLS1", "ROI#1", "PLS"), ("RS_PLS2", "ROI#2", "PLS"),
           ("RS_SVM1", "ROI#1", "SVM"), ("RS_SVM2", "ROI#2", "SVM"))
MAGIC = b"WMGALRY\x01"
FORMAT_VERSION = 1
TAGS = {"PLS": b"PLS\x00", "SVM": b"SVM\x00"}


class GalleryError(ValueError):
    pass


class GalleryFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Classifier:
    """``score(x) = weights @ x + offset``; ``extra`` is y-mean (PLS) or C (SVM)."""

    matcher: str
    weights: np.ndarray
    offset: float
    extra: float = 0.0


@dataclass(frozen=True)
class ScoreTable:
    system: str
    wrist_ids: tuple
    scores: np.ndarray

    @property
    def order(self):
        return np.argsort(-self.scores, kind="stable")

    @property
    def sorted_scores(self):
        return self.scores[self.order]

    @property
    def sorted_ids(self):
        return tuple(self.wrist_ids[i] for i in self.order)

    def rank_of(self, wrist_id):
        """1-based rank of ``wrist_id`` in the sorted table."""
        return self.sorted_ids.index(wrist_id) + 1


@dataclass(frozen=True)
class GalleryModel:
    wrist_ids: tuple
    variants: tuple
    dim: int
    classifiers: dict    # (variant, matcher) -> tuple of Classifier, one per wrist_ids entry
    meta: dict = field(default_factory=dict, compare=False)
    sections: dict = field(default_factory=dict, compare=False)   # optional embedded blobs

    def systems(self):
        return tuple(s for s in SYSTEMS if s[1] in self.variants)

    def weight_matrix(self, variant, matcher):
        cl = self.classifiers[(variant, matcher)]
        return np.stack([c.weights for c in cl]), np.array([c.offset for c in cl])

    def score(self, variant, matcher, x):
        x = np.asarray(getattr(x, "values", x), dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError("probe has %s features, gallery expects %d" % (x.shape, self.dim))
        W, b = self.weight_matrix(variant, matcher)
        return W @ x + b

    def to_bytes(self):
        out = [MAGIC, struct.pack("<IIII", FORMAT_VERSION, len(self.wrist_ids), len(self.variants), self.dim)]
        for s in self.variants + self.wrist_ids:
            raw = s.encode("utf-8")
            out.append(struct.pack("<H", len(raw)) + raw)
        for vi, v in enumerate(self.variants):
            for m in MATCHERS:
                for wi, c in enumerate(self.classifiers[(v, m)]):
                    out.append(TAGS[m] + struct.pack("<BII", vi, wi, self.dim))
                    out.append(c.weights.astype("<f8").tobytes())
                    out.append(struct.pack("<dd", c.offset, c.extra))
        out.append(struct.pack("<I", len(self.sections)))
        for name in sorted(self.sections):
            raw = name.encode("utf-8")
            blob = self.sections[name]
            out.append(struct.pack("<H", len(raw)) + raw + struct.pack("<Q", len(blob)) + blob)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data):
        if data[:8] != MAGIC:
            raise GalleryFormatError("not a gallery model file")
        version, nw, nv, dim = struct.unpack_from("<IIII", data, 8)
        if version != FORMAT_VERSION:
            raise GalleryFormatError("unsupported gallery version %d" % version)
        off = 24
        names = []
        for _ in range(nv + nw):
            (ln,) = struct.unpack_from("<H", data, off)
            names.append(data[off + 2:off + 2 + ln].decode("utf-8"))
            off += 2 + ln
        variants, wrists = tuple(names[:nv]), tuple(names[nv:])
        inv_tags = {t: m for m, t in TAGS.items()}
        slots = {(v, m): [None] * nw for v in variants for m in MATCHERS}
        for _ in range(nv * len(MATCHERS) * nw):
            tag = data[off:off + 4]
            if tag not in inv_tags:
                raise GalleryFormatError("bad classifier tag %r" % tag)
            vi, wi, d = struct.unpack_from("<BII", data, off + 4)
            off += 13
            w = np.frombuffer(data, dtype="<f8", count=d, offset=off).astype(np.float64)
            off += 8 * d
            o, e = struct.unpack_from("<dd", data, off)
            off += 16
            m = inv_tags[tag]
            slots[(variants[vi], m)][wi] = Classifier(m, w, o, e)
        sections = {}
        (ns,) = struct.unpack_from("<I", data, off)
        off += 4
        for _ in range(ns):
            (ln,) = struct.unpack_from("<H", data, off)
            name = data[off + 2:off + 2 + ln].decode("utf-8")
            off += 2 + ln
            (bl,) = struct.unpack_from("<Q", data, off)
            off += 8
            sections[name] = bytes(data[off:off + bl])
            off += bl
        return cls(wrists, variants, dim, {k: tuple(v) for k, v in slots.items()}, {}, sections)

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def _fit_pair(X, labels, k, C):
    pls = pls_train(X, labels, k)
    # the SVM runs on standardized features; fold the scaling back afterwards
    mean, scale = standardize(X)
    svm = svm_train((X - mean) / scale, labels, C)
    w = svm.weights / scale
    return (Classifier("PLS", pls.beta, pls.intercept, pls.y_mean),
            Classifier("SVM", w, float(svm.bias - w @ mean), float(C)))


def train_gallery(samples, variants=VARIANTS, k=5, C=1.0, jobs=1):
    """Train a PLS and an SVM classifier per wrist and ROI variant.

    Parameters
    ----------
    samples : iterable of (wrist_id, {variant: feature vector})
        Gallery images. They are grouped by wrist id (sorted), keeping the
        given order within a wrist, so the model does not depend on the
        order wrists were listed in.
    variants : tuple of str
        ROI variants to train.
    k : int
        PLS components.
    C : float
        SVM penalty.
    """
    samples = [(str(w), f) for w, f in samples]
    if not samples:
        raise GalleryError("empty gallery")
    variants = tuple(variants)
    for w, feats in samples:
        for v in variants:
            if v not in feats:
                raise GalleryError("wrist %s has no %s features" % (w, v))
    order = sorted(range(len(samples)), key=lambda i: (samples[i][0], i))
    samples = [samples[i] for i in order]
    ids = np.array([w for w, _ in samples])
    wrists = tuple(sorted(set(ids.tolist())))
    if len(wrists) < 2:
        raise GalleryError("need at least 2 gallery wrists")

    mats = {v: np.stack([np.asarray(getattr(f[v], "values", f[v]), dtype=np.float64) for _, f in samples])
            for v in variants}
    dims = {m.shape[1] for m in mats.values()}
    if len(dims) != 1:
        raise GalleryError("feature lengths differ between variants")
    tasks = [(v, w) for v in variants for w in wrists]

    def run(task):
        v, w = task
        labels = np.where(ids == w, 1.0, -1.0)
        return _fit_pair(mats[v], labels, k, C)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            results = list(ex.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    classifiers = {}
    for (v, w), (p, s) in zip(tasks, results):
        classifiers.setdefault((v, "PLS"), []).append(p)
        classifiers.setdefault((v, "SVM"), []).append(s)
    counts = {w: int((ids == w).sum()) for w in wrists}
    meta = {"images": len(samples), "positives": counts,
            "negatives": {w: len(samples) - c for w, c in counts.items()}, "k": k, "C": C}
    return GalleryModel(wrists, variants, dims.pop(),
                        {key: tuple(val) for key, val in classifiers.items()}, meta)


def match_probe(gallery, probe):
    """Score a probe against every gallery classifier.

    Parameters
    ----------
    probe : {variant: feature vector}

    Returns
    -------
    dict
        System name -> :class:`ScoreTable`, in the order RS_PLS1, RS_PLS2,
        RS_SVM1, RS_SVM2 (systems of untrained variants are left out).
    """
    out = {}
    for name, variant, matcher in gallery.systems():
        if variant not in probe:
            raise GalleryError("probe lacks %s features" % variant)
        out[name] = ScoreTable(name, gallery.wrist_ids, gallery.score(variant, matcher, probe[variant]))
    return out


__all__ = ["Classifier", "GalleryError", "GalleryFormatError", "GalleryModel", "MATCHERS",
           "SYSTEMS", "ScoreTable", "TrainingError", "VARIANTS", "match_probe", "train_gallery"]
