"""450-dimensional superpixel descriptors.

Each superpixel is described by the mean and population standard deviation
of 25 planes (18 colour planes + 7 gradient maps), i.e. 50 values, followed
by the same 50 values for its 8 nearest superpixels by centroid distance.
"""
import numpy as np

from ..imagecore import gradient_maps, luminance, to_color_stack

N_PLANES = 25
STATS_PER_SUPERPIXEL = 2 * N_PLANES  # 50
N_NEIGHBORS = 8
FEATURE_DIM = STATS_PER_SUPERPIXEL * (1 + N_NEIGHBORS)  # 450


def plane_stack(rgb):
    """All 25 statistic planes of an RGB image, shape (25, H, W)."""
    colors = to_color_stack(rgb)
    grads = gradient_maps(luminance(rgb))
    return np.concatenate([colors.planes, grads.maps])


def superpixel_stats(labels, planes, count=None):
    """Per-superpixel (mean, std) of each plane, interleaved, shape (count, 50)."""
    if planes.shape[1:] != labels.shape:
        raise ValueError("planes %s do not match labels %s" % (planes.shape[1:], labels.shape))
    if count is None:
        count = int(labels.max()) + 1
    flat = labels.ravel()
    n = np.bincount(flat, minlength=count).astype(np.float64)
    if np.any(n == 0):
        raise RuntimeError("empty superpixel in labeling")
    out = np.empty((count, 2 * planes.shape[0]))
    for p in range(planes.shape[0]):
        v = planes[p].ravel()
        mean = np.bincount(flat, weights=v, minlength=count) / n
        dev = v - mean[flat]
        var = np.bincount(flat, weights=dev * dev, minlength=count) / n
        out[:, 2 * p] = mean
        out[:, 2 * p + 1] = np.sqrt(var)
    return out


def nearest_neighbors(labels, count, k=N_NEIGHBORS):
    """Indices of the ``k`` nearest superpixels by centroid distance.

    Ties are broken by superpixel id; when fewer than ``k`` other
    superpixels exist the nearest one is repeated (a lone superpixel
    uses itself).
    """
    h, w = labels.shape
    flat = labels.ravel()
    n = np.bincount(flat, minlength=count).astype(np.float64)
    rr, cc = np.divmod(np.arange(h * w), w)
    cent = np.stack([
        np.bincount(flat, weights=rr, minlength=count) / n,
        np.bincount(flat, weights=cc, minlength=count) / n,
    ], axis=1)
    d = ((cent[:, None, :] - cent[None, :, :]) ** 2).sum(axis=-1)
    np.fill_diagonal(d, np.inf)
    out = np.empty((count, k), dtype=np.int64)
    for i in range(count):
        order = np.lexsort((np.arange(count), d[i]))[: count - 1]
        if order.size == 0:
            order = np.array([i])
        if order.size < k:
            order = np.concatenate([order, np.repeat(order[0], k - order.size)])
        out[i] = order[:k]
    return out


def superpixel_features(labeling, planes):
    """One 450-vector per superpixel, shape (count, 450).

    ``planes`` is the (25, H, W) output of :func:`plane_stack`.
    """
    stats = superpixel_stats(labeling.labels, planes, labeling.count)
    nbrs = nearest_neighbors(labeling.labels, labeling.count)
    feats = np.concatenate([stats, stats[nbrs].reshape(labeling.count, -1)], axis=1)
    assert feats.shape[1] == FEATURE_DIM
    return feats
