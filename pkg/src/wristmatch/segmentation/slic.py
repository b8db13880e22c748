"""Simple linear iterative clustering (SLIC) superpixels."""
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from skimage import color as skcolor

from ..imagecore import as_rgb


@dataclass(frozen=True)
class SuperpixelLabeling:
    labels: np.ndarray  # (H, W) int, ids 0..count-1
    count: int
    adjacency: tuple  # adjacency[i] -> sorted tuple of neighbour ids

    def sizes(self):
        return np.bincount(self.labels.ravel(), minlength=self.count)


def scaled_lab(rgb):
    """LAB with each channel mapped to [0, 1]."""
    lab = skcolor.rgb2lab(np.clip(as_rgb(rgb), 0.0, 1.0))
    return np.stack([
        lab[..., 0] / 100.0,
        (lab[..., 1] + 128.0) / 255.0,
        (lab[..., 2] + 128.0) / 255.0,
    ], axis=-1)


def _grid(h, w, k):
    step = np.sqrt(h * w / k)
    nr = int(min(h, max(1, round(h / step))))
    nc = int(min(w, max(1, round(k / nr))))
    return nr, nc


def _perturb(centres, grad):
    h, w = grad.shape
    out = []
    for r, c in centres:
        r0, c0 = int(r), int(c)
        best = (np.inf, r0, c0)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                rr, cc = r0 + dr, c0 + dc
                if 0 <= rr < h and 0 <= cc < w and grad[rr, cc] < best[0]:
                    best = (grad[rr, cc], rr, cc)
        out.append((float(best[1]), float(best[2])))
    return out


def slic(rgb, k=200, compactness=10.0, n_iter=10):
    """Cluster pixels into about ``k`` compact, colour-coherent superpixels.

    Colour distance is measured on LAB scaled to [0, 1] and multiplied by
    100, so ``compactness`` keeps its conventional meaning (10 is the usual
    balance between colour and spatial proximity).

    Parameters
    ----------
    rgb : ndarray (H, W, 3)
        Image in [0, 1]; the pipeline resizes images to a 200-pixel height
        before calling this.
    k : int
        Requested number of superpixels, ``2 <= k <= H * W``.
    compactness : float
        Weight of the spatial term.
    n_iter : int
        Number of assignment/update rounds.

    Returns
    -------
    SuperpixelLabeling
    """
    img = as_rgb(rgb)
    h, w = img.shape[:2]
    if k < 2:
        raise ValueError("k must be >= 2, got %d" % k)
    if k > h * w:
        raise ValueError("k=%d exceeds the pixel count %d" % (k, h * w))

    feat = scaled_lab(img) * 100.0
    nr, nc = _grid(h, w, k)
    step_r, step_c = h / nr, w / nc
    step = np.sqrt(step_r * step_c)

    gy, gx = np.gradient(feat, axis=(0, 1))
    grad = (gx ** 2 + gy ** 2).sum(axis=-1)
    seeds = [((i + 0.5) * step_r, (j + 0.5) * step_c) for i in range(nr) for j in range(nc)]
    seeds = _perturb(seeds, grad)
    pos = np.array(seeds)
    col = np.array([feat[int(r), int(c)] for r, c in seeds])

    rows = np.arange(h)
    cols = np.arange(w)
    labels = np.zeros((h, w), dtype=np.int64)
    spatial_w = (compactness / step) ** 2
    win_r = int(np.ceil(step_r))
    win_c = int(np.ceil(step_c))
    for _ in range(n_iter):
        dist = np.full((h, w), np.inf)
        for idx in range(len(pos)):
            r, c = pos[idx]
            r0, r1 = max(0, int(r) - win_r), min(h, int(r) + win_r + 1)
            c0, c1 = max(0, int(c) - win_c), min(w, int(c) + win_c + 1)
            patch = feat[r0:r1, c0:c1]
            dc = ((patch - col[idx]) ** 2).sum(axis=-1)
            ds = (rows[r0:r1, None] - r) ** 2 + (cols[None, c0:c1] - c) ** 2
            d = dc + spatial_w * ds
            sub = dist[r0:r1, c0:c1]
            better = d < sub
            sub[better] = d[better]
            labels[r0:r1, c0:c1][better] = idx
        flat = labels.ravel()
        counts = np.bincount(flat, minlength=len(pos)).astype(np.float64)
        keep = counts > 0
        rr, cc = np.divmod(np.arange(h * w), w)
        new_pos = np.stack([
            np.bincount(flat, weights=rr, minlength=len(pos)),
            np.bincount(flat, weights=cc, minlength=len(pos)),
        ], axis=1)
        new_col = np.stack([
            np.bincount(flat, weights=feat[..., ch].ravel(), minlength=len(pos))
            for ch in range(3)
        ], axis=1)
        pos[keep] = new_pos[keep] / counts[keep, None]
        col[keep] = new_col[keep] / counts[keep, None]

    min_size = max(1, int(h * w / (4 * k)))
    labels = enforce_connectivity(labels, min_size)
    return SuperpixelLabeling(labels, int(labels.max()) + 1, adjacency(labels))


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _neighbor_pairs(a):
    """Horizontally and vertically adjacent value pairs of a 2-D array."""
    return (
        np.concatenate([a[:, :-1].ravel(), a[:-1, :].ravel()]),
        np.concatenate([a[:, 1:].ravel(), a[1:, :].ravel()]),
    )


def enforce_connectivity(labels, min_size):
    """Split labels into connected components and absorb the small ones.

    A component below ``min_size`` pixels is merged into the neighbouring
    component sharing the longest border (ties go to the lower id). The
    result is relabelled 0..count-1 in raster order of first appearance.
    """
    h, w = labels.shape
    idx = np.arange(h * w).reshape(h, w)
    ia, ib = _neighbor_pairs(idx)
    la, lb = labels.ravel()[ia], labels.ravel()[ib]
    same = la == lb
    graph = sparse.coo_matrix((np.ones(same.sum()), (ia[same], ib[same])), shape=(h * w, h * w))
    n, comp = csgraph.connected_components(graph, directed=False)
    # renumber components in raster order so processing order is stable
    _, first = np.unique(comp, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty(n, dtype=np.int64)
    remap[order] = np.arange(n)
    comp = remap[comp]

    sizes = np.bincount(comp, minlength=n)
    ca, cb = comp[ia[~same]], comp[ib[~same]]
    pairs = np.stack([np.concatenate([ca, cb]), np.concatenate([cb, ca])], axis=1)
    pairs, border = np.unique(pairs, axis=0, return_counts=True)
    starts = np.searchsorted(pairs[:, 0], np.arange(n + 1))

    parent = np.arange(n)
    for c in np.nonzero(sizes < min_size)[0]:
        root = _find(parent, c)
        if sizes[root] >= min_size:
            continue
        nb = pairs[starts[c]:starts[c + 1], 1]
        if nb.size == 0:
            continue
        roots = np.array([_find(parent, x) for x in nb])
        cnt = border[starts[c]:starts[c + 1]]
        keep = roots != root
        if not keep.any():
            continue
        vals, inv = np.unique(roots[keep], return_inverse=True)
        totals = np.bincount(inv, weights=cnt[keep])
        target = vals[np.argmax(totals)]
        parent[root] = target
        sizes[target] += sizes[root]

    roots = np.array([_find(parent, i) for i in range(n)])
    merged = roots[comp]
    _, first, inverse = np.unique(merged, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty(len(first), dtype=np.int64)
    rank[order] = np.arange(len(first))
    return rank[inverse].reshape(h, w)


def adjacency(labels):
    """Symmetric 4-connected neighbour lists of a label map."""
    count = int(labels.max()) + 1
    pairs = []
    for a, b in ((labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])):
        diff = a != b
        pairs.append(np.stack([a[diff], b[diff]], axis=1))
    pairs = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
    pairs = np.concatenate([pairs, pairs[:, ::-1]])
    pairs = np.unique(pairs, axis=0)
    nbrs = [[] for _ in range(count)]
    for a, b in pairs:
        nbrs[a].append(int(b))
    return tuple(tuple(sorted(x)) for x in nbrs)
