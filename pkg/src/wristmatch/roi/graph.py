"""Gradient graph over the wrist mask and its shortest-path table."""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import csgraph

from ..imagecore import SOBEL_X, as_rgb, correlate, resize, resize_mask

FRAME_HEIGHT = 40
SQRT2 = np.sqrt(2.0)
OFFSETS = tuple((m, n) for m in (-1, 0, 1) for n in (-1, 0, 1) if (m, n) != (0, 0))
TIE_TOL = 1e-9


class EmptyMaskError(ValueError):
    pass


class NegativeCycleError(ValueError):
    pass


def gradient_image(rgb):
    """``1 - max_c |G_cx|`` with each channel response divided by its global max."""
    img = as_rgb(rgb)
    resp = []
    for c in range(3):
        g = np.abs(correlate(img[..., c], SOBEL_X))
        top = g.max()
        resp.append(g / top if top > 0 else g)
    return 1.0 - np.max(resp, axis=0)


def to_frame(img, shape):
    """Downsample to ``shape`` with a Gaussian prefilter against aliasing."""
    h, w = img.shape[:2]
    sig = [max(0.0, (h / shape[0] - 1) / 2), max(0.0, (w / shape[1] - 1) / 2)]
    if img.ndim == 3:
        sig.append(0.0)
    if any(s > 0 for s in sig):
        img = ndimage.gaussian_filter(img, sig, mode="nearest")
    return resize(img, shape)


def frame_shape(shape, height=FRAME_HEIGHT):
    h, w = shape[:2]
    return height, max(1, int(round(w * height / h)))


@dataclass(frozen=True)
class WristGraph:
    """Directed 8-neighbour graph on the mask pixels of the 40-row frame.

    Node ids follow row-major pixel order, so comparing ids compares
    (i, j) positions lexicographically.
    """

    mask: np.ndarray     # (h, w) bool
    gx: np.ndarray       # (h, w) G_x in the same frame
    index: np.ndarray    # (h, w) node id or -1
    coords: np.ndarray   # (n, 2) (i, j) of each node
    matrix: sparse.csr_matrix
    scale: tuple = (1.0, 1.0)  # input pixels per frame pixel (rows, cols)

    @classmethod
    def from_mask(cls, gx, mask, scale=(1.0, 1.0)):
        mask = np.asarray(mask, dtype=bool)
        gx = np.asarray(gx, dtype=np.float64)
        if not mask.any():
            raise EmptyMaskError("mask has no foreground pixels")
        h, w = mask.shape
        index = np.full((h, w), -1, dtype=np.int64)
        coords = np.argwhere(mask)
        index[mask] = np.arange(len(coords))
        src, dst, wt = [], [], []
        for m, n in OFFSETS:
            i, j = coords[:, 0] + m, coords[:, 1] + n
            ok = (i >= 0) & (i < h) & (j >= 0) & (j < w)
            ok[ok] = mask[i[ok], j[ok]]
            g = gx[i[ok], j[ok]]
            src.append(np.nonzero(ok)[0])
            dst.append(index[i[ok], j[ok]])
            wt.append(g * SQRT2 if m != 0 and n != 0 else g)
        n_nodes = len(coords)
        mat = sparse.csr_matrix(
            (np.concatenate(wt), (np.concatenate(src), np.concatenate(dst))),
            shape=(n_nodes, n_nodes))
        mat.sort_indices()
        return cls(mask, gx, index, coords, mat, tuple(scale))

    @property
    def n_nodes(self):
        return len(self.coords)

    def node(self, i, j):
        h, w = self.mask.shape
        if 0 <= i < h and 0 <= j < w:
            return int(self.index[i, j])
        return -1

    def weight(self, v, u):
        """Weight of the move from pixel ``v`` to pixel ``u`` (8-neighbours)."""
        g = self.gx[u[0], u[1]]
        return g * SQRT2 if u[0] != v[0] and u[1] != v[1] else g

    def edges(self):
        coo = self.matrix.tocoo()
        return coo.row, coo.col, coo.data

    def subgraph(self, keep):
        return WristGraph.from_mask(self.gx, self.mask & keep, self.scale)


def build_graph(rgb, mask, height=FRAME_HEIGHT):
    """Build the wrinkle graph from a segmented image.

    Returns
    -------
    (WristGraph, ndarray)
        The graph and the G_x image, both in the ``height``-row frame.
    """
    rgb = as_rgb(rgb)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMaskError("mask has no foreground pixels")
    segmented = rgb * mask[..., None]
    shape = frame_shape(mask.shape, height)
    gx = np.clip(to_frame(gradient_image(segmented), shape), 0.0, 1.0)
    small = resize_mask(mask, shape)
    if not small.any():
        raise EmptyMaskError("mask vanishes in the %d-row frame" % height)
    scale = (mask.shape[0] / shape[0], mask.shape[1] / shape[1])
    return WristGraph.from_mask(gx, small, scale), gx


@dataclass(frozen=True)
class Boundaries:
    b_up: tuple    # ((i, j), ...) ordered by column
    b_down: tuple


def boundaries(mask):
    """Topmost and bottommost foreground pixel of every non-empty column."""
    mask = np.asarray(mask, dtype=bool)
    cols = np.nonzero(mask.any(axis=0))[0]
    if cols.size == 0:
        raise EmptyMaskError("mask has no foreground pixels")
    h = mask.shape[0]
    top = np.argmax(mask[:, cols], axis=0)
    bottom = h - 1 - np.argmax(mask[::-1, cols], axis=0)
    return Boundaries(tuple((int(i), int(j)) for i, j in zip(top, cols)),
                      tuple((int(i), int(j)) for i, j in zip(bottom, cols)))


def johnson_potentials(matrix):
    """Bellman-Ford potentials from a virtual source joined to every node by 0-weight edges."""
    n = matrix.shape[0]
    coo = matrix.tocoo()
    h = np.zeros(n)
    for _ in range(n + 1):
        cand = h[coo.row] + coo.data
        new = h.copy()
        np.minimum.at(new, coo.col, cand)
        if np.array_equal(new, h):
            return h
        h = new
    raise NegativeCycleError("graph has a negative cycle")


class PathTable:
    """Lazily filled all-pairs shortest-path table (Johnson's algorithm).

    Rows are Dijkstra runs on the reweighted graph; with nonnegative
    weights the potentials are zero and reweighting is exact. Among
    equal-cost paths the one with fewest edges is taken, then the
    lexicographically smallest node sequence.
    """

    def __init__(self, graph):
        self.graph = graph
        self.potential = johnson_potentials(graph.matrix)
        coo = graph.matrix.tocoo()
        data = coo.data + self.potential[coo.row] - self.potential[coo.col]
        self._mat = sparse.csr_matrix((data, (coo.row, coo.col)), shape=graph.matrix.shape)
        self._mat.sort_indices()
        self._rowsrc = np.repeat(np.arange(graph.n_nodes), np.diff(self._mat.indptr))
        self._fwd = {}
        self._rev = {}

    def prepare(self, sources):
        todo = [int(s) for s in sources if int(s) not in self._fwd]
        if todo:
            d = csgraph.dijkstra(self._mat, directed=True, indices=todo)
            for s, row in zip(todo, np.atleast_2d(d)):
                self._fwd[s] = row - self.potential[s] + self.potential

    def distances(self, s):
        self.prepare([s])
        return self._fwd[int(s)]

    def cost(self, s, f):
        return float(self.distances(s)[f])

    def costs(self, sources, sinks):
        self.prepare(sources)
        return np.array([self._fwd[int(s)][np.asarray(sinks, dtype=np.int64)] for s in sources])

    def _toward(self, f):
        if f not in self._rev:
            dt = csgraph.dijkstra(self._mat.T.tocsr(), directed=True, indices=f)
            m = self._mat
            dst = m.indices
            gap = m.data + dt[dst] - dt[self._rowsrc]
            tight = np.isfinite(dt[self._rowsrc]) & (np.abs(gap) <= TIE_TOL * (1.0 + np.abs(dt[self._rowsrc])))
            t = sparse.csr_matrix((np.ones(tight.sum()), (self._rowsrc[tight], dst[tight])),
                                  shape=m.shape)
            hops = csgraph.dijkstra(t.T.tocsr(), directed=True, unweighted=True, indices=f)
            self._rev[f] = (tight, hops)
        return self._rev[f]

    def path(self, s, f):
        """Node ids of the chosen shortest path, or None when unreachable."""
        s, f = int(s), int(f)
        if not np.isfinite(self.cost(s, f)):
            return None
        tight, hops = self._toward(f)
        m = self._mat
        out = [s]
        v = s
        while v != f:
            lo, hi = m.indptr[v], m.indptr[v + 1]
            nb = m.indices[lo:hi][tight[lo:hi]]
            nb = nb[hops[nb] == hops[v] - 1]
            v = int(nb.min())
            out.append(v)
        return out

    def best(self, sources, sinks):
        """Cheapest (cost, path) over all source/sink pairs; (inf, None) if none connect."""
        sources = np.asarray(sources, dtype=np.int64)
        sinks = np.asarray(sinks, dtype=np.int64)
        c = self.costs(sources, sinks)
        low = c.min() if c.size else np.inf
        if not np.isfinite(low):
            return np.inf, None
        ties = np.argwhere(c == low)
        paths = [self.path(sources[a], sinks[b]) for a, b in ties]
        key = [(len(p), [tuple(self.graph.coords[v]) for v in p]) for p in paths]
        return float(low), paths[min(range(len(paths)), key=lambda k: key[k])]


def all_pairs_shortest_paths(g, sources, sinks):
    """Path table with rows for ``sources`` filled in; costs to ``sinks`` via ``.costs``."""
    table = PathTable(g)
    table.prepare(sources)
    return table
