"""Block grids b1..b7 over the 128x80 ROI."""
from dataclasses import dataclass

import numpy as np

ROI_SHAPE = (128, 80)


@dataclass(frozen=True)
class GridSpec:
    name: str
    rows: int
    cols: int

    @property
    def n_blocks(self):
        return self.rows * self.cols

    def edges(self, shape=ROI_SHAPE):
        """Integer row and column boundaries; block (r, c) spans
        ``[re[r], re[r+1]) x [ce[c], ce[c+1])``."""
        h, w = shape
        re = np.round(np.arange(self.rows + 1) * h / self.rows).astype(int)
        ce = np.round(np.arange(self.cols + 1) * w / self.cols).astype(int)
        return re, ce

    def blocks(self, shape=ROI_SHAPE):
        re, ce = self.edges(shape)
        return [(re[r], re[r + 1], ce[c], ce[c + 1]) for r in range(self.rows) for c in range(self.cols)]

    def block_index(self, shape=ROI_SHAPE, margin=0):
        """Map of block ids (row-major), -1 where a pixel is within ``margin`` of its block edge."""
        h, w = shape
        out = np.full((h, w), -1, dtype=np.int64)
        for b, (r0, r1, c0, c1) in enumerate(self.blocks(shape)):
            if r1 - r0 > 2 * margin and c1 - c0 > 2 * margin:
                out[r0 + margin:r1 - margin, c0 + margin:c1 - margin] = b
        return out


GRIDS = (
    GridSpec("b1", 8, 5),
    GridSpec("b2", 6, 5),
    GridSpec("b3", 5, 4),
    GridSpec("b4", 4, 4),
    GridSpec("b5", 4, 3),
    GridSpec("b6", 4, 2),
    GridSpec("b7", 3, 2),
)
SMALL_GRIDS = GRIDS[:2]
LARGE_GRIDS = GRIDS[2:]


def block_histograms(values, grid, n_bins, margin=0):
    """Per-block histograms of integer ``values`` in ``[0, n_bins)``, shape (n_blocks, n_bins)."""
    values = np.asarray(values)
    idx = grid.block_index(values.shape, margin)
    keep = idx >= 0
    flat = idx[keep] * n_bins + values[keep].astype(np.int64)
    return np.bincount(flat, minlength=grid.n_blocks * n_bins).reshape(grid.n_blocks, n_bins)
