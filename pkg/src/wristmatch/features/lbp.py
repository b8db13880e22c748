"""Local binary patterns with riu2 and u2 bin mappings."""
import numpy as np

from .grids import block_histograms


def transitions(code, D=8):
    """Circular 0/1 transitions in a ``D``-bit code."""
    rot = ((code >> 1) | ((code & 1) << (D - 1)))
    return bin(code ^ rot).count("1")


def riu2_table(D=8):
    """Bin of every code: popcount when uniform, ``D + 1`` otherwise."""
    return np.array([bin(c).count("1") if transitions(c, D) <= 2 else D + 1
                     for c in range(2 ** D)], dtype=np.int64)


def u2_table(D=8):
    """Uniform codes get bins 0.. in ascending code order; the rest share the last bin."""
    uniform = [c for c in range(2 ** D) if transitions(c, D) <= 2]
    table = np.full(2 ** D, len(uniform), dtype=np.int64)
    table[uniform] = np.arange(len(uniform))
    return table


RIU2 = riu2_table()
U2 = u2_table()
RIU2_BINS = 10
U2_BINS = 59


def _offsets(D, R):
    a = 2 * np.pi * np.arange(D) / D
    dy = np.round(-R * np.sin(a), 12)
    dx = np.round(R * np.cos(a), 12)
    return dy, dx


def _sample(plane, y, x):
    """Bilinear lookup in lerp form, so constant regions sample exactly."""
    h, w = plane.shape
    y0 = np.clip(np.floor(y).astype(int), 0, h - 1)
    x0 = np.clip(np.floor(x).astype(int), 0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    ty, tx = y - y0, x - x0
    top = plane[y0, x0] + tx * (plane[y0, x1] - plane[y0, x0])
    bot = plane[y1, x0] + tx * (plane[y1, x1] - plane[y1, x0])
    return top + ty * (bot - top)


def lbp_codes(plane, D=8, R=1):
    """Code at every pixel; pixels closer than ``ceil(R)`` to the border get -1."""
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    m = int(np.ceil(R))
    codes = np.full((h, w), -1, dtype=np.int64)
    if h <= 2 * m or w <= 2 * m:
        return codes
    yy, xx = np.mgrid[m:h - m, m:w - m]
    gc = plane[m:h - m, m:w - m]
    acc = np.zeros(gc.shape, dtype=np.int64)
    for p, (dy, dx) in enumerate(zip(*_offsets(D, R))):
        gp = _sample(plane, yy + dy, xx + dx)
        acc |= (gp >= gc).astype(np.int64) << p
    codes[m:h - m, m:w - m] = acc
    return codes


def lbp_code(patch, D=8, R=1):
    """Code of the centre pixel of ``patch``."""
    patch = np.asarray(patch, dtype=np.float64)
    m = int(np.ceil(R))
    if min(patch.shape) < 2 * m + 1:
        raise ValueError("patch must be at least %d pixels wide" % (2 * m + 1))
    c = (patch.shape[0] // 2, patch.shape[1] // 2)
    return int(lbp_codes(patch, D, R)[c])


def lbp_riu2_hist(plane, grid, R=1):
    """(n_blocks, 10) counts over block-interior pixels."""
    codes = lbp_codes(plane, 8, R)
    return block_histograms(RIU2[np.maximum(codes, 0)], grid, RIU2_BINS, int(np.ceil(R)))


def lbp_u2_hist(plane, grid, R=2):
    """(n_blocks, 59) counts over block-interior pixels."""
    codes = lbp_codes(plane, 8, R)
    return block_histograms(U2[np.maximum(codes, 0)], grid, U2_BINS, int(np.ceil(R)))
