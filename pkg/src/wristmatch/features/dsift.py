"""Dense SIFT descriptors on a regular grid."""
import numpy as np

WINDOW = 64
STEP = 16
CELLS = 4
N_ORI = 8
CLAMP = 0.2
NORM_EPS = 1e-12


def sites(shape, window=WINDOW, step=STEP):
    """Top-left corners of all descriptor windows, row-major."""
    h, w = shape
    if h < window or w < window:
        raise ValueError("image %dx%d is smaller than one %d-pixel window" % (h, w, window))
    return [(r, c) for r in range(0, h - window + 1, step) for c in range(0, w - window + 1, step)]


def normalize_sift(v):
    """Unit length, clamp at 0.2, unit length again; zero vectors stay zero."""
    n = np.linalg.norm(v)
    if n <= NORM_EPS:
        return np.zeros_like(v)
    v = np.minimum(v / n, CLAMP)
    n = np.linalg.norm(v)
    return v / n if n > NORM_EPS else np.zeros_like(v)


def dsift(gray, window=WINDOW, step=STEP):
    """Concatenated 128-d descriptors, one per window (10 on a 128x80 ROI).

    Gradient magnitudes are Gaussian-weighted (sigma = half the window)
    and split linearly between the two nearest of 8 orientation bins; each
    16x16 cell of the 4x4 layout accumulates its own pixels.
    """
    gray = np.asarray(gray, dtype=np.float64)
    corners = sites(gray.shape, window, step)
    gy, gx = np.gradient(gray)
    mag = np.hypot(gx, gy)
    ang = np.mod(np.arctan2(gy, gx), 2 * np.pi)
    pos = ang / (2 * np.pi / N_ORI)
    b0 = np.floor(pos).astype(np.int64) % N_ORI
    frac = pos - np.floor(pos)
    b1 = (b0 + 1) % N_ORI

    c = (window - 1) / 2.0
    yy, xx = np.mgrid[:window, :window]
    wgt = np.exp(-((yy - c) ** 2 + (xx - c) ** 2) / (2 * (window / 2.0) ** 2))
    cell = window // CELLS
    cell_id = (yy // cell) * CELLS + (xx // cell)

    out = []
    for r, cc in corners:
        m = mag[r:r + window, cc:cc + window] * wgt
        f = frac[r:r + window, cc:cc + window]
        i0 = cell_id * N_ORI + b0[r:r + window, cc:cc + window]
        i1 = cell_id * N_ORI + b1[r:r + window, cc:cc + window]
        hist = np.bincount(i0.ravel(), weights=(m * (1 - f)).ravel(), minlength=CELLS * CELLS * N_ORI)
        hist += np.bincount(i1.ravel(), weights=(m * f).ravel(), minlength=CELLS * CELLS * N_ORI)
        out.append(normalize_sift(hist))
    return np.concatenate(out)
