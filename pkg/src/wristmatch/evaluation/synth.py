"""Deterministic synthetic wrist images for desk-scale evaluation.

Each identity owns a skin band crossing the full image width, with two
prominent near-vertical wrinkles and a set of short minor lines and spots
that make up its texture. Every image of an identity re-renders the same
scene under a small random affine pose, an illumination gain and pixel
noise, all scaled by ``difficulty``. Rendering is analytic at the
transformed coordinates, so no resampling is involved.
"""
import os
from dataclasses import dataclass

import numpy as np

SYNTH_VERSION = 1
HEIGHT, WIDTH = 200, 300

# versioned generator constants
BAND_TOP = (0.17, 0.23)        # fraction of height
BAND_BOTTOM = (0.77, 0.83)
WRINKLE_X = (0.34, 0.62)       # nominal wrinkle columns, fraction of width
WRINKLE_JITTER = 0.03
WRINKLE_WIGGLE = 4.0           # px, control point offsets
WRINKLE_CONTROL = 6
WRINKLE_DARK = (0.38, 0.48)
WRINKLE_SIGMA = 1.3
N_MINOR = 45
MINOR_LEN = (8.0, 28.0)
MINOR_DARK = (0.10, 0.22)
MINOR_SIGMA = 0.8
N_SPOTS = 30
SPOT_RADIUS = (1.2, 2.6)
SPOT_DARK = (0.12, 0.25)
ROTATION_DEG = 10.0            # maxima at difficulty 1
SCALE_JITTER = 0.10
SHIFT_FRAC = 0.05
GAIN_JITTER = 0.30
NOISE_SIGMA = 0.04

SKIN_TONES = np.array([
    [0.87, 0.67, 0.55], [0.80, 0.58, 0.45], [0.70, 0.50, 0.38],
    [0.92, 0.74, 0.62], [0.62, 0.43, 0.32], [0.76, 0.56, 0.47],
])
BACKGROUNDS = np.array([
    [0.20, 0.32, 0.62], [0.18, 0.52, 0.30], [0.45, 0.47, 0.50],
    [0.30, 0.22, 0.50], [0.12, 0.40, 0.48],
])


@dataclass(frozen=True)
class Identity:
    index: int
    tone: np.ndarray          # base RGB
    tone_slope: float         # relative change across the width
    band: tuple               # (top, bottom) rows in the canonical frame
    wrinkles: tuple           # two (k, 2) arrays of (row, col) control points
    wrinkle_dark: tuple
    segments: np.ndarray      # (n, 4) minor lines r0, c0, r1, c1
    seg_dark: np.ndarray
    spots: np.ndarray         # (n, 3) row, col, radius
    spot_dark: np.ndarray
    background: np.ndarray

    def control_points(self):
        return np.concatenate(self.wrinkles)


def make_identity(seed, index):
    rng = np.random.default_rng([seed, index, SYNTH_VERSION])
    # palettes cycle with the index so any run of identities covers them all
    tone = SKIN_TONES[index % len(SKIN_TONES)] * rng.uniform(0.92, 1.05)
    top = HEIGHT * rng.uniform(*BAND_TOP)
    bottom = HEIGHT * rng.uniform(*BAND_BOTTOM)
    rows = np.linspace(top - 10, bottom + 10, WRINKLE_CONTROL)
    wrinkles = []
    for x0 in WRINKLE_X:
        base = WIDTH * (x0 + rng.uniform(-WRINKLE_JITTER, WRINKLE_JITTER))
        cols = base + rng.uniform(-WRINKLE_WIGGLE, WRINKLE_WIGGLE, WRINKLE_CONTROL)
        wrinkles.append(np.stack([rows, cols], axis=1))
    dark = tuple(rng.uniform(*WRINKLE_DARK, 2))

    cen = np.stack([rng.uniform(top + 4, bottom - 4, N_MINOR), rng.uniform(-10, WIDTH + 10, N_MINOR)], 1)
    ang = rng.uniform(0, np.pi, N_MINOR)
    half = rng.uniform(*MINOR_LEN, N_MINOR) / 2
    d = np.stack([np.sin(ang), np.cos(ang)], 1) * half[:, None]
    segments = np.concatenate([cen - d, cen + d], axis=1)
    seg_dark = rng.uniform(*MINOR_DARK, N_MINOR)
    spots = np.stack([rng.uniform(top + 3, bottom - 3, N_SPOTS), rng.uniform(0, WIDTH, N_SPOTS),
                      rng.uniform(*SPOT_RADIUS, N_SPOTS)], 1)
    spot_dark = rng.uniform(*SPOT_DARK, N_SPOTS)
    bg = BACKGROUNDS[index % len(BACKGROUNDS)]
    return Identity(index, tone, float(rng.uniform(-0.15, 0.15)), (top, bottom), tuple(wrinkles),
                    dark, segments, seg_dark, spots, spot_dark, bg)


def _segment_distance(r, c, seg):
    r0, c0, r1, c1 = seg
    dr, dc = r1 - r0, c1 - c0
    L = dr * dr + dc * dc
    t = np.clip(((r - r0) * dr + (c - c0) * dc) / L, 0, 1) if L > 0 else 0.0
    return np.hypot(r - (r0 + t * dr), c - (c0 + t * dc))


def _polyline_distance(r, c, pts):
    d = np.full(r.shape, np.inf)
    for a, b in zip(pts[:-1], pts[1:]):
        d = np.minimum(d, _segment_distance(r, c, (a[0], a[1], b[0], b[1])))
    return d


def _smooth_polyline(ctrl, n=40):
    """Piecewise-linear control polygon resampled and lightly smoothed."""
    s = np.linspace(0, 1, len(ctrl))
    q = np.linspace(0, 1, n)
    pts = np.stack([np.interp(q, s, ctrl[:, 0]), np.interp(q, s, ctrl[:, 1])], 1)
    k = np.array([0.25, 0.5, 0.25])
    inner = pts.copy()
    inner[1:-1, 1] = np.convolve(pts[:, 1], k, mode="valid")
    return inner


def render(ident, pose=None):
    """RGB image and skin mask of an identity seen through ``pose``.

    ``pose`` maps canonical (row, col) to image coordinates as
    ``x -> A @ (x - centre) + centre + t``; None is the identity pose.
    """
    rr, cc = np.mgrid[:HEIGHT, :WIDTH].astype(np.float64)
    if pose is not None:
        A, t = pose
        centre = np.array([HEIGHT / 2, WIDTH / 2])
        Ai = np.linalg.inv(A)
        p = np.stack([rr.ravel() - centre[0] - t[0], cc.ravel() - centre[1] - t[1]])
        q = Ai @ p
        rr = (q[0] + centre[0]).reshape(HEIGHT, WIDTH)
        cc = (q[1] + centre[1]).reshape(HEIGHT, WIDTH)
    top, bottom = ident.band
    mask = (rr >= top) & (rr <= bottom)
    shade = np.zeros((HEIGHT, WIDTH))
    for ctrl, dk in zip(ident.wrinkles, ident.wrinkle_dark):
        d = _polyline_distance(rr, cc, _smooth_polyline(ctrl))
        shade += dk * np.exp(-d ** 2 / (2 * WRINKLE_SIGMA ** 2))
    for seg, dk in zip(ident.segments, ident.seg_dark):
        d = _segment_distance(rr, cc, seg)
        shade += dk * np.exp(-d ** 2 / (2 * MINOR_SIGMA ** 2))
    for (r0, c0, rad), dk in zip(ident.spots, ident.spot_dark):
        d = np.hypot(rr - r0, cc - c0)
        shade += dk * np.exp(-(d / rad) ** 2)
    grad = 1 + ident.tone_slope * (cc / WIDTH - 0.5)
    skin = ident.tone[None, None, :] * grad[..., None] * (1 - np.minimum(shade, 0.8))[..., None]
    bgv = ident.background[None, None, :] * (1 + 0.08 * np.sin(cc / 23.0 + rr / 31.0))[..., None]
    img = np.where(mask[..., None], skin, bgv)
    return img, mask


def random_pose(rng, difficulty):
    u = rng.uniform(-1, 1, 5)
    th = np.deg2rad(ROTATION_DEG * difficulty * u[0])
    s = 1 + SCALE_JITTER * difficulty * u[1]
    A = s * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    t = np.array([SHIFT_FRAC * HEIGHT * difficulty * u[2], SHIFT_FRAC * WIDTH * difficulty * u[3]])
    gain = 1 + GAIN_JITTER * difficulty * u[4]
    return (A, t), gain


def synth_image(ident, seed, image_index, difficulty):
    """One perturbed image (float RGB in [0, 1]) and its true skin mask."""
    rng = np.random.default_rng([seed, ident.index, image_index, SYNTH_VERSION, 1])
    pose, gain = random_pose(rng, difficulty)
    img, mask = render(ident, pose if difficulty > 0 else None)
    img = img * gain
    if difficulty > 0:
        img = img + NOISE_SIGMA * difficulty * rng.standard_normal(img.shape)
    return np.clip(img, 0.0, 1.0), mask


def _point_keys(ident):
    return {(round(float(r), 6), round(float(c), 6)) for r, c in ident.control_points()}


@dataclass(frozen=True)
class SynthDataset:
    identities: tuple
    images: tuple          # as stored: mirrored for wrists flagged ``flip``
    masks: tuple           # true skin masks, same orientation as ``images``
    records: tuple         # ManifestRecord per image, paths relative to the output directory
    difficulty: float
    seed: int

    def write(self, out_dir, manifest_name="manifest.csv"):
        """PNG images, PNG masks and the manifest; returns the manifest path."""
        from .manifest import save_image, save_mask, write_manifest
        os.makedirs(out_dir, exist_ok=True)
        for rec, img, m in zip(self.records, self.images, self.masks):
            for rel in (rec.path, rec.mask):
                os.makedirs(os.path.dirname(os.path.join(out_dir, rel)) or out_dir, exist_ok=True)
            save_image(os.path.join(out_dir, rec.path), img)
            save_mask(os.path.join(out_dir, rec.mask), m)
        path = os.path.join(out_dir, manifest_name)
        write_manifest(path, self.records)
        return path


def synth_dataset(n, images_per_id, difficulty=0.2, seed=0, gallery_per_id=None):
    """Deterministic synthetic wrist database.

    Parameters
    ----------
    n : int
        Identities (>= 2).
    images_per_id : int
    difficulty : float
        Scales pose jitter, gain spread and noise; 0 renders every image of
        an identity identically (gain 1, no noise).
    seed : int
    gallery_per_id : int, optional
        The first this many images of an identity are tagged ``gallery``
        and the rest ``probe``; defaults to all but one (or all, when a
        single image is requested).

    Notes
    -----
    Odd-numbered identities play right wrists: their images are stored
    mirrored and flagged ``flip`` so loading restores the canonical
    orientation. Identities whose wrinkle control points collide with an
    earlier one are redrawn, so no two share wrinkle geometry.
    """
    from .manifest import ManifestRecord
    if n < 2:
        raise ValueError("need at least 2 identities")
    if images_per_id < 1:
        raise ValueError("need at least one image per identity")
    if gallery_per_id is None:
        gallery_per_id = max(1, images_per_id - 1)
    idents, seen = [], set()
    for i in range(n):
        attempt = 0
        while True:
            ident = make_identity(seed + 7919 * attempt, i)
            keys = _point_keys(ident)
            if not keys & seen:
                break
            attempt += 1
        seen |= keys
        idents.append(ident)
    images, masks, records = [], [], []
    for ident in idents:
        wid = "w%03d" % ident.index
        flip = ident.index % 2 == 1
        for j in range(images_per_id):
            img, m = synth_image(ident, seed, j, difficulty)
            if flip:
                img, m = img[:, ::-1].copy(), m[:, ::-1].copy()
            images.append(img)
            masks.append(m)
            name = "%s_%02d" % (wid, j)
            records.append(ManifestRecord("images/%s.png" % name, wid, "s%03d" % ident.index,
                                          "gallery" if j < gallery_per_id else "probe", flip,
                                          "masks/%s.png" % name))
    return SynthDataset(tuple(idents), tuple(images), tuple(masks), tuple(records),
                        float(difficulty), int(seed))


def skin_training_data(seed=1, count=10, difficulty=0.2):
    """Superpixel features and skin targets from ``count`` synthetic images.

    The images come from identities of their own seed so a classifier
    trained here has not seen the evaluation identities.
    """
    from ..segmentation import describe_superpixels, superpixel_targets
    X, y = [], []
    for i in range(count):
        ident = make_identity(seed, 10000 + i)
        img, m = synth_image(ident, seed, 0, difficulty)
        _, lab, f = describe_superpixels(img)
        X.append(f)
        y.append(superpixel_targets(lab, m))
    return np.concatenate(X), np.concatenate(y)
