"""Raster primitives shared by the pipeline stages.

Images are plain numpy arrays: a plane is a float64 ``(H, W)`` array with
values in [0, 1] and an RGB image is ``(H, W, 3)``. The containers below
only name and group planes; they never copy pixel data more than once.
"""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage import color as skcolor

COLOR_SPACES = ("RGB", "HSV", "LAB", "YCbCr", "YIQ", "nRGB")
COLOR_PLANE_NAMES = (
    "R", "G", "B",
    "H", "S", "V",
    "L", "a", "b",
    "Y", "Cb", "Cr",
    "Yiq", "I", "Q",
    "r", "g", "bn",
)
GRADIENT_NAMES = (
    "sobel_x", "sobel_y", "prewitt_x", "prewitt_y",
    "laplacian", "dog", "log",
)

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
PREWITT_X = np.array([[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]])
LAPLACIAN = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])

DOG_SIGMAS = (1.0, 2.0)
LOG_SIGMA = 1.5

# YIQ (NTSC 1953) and full-range (JPEG) YCbCr matrices
_YIQ = np.array([
    [0.299, 0.587, 0.114],
    [0.596, -0.274, -0.322],
    [0.211, -0.523, 0.312],
])
_YCBCR = np.array([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
])


class DimensionError(ValueError):
    """Planes or images with incompatible shapes."""


@dataclass(frozen=True)
class ColorStack:
    """18 named planes: RGB, HSV, LAB, YCbCr, YIQ and normalized RGB.

    Every plane is rescaled to [0, 1]:

    ========  ======================================================
    RGB, HSV  native [0, 1]
    LAB       L / 100, (a + 128) / 255, (b + 128) / 255
    YCbCr     full-range JPEG transform, offsets 0.5
    YIQ       Y native, I and Q shifted/scaled by their extreme values
    nRGB      c / (R + G + B); black pixels map to 1/3 each
    ========  ======================================================
    """

    planes: np.ndarray  # (18, H, W)

    @property
    def names(self):
        return COLOR_PLANE_NAMES

    @property
    def shape(self):
        return self.planes.shape[1:]

    def __getitem__(self, name):
        return self.planes[COLOR_PLANE_NAMES.index(name)]


@dataclass(frozen=True)
class GradientMapSet:
    """Seven gradient maps of a gray plane, in ``GRADIENT_NAMES`` order."""

    maps: np.ndarray  # (7, H, W)

    @property
    def names(self):
        return GRADIENT_NAMES

    @property
    def shape(self):
        return self.maps.shape[1:]

    def __getitem__(self, name):
        return self.maps[GRADIENT_NAMES.index(name)]


def as_rgb(rgb):
    """Validate and return an ``(H, W, 3)`` float64 RGB array.

    Accepts either a stacked array or a sequence of three planes.
    """
    if isinstance(rgb, (list, tuple)):
        if len(rgb) != 3:
            raise DimensionError("expected three planes, got %d" % len(rgb))
        shapes = {np.shape(p) for p in rgb}
        if len(shapes) != 1:
            raise DimensionError("RGB planes differ in shape: %s" % sorted(shapes))
        rgb = np.stack(rgb, axis=-1)
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise DimensionError("expected (H, W, 3) image, got shape %s" % (rgb.shape,))
    return rgb


def luminance(rgb):
    """Rec. 601 luma, the gray plane used throughout."""
    rgb = as_rgb(rgb)
    return rgb @ _YIQ[0]


def rgb_to_hsv(rgb):
    rgb = as_rgb(rgb)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    safe_c = np.where(c > 0, c, 1.0)
    h = np.zeros_like(v)
    rmax = (v == r) & (c > 0)
    gmax = (v == g) & (c > 0) & ~rmax
    bmax = (c > 0) & ~rmax & ~gmax
    h[rmax] = ((g - b)[rmax] / safe_c[rmax]) % 6.0
    h[gmax] = (b - r)[gmax] / safe_c[gmax] + 2.0
    h[bmax] = (r - g)[bmax] / safe_c[bmax] + 4.0
    return np.stack([h / 6.0, s, v], axis=-1)


def hsv_to_rgb(hsv):
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0] * 6.0, hsv[..., 1], hsv[..., 2]
    c = v * s
    x = c * (1.0 - np.abs(h % 2.0 - 1.0))
    m = v - c
    sector = np.floor(h).astype(int) % 6
    zeros = np.zeros_like(c)
    table = [
        (c, x, zeros), (x, c, zeros), (zeros, c, x),
        (zeros, x, c), (x, zeros, c), (c, zeros, x),
    ]
    out = np.zeros(hsv.shape)
    for k, (rr, gg, bb) in enumerate(table):
        sel = sector == k
        out[..., 0][sel] = rr[sel]
        out[..., 1][sel] = gg[sel]
        out[..., 2][sel] = bb[sel]
    return out + m[..., None]


def normalized_rgb(rgb):
    rgb = as_rgb(rgb)
    total = rgb.sum(axis=-1, keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    return np.where(total > 0, rgb / safe, 1.0 / 3.0)


def to_color_stack(rgb):
    """Convert an RGB image in [0, 1] into the 18-plane :class:`ColorStack`."""
    rgb = as_rgb(rgb)
    hsv = rgb_to_hsv(rgb)
    lab = skcolor.rgb2lab(np.clip(rgb, 0.0, 1.0))
    lab = np.stack([
        lab[..., 0] / 100.0,
        (lab[..., 1] + 128.0) / 255.0,
        (lab[..., 2] + 128.0) / 255.0,
    ], axis=-1)
    ycc = rgb @ _YCBCR.T
    ycc[..., 1:] += 0.5
    yiq = rgb @ _YIQ.T
    yiq[..., 1] = (yiq[..., 1] + 0.596) / 1.192
    yiq[..., 2] = (yiq[..., 2] + 0.523) / 1.046
    nrgb = normalized_rgb(rgb)
    stacked = np.concatenate([rgb, hsv, lab, ycc, yiq, nrgb], axis=-1)
    return ColorStack(np.ascontiguousarray(np.moveaxis(stacked, -1, 0)))


def _check_plane(plane):
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise DimensionError("expected a single (H, W) plane, got shape %s" % (plane.shape,))
    return plane


def correlate(plane, kernel):
    """2-D correlation with replicate borders."""
    return ndimage.correlate(_check_plane(plane), kernel, mode="nearest")


def gaussian_kernel(sigma, radius=None):
    if radius is None:
        radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    return g / g.sum()


def gaussian_blur(plane, sigma):
    plane = _check_plane(plane)
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(plane, k, axis=0, mode="nearest")
    return ndimage.correlate1d(out, k, axis=1, mode="nearest")


def log_kernel(sigma, radius=None):
    """Laplacian-of-Gaussian kernel, forced to zero sum."""
    if radius is None:
        radius = int(np.ceil(3.0 * sigma))
    y, x = np.mgrid[-radius:radius + 1, -radius:radius + 1].astype(np.float64)
    r2 = (x * x + y * y) / (2.0 * sigma * sigma)
    g = np.exp(-r2)
    g /= g.sum()
    k = g * (x * x + y * y - 2.0 * sigma * sigma) / sigma ** 4
    return k - k.mean()


def gradient_maps(gray):
    """The seven gradient maps used as superpixel statistics."""
    gray = _check_plane(gray)
    sx = correlate(gray, SOBEL_X)
    sy = correlate(gray, SOBEL_X.T)
    px = correlate(gray, PREWITT_X)
    py = correlate(gray, PREWITT_X.T)
    lap = correlate(gray, LAPLACIAN)
    dog = gaussian_blur(gray, DOG_SIGMAS[0]) - gaussian_blur(gray, DOG_SIGMAS[1])
    log = correlate(gray, log_kernel(LOG_SIGMA))
    return GradientMapSet(np.stack([sx, sy, px, py, lap, dog, log]))


def _bilinear_axis(n_in, n_out):
    # pixel-centre mapping; identity when n_in == n_out
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def resize(img, shape):
    """Bilinear resize of an ``(H, W)`` or ``(H, W, C)`` array to ``shape``."""
    img = np.asarray(img, dtype=np.float64)
    out_h, out_w = int(shape[0]), int(shape[1])
    if out_h < 1 or out_w < 1:
        raise ValueError("target shape must be positive, got %s" % (shape,))
    if (out_h, out_w) == img.shape[:2]:
        return img.copy()
    r0, r1, tr = _bilinear_axis(img.shape[0], out_h)
    c0, c1, tc = _bilinear_axis(img.shape[1], out_w)
    if img.ndim == 3:
        tr = tr[:, None, None]
        tc = tc[None, :, None]
    else:
        tr = tr[:, None]
        tc = tc[None, :]
    top = img[r0][:, c0] + tc * (img[r0][:, c1] - img[r0][:, c0])
    bot = img[r1][:, c0] + tc * (img[r1][:, c1] - img[r1][:, c0])
    return top + tr * (bot - top)


def resize_to_height(img, target_h):
    """Resize keeping the aspect ratio so that the height is ``target_h``."""
    img = np.asarray(img)
    if target_h < 1:
        raise ValueError("target_h must be >= 1, got %r" % (target_h,))
    h, w = img.shape[:2]
    target_w = max(1, int(round(w * target_h / h)))
    return resize(img, (target_h, target_w))


def resize_mask(mask, shape):
    """Resize a boolean mask: a pixel is set when the bilinear value is >= 0.5."""
    return resize(np.asarray(mask, dtype=np.float64), shape) >= 0.5
