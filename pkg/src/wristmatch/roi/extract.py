"""Template alignment and ROI cropping."""
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, PngImagePlugin
from scipy import ndimage

from ..imagecore import as_rgb, resize
from .cpd import cpd_affine_register

ROI_SHAPE = (128, 80)
CANVAS_SCALE = 5
ROW_FILL = 0.75
VARIANTS = ("ROI#1", "ROI#2")
SUFFIX = {"ROI#1": "roi1", "ROI#2": "roi2"}


class RoiExtractionError(ValueError):
    pass


@dataclass(frozen=True)
class RoiImage:
    pixels: np.ndarray   # (128, 80, 3) in [0, 1]
    variant: str

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError("unknown ROI variant %r" % self.variant)

    def save_png(self, stem):
        """Write ``<stem>_roi1.png`` or ``<stem>_roi2.png``; returns the path."""
        path = Path("%s_%s.png" % (stem, SUFFIX[self.variant]))
        info = PngImagePlugin.PngInfo()
        info.add_text("variant", self.variant)
        px = np.round(np.clip(self.pixels, 0, 1) * 255).astype(np.uint8)
        Image.fromarray(px).save(path, pnginfo=info)
        return path

    @classmethod
    def load_png(cls, path):
        im = Image.open(path)
        variant = im.text.get("variant")
        if variant is None:
            variant = "ROI#2" if str(path).endswith("_roi2.png") else "ROI#1"
        return cls(np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0, variant)


def align(rgb, mask, keypoints, template, scale=(1.0, 1.0), k=CANVAS_SCALE):
    """Warp an image into the template frame, magnified ``k`` times.

    The affine map from the image key points (40-row frame) to the template
    comes from CPD. ``scale`` gives input pixels per frame pixel.

    Returns
    -------
    (rgb, mask, AffineTransform)
    """
    rgb = as_rgb(rgb)
    T = cpd_affine_register(keypoints.points(), template.points)
    inv = T.inverse()
    h, w = template.frame
    p, q = np.mgrid[:h * k, :w * k]
    tpl = np.stack([(p.ravel() + 0.5) / k - 0.5, (q.ravel() + 0.5) / k - 0.5], axis=1)
    src = inv(tpl)
    rows = (src[:, 0] + 0.5) * scale[0] - 0.5
    cols = (src[:, 1] + 0.5) * scale[1] - 0.5
    out = np.stack([
        ndimage.map_coordinates(rgb[..., c], [rows, cols], order=1, mode="constant", cval=0.0)
        for c in range(3)
    ], axis=-1).reshape(h * k, w * k, 3)
    m = ndimage.map_coordinates(np.asarray(mask, dtype=np.float64), [rows, cols],
                                order=1, mode="constant", cval=0.0)
    return out, (m >= 0.5).reshape(h * k, w * k), T


def crop_columns(template, k=CANVAS_SCALE):
    """Canvas column range between the template's two wrinkles."""
    c1, c2 = sorted(template.wrinkle_columns())
    lo = int(np.round((c1 + 0.5) * k - 0.5))
    hi = int(np.round((c2 + 0.5) * k - 0.5))
    return lo, hi


def extract_roi(aligned_rgb, aligned_mask, variant, columns):
    """Crop between ``columns`` (inclusive), keep rows more than 3/4 foreground, resample.

    Parameters
    ----------
    columns : (int, int)
        Column range of the crop, see :func:`crop_columns`.
    """
    lo, hi = columns
    lo = max(lo, 0)
    hi = min(hi, aligned_mask.shape[1] - 1)
    if hi < lo:
        raise RoiExtractionError("empty column range")
    sub_m = np.asarray(aligned_mask, dtype=bool)[:, lo:hi + 1]
    rows = sub_m.sum(axis=1) > ROW_FILL * sub_m.shape[1]
    if not rows.any():
        raise RoiExtractionError("no row is more than 3/4 foreground")
    crop = as_rgb(aligned_rgb)[:, lo:hi + 1][rows]
    return RoiImage(np.clip(resize(crop, ROI_SHAPE), 0.0, 1.0), variant)
