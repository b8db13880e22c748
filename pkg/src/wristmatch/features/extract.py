"""The 16466-d wrist descriptor and its binary record."""
import struct
from dataclasses import dataclass

import numpy as np

from ..imagecore import as_rgb, luminance
from .dsift import dsift
from .gabor import gabor_histograms, gabor_orientation_field
from .grids import GRIDS, LARGE_GRIDS, ROI_SHAPE, SMALL_GRIDS
from .lbp import lbp_riu2_hist, lbp_u2_hist

LBP_DIM = 13074
GABOR_DIM = 2112
DSIFT_DIM = 1280
FEATURE_DIM = LBP_DIM + GABOR_DIM + DSIFT_DIM
SEGMENTS = {"lbp": (0, LBP_DIM), "gabor": (LBP_DIM, LBP_DIM + GABOR_DIM),
            "dsift": (LBP_DIM + GABOR_DIM, FEATURE_DIM)}
MAGIC = b"WMFEAT\x00\x01"
FORMAT_VERSION = 1


class FeatureFormatError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray   # (16466,) float64

    def __post_init__(self):
        if self.values.shape != (FEATURE_DIM,):
            raise ValueError("feature vector must have %d values, got %s"
                             % (FEATURE_DIM, self.values.shape))

    def segment(self, name):
        a, b = SEGMENTS[name]
        return self.values[a:b]

    def to_bytes(self):
        head = MAGIC + struct.pack("<II", FORMAT_VERSION, FEATURE_DIM)
        return head + self.values.astype("<f4").tobytes()

    @classmethod
    def from_bytes(cls, data):
        if data[:8] != MAGIC:
            raise FeatureFormatError("not a feature vector record")
        version, n = struct.unpack_from("<II", data, 8)
        if version != FORMAT_VERSION or n != FEATURE_DIM:
            raise FeatureFormatError("unsupported record (version %d, length %d)" % (version, n))
        if len(data) != 16 + 4 * n:
            raise FeatureFormatError("truncated feature vector record")
        return cls(np.frombuffer(data, dtype="<f4", offset=16).astype(np.float64))

    def to_csv(self):
        names = np.empty(FEATURE_DIM, dtype=object)
        for name, (a, b) in SEGMENTS.items():
            names[a:b] = name
        rows = ["index,segment,value"]
        rows += ["%d,%s,%r" % (i, s, float(v)) for i, (s, v) in enumerate(zip(names, self.values))]
        return "\n".join(rows) + "\n"


def lbp_features(rgb):
    """riu2 (R=1) on b1, b2 then u2 (R=2) on b3..b7, for R, G and B in turn."""
    parts = []
    for c in range(3):
        plane = rgb[..., c]
        parts += [lbp_riu2_hist(plane, g).ravel() for g in SMALL_GRIDS]
        parts += [lbp_u2_hist(plane, g).ravel() for g in LARGE_GRIDS]
    return np.concatenate(parts)


def extract_features(roi):
    """Descriptor of a 128x80 ROI (a :class:`RoiImage` or an RGB array)."""
    px = getattr(roi, "pixels", roi)
    rgb = as_rgb(px)
    if rgb.shape[:2] != ROI_SHAPE:
        raise ValueError("ROI must be %dx%d, got %dx%d" % (ROI_SHAPE + rgb.shape[:2]))
    gray = luminance(rgb)
    f = np.concatenate([
        lbp_features(rgb),
        gabor_histograms(gabor_orientation_field(gray), GRIDS),
        dsift(gray),
    ]).astype(np.float64)
    return FeatureVector(f)
