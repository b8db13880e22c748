from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..imagecore import as_rgb, resize_mask, resize_to_height
from .features import plane_stack, superpixel_features
from .slic import slic

WORK_HEIGHT = 200
N_SUPERPIXELS = 200
HOLE_FRACTION = 0.01


@dataclass(frozen=True)
class SkinMask:
    mask: np.ndarray  # (H, W) bool, True = skin
    empty: bool = False

    @property
    def shape(self):
        return self.mask.shape


def describe_superpixels(rgb, k=N_SUPERPIXELS, compactness=10.0):
    """Resize to the working height, run SLIC and return (small_rgb, labeling, features)."""
    small = np.clip(resize_to_height(as_rgb(rgb), WORK_HEIGHT), 0.0, 1.0)
    labeling = slic(small, k=k, compactness=compactness)
    feats = superpixel_features(labeling, plane_stack(small))
    return small, labeling, feats


def superpixel_targets(labeling, truth_mask):
    """Majority ground-truth label of each superpixel (for training data)."""
    truth = resize_mask(truth_mask, labeling.labels.shape)
    flat = labeling.labels.ravel()
    skin = np.bincount(flat, weights=truth.ravel().astype(float), minlength=labeling.count)
    n = np.bincount(flat, minlength=labeling.count)
    return (2 * skin > n).astype(np.int64)


def clean_mask(mask):
    """Keep the largest 8-connected component and fill holes below 1% of its area."""
    lab, n = ndimage.label(mask, structure=np.ones((3, 3)))
    if n == 0:
        return mask.copy()
    sizes = np.bincount(lab.ravel())
    sizes[0] = 0
    biggest = lab == np.argmax(sizes)
    holes, nh = ndimage.label(~biggest)
    if nh:
        hsizes = np.bincount(holes.ravel())
        # holes touching the border are background, not holes
        border = np.unique(np.concatenate([holes[0], holes[-1], holes[:, 0], holes[:, -1]]))
        small = hsizes < HOLE_FRACTION * biggest.sum()
        small[0] = False
        small[border] = False
        biggest = biggest | small[holes]
    return biggest


def segment(rgb, classifier, k=N_SUPERPIXELS, compactness=10.0):
    """Skin mask at the input resolution.

    Superpixels voted skin by a strict majority of trees are united, then
    cleaned with :func:`clean_mask`. When no superpixel is skin the result
    is an all-False mask with ``empty=True``.
    """
    rgb = as_rgb(rgb)
    _, labeling, feats = describe_superpixels(rgb, k, compactness)
    return mask_from_description(rgb.shape[:2], labeling, feats, classifier)


def mask_from_description(shape, labeling, feats, classifier):
    """The classification half of :func:`segment`, on precomputed superpixels."""
    skin_sp = classifier.predict(feats)
    small_mask = skin_sp[labeling.labels]
    if not small_mask.any():
        return SkinMask(np.zeros(shape, dtype=bool), empty=True)
    small_mask = clean_mask(small_mask)
    if small_mask.shape != tuple(shape):
        mask = resize_mask(small_mask, shape)
    else:
        mask = small_mask
    return SkinMask(mask, empty=not mask.any())


def apply_mask(rgb, mask):
    """Zero the non-skin pixels of an RGB image."""
    return as_rgb(rgb) * np.asarray(mask, dtype=np.float64)[..., None]


__all__ = ["SkinMask", "segment", "mask_from_description", "describe_superpixels", "superpixel_targets",
           "clean_mask", "apply_mask"]
