"""Skin segmentation: SLIC superpixels, 450-d descriptors, bagged trees."""
from .features import FEATURE_DIM, plane_stack, superpixel_features, superpixel_stats
from .forest import SkinClassifier, TrainingError, train_skin_classifier
from .segment import (SkinMask, apply_mask, clean_mask, describe_superpixels, mask_from_description,
                      segment, superpixel_targets)
from .slic import SuperpixelLabeling, slic

__all__ = [
    "FEATURE_DIM", "SkinClassifier", "SkinMask", "SuperpixelLabeling", "TrainingError",
    "apply_mask", "clean_mask", "describe_superpixels", "mask_from_description", "plane_stack", "segment", "slic",
    "superpixel_features", "superpixel_stats", "superpixel_targets", "train_skin_classifier",
]
