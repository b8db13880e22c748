"""LBP, Gabor orientation and dense SIFT features over block grids."""
from .dsift import dsift
from .extract import (DSIFT_DIM, FEATURE_DIM, GABOR_DIM, LBP_DIM, SEGMENTS, FeatureFormatError,
                      FeatureVector, extract_features)
from .gabor import GaborBank, default_bank, gabor_histograms, gabor_orientation_field
from .grids import GRIDS, ROI_SHAPE, GridSpec
from .lbp import RIU2, U2, lbp_code, lbp_codes, lbp_riu2_hist, lbp_u2_hist, transitions

__all__ = [
    "DSIFT_DIM", "FEATURE_DIM", "FeatureFormatError", "FeatureVector", "GABOR_DIM", "GRIDS",
    "GaborBank", "GridSpec", "LBP_DIM", "RIU2", "ROI_SHAPE", "SEGMENTS", "U2", "default_bank",
    "dsift", "extract_features", "gabor_histograms", "gabor_orientation_field", "lbp_code",
    "lbp_codes", "lbp_riu2_hist", "lbp_u2_hist", "transitions",
]
