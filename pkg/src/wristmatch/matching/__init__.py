"""One-vs-all PLS and linear SVM matching."""
from .gallery import (MATCHERS, SYSTEMS, VARIANTS, Classifier, GalleryError, GalleryFormatError,
                      GalleryModel, ScoreTable, match_probe, train_gallery)
from .pls import PlsModel, PlsTrainingState, TrainingError, nipals, pls_score, pls_train
from .svm import SvmModel, svm_train

__all__ = [
    "Classifier", "GalleryError", "GalleryFormatError", "GalleryModel", "MATCHERS", "PlsModel",
    "PlsTrainingState", "SYSTEMS", "ScoreTable", "SvmModel", "TrainingError", "VARIANTS",
    "match_probe", "nipals", "pls_score", "pls_train", "svm_train", "train_gallery",
]
