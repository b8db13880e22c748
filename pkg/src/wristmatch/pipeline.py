"""Per-image pipeline stages with stage-tagged failures.

Every stage wraps the module that implements it and converts its errors
into :class:`PipelineError`, which names the stage, the item being
processed, and whether the failure is a data problem or a numeric one.
"""
from dataclasses import dataclass

import numpy as np

from .features import extract_features
from .matching import GalleryModel, TrainingError, match_probe
from .matching.gallery import GalleryError
from .metarec import DegenerateFitError
from .roi import (VARIANT_PROCEDURE, DegenerateWrinkleError, EmptyMaskError, RoiExtractionError,
                  SingularTransformError, TemplateError, WristTemplate, keypoints_both,
                  roi_from_keypoints)
from .roi.graph import NegativeCycleError
from .segmentation import SkinClassifier, describe_superpixels, mask_from_description
from .segmentation.forest import ModelFormatError
from .segmentation.forest import TrainingError as SkinTrainingError

DATA, NUMERIC = "data", "numeric"
DATA_ERRORS = (EmptyMaskError, DegenerateWrinkleError, RoiExtractionError, TemplateError,
               GalleryError, SkinTrainingError, ModelFormatError, OSError)
NUMERIC_ERRORS = (SingularTransformError, TrainingError, DegenerateFitError, NegativeCycleError,
                  np.linalg.LinAlgError, FloatingPointError)
META_SYSTEMS = (("RS_PLS", ("RS_PLS1", "RS_PLS2")), ("RS_SVM", ("RS_SVM1", "RS_SVM2")),
                ("WMM", ("RS_PLS1", "RS_PLS2", "RS_SVM1", "RS_SVM2")))


class PipelineError(RuntimeError):
    def __init__(self, stage, item, message, kind=DATA):
        super().__init__("[%s] %s: %s" % (stage, item, message))
        self.stage, self.item, self.kind = stage, item, kind


class Stage:
    """Context manager tagging errors raised inside with a stage name."""

    def __init__(self, stage, item):
        self.stage, self.item = stage, item

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        if ev is None or isinstance(ev, PipelineError):
            return False
        if isinstance(ev, NUMERIC_ERRORS):
            raise PipelineError(self.stage, self.item, str(ev), NUMERIC) from ev
        if isinstance(ev, (ValueError,) + DATA_ERRORS):
            raise PipelineError(self.stage, self.item, str(ev), DATA) from ev
        return False


@dataclass
class ImageState:
    """Intermediate results of one image; filled stage by stage."""

    item: str
    rgb: np.ndarray
    labeling: object = None
    superpixel_features: np.ndarray = None
    mask: np.ndarray = None
    keypoints: dict = None
    features: dict = None


def describe(state, config):
    with Stage("segmentation", state.item):
        _, state.labeling, state.superpixel_features = describe_superpixels(
            state.rgb, config.superpixels, config.compactness)
    return state


def classify(state, classifier):
    with Stage("segmentation", state.item):
        sm = mask_from_description(state.rgb.shape[:2], state.labeling, state.superpixel_features,
                                   classifier)
        if sm.empty:
            raise EmptyMaskError("no skin superpixels found")
        state.mask = sm.mask
    return state


def locate(state, config):
    with Stage("keypoints", state.item):
        state.keypoints = keypoints_both(state.rgb, state.mask, config.a)
    return state


def featurize(state, templates, variants):
    feats = {}
    g = state.keypoints["graph"]
    for v in variants:
        with Stage("roi", state.item):
            roi = roi_from_keypoints(state.rgb, state.mask, state.keypoints[v], templates[v], v, g.scale)
        with Stage("features", state.item):
            feats[v] = extract_features(roi)
    state.features = feats
    return state


def full_image(item, rgb, classifier, templates, config):
    """Segmentation through features for a single image."""
    s = ImageState(item, rgb)
    describe(s, config)
    classify(s, classifier)
    locate(s, config)
    return featurize(s, templates, config.variants)


def meta_tables(tables, meta_systems=META_SYSTEMS):
    """Meta-systems whose subsystems are all present in ``tables``."""
    return tuple((name, subs) for name, subs in meta_systems if all(s in tables for s in subs))


def identify(gallery, features, tail_fraction=0.5):
    """Score tables of every system plus the meta-selections.

    Returns
    -------
    tables : dict
        System name -> ScoreTable.
    decisions : dict
        Meta-system name -> MetaDecision.
    """
    from .metarec import meta_select
    with Stage("matching", "probe"):
        tables = match_probe(gallery, features)
    decisions = {}
    with Stage("meta", "probe"):
        for name, subs in meta_tables(tables):
            decisions[name] = meta_select([tables[s] for s in subs], tail_fraction)
    return tables, decisions


# sections of a self-contained gallery file
SKIN_SECTION = "skin"
TEMPLATE_SECTION = "template:"
CONFIG_SECTION = "config"


def bundle_gallery(gallery, templates, classifier, config):
    import json
    sections = {TEMPLATE_SECTION + v: t.to_text().encode("utf-8") for v, t in templates.items()}
    sections[SKIN_SECTION] = classifier.to_bytes()
    sections[CONFIG_SECTION] = json.dumps(config.to_dict(), sort_keys=True).encode("utf-8")
    return GalleryModel(gallery.wrist_ids, gallery.variants, gallery.dim, gallery.classifiers,
                        gallery.meta, sections)


def unbundle_gallery(gallery):
    """(templates, skin classifier, config dict) stored in a gallery file."""
    import json
    sec = gallery.sections
    missing = [n for n in [SKIN_SECTION] + [TEMPLATE_SECTION + v for v in gallery.variants]
               if n not in sec]
    if missing:
        raise GalleryError("gallery file lacks sections: %s" % ", ".join(missing))
    templates = {v: WristTemplate.from_text(sec[TEMPLATE_SECTION + v].decode("utf-8"))
                 for v in gallery.variants}
    cfg = json.loads(sec[CONFIG_SECTION].decode("utf-8")) if CONFIG_SECTION in sec else {}
    return templates, SkinClassifier.from_bytes(sec[SKIN_SECTION]), cfg


__all__ = ["DATA", "ImageState", "META_SYSTEMS", "NUMERIC", "PipelineError", "Stage",
           "VARIANT_PROCEDURE", "bundle_gallery", "classify", "describe", "featurize",
           "full_image", "identify", "locate", "meta_tables", "unbundle_gallery"]
