"""Key point localization, template alignment and ROI cropping."""
from .cpd import AffineTransform, SingularTransformError, cpd_affine_register
from .extract import (ROI_SHAPE, VARIANTS, RoiExtractionError, RoiImage, align, crop_columns,
                      extract_roi)
from .graph import (FRAME_HEIGHT, Boundaries, EmptyMaskError, PathTable, WristGraph,
                    all_pairs_shortest_paths, boundaries, build_graph, gradient_image)
from .template import LABELS, TemplateError, WristTemplate, build_template
from .wrinkles import (PROC2, PROC23, DegenerateWrinkleError, KeyPointSet, WrinklePath,
                       adjust_path, detect_wrinkles, locate_keypoints)

VARIANT_PROCEDURE = {"ROI#1": PROC2, "ROI#2": PROC23}


def keypoints_both(rgb, mask, a=0.2):
    """Proc2 and Proc2/3 key points of one image, sharing the graph.

    Returns
    -------
    dict
        ``{"ROI#1": KeyPointSet, "ROI#2": KeyPointSet, "graph": WristGraph}``
    """
    g, _ = build_graph(rgb, mask)
    b = boundaries(g.mask)
    out = {"graph": g}
    for variant, proc in VARIANT_PROCEDURE.items():
        P1, P2 = detect_wrinkles(g, b.b_up, b.b_down, a, adjust=proc == PROC23)
        out[variant] = KeyPointSet(b, (P1, P2), proc, g.mask.shape)
    return out


def roi_from_keypoints(rgb, mask, keypoints, template, variant, scale):
    """Align with CPD, then crop between the template wrinkles."""
    arg, am, _ = align(rgb, mask, keypoints, template, scale)
    return extract_roi(arg, am, variant, crop_columns(template))


__all__ = [
    "AffineTransform", "Boundaries", "DegenerateWrinkleError", "EmptyMaskError", "FRAME_HEIGHT",
    "KeyPointSet", "LABELS", "PROC2", "PROC23", "PathTable", "ROI_SHAPE", "RoiExtractionError",
    "RoiImage", "SingularTransformError", "TemplateError", "VARIANTS", "VARIANT_PROCEDURE",
    "WrinklePath", "WristGraph", "WristTemplate", "adjust_path", "align", "all_pairs_shortest_paths",
    "boundaries", "build_graph", "build_template", "cpd_affine_register", "crop_columns",
    "detect_wrinkles", "extract_roi", "gradient_image", "keypoints_both", "locate_keypoints",
    "roi_from_keypoints",
]
