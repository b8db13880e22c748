"""Command line: ``wristmatch <command> ...``.

Commands
--------
segment    skin masks for a folder of images
roi        key points, templates and ROI#1/ROI#2 crops
features   16466-d feature records for ROI images
train      a self-contained gallery model from a manifest
identify   ranked wrist ids for one probe image
evaluate   the gallery/probe protocol: report.json and cmc.svg
synth      a synthetic dataset with manifest and masks

Relative paths resolve against the workspace (``--workspace``, else
``$WRISTMATCH_WORKSPACE``, else the current directory). Exit codes: 0 ok,
2 usage, 3 data or protocol error, 4 numeric failure. Logs go to stderr.
"""
import argparse
import logging
import os
import sys

import numpy as np

from .config import WORKSPACE_ENV, ConfigError, RunConfig
from .pipeline import NUMERIC, PipelineError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
IMAGE_EXT = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")
log = logging.getLogger("wristmatch")


class UsageError(Exception):
    pass


def _path(ws, p):
    return p if p is None or os.path.isabs(p) else os.path.join(ws, p)


def _images(ws, src):
    """Sorted image files of a directory or a single file."""
    src = _path(ws, src)
    if os.path.isdir(src):
        files = sorted(f for f in os.listdir(src) if f.lower().endswith(IMAGE_EXT))
        return [os.path.join(src, f) for f in files]
    if os.path.isfile(src):
        return [src]
    raise FileNotFoundError("no such image or directory: %s" % src)


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def _config(args):
    cfg = RunConfig.load(_path(args.workspace, args.config)) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "jobs", None) is not None:
        cfg = cfg.replace(jobs=args.jobs)
    return cfg


def _skin_from_manifest(ws, manifest_path, cfg):
    """Train a skin classifier on gallery images of a manifest that list masks."""
    from .evaluation.manifest import load_image, load_manifest, load_mask
    from .segmentation import describe_superpixels, superpixel_targets, train_skin_classifier
    man = load_manifest(_path(ws, manifest_path))
    recs = [r for r in man.gallery if r.mask][:cfg.skin_training_images]
    if not recs:
        raise UsageError("manifest %s lists no gallery masks to train on" % manifest_path)
    X, y = [], []
    for r in recs:
        _, lab, f = describe_superpixels(load_image(man.resolve(r.path), r.flip), cfg.superpixels,
                                         cfg.compactness)
        X.append(f)
        y.append(superpixel_targets(lab, load_mask(man.resolve(r.mask), r.flip)))
    return train_skin_classifier(np.concatenate(X), np.concatenate(y), cfg.trees, cfg.seed,
                                 jobs=cfg.workers)


def cmd_segment(args):
    from .evaluation.manifest import load_image, save_mask
    from .segmentation import SkinClassifier, segment
    ws, cfg = args.workspace, _config(args)
    if args.model and os.path.exists(_path(ws, args.model)) and not args.train_manifest:
        clf = SkinClassifier.load(_path(ws, args.model))
    elif args.train_manifest:
        clf = _skin_from_manifest(ws, args.train_manifest, cfg)
        if args.model:
            clf.save(_path(ws, args.model))
            log.info("saved skin model to %s", args.model)
    else:
        raise UsageError("segment needs an existing --model or --train-manifest with masks")
    out = _path(ws, args.out)
    os.makedirs(out, exist_ok=True)
    for f in _images(ws, args.inp):
        m = segment(load_image(f), clf, cfg.superpixels, cfg.compactness)
        if m.empty:
            log.warning("%s: no skin found", f)
        save_mask(os.path.join(out, _stem(f) + ".png"), m.mask)
    return EXIT_OK


def cmd_roi(args):
    from .evaluation.manifest import load_image, load_mask
    from .pipeline import Stage
    from .roi import WristTemplate, build_template, keypoints_both, roi_from_keypoints
    ws, cfg = args.workspace, _config(args)
    out = _path(ws, args.out)
    os.makedirs(out, exist_ok=True)
    items = []
    for f in _images(ws, args.inp):
        mask_path = os.path.join(_path(ws, args.masks), _stem(f) + ".png")
        rgb, mask = load_image(f), load_mask(mask_path)
        with Stage("keypoints", f):
            kp = keypoints_both(rgb, mask, cfg.a)
        for v, suffix in (("ROI#1", "kp1"), ("ROI#2", "kp2")):
            with open(os.path.join(out, "%s.%s.txt" % (_stem(f), suffix)), "w") as fh:
                fh.write(kp[v].to_text())
        items.append((f, rgb, mask, kp))
    templates = {}
    for v, suffix in (("ROI#1", "roi1"), ("ROI#2", "roi2")):
        if args.template:
            with open(_path(ws, args.template.replace("{variant}", suffix))) as fh:
                templates[v] = WristTemplate.from_text(fh.read())
        else:
            with Stage("template", v):
                templates[v] = build_template([kp[v] for _, _, _, kp in items])
            with open(os.path.join(out, "template_%s.txt" % suffix), "w") as fh:
                fh.write(templates[v].to_text())
    for f, rgb, mask, kp in items:
        for v in cfg.variants:
            with Stage("roi", f):
                roi = roi_from_keypoints(rgb, mask, kp[v], templates[v], v, kp["graph"].scale)
            roi.save_png(os.path.join(out, _stem(f)))
    return EXIT_OK


def cmd_features(args):
    from .features import extract_features
    from .roi import RoiImage
    ws = args.workspace
    out = _path(ws, args.out)
    os.makedirs(out, exist_ok=True)
    for f in _images(ws, args.inp):
        fv = extract_features(RoiImage.load_png(f))
        with open(os.path.join(out, _stem(f) + ".wmf"), "wb") as fh:
            fh.write(fv.to_bytes())
        if args.csv:
            with open(os.path.join(out, _stem(f) + ".csv"), "w") as fh:
                fh.write(fv.to_csv())
    return EXIT_OK


def _gallery_only(manifest):
    from .evaluation.manifest import DatasetManifest
    return DatasetManifest(manifest.gallery, manifest.root)


def cmd_train(args):
    from .evaluation import load_manifest, run_experiment
    from .evaluation.manifest import ProtocolError
    ws, cfg = args.workspace, _config(args)
    man = load_manifest(_path(ws, args.manifest))
    if len(man.wrist_ids) < 2:
        raise ProtocolError("one-vs-all training needs at least 2 gallery wrists; manifest has only %s"
                            % ", ".join(man.wrist_ids))
    res = run_experiment(_gallery_only(man), cfg, ws)
    res.gallery.save(_path(ws, args.out))
    log.info("gallery of %d wrists saved to %s", len(res.gallery.wrist_ids), args.out)
    return EXIT_OK


def cmd_identify(args):
    from .evaluation.manifest import load_image
    from .matching import GalleryModel
    from .pipeline import full_image, identify, unbundle_gallery
    ws = args.workspace
    gallery = GalleryModel.load(_path(ws, args.gallery))
    templates, clf, stored = unbundle_gallery(gallery)
    cfg = RunConfig.from_dict(stored) if stored else RunConfig()
    if args.jobs is not None:
        cfg = cfg.replace(jobs=args.jobs)
    tail = args.tail if args.tail is not None else cfg.tail_fraction
    probe = _path(ws, args.probe)
    st = full_image(probe, load_image(probe, args.flip), clf, templates, cfg.replace(variants=gallery.variants))
    tables, decisions = identify(gallery, st.features, tail)
    name = args.system or ("WMM" if "WMM" in decisions else next(iter(tables)))
    if name in decisions:
        t, chosen = decisions[name].table, decisions[name].system
    elif name in tables:
        t, chosen = tables[name], name
    else:
        raise UsageError("unknown system %s" % name)
    log.info("%s chose %s", name, chosen)
    lines = []
    for r, i in enumerate(t.order[:args.top], start=1):
        lines.append("%d\t%s\t%.6f\t%s" % (r, t.wrist_ids[i], t.scores[i], chosen))
    sys.stdout.write("\n".join(lines) + "\n")
    if args.json and name in decisions:
        with open(_path(ws, args.json), "w") as fh:
            fh.write(decisions[name].to_json(args.probe, args.top) + "\n")
    return EXIT_OK


def cmd_evaluate(args):
    from .evaluation import load_manifest, run_experiment, write_report
    ws, cfg = args.workspace, _config(args)
    res = run_experiment(load_manifest(_path(ws, args.manifest)), cfg, ws)
    for p in write_report(res, _path(ws, args.out)):
        log.info("wrote %s", p)
    for name, v in res.report["rank1"].items():
        log.info("rank-1 %-8s %.4f", name, v)
    if args.gallery_out:
        res.gallery.save(_path(ws, args.gallery_out))
    return EXIT_OK


def cmd_synth(args):
    from .evaluation import synth_dataset
    ds = synth_dataset(args.identities, args.images, args.difficulty, args.seed, args.gallery)
    path = ds.write(_path(args.workspace, args.out))
    log.info("wrote %d images and %s", len(ds.images), path)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="wristmatch", description="Wrist image identification pipeline.")
    p.add_argument("--workspace", default=os.environ.get(WORKSPACE_ENV, "."),
                   help="root for relative paths (default $%s or .)" % WORKSPACE_ENV)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--jobs", type=int, default=None, help="worker threads (default: logical cores)")
        return sp

    s = add("segment", cmd_segment, "skin masks for images")
    s.add_argument("--in", dest="inp", required=True, help="image file or directory")
    s.add_argument("--model", help="skin classifier file (read, or written after training)")
    s.add_argument("--train-manifest", help="train on this manifest's gallery masks")
    s.add_argument("--out", required=True)
    s.add_argument("--config")

    s = add("roi", cmd_roi, "key points, templates and ROI crops")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--masks", required=True, help="directory of masks named like the images")
    s.add_argument("--template", help="template file; '{variant}' expands to roi1/roi2 "
                                      "(default: build from the inputs)")
    s.add_argument("--out", required=True)
    s.add_argument("--config")

    s = add("features", cmd_features, "feature records for ROI images")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--csv", action="store_true", help="also write CSV")

    s = add("train", cmd_train, "train a gallery model")
    s.add_argument("--manifest", required=True)
    s.add_argument("--config")
    s.add_argument("--out", default="gallery.model")

    s = add("identify", cmd_identify, "identify one probe image")
    s.add_argument("--gallery", required=True)
    s.add_argument("--probe", required=True)
    s.add_argument("--flip", action="store_true", help="mirror the probe (right wrist)")
    s.add_argument("--top", type=int, default=10)
    s.add_argument("--system", help="system or meta-system to report (default WMM)")
    s.add_argument("--tail", type=float, help="tail fraction override")
    s.add_argument("--json", help="also write the meta decision as JSON")

    s = add("evaluate", cmd_evaluate, "run the gallery/probe protocol")
    s.add_argument("--manifest", required=True)
    s.add_argument("--config")
    s.add_argument("--out", default=".", help="directory for report.json and cmc.svg")
    s.add_argument("--gallery-out", help="also save the trained gallery model")

    s = add("synth", cmd_synth, "generate a synthetic dataset")
    s.add_argument("--identities", type=int, default=20)
    s.add_argument("--images", type=int, default=6)
    s.add_argument("--gallery", type=int, default=4, help="gallery images per identity")
    s.add_argument("--difficulty", type=float, default=0.2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    return p


def main(argv=None):
    from .evaluation.manifest import ManifestError
    from .matching.gallery import GalleryError, GalleryFormatError
    from .roi import RoiExtractionError
    from .segmentation.forest import ModelFormatError
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.fn(args)
    except (UsageError, ConfigError) as e:
        log.error("%s", e)
        return EXIT_USAGE
    except PipelineError as e:
        log.error("%s", e)
        return EXIT_NUMERIC if e.kind == NUMERIC else EXIT_DATA
    except (ManifestError, GalleryError, GalleryFormatError, ModelFormatError,
            RoiExtractionError, OSError) as e:
        log.error("%s", e)
        return EXIT_DATA
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        log.error("numeric failure: %s", e)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
