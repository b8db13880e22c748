"""Gallery/probe protocol execution and report assembly."""
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..config import RunConfig
from ..matching import SYSTEMS, train_gallery
from ..metarec import meta_select
from ..pipeline import (ImageState, PipelineError, Stage, bundle_gallery, classify, describe,
                        featurize, locate, meta_tables)
from ..roi import build_template
from ..segmentation import SkinClassifier, superpixel_targets, train_skin_classifier
from .cmc import cmc
from .manifest import DatasetManifest, load_image, load_mask, load_manifest

REPORT_FORMAT = "wristmatch-report/1"
CURVE_ORDER = ("RS_PLS1", "RS_PLS2", "RS_SVM1", "RS_SVM2", "RS_PLS", "RS_SVM", "WMM")
# settings that change how fast a run goes but not what it computes
NON_RESULT_KEYS = ("jobs", "write_svg")


@dataclass
class ExperimentResult:
    report: dict
    tables: list           # per probe: system -> ScoreTable
    decisions: list        # per probe: meta system -> MetaDecision
    truths: list
    gallery: object        # self-contained GalleryModel
    config: RunConfig

    def reselect(self, tail_fraction):
        """Meta-selections recomputed with another tail fraction."""
        out = []
        for tables in self.tables:
            out.append({name: meta_select([tables[s] for s in subs], tail_fraction)
                        for name, subs in meta_tables(tables)})
        return out

    def report_bytes(self):
        return report_bytes(self.report)


def report_bytes(report):
    return (json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n").encode("utf-8")


def _map(fn, items, workers):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _skin_classifier(manifest, states, config, workspace):
    """Load the configured model, or train one on gallery images that have masks."""
    if config.skin_model:
        path = config.skin_model if os.path.isabs(config.skin_model) else os.path.join(workspace, config.skin_model)
        with Stage("segmentation", path):
            return SkinClassifier.load(path), {"source": "model", "path": config.skin_model}
    labeled = [(r, s) for r, s in zip(manifest.records, states) if r.set == "gallery" and r.mask]
    if not labeled:
        raise PipelineError("segmentation", "manifest",
                            "no skin model configured and no gallery masks to train one")
    # spread the training images evenly over the labeled gallery
    n = min(config.skin_training_images, len(labeled))
    pick = np.linspace(0, len(labeled) - 1, n).round().astype(int)
    X, y = [], []
    for i in sorted(set(pick.tolist())):
        r, s = labeled[i]
        with Stage("segmentation", r.mask):
            truth = load_mask(manifest.resolve(r.mask), r.flip)
            X.append(s.superpixel_features)
            y.append(superpixel_targets(s.labeling, truth))
    with Stage("segmentation", "skin classifier"):
        clf = train_skin_classifier(np.concatenate(X), np.concatenate(y), config.trees, config.seed,
                                    jobs=config.workers)
    return clf, {"source": "trained", "images": len(X), "oob_accuracy": clf.oob_accuracy}


def run_experiment(manifest, config=None, workspace=None):
    """Run segmentation, ROI, features, training, matching, meta-recognition and CMC.

    Parameters
    ----------
    manifest : DatasetManifest or path
    config : RunConfig, optional
    workspace : str, optional
        Root for relative model paths; defaults to the manifest directory.

    Returns
    -------
    ExperimentResult
        ``report`` holds the seven CMC curves (four systems, RS_PLS,
        RS_SVM, WMM), rank-1 values and each probe's ranked lists.

    Raises
    ------
    PipelineError
        Tagged with the stage and item that failed.
    """
    config = config or RunConfig()
    if not isinstance(manifest, DatasetManifest):
        manifest = load_manifest(manifest)
    workspace = workspace or manifest.root
    workers = config.workers
    records = manifest.records

    def load(r):
        with Stage("load", r.path):
            return ImageState(r.path, load_image(manifest.resolve(r.path), r.flip))

    states = _map(load, records, workers)
    _map(lambda s: describe(s, config), states, workers)
    classifier, skin_info = _skin_classifier(manifest, states, config, workspace)
    _map(lambda s: classify(s, classifier), states, workers)
    _map(lambda s: locate(s, config), states, workers)

    gal_idx = [i for i, r in enumerate(records) if r.set == "gallery"]
    probe_idx = [i for i, r in enumerate(records) if r.set == "probe"]
    templates = {}
    for v in config.variants:
        with Stage("template", v):
            templates[v] = build_template([states[i].keypoints[v] for i in gal_idx])
    _map(lambda s: featurize(s, templates, config.variants), states, workers)

    with Stage("training", "gallery"):
        gallery = train_gallery([(records[i].wrist_id, states[i].features) for i in gal_idx],
                                config.variants, config.pls_k, config.svm_c, workers)
    gallery = bundle_gallery(gallery, templates, classifier, config)

    from ..matching import match_probe
    all_tables, all_decisions, truths, probes = [], [], [], []
    for i in probe_idx:
        r = records[i]
        with Stage("matching", r.path):
            tables = match_probe(gallery, states[i].features)
        with Stage("meta", r.path):
            decisions = {name: meta_select([tables[s] for s in subs], config.tail_fraction)
                         for name, subs in meta_tables(tables)}
        all_tables.append(tables)
        all_decisions.append(decisions)
        truths.append(r.wrist_id)
        probes.append(_probe_entry(r, tables, decisions, config.top))

    curves = {}
    if probe_idx:
        with Stage("cmc", "report"):
            curves = _curves(all_tables, all_decisions, truths)
    cfg = {k: v for k, v in config.to_dict().items() if k not in NON_RESULT_KEYS}
    report = {
        "format": REPORT_FORMAT,
        "config": cfg,
        "gallery": {"images": len(gal_idx), "wrists": list(gallery.wrist_ids)},
        "probes": probes,
        "skin": skin_info,
        "systems": {name: [v, m] for name, v, m in SYSTEMS if v in config.variants},
        "meta_systems": {name: list(subs) for name, subs in meta_tables(all_tables[0])} if all_tables else {},
        "curves": {k: c.to_list() for k, c in curves.items()},
        "rank1": {k: c.rank1 for k, c in curves.items()},
    }
    return ExperimentResult(report, all_tables, all_decisions, truths, gallery, config)


def _probe_entry(record, tables, decisions, top):
    entry = {"probe": record.path, "truth": record.wrist_id, "ranks": {}, "top": {}, "chosen": {},
             "cdf": {}}
    for name, t in list(tables.items()) + [(n, d.table) for n, d in decisions.items()]:
        ids = t.sorted_ids
        entry["ranks"][name] = ids.index(record.wrist_id) + 1
        order = t.order[:top]
        entry["top"][name] = [[t.wrist_ids[j], float(t.scores[j])] for j in order]
    for name, d in decisions.items():
        entry["chosen"][name] = d.system
        entry["cdf"][name] = {s: (None if np.isnan(c) else float(c)) for s, c in zip(d.systems, d.cdf)}
    return entry


def _curves(all_tables, all_decisions, truths):
    curves = {}
    for name in CURVE_ORDER:
        if name in all_tables[0]:
            rows = [(t[name].sorted_ids, w) for t, w in zip(all_tables, truths)]
        elif name in all_decisions[0]:
            rows = [(d[name].table.sorted_ids, w) for d, w in zip(all_decisions, truths)]
        else:
            continue
        curves[name] = cmc(rows, system=name)
    return curves


def plot_cmc(curves, path=None, title="CMC"):
    """SVG of the CMC curves; byte-stable for identical input. Returns the SVG bytes."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    with matplotlib.rc_context({"svg.hashsalt": "wristmatch", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for name in CURVE_ORDER:
            if name in curves:
                vals = curves[name]
                ax.plot(np.arange(1, len(vals) + 1), vals, label=name,
                        lw=2.2 if name == "WMM" else 1.2)
        ax.set_xlabel("rank")
        ax.set_ylabel("identification rate")
        ax.set_ylim(0, 1.02)
        ax.set_title(title)
        ax.legend(loc="lower right", fontsize=8)
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    data = buf.getvalue()
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
    return data


def write_report(result, out_dir):
    """``report.json`` and (when configured) ``cmc.svg`` in ``out_dir``; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, "report.json")]
    with open(paths[0], "wb") as fh:
        fh.write(result.report_bytes())
    if result.config.write_svg and result.report["curves"]:
        paths.append(os.path.join(out_dir, "cmc.svg"))
        plot_cmc(result.report["curves"], paths[1])
    return paths
