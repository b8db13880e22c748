"""Manifests, the gallery/probe protocol, CMC curves and synthetic data."""
from .cmc import CmcCurve, CmcError, cmc, true_ranks
from .experiment import (CURVE_ORDER, ExperimentResult, plot_cmc, report_bytes, run_experiment,
                         write_report)
from .manifest import (DatasetManifest, ManifestError, ManifestRecord, ProtocolError, load_image,
                       load_manifest, load_mask, save_image, save_mask, validate, write_manifest)
from .synth import SYNTH_VERSION, Identity, SynthDataset, make_identity, skin_training_data, synth_dataset, synth_image

__all__ = [
    "CURVE_ORDER", "CmcCurve", "CmcError", "DatasetManifest", "ExperimentResult", "Identity",
    "ManifestError", "ManifestRecord", "ProtocolError", "SYNTH_VERSION", "SynthDataset", "cmc",
    "load_image", "load_manifest", "load_mask", "make_identity", "plot_cmc", "report_bytes",
    "run_experiment", "save_image", "save_mask", "skin_training_data", "synth_dataset",
    "synth_image", "true_ranks", "validate", "write_manifest", "write_report",
]
