"""Run configuration shared by the experiment runner and the command line.

A config file is a JSON object whose keys are a subset of
:data:`RunConfig` field names; missing keys take the defaults below.

=====================  =======  ==========================================
key                    default  range / meaning
=====================  =======  ==========================================
superpixels            200      SLIC superpixel count, 10..5000
compactness            10.0     SLIC compactness, > 0
trees                  300      skin classifier trees, >= 1
a                      0.2      path adjustment fraction, [0, 1)
tail_fraction          0.5      Weibull tail length l_t / m, (0, 1]
variants               both     non-empty subset of ["ROI#1", "ROI#2"]
pls_k                  5        PLS components, >= 1
svm_c                  1.0      SVM penalty, > 0
seed                   0        seed for every random draw
jobs                   0        worker threads; 0 = logical cores
top                    10       ranked entries kept per probe, >= 1
skin_model             null     path of a saved skin classifier
skin_training_images   12       gallery images with masks used to train
                                a classifier when no model is given
write_svg              true     emit the CMC plot next to the report
=====================  =======  ==========================================
"""
import json
import os
from dataclasses import asdict, dataclass, fields

VARIANTS = ("ROI#1", "ROI#2")
WORKSPACE_ENV = "WRISTMATCH_WORKSPACE"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    superpixels: int = 200
    compactness: float = 10.0
    trees: int = 300
    a: float = 0.2
    tail_fraction: float = 0.5
    variants: tuple = VARIANTS
    pls_k: int = 5
    svm_c: float = 1.0
    seed: int = 0
    jobs: int = 0
    top: int = 10
    skin_model: str = None
    skin_training_images: int = 12
    write_svg: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(self.variants))
        checks = [
            (10 <= self.superpixels <= 5000, "superpixels must be in 10..5000"),
            (self.compactness > 0, "compactness must be positive"),
            (self.trees >= 1, "trees must be >= 1"),
            (0 <= self.a < 1, "a must be in [0, 1)"),
            (0 < self.tail_fraction <= 1, "tail_fraction must be in (0, 1]"),
            (len(self.variants) > 0 and all(v in VARIANTS for v in self.variants)
             and len(set(self.variants)) == len(self.variants),
             "variants must be a non-empty subset of %s" % list(VARIANTS)),
            (self.pls_k >= 1, "pls_k must be >= 1"),
            (self.svm_c > 0, "svm_c must be positive"),
            (self.jobs >= 0, "jobs must be >= 0"),
            (self.top >= 1, "top must be >= 1"),
            (self.skin_training_images >= 1, "skin_training_images must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        # keep the declared variant order regardless of how they were listed
        object.__setattr__(self, "variants", tuple(v for v in VARIANTS if v in self.variants))

    @property
    def workers(self):
        return self.jobs or os.cpu_count() or 1

    def replace(self, **kw):
        return RunConfig(**{**asdict(self), **kw})

    def to_dict(self):
        d = asdict(self)
        d["variants"] = list(self.variants)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError("unknown config keys: %s" % ", ".join(unknown))
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError("config %s is not valid JSON: %s" % (path, e)) from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)
