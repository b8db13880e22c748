"""Dataset manifests: UTF-8 CSV with header ``path,wrist_id,subject_id,set,flip``.

An optional sixth column ``mask`` names a ground-truth skin mask PNG, used
only to train a skin classifier when none is supplied.
"""
import csv
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

COLUMNS = ("path", "wrist_id", "subject_id", "set", "flip")
OPTIONAL = ("mask",)
SETS = ("gallery", "probe")


class ManifestError(ValueError):
    pass


class ProtocolError(ManifestError):
    pass


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    wrist_id: str
    subject_id: str
    set: str
    flip: bool
    mask: str = ""


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple
    root: str = "."       # paths are relative to this directory

    def subset(self, tag):
        return tuple(r for r in self.records if r.set == tag)

    @property
    def gallery(self):
        return self.subset("gallery")

    @property
    def probes(self):
        return self.subset("probe")

    @property
    def wrist_ids(self):
        return tuple(sorted({r.wrist_id for r in self.gallery}))

    def resolve(self, rel):
        return rel if os.path.isabs(rel) else os.path.join(self.root, rel)


def _flag(text, line):
    t = text.strip().lower()
    if t in ("1", "true", "yes"):
        return True
    if t in ("0", "false", "no", ""):
        return False
    raise ManifestError("line %d: bad flip flag %r" % (line, text))


def validate(records, root="."):
    """Check the gallery/probe protocol and return a :class:`DatasetManifest`."""
    records = tuple(records)
    if not records:
        raise ManifestError("manifest has no records")
    for r in records:
        if r.set not in SETS:
            raise ManifestError("record %s: set must be gallery or probe, got %r" % (r.path, r.set))
    subjects = {}
    for r in records:
        if subjects.setdefault(r.wrist_id, r.subject_id) != r.subject_id:
            raise ManifestError("wrist %s is assigned to subjects %s and %s"
                                % (r.wrist_id, subjects[r.wrist_id], r.subject_id))
    gallery = {r.wrist_id for r in records if r.set == "gallery"}
    if not gallery:
        raise ProtocolError("manifest has no gallery records")
    missing = sorted({r.wrist_id for r in records if r.set == "probe"} - gallery)
    if missing:
        raise ProtocolError("probe wrists missing from the gallery: %s" % ", ".join(missing))
    return DatasetManifest(records, root)


def load_manifest(path):
    """Read and validate a manifest; relative image paths resolve against its directory."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise ManifestError("manifest %s is empty" % path)
    header = tuple(c.strip() for c in rows[0])
    if header[:5] != COLUMNS or any(h not in OPTIONAL for h in header[5:]):
        raise ManifestError("bad manifest header %s; expected %s" % (",".join(header), ",".join(COLUMNS)))
    records = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ManifestError("line %d: expected %d fields, got %d" % (n, len(header), len(row)))
        f = dict(zip(header, (c.strip() for c in row)))
        records.append(ManifestRecord(f["path"], f["wrist_id"], f["subject_id"], f["set"],
                                      _flag(f["flip"], n), f.get("mask", "")))
    return validate(records, os.path.dirname(os.path.abspath(path)))


def write_manifest(path, records):
    with_mask = any(r.mask for r in records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS + (OPTIONAL if with_mask else ()))
        for r in records:
            row = [r.path, r.wrist_id, r.subject_id, r.set, int(r.flip)]
            w.writerow(row + ([r.mask] if with_mask else []))


def load_image(path, flip=False):
    """RGB float image in [0, 1], mirrored left-right when ``flip``."""
    with Image.open(path) as im:
        img = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return np.ascontiguousarray(img[:, ::-1]) if flip else img


def load_mask(path, flip=False):
    with Image.open(path) as im:
        m = np.asarray(im.convert("L")) > 127
    return np.ascontiguousarray(m[:, ::-1]) if flip else m


def save_mask(path, mask):
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8)).save(path)


def save_image(path, rgb):
    Image.fromarray(np.round(np.clip(rgb, 0, 1) * 255).astype(np.uint8)).save(path)
