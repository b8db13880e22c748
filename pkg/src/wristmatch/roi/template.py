"""Wrist template from the summed key-point heat map."""
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .graph import FRAME_HEIGHT

LABELS = ("UP", "DOWN", "W1", "W2")
POINTS_PER_LINE = 25
HEAT_SIGMA = 1.0


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class WristTemplate:
    points: np.ndarray        # (100, 2) float (i, j), 25 per label in LABELS order
    frame: tuple              # (h, w)
    heat: np.ndarray = field(default=None, compare=False, repr=False)   # (4, h, w)
    source: dict = field(default_factory=dict, compare=False)

    def line(self, label):
        k = LABELS.index(label)
        return self.points[k * POINTS_PER_LINE:(k + 1) * POINTS_PER_LINE]

    @property
    def labels(self):
        return tuple(l for l in LABELS for _ in range(POINTS_PER_LINE))

    def wrinkle_columns(self):
        """Mean column of the left and right template wrinkles."""
        return float(self.line("W1")[:, 1].mean()), float(self.line("W2")[:, 1].mean())

    def to_text(self):
        lines = ["# frame %d %d" % tuple(self.frame)]
        lines += ["# source %s %s" % (k, v) for k, v in sorted(self.source.items())]
        lines += ["%s %r %r" % (l, float(i), float(j)) for l, (i, j) in zip(self.labels, self.points)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        frame, source, pts = None, {}, []
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "#":
                if parts[1] == "frame":
                    frame = (int(parts[2]), int(parts[3]))
                elif parts[1] == "source":
                    source[parts[2]] = " ".join(parts[3:])
                continue
            if parts[0] not in LABELS:
                raise ValueError("unknown template label %r" % parts[0])
            pts.append((float(parts[1]), float(parts[2])))
        if frame is None or len(pts) != len(LABELS) * POINTS_PER_LINE:
            raise ValueError("malformed template text")
        return cls(np.array(pts), frame, None, source)


def _ordered(kp):
    """Key points by label, wrinkles ordered left to right."""
    lab = kp.by_label()
    w1, w2 = lab["W1"], lab["W2"]
    if w2[:, 1].mean() < w1[:, 1].mean():
        w1, w2 = w2, w1
    return {"UP": lab["UP"], "DOWN": lab["DOWN"], "W1": w1, "W2": w2}


def heat_maps(keypoint_sets, frame):
    """Per-label sums of rasterized key points in ``frame`` (rows, cols)."""
    h, w = frame
    heat = np.zeros((len(LABELS), h, w))
    for kp in keypoint_sets:
        src = kp.frame if kp.frame is not None else frame
        sc = w / src[1]
        for k, label in enumerate(LABELS):
            p = _ordered(kp)[label]
            i = np.clip(np.round(p[:, 0] * h / src[0]).astype(int), 0, h - 1)
            j = np.clip(np.round((p[:, 1] + 0.5) * sc - 0.5).astype(int), 0, w - 1)
            np.add.at(heat[k], (i, j), 1.0)
    return heat


def resample_polyline(pts, n=POINTS_PER_LINE):
    """``n`` points evenly spaced by arc length along a polyline."""
    pts = np.asarray(pts, dtype=np.float64)
    if len(pts) == 1:
        return np.repeat(pts, n, axis=0)
    seg = np.sqrt((np.diff(pts, axis=0) ** 2).sum(1))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return np.repeat(pts[:1], n, axis=0)
    q = np.linspace(0.0, s[-1], n)
    return np.stack([np.interp(q, s, pts[:, 0]), np.interp(q, s, pts[:, 1])], axis=1)


def ridge(heat, raw, along_rows):
    """Argmax curve of a smoothed heat map over the support of ``raw``.

    ``along_rows=False`` takes one point per occupied column (boundaries),
    ``True`` one point per occupied row (wrinkles).
    """
    if along_rows:
        idx = np.nonzero(raw.any(axis=1))[0]
        return np.stack([idx, np.argmax(heat[idx], axis=1)], axis=1).astype(float)
    idx = np.nonzero(raw.any(axis=0))[0]
    return np.stack([np.argmax(heat[:, idx], axis=0), idx], axis=1).astype(float)


def build_template(keypoint_sets, frame=None):
    """Template of 4 polylines (UP, DOWN, left W1, right W2), 25 points each.

    Each label's key points are rasterized into their own heat map in the
    40-row frame, summed over the training sets and smoothed with a
    Gaussian of sigma 1. A boundary ridge takes the argmax row of every
    occupied column and a wrinkle ridge the argmax column of every occupied
    row. Sets of different widths are stretched to the median width.
    """
    keypoint_sets = list(keypoint_sets)
    if not keypoint_sets:
        raise TemplateError("need at least one key point set")
    if frame is None:
        widths = [kp.frame[1] for kp in keypoint_sets if kp.frame is not None]
        if not widths:
            raise TemplateError("key point sets carry no frame size; pass frame")
        frame = (FRAME_HEIGHT, int(np.median(widths)))
    raw = heat_maps(keypoint_sets, frame)
    smooth = np.stack([ndimage.gaussian_filter(m, HEAT_SIGMA, mode="constant") for m in raw])
    lines = []
    for k, label in enumerate(LABELS):
        r = ridge(smooth[k], raw[k] > 0, along_rows=label in ("W1", "W2"))
        lines.append(resample_polyline(r))
    source = {"sets": len(keypoint_sets), "procedures": ",".join(sorted({kp.procedure for kp in keypoint_sets}))}
    return WristTemplate(np.concatenate(lines), tuple(frame), smooth, source)
