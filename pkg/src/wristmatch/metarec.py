"""Weibull-based meta-recognition over several recognition systems."""
import json
from dataclasses import dataclass

import numpy as np

NEWTON_TOL = 1e-9
NEWTON_MAX = 200
SHIFT_EPS = 1e-6
MIN_TAIL = 4          # smallest l_t, so a fit sees at least 3 scores


class DegenerateFitError(ValueError):
    pass


@dataclass(frozen=True)
class WeibullFit:
    a: float              # scale
    b: float              # shape
    shift: float = 0.0    # subtracted from samples before the fit
    sample_count: int = 0


def exceedance(x, fit):
    """``((x - shift) / a) ** b``, zero below the support."""
    z = np.maximum(np.asarray(x, dtype=np.float64) - fit.shift, 0.0) / fit.a
    return z ** fit.b


def weibull_cdf(x, fit):
    """``F(x) = 1 - exp(-((x - shift) / a) ** b)`` for ``x >= shift``, else 0."""
    return -np.expm1(-exceedance(x, fit))


def weibull_fit(samples, shift=0.0):
    """Maximum-likelihood Weibull fit to ``samples - shift``.

    The shape solves the profile equation by Newton's method from b = 1
    (on samples divided by their maximum, which the MLE is equivariant to);
    the scale then follows in closed form.
    """
    x = np.asarray(samples, dtype=np.float64).ravel() - shift
    if x.size < 3:
        raise DegenerateFitError("need at least 3 samples, got %d" % x.size)
    if np.any(x <= 0):
        raise DegenerateFitError("samples must exceed the shift")
    if np.all(x == x[0]):
        raise DegenerateFitError("all samples are equal")
    top = x.max()
    xs = x / top
    lx = np.log(xs)
    mlx = lx.mean()
    b = 1.0
    for _ in range(NEWTON_MAX):
        p = xs ** b
        s0, s1, s2 = p.sum(), (p * lx).sum(), (p * lx * lx).sum()
        g = s1 / s0 - 1.0 / b - mlx
        dg = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (b * b)
        step = g / dg
        nb = b - step
        if nb <= 0:
            nb = b / 2
        if abs(nb - b) <= NEWTON_TOL * b:
            b = nb
            break
        b = nb
    else:
        raise DegenerateFitError("shape iteration did not converge")
    a = top * float(np.mean(xs ** b)) ** (1.0 / b)
    if not (np.isfinite(a) and np.isfinite(b) and a > 0 and b > 0):
        raise DegenerateFitError("fit produced invalid parameters")
    return WeibullFit(float(a), float(b), float(shift), int(x.size))


def tail_length(m, tail_fraction):
    """``l_t = floor(tail_fraction * m)``, raised to 4 and capped at ``m``."""
    return int(min(m, max(MIN_TAIL, np.floor(tail_fraction * m))))


def fit_tail(sorted_scores, tail_fraction=0.5):
    """Weibull fit to scores ranked 2..l_t, shifted to just below their minimum."""
    s = np.asarray(sorted_scores, dtype=np.float64)
    lt = tail_length(len(s), tail_fraction)
    tail = s[1:lt]
    if tail.size < 3:
        raise DegenerateFitError("tail of %d scores is too short" % tail.size)
    rng = tail.max() - tail.min()
    if rng <= 0:
        raise DegenerateFitError("tail scores are all equal")
    return weibull_fit(tail, tail.min() - SHIFT_EPS * rng)


@dataclass(frozen=True)
class MetaDecision:
    chosen: int            # index into the systems passed in
    systems: tuple         # system names
    cdf: tuple             # F_i(top score), nan for excluded systems
    exceedance: tuple      # ((top - shift) / a) ** b, nan for excluded
    fits: tuple            # WeibullFit or None
    table: object          # the chosen ScoreTable, unchanged

    @property
    def system(self):
        return self.systems[self.chosen]

    def to_json(self, probe_id, top=10):
        t = self.table
        order = t.order[:top]
        rec = {
            "probe": probe_id,
            "chosen": self.system,
            "cdf": {s: (None if np.isnan(c) else c) for s, c in zip(self.systems, self.cdf)},
            "top": [[t.wrist_ids[i], float(t.scores[i])] for i in order],
        }
        return json.dumps(rec, sort_keys=True)


def meta_select(tables, tail_fraction=0.5):
    """Pick the system whose top score is least likely under its own non-match tail.

    Parameters
    ----------
    tables : sequence of ScoreTable
        One per system, in tie-break order.
    tail_fraction : float
        ``l_t / m``.

    Returns
    -------
    MetaDecision
        ``chosen`` maximizes the stored CDF values; ties go to the larger
        exceedance, then to the earlier system. Systems whose fit is
        degenerate are skipped; if all are, the first system is chosen.
    """
    tables = list(tables)
    if not tables:
        raise ValueError("no score tables given")
    cdf, exc, fits = [], [], []
    for t in tables:
        s = t.sorted_scores
        try:
            f = fit_tail(s, tail_fraction)
        except DegenerateFitError:
            fits.append(None)
            cdf.append(np.nan)
            exc.append(np.nan)
            continue
        fits.append(f)
        cdf.append(float(weibull_cdf(s[0], f)))
        exc.append(float(exceedance(s[0], f)))
    valid = [i for i in range(len(tables)) if fits[i] is not None]
    chosen = max(valid, key=lambda i: (cdf[i], exc[i], -i)) if valid else 0
    return MetaDecision(chosen, tuple(t.system for t in tables), tuple(cdf), tuple(exc),
                        tuple(fits), tables[chosen])
