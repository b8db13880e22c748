"""Cumulative match characteristic curves."""
from dataclasses import dataclass

import numpy as np


class CmcError(ValueError):
    pass


@dataclass(frozen=True)
class CmcCurve:
    system: str
    values: np.ndarray     # values[r - 1] = accuracy at rank r

    def at(self, rank):
        return float(self.values[rank - 1])

    @property
    def rank1(self):
        return self.at(1)

    def to_list(self):
        return [float(v) for v in self.values]


def true_ranks(decisions):
    """1-based rank of the truth in each ``(ranked_ids, truth)`` pair."""
    out = []
    for ranked, truth in decisions:
        ranked = list(ranked)
        if truth not in ranked:
            raise CmcError("true wrist %s is absent from the ranking" % truth)
        out.append(ranked.index(truth) + 1)
    return np.array(out, dtype=np.int64)


def cmc(decisions, max_rank=None, system=""):
    """Fraction of probes whose true id lies within the top r, for r = 1..R.

    Parameters
    ----------
    decisions : iterable of (ranked wrist ids, true wrist id)
    max_rank : int, optional
        R; defaults to the ranking length.
    """
    decisions = list(decisions)
    if not decisions:
        raise CmcError("no probe decisions")
    lengths = {len(list(r)) for r, _ in decisions}
    if len(lengths) != 1:
        raise CmcError("rankings have different lengths")
    ranks = true_ranks(decisions)
    R = max_rank or lengths.pop()
    counts = np.bincount(np.minimum(ranks, R + 1), minlength=R + 2)[1:R + 1]
    return CmcCurve(system, np.cumsum(counts) / len(ranks))
