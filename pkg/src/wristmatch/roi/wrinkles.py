"""Boundary-to-boundary wrinkle paths (Proc2 and Proc2/3)."""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .graph import Boundaries, PathTable, boundaries, build_graph

PROC2 = "Proc2"
PROC23 = "Proc2/3"
CROSS = ndimage.generate_binary_structure(2, 1)


class DegenerateWrinkleError(ValueError):
    pass


@dataclass(frozen=True)
class WrinklePath:
    nodes: tuple          # ((i, j), ...)
    weights: tuple        # weight of each of the len(nodes) - 1 moves
    base: "WrinklePath" = field(default=None, compare=False, repr=False)

    @classmethod
    def from_nodes(cls, g, nodes):
        nodes = tuple((int(i), int(j)) for i, j in nodes)
        w = tuple(float(g.weight(v, u)) for v, u in zip(nodes[:-1], nodes[1:]))
        return cls(nodes, w)

    @property
    def n_edges(self):
        return len(self.weights)

    @property
    def cost(self):
        return float(sum(self.weights))

    @property
    def normalized_length(self):
        return self.cost / self.n_edges if self.weights else 0.0

    def sub(self, i, j):
        """Drop ``i`` leading and ``j`` trailing nodes."""
        end = len(self.nodes) - j
        return WrinklePath(self.nodes[i:end], self.weights[i:end - 1])

    def array(self):
        return np.array(self.nodes, dtype=np.int64).reshape(-1, 2)


def adjust_path(P, a=0.2):
    """Best trimmed sub-path of ``P`` by mean edge weight.

    All shifts ``0 <= i, j <= floor(n * a)`` of the start (down the path)
    and the end (up the path) are tried; a candidate replaces the current
    best only when its normalized length is strictly lower. A sub-path of a
    shortest path is itself a shortest path between its end points, so the
    candidates are exactly the table paths between the shifted nodes.
    Adjustment always starts from the unadjusted path, which makes it
    idempotent.
    """
    if not 0 <= a < 1:
        raise ValueError("a must lie in [0, 1), got %r" % a)
    base = P.base if P.base is not None else P
    n = base.n_edges
    lim = int(np.floor(n * a))
    best, best_d = base, base.normalized_length
    for i in range(lim + 1):
        for j in range(lim + 1):
            if i + j == 0 or n - i - j < 1:
                continue
            cand = base.sub(i, j)
            d = cand.normalized_length
            if d < best_d:
                best, best_d = cand, d
    if best is base:
        return base
    return replace(best, base=base)


def _shortest(g, b_up, b_down):
    S = [g.node(*p) for p in b_up]
    F = [g.node(*p) for p in b_down]
    S = [s for s in S if s >= 0]
    F = [f for f in F if f >= 0]
    if not S or not F:
        raise DegenerateWrinkleError("boundary nodes missing from the graph")
    table = PathTable(g)
    cost, ids = table.best(S, F)
    if ids is None:
        raise DegenerateWrinkleError("no path joins the upper and lower boundaries")
    return WrinklePath.from_nodes(g, g.coords[ids]), table


def second_graph(g, P1, b_up, b_down):
    """``((V - P1) eroded by a 3x3 cross) | S | F``."""
    rest = g.mask.copy()
    idx = P1.array()
    rest[idx[:, 0], idx[:, 1]] = False
    keep = ndimage.binary_erosion(rest, structure=CROSS, border_value=0)
    for i, j in tuple(b_up) + tuple(b_down):
        keep[i, j] = True
    return g.subgraph(keep)


def detect_wrinkles(g, b_up, b_down, a=0.2, adjust=False):
    """The two cheapest boundary-to-boundary paths.

    ``P1`` is the cheapest path from any upper to any lower boundary node.
    ``P2`` is the cheapest one in the graph left after removing ``P1`` (and
    eroding with a 3x3 cross), then restoring the boundary nodes. With
    ``adjust`` each path is trimmed by :func:`adjust_path` before use.
    """
    if not b_up or not b_down:
        raise DegenerateWrinkleError("empty boundary")
    P1, _ = _shortest(g, b_up, b_down)
    if adjust:
        P1 = adjust_path(P1, a)
    sub = second_graph(g, P1, b_up, b_down)
    P2, _ = _shortest(sub, b_up, b_down)
    if adjust:
        P2 = adjust_path(P2, a)
    return P1, P2


@dataclass(frozen=True)
class KeyPointSet:
    boundaries: Boundaries
    wrinkles: tuple   # (P1, P2) in detection order
    procedure: str = PROC2
    frame: tuple = None   # (h, w) of the 40-row frame

    def by_label(self):
        return {
            "UP": np.array(self.boundaries.b_up, dtype=float).reshape(-1, 2),
            "DOWN": np.array(self.boundaries.b_down, dtype=float).reshape(-1, 2),
            "W1": self.wrinkles[0].array().astype(float),
            "W2": self.wrinkles[1].array().astype(float),
        }

    def points(self):
        lab = self.by_label()
        return np.concatenate([lab[k] for k in ("UP", "DOWN", "W1", "W2")])

    def to_text(self):
        lines = ["# procedure %s" % self.procedure]
        if self.frame is not None:
            lines.append("# frame %d %d" % tuple(self.frame))
        for label, pts in (("UP", self.boundaries.b_up), ("DOWN", self.boundaries.b_down),
                           ("W1", self.wrinkles[0].nodes), ("W2", self.wrinkles[1].nodes)):
            lines.extend("%s %d %d" % (label, i, j) for i, j in pts)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        """Inverse of :meth:`to_text`; wrinkle weights are not stored and come back empty-weighted."""
        proc, frame = PROC2, None
        pts = {"UP": [], "DOWN": [], "W1": [], "W2": []}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[:1] == ["procedure"]:
                    proc = parts[1]
                elif parts[:1] == ["frame"]:
                    frame = (int(parts[1]), int(parts[2]))
                continue
            label, i, j = line.split()
            if label not in pts:
                raise ValueError("unknown key point label %r" % label)
            pts[label].append((int(i), int(j)))
        w = [WrinklePath(tuple(pts[k]), (0.0,) * max(0, len(pts[k]) - 1)) for k in ("W1", "W2")]
        return cls(Boundaries(tuple(pts["UP"]), tuple(pts["DOWN"])), tuple(w), proc, frame)


def locate_keypoints(rgb, mask, procedure=PROC2, a=0.2):
    """Graph, boundaries and wrinkles of one segmented image.

    Returns
    -------
    (KeyPointSet, WristGraph)
    """
    if procedure not in (PROC2, PROC23):
        raise ValueError("unknown procedure %r" % procedure)
    g, _ = build_graph(rgb, mask)
    b = boundaries(g.mask)
    P1, P2 = detect_wrinkles(g, b.b_up, b.b_down, a, adjust=procedure == PROC23)
    return KeyPointSet(b, (P1, P2), procedure, g.mask.shape), g
