"""Affine coherent point drift (CPD) registration."""
from dataclasses import dataclass

import numpy as np

OUTLIER_WEIGHT = 0.1
MAX_ITER = 150
TOL = 1e-6


class SingularTransformError(ValueError):
    pass


@dataclass(frozen=True)
class AffineTransform:
    """``x -> A @ x + t`` on (i, j) row/column coordinates."""

    A: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        if abs(np.linalg.det(self.A)) <= 1e-9:
            raise SingularTransformError("affine linear part is singular")

    def __call__(self, pts):
        return np.asarray(pts, dtype=np.float64) @ self.A.T + self.t

    def inverse(self):
        Ai = np.linalg.inv(self.A)
        return AffineTransform(Ai, -Ai @ self.t)

    @classmethod
    def identity(cls):
        return cls(np.eye(2), np.zeros(2))


def _check(pts, name):
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("%s must be an (n, 2) array" % name)
    if len(pts) < 3 or np.linalg.matrix_rank(pts - pts.mean(0), tol=1e-9 * (1 + np.abs(pts).max())) < 2:
        raise SingularTransformError("%s needs at least 3 non-collinear points" % name)
    return pts


def _normalize(pts):
    mu = pts.mean(0)
    c = pts - mu
    s = np.sqrt((c ** 2).sum() / len(pts))
    return c / s, mu, s


def cpd_affine_register(source, target, w=OUTLIER_WEIGHT, max_iter=MAX_ITER, tol=TOL):
    """Affine map that carries ``source`` onto ``target``.

    ``source`` points are the Gaussian mixture centroids; ``target`` points
    are the data. Both sets are normalized to zero mean and unit RMS radius
    for the EM iterations, and the result is mapped back to the original
    coordinates. Iteration stops when the relative change of the negative
    log-likelihood falls below ``tol`` or after ``max_iter`` rounds.

    Returns
    -------
    AffineTransform
    """
    Y0 = _check(source, "source")
    X0 = _check(target, "target")
    X, mx, sx = _normalize(X0)
    Y, my, sy = _normalize(Y0)
    N, D = X.shape
    M = len(Y)
    B = np.eye(D)
    t = np.zeros(D)
    sigma2 = ((X[None, :, :] - Y[:, None, :]) ** 2).sum() / (D * M * N)
    prev = None
    for _ in range(max_iter):
        TY = Y @ B.T + t
        d2 = ((X[None, :, :] - TY[:, None, :]) ** 2).sum(-1)   # (M, N)
        num = np.exp(-d2 / (2 * sigma2))
        c = (2 * np.pi * sigma2) ** (D / 2) * w / (1 - w) * M / N
        den = num.sum(0) + c
        P = num / den
        nll = -np.log(den).sum() + N * D / 2 * np.log(sigma2)

        Np = P.sum()
        P1 = P.sum(1)
        Pt1 = P.sum(0)
        mux = X.T @ Pt1 / Np
        muy = Y.T @ P1 / Np
        Xh = X - mux
        Yh = Y - muy
        Am = Xh.T @ P.T @ Yh
        Yd = (Yh * P1[:, None]).T @ Yh
        if abs(np.linalg.det(Yd)) < 1e-12:
            raise SingularTransformError("degenerate correspondence weights")
        B = Am @ np.linalg.inv(Yd)
        t = mux - B @ muy
        sigma2 = (np.sum(Pt1 * (Xh ** 2).sum(1)) - np.trace(Am @ B.T)) / (Np * D)
        if sigma2 <= 1e-14:
            break
        if prev is not None and abs(prev - nll) <= tol * abs(nll):
            break
        prev = nll

    A = (sx / sy) * B
    tt = sx * t + mx - A @ my
    return AffineTransform(A, tt)
