"""Linear soft-margin SVM solved in the dual by SMO."""
from dataclasses import dataclass

import numpy as np

from .pls import TrainingError

TAU = 1e-12


@dataclass(frozen=True)
class SvmModel:
    """``decision(x) = weights @ x + bias``."""

    weights: np.ndarray
    bias: float
    C: float = 1.0
    iterations: int = 0

    def decision(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.weights.shape[0]:
            raise ValueError("feature length %d does not match model length %d"
                             % (x.shape[-1], self.weights.shape[0]))
        return x @ self.weights + self.bias


def smo(K, y, C, tol=1e-8, max_iter=200000):
    """Dual coordinates of ``min 1/2 a'Qa - e'a`` s.t. ``y'a = 0``, ``0 <= a <= C``.

    Pairs are picked by the second-order working-set rule; the bias is left
    unregularized.

    Returns
    -------
    alpha, bias, iterations
    """
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    QD = np.diag(Q).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    for it in range(1, max_iter + 1):
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        yg = -y * G
        if not up.any() or not low.any():
            break
        i = int(np.argmax(np.where(up, yg, -np.inf)))
        gmax = yg[i]
        gmin = np.min(np.where(low, yg, np.inf))
        if gmax - gmin < tol:
            break
        diff = gmax - yg
        quad = QD[i] + QD - 2 * y[i] * y * Q[i]
        quad = np.where(quad > 0, quad, TAU)
        obj = np.where(low & (diff > 0), -diff * diff / quad, np.inf)
        j = int(np.argmin(obj))

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            q = QD[i] + QD[j] + 2 * Q[i, j]
            q = q if q > 0 else TAU
            delta = (-G[i] - G[j]) / q
            d = ai - aj
            ni, nj = ai + delta, aj + delta
            if d > 0:
                if nj < 0:
                    nj, ni = 0.0, d
            elif ni < 0:
                ni, nj = 0.0, -d
            if d > 0:
                if ni > C:
                    ni, nj = C, C - d
            elif nj > C:
                nj, ni = C, C + d
        else:
            q = QD[i] + QD[j] - 2 * Q[i, j]
            q = q if q > 0 else TAU
            delta = (G[i] - G[j]) / q
            s = ai + aj
            ni, nj = ai - delta, aj + delta
            if s > C:
                if ni > C:
                    ni, nj = C, s - C
            elif nj < 0:
                nj, ni = 0.0, s
            if s > C:
                if nj > C:
                    nj, ni = C, s - C
            elif ni < 0:
                ni, nj = 0.0, s
        G += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj

    yg = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = -yg[free].mean()
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        hi = yg[up].max() if up.any() else 0.0
        lo = yg[low].min() if low.any() else 0.0
        rho = -(hi + lo) / 2
    return alpha, -rho, it


def svm_train(X, y, C=1.0, tol=1e-8, max_iter=200000):
    """Hinge-loss linear SVM, ``min 1/2 |w|^2 + C sum max(0, 1 - y (w x + b))``.

    Parameters
    ----------
    X : ndarray (n, d)
    y : array of +-1
    C : float
        Penalty on the hinge losses.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.where(np.asarray(y).ravel() > 0, 1.0, -1.0)
    if len(X) != len(y):
        raise TrainingError("X has %d rows but y has %d" % (len(X), len(y)))
    if len(np.unique(y)) < 2:
        raise TrainingError("labels contain a single class")
    if C <= 0:
        raise TrainingError("C must be positive")
    alpha, b, it = smo(X @ X.T, y, C, tol, max_iter)
    w = (alpha * y) @ X
    return SvmModel(w, float(b), float(C), it)
