"""Partial least squares regression by NIPALS."""
import warnings
from dataclasses import dataclass, field

import numpy as np

CONVERGENCE = 1e-10
MAX_INNER = 500
RANK_TOL = 1e-12


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class PlsTrainingState:
    T: np.ndarray   # (n, k) X scores
    U: np.ndarray   # (n, k) y scores
    P: np.ndarray   # (d, k) X loadings
    Q: np.ndarray   # (k,) y loadings
    W: np.ndarray   # (d, k) weights
    E: np.ndarray   # (n, d) X residual
    F: np.ndarray   # (n,) y residual


@dataclass(frozen=True)
class PlsModel:
    """``score(x) = beta @ x + intercept``; ``intercept = y_mean - beta @ x_mean``."""

    beta: np.ndarray
    intercept: float
    y_mean: float
    x_mean: np.ndarray = field(repr=False)
    x_scale: np.ndarray = field(repr=False)
    components: int = 5

    def score(self, x):
        return pls_score(self, x)


def standardize(X):
    """Column means and sample standard deviations; zero-variance columns get scale 1."""
    mean = X.mean(axis=0)
    scale = X.std(axis=0, ddof=1) if len(X) > 1 else np.ones(X.shape[1])
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale


def nipals(Xs, ys, k):
    """NIPALS on centred and scaled ``Xs`` (n, d) and ``ys`` (n,).

    Stops early with a warning when the residual runs out of rank.

    Returns
    -------
    PlsTrainingState
    """
    E = Xs.copy()
    f = ys.copy()
    n, d = E.shape
    T, U, P, Q, W = [], [], [], [], []
    ref = max(np.linalg.norm(Xs), 1.0)
    for a in range(k):
        u = f.copy()
        w = None
        for _ in range(MAX_INNER):
            w_new = E.T @ u
            nw = np.linalg.norm(w_new)
            if nw <= RANK_TOL * ref:
                w_new = None
                break
            w_new /= nw
            t = E @ w_new
            tt = t @ t
            q = (f @ t) / tt
            u = f * q / (q * q) if q != 0 else f.copy()
            done = w is not None and np.linalg.norm(w_new - w) < CONVERGENCE
            w = w_new
            if done:
                break
        if w_new is None or np.linalg.norm(t) <= RANK_TOL * ref:
            warnings.warn("PLS rank exhausted after %d of %d components" % (a, k), RuntimeWarning)
            break
        p = E.T @ t / tt
        E = E - np.outer(t, p)
        f = f - q * t
        T.append(t)
        U.append(u)
        P.append(p)
        Q.append(q)
        W.append(w)
    if not T:
        raise TrainingError("X has no variance to explain y")
    return PlsTrainingState(np.array(T).T, np.array(U).T, np.array(P).T, np.array(Q),
                            np.array(W).T, E, f)


def pls_train(X, y, k=5, return_state=False):
    """One PLS regressor of ``y`` on ``X`` with ``k`` latent components.

    ``X`` and ``y`` are mean-centred and variance-scaled before NIPALS;
    the coefficients are then folded back so that scores apply to raw
    feature vectors.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or len(X) != len(y):
        raise TrainingError("X must be (n, d) with one label per row")
    if len(X) < 2:
        raise TrainingError("need at least 2 samples")
    if len(np.unique(y)) < 2:
        raise TrainingError("labels contain a single class")
    x_mean, x_scale = standardize(X)
    y_mean = float(y.mean())
    y_scale = float(y.std(ddof=1))
    Xs = (X - x_mean) / x_scale
    ys = (y - y_mean) / y_scale
    st = nipals(Xs, ys, k)
    beta_s = st.W @ np.linalg.solve(st.P.T @ st.W, st.Q)
    beta = y_scale * beta_s / x_scale
    model = PlsModel(beta, float(y_mean - beta @ x_mean), y_mean, x_mean, x_scale, st.T.shape[1])
    return (model, st) if return_state else model


def pls_score(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.beta.shape[0]:
        raise ValueError("feature length %d does not match model length %d"
                         % (x.shape[-1], model.beta.shape[0]))
    return x @ model.beta + model.intercept
