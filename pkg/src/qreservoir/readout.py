"""Linear readouts: least squares, nearest-class classifier, error and capacity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SHIFT_GRID = 2001


@dataclass(frozen=True)
class ReadoutWeights:
    weights: np.ndarray
    bias: float
    rank: int = -1
    rank_deficient: bool = False


@dataclass(frozen=True)
class ClassifierModel:
    regressor: ReadoutWeights
    class_values: np.ndarray
    bias_shift: float
    train_accuracy: float = float("nan")


def _design(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def train_linear(X, targets, ridge: float = 0.0) -> ReadoutWeights:
    """Minimize ``sum (y - Xw - b)^2 + ridge |w|^2`` with an unpenalized bias.

    Features and targets are centered so the bias drops out; the remaining
    problem is solved by SVD-based least squares (minimum-norm when ``X`` is
    rank deficient).
    """
    X = _design(X)
    y = np.asarray(targets, dtype=float)
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if X.shape[0] != y.shape[0]:
        raise ValueError("feature rows and targets differ in length")
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    xm, ym = X.mean(axis=0), y.mean()
    Xc, yc = X - xm, y - ym
    o = X.shape[1]
    if ridge > 0:
        A = np.vstack([Xc, np.sqrt(ridge) * np.eye(o)])
        b = np.concatenate([yc, np.zeros(o)])
    else:
        A, b = Xc, yc
    w, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    bias = float(ym - xm @ w)
    return ReadoutWeights(weights=w, bias=bias, rank=int(rank), rank_deficient=bool(rank < o))


def predict(X, w: ReadoutWeights) -> np.ndarray:
    X = _design(X)
    if X.shape[1] != w.weights.shape[0]:
        raise ValueError(f"expected {w.weights.shape[0]} features, got {X.shape[1]}")
    return X @ w.weights + w.bias


def mse(y, ybar) -> float:
    y, ybar = np.asarray(y, float), np.asarray(ybar, float)
    if y.shape != ybar.shape:
        raise ValueError("length mismatch")
    if y.size == 0:
        raise ValueError("empty vectors")
    return float(np.mean((y - ybar) ** 2))


def nmse(y, ybar) -> float:
    """MSE normalized by the target power; NaN for a zero-power target."""
    power = float(np.mean(np.asarray(ybar, float) ** 2))
    return mse(y, ybar) / power if power > 0 else float("nan")


def nearest_class(values, class_values) -> np.ndarray:
    """Nearest admissible class for each value; ties go to the smaller class."""
    cv = np.asarray(class_values, float)
    values = np.asarray(values, float)
    if cv.size > 2 and np.allclose(np.diff(cv), cv[1] - cv[0], rtol=1e-12, atol=0):
        # equally spaced: round half down on the class grid
        pos = (values - cv[0]) / (cv[1] - cv[0])
        idx = np.clip(np.ceil(pos - 0.5), 0, cv.size - 1).astype(np.intp)
        return cv[idx]
    idx = np.argmin(np.abs(values[..., None] - cv), axis=-1)
    return cv[idx]


def train_classifier(X, labels, class_values, ridge: float = 0.0) -> ClassifierModel:
    """Regress the labels, then shift the bias to maximize nearest-class accuracy.

    The shift is scanned over ``[-spacing, spacing]`` on a 2001-point grid;
    ties are broken toward the smallest ``|shift|``.
    """
    labels = np.asarray(labels, float)
    cv = np.sort(np.asarray(class_values, float))
    if cv.size > 1 and np.any(np.diff(cv) <= 0):
        raise ValueError("class values must be strictly increasing")
    if not np.all(np.isin(labels, cv)):
        raise ValueError("labels outside the admissible classes")
    reg = train_linear(X, labels, ridge)
    if cv.size == 1:
        return ClassifierModel(reg, cv, 0.0, 1.0)
    spacing = float(cv[1] - cv[0])
    pred = predict(X, reg)
    shifts = np.linspace(-spacing, spacing, SHIFT_GRID)
    # order candidates by |shift| so argmax picks the smallest on ties
    order = np.lexsort((shifts, np.abs(shifts)))
    shifts = shifts[order]
    acc = (nearest_class(pred[None, :] + shifts[:, None], cv) == labels).mean(axis=1)
    best = int(np.argmax(acc))
    return ClassifierModel(reg, cv, float(shifts[best]), float(acc[best]))


def classify(model: ClassifierModel, X) -> np.ndarray:
    return nearest_class(predict(X, model.regressor) + model.bias_shift, model.class_values)


def _basis(X) -> np.ndarray:
    """Orthonormal basis of the column span of ``[X, 1]``."""
    X = _design(X)
    A = np.column_stack([X, np.ones(X.shape[0])])
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    tol = s.max() * max(A.shape) * np.finfo(float).eps if s.size else 0.0
    return u[:, s > tol]


def capacity(X, ybar) -> float:
    """``1 - min_w MSE / <ybar^2>`` for a linear readout with bias, clamped to [0, 1]."""
    ybar = np.asarray(ybar, float)
    power = float(np.mean(ybar**2))
    if power <= 0:
        raise ValueError("target has zero power")
    err = mse(predict(X, train_linear(X, ybar, 0.0)), ybar)
    raw = 1.0 - err / power
    if raw < -1e-10:
        raise ArithmeticError(f"capacity {raw} below zero")
    return float(min(max(raw, 0.0), 1.0))


def capacities(X, Y) -> np.ndarray:
    """Capacities of many targets (columns of ``Y``) against one feature matrix.

    Same quantity as ``capacity`` computed by projection onto an
    orthonormal basis of the readout span.
    """
    Y = np.asarray(Y, float)
    if Y.ndim == 1:
        Y = Y[:, None]
    Q = _basis(X)
    proj = Q.T @ Y
    power = (Y**2).sum(axis=0)
    if np.any(power <= 0):
        raise ValueError("target has zero power")
    return np.clip((proj**2).sum(axis=0) / power, 0.0, 1.0)
