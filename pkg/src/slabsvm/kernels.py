"""Kernel functions and Gram matrices.

Five families are supported::

    linear        k(x, y) = <x, y>
    rbf           k(x, y) = exp(-gamma * ||x - y||^2)
    intersection  k(x, y) = sum_i min(x_i, y_i)
    hellinger     k(x, y) = sum_i sqrt(x_i * y_i)
    chi_squared   k(x, y) = sum_i 2 x_i y_i / (x_i + y_i),   0/0 -> 0

The last three are additive kernels defined on histograms and reject
negative coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

FAMILIES = ("linear", "rbf", "intersection", "hellinger", "chi_squared")
ADDITIVE = frozenset({"intersection", "hellinger", "chi_squared"})

_ALIASES = {"chi2": "chi_squared", "chi-squared": "chi_squared", "gaussian": "rbf"}

# rows per block when evaluating additive kernels (bounds the m x n x d temporary)
_BLOCK_ELEMENTS = 4_000_000


class KernelError(ValueError):
    """Invalid kernel specification or kernel input."""


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its parameters.

    ``gamma`` must be given for ``rbf`` and must be omitted for every
    other family.
    """

    family: str
    gamma: Optional[float] = None

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise KernelError(f"unknown kernel family {self.family!r}")
        object.__setattr__(self, "family", family)
        if family == "rbf":
            if self.gamma is None:
                raise KernelError("rbf kernel requires gamma")
            gamma = float(self.gamma)
            if not np.isfinite(gamma) or gamma <= 0:
                raise KernelError(f"gamma must be positive, got {self.gamma!r}")
            object.__setattr__(self, "gamma", gamma)
        elif self.gamma is not None:
            raise KernelError(f"{family} kernel takes no gamma")

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def rbf(cls, gamma):
        return cls("rbf", gamma)

    def __str__(self):
        if self.family == "rbf":
            return f"rbf(gamma={self.gamma:g})"
        return self.family


def _as_rows(X, name="X"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] < 1:
        raise KernelError(f"{name} must be a non-empty 2-D array of feature rows")
    return X


def _check_finite(X, name):
    if not np.all(np.isfinite(X)):
        raise KernelError(f"{name} contains non-finite values")


def _check_inputs(spec, X, Y):
    _check_finite(X, "X")
    _check_finite(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise KernelError(f"dimension mismatch: {X.shape[1]} != {Y.shape[1]}")
    if spec.family in ADDITIVE and (np.any(X < 0) or np.any(Y < 0)):
        raise KernelError(f"{spec.family} kernel requires nonnegative coordinates")


def _additive_block(family, X, Y):
    a = X[:, None, :]
    b = Y[None, :, :]
    if family == "linear":
        return (a * b).sum(axis=2)
    if family == "intersection":
        return np.minimum(a, b).sum(axis=2)
    if family == "hellinger":
        return np.sqrt(a * b).sum(axis=2)
    num = 2.0 * a * b
    den = a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return terms.sum(axis=2)


def _raw(spec, X, Y):
    family = spec.family
    if family == "linear":
        return X @ Y.T
    if family == "rbf":
        return np.exp(-spec.gamma * cdist(X, Y, "sqeuclidean"))
    rows = max(1, _BLOCK_ELEMENTS // max(1, Y.shape[0] * X.shape[1]))
    out = np.empty((X.shape[0], Y.shape[0]))
    for start in range(0, X.shape[0], rows):
        out[start:start + rows] = _additive_block(family, X[start:start + rows], Y)
    return out


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Evaluate ``k(x, y)`` for a single pair of feature vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size < 1:
        raise KernelError("eval_kernel expects two non-empty feature vectors")
    _check_inputs(spec, x[None, :], y[None, :])
    family = spec.family
    if family == "linear":
        return float(np.dot(x, y))
    if family == "rbf":
        d = x - y
        return float(np.exp(-spec.gamma * np.dot(d, d)))
    return float(_additive_block(family, x[None, :], y[None, :])[0, 0])


def cross_gram(spec: KernelSpec, X, Y) -> np.ndarray:
    """Kernel values between every row of `X` and every row of `Y`.

    Returns an array of shape ``(len(X), len(Y))``.
    """
    X = _as_rows(X, "X")
    Y = _as_rows(Y, "Y")
    _check_inputs(spec, X, Y)
    return _raw(spec, X, Y)


def kernel_expansion(spec: KernelSpec, X, Y, weights) -> np.ndarray:
    """``sum_j weights[j] * k(X[i], Y[j])`` for every row of `X`.

    Unlike ``cross_gram(spec, X, Y) @ weights`` the value for a row does
    not depend on the other rows of `X`: no BLAS call is involved, so a
    probe scored alone gets the same bits as inside a batch.
    """
    X = _as_rows(X, "X")
    Y = _as_rows(Y, "Y")
    _check_inputs(spec, X, Y)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != Y.shape[0]:
        raise KernelError(f"{w.shape[0]} weights for {Y.shape[0]} rows")
    rows = max(1, _BLOCK_ELEMENTS // max(1, Y.shape[0] * X.shape[1]))
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], rows):
        block = X[start:start + rows]
        if spec.family == "rbf":
            G = np.exp(-spec.gamma * cdist(block, Y, "sqeuclidean"))
        else:
            G = _additive_block(spec.family, block, Y)
        out[start:start + rows] = (G * w).sum(axis=1)
    return out


def gram_matrix(spec: KernelSpec, X) -> np.ndarray:
    """Symmetric Gram matrix ``K[i, j] = k(X[i], X[j])``.

    The upper triangle is mirrored onto the lower one so the result is
    exactly symmetric. RBF diagonals are set to 1.
    """
    X = _as_rows(X, "X")
    _check_inputs(spec, X, X)
    K = _raw(spec, X, X)
    K = np.triu(K) + np.triu(K, 1).T
    if spec.family == "rbf":
        np.fill_diagonal(K, 1.0)
    return K


def gram_vector(spec: KernelSpec, X, x) -> np.ndarray:
    """Kernel values ``k(x, X[i])`` for each row of `X`."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise KernelError("x must be a single feature vector")
    return cross_gram(spec, x[None, :], X)[0]
