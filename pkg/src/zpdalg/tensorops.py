"""Coordinates on A (x) A and the multiplication maps out of it.

A tensor ``sum c_ij e_i (x) e_j`` is the length ``n*n`` vector with ``c_ij`` at
index ``i*n + j``.  A bilinear form is the ``n x n`` matrix ``B`` with
``phi(x, y) = x^T B y``; flattening it row-major pairs it with tensors.
"""

from __future__ import annotations

import numpy as np

from .algebra import StructureAlgebra

__all__ = [
    "apply_form",
    "flatten",
    "format_tensor",
    "kappa",
    "mu",
    "mu1",
    "mu2",
    "simple_tensor",
    "swap_tensor",
    "unflatten",
]


def mu1(a: StructureAlgebra) -> np.ndarray:
    """``x (x) y -> xy`` as an ``n x n^2`` matrix."""
    n = a.dim
    return a.table.reshape(n * n, n).T.copy()


def mu2(a: StructureAlgebra) -> np.ndarray:
    """``x (x) y -> yx``."""
    n = a.dim
    return a.table.transpose(1, 0, 2).reshape(n * n, n).T.copy()


def mu(a: StructureAlgebra) -> np.ndarray:
    """``mu1`` stacked over ``mu2``; its kernel is where every ``tau1(xy) + tau2(yx)`` vanishes."""
    return np.vstack([mu1(a), mu2(a)])


def kappa(a: StructureAlgebra) -> np.ndarray:
    """``x (x) y -> [x, y]``."""
    return a.field.reduce(mu1(a) - mu2(a))


def simple_tensor(a: StructureAlgebra, x, y) -> np.ndarray:
    x, y = a.element(x), a.element(y)
    return a.field.reduce(np.outer(x, y).reshape(-1))


def swap_tensor(a: StructureAlgebra, t) -> np.ndarray:
    """``x (x) y -> y (x) x`` extended linearly."""
    n = a.dim
    return np.asarray(t).reshape(n, n).T.reshape(-1).copy()


def flatten(phi) -> np.ndarray:
    return np.asarray(phi).reshape(-1).copy()


def unflatten(vec, n: int) -> np.ndarray:
    return np.asarray(vec).reshape(n, n).copy()


def apply_form(a: StructureAlgebra, phi, t):
    """Evaluate the bilinear form on a tensor through the pairing."""
    phi = a.field.asarray(phi)
    t = a.field.asarray(t)
    n = a.dim
    if phi.shape != (n, n) or t.shape != (n * n,):
        raise ValueError(f"shape mismatch: form {phi.shape}, tensor {t.shape}, dim {n}")
    return a.field.matmul(phi.reshape(-1), t)


def format_tensor(a: StructureAlgebra, t) -> str:
    n = a.dim
    terms = []
    for idx in np.flatnonzero(np.asarray(t) != 0):
        i, j = divmod(int(idx), n)
        c = a.field.format_scalar(t[idx])
        body = f"{a.labels[i]}(x){a.labels[j]}"
        terms.append(body if c in (1, "1") else f"{c}*{body}")
    return " + ".join(terms) if terms else "0"
