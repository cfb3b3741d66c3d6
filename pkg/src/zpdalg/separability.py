"""Separability idempotents and the explicit tau1/tau2 recovery they give."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import StructureAlgebra
from .exactlinalg import solve_linear
from .properties import verify_decomposition
from .tensorops import mu1

__all__ = [
    "ReconstructionError",
    "SeparabilityElement",
    "is_separable",
    "reconstruct_decomposition",
    "separability_idempotent",
    "separability_system",
]


class ReconstructionError(ArithmeticError):
    """The recovered (tau1, tau2) did not reproduce the form.

    For a form vanishing on the two-sided zero pairs of a separable algebra
    this cannot happen, so it signals either a bad input form or a bug.
    """

    def __init__(self, message: str, tau1=None, tau2=None):
        super().__init__(message)
        self.tau1 = tau1
        self.tau2 = tau2


@dataclass(frozen=True)
class SeparabilityElement:
    """``e = sum_ij c_ij e_i (x) e_j`` with ``mu1(e) = 1`` and ``x e = e x``."""

    tensor: np.ndarray

    def matrix(self, n: int) -> np.ndarray:
        return self.tensor.reshape(n, n)

    def verify(self, a: StructureAlgebra) -> bool:
        system, rhs = separability_system(a)
        f = a.field
        return bool(np.all(f.matmul(system, f.asarray(self.tensor)) == rhs))


def separability_system(a: StructureAlgebra) -> tuple[np.ndarray, np.ndarray]:
    """Linear system ``mu1(e) = 1`` and ``(L_x (x) id) e = (id (x) R_x) e`` for basis ``x``."""
    f = a.field
    n = a.dim
    eye = f.eye(n)
    blocks = [mu1(a)]
    for i in range(n):
        x = a.basis_element(i)
        blocks.append(f.reduce(np.kron(a.left_mult(x), eye) - np.kron(eye, a.right_mult(x))))
    rhs = np.concatenate([a.unit, f.zeros(n * n * n)])
    return f.reduce(np.vstack(blocks)), rhs


def separability_idempotent(a: StructureAlgebra) -> Optional[SeparabilityElement]:
    system, rhs = separability_system(a)
    sol = solve_linear(a.field, system, rhs)
    if sol is None:
        return None
    e = SeparabilityElement(sol)
    if not e.verify(a):
        raise ArithmeticError("separability idempotent failed its defining equations")
    return e


def is_separable(a: StructureAlgebra) -> bool:
    return separability_idempotent(a) is not None


def reconstruct_decomposition(
    a: StructureAlgebra, phi, e: SeparabilityElement
) -> tuple[np.ndarray, np.ndarray]:
    """``tau1(w) = sum_i phi(p_i, q_i w)`` and ``tau2(w) = phi(1, w) - tau1(w)``.

    With ``e = sum_i p_i (x) q_i`` this gives ``phi(x, y) = tau1(xy) + tau2(yx)``
    whenever ``phi`` vanishes on the pairs with ``xy = yx = 0``; the result is
    checked on every basis pair.
    """
    f = a.field
    n = a.dim
    b = f.asarray(phi)
    c = f.asarray(e.tensor).reshape(n, n)
    # tau1[l] = sum_ij c_ij sum_m B[i, m] T[j, l, m]
    bt = f.matmul(a.table.reshape(n * n, n), b.T).reshape(n, n, n)  # bt[j, l, i] = phi(e_i, e_j e_l)
    tau1 = f.matmul(c.reshape(-1), bt.transpose(2, 0, 1).reshape(n * n, n))
    tau2 = f.reduce(f.matmul(a.unit, b) - tau1)
    if not verify_decomposition(a, b, tau1, tau2):
        raise ReconstructionError("reconstructed functionals do not reproduce phi", tau1, tau2)
    return tau1, tau2
