"""Derivations into A and into the dual bimodule A*, and the criteria built on them.

A linear map ``D: A -> A`` is stored as its ``n x n`` matrix (column ``j`` is
``D(e_j)``) and, inside subspaces, flattened row-major.  For ``A*`` the column
``j`` holds the values ``delta(e_j)(e_k)``, ``k = 0..n-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algebra import StructureAlgebra
from .exactlinalg import Field, Subspace, kernel, rref, subspace_intersect, subspace_leq
from .zerospans import SpanStrategy, square_zero_span, theta_span

__all__ = [
    "Escape",
    "all_dual_derivations_inner",
    "corollary_me_check",
    "derivation_space",
    "dual_derivation_space",
    "dual_inner_space",
    "escaping_derivation",
    "euler_derivation",
    "h1_dimension",
    "inner_derivation_space",
    "is_derivation",
    "maps_into",
    "theorem_we_check",
    "theorem_we_escape",
]


def _leibniz_system(a: StructureAlgebra) -> np.ndarray:
    """Rows: the ``n^3`` coordinates of ``D(e_i e_j) - D(e_i) e_j - e_i D(e_j)``."""
    f = a.field
    n = a.dim
    t = a.table
    eye = f.eye(n)
    # coefficient of D[r, s] in equation (i, j, k)
    c = eye[None, None, :, :, None] * t[:, :, None, None, :]  # D(e_i e_j)_k
    term2 = t.transpose(1, 2, 0)[None, :, :, :, None] * eye[:, None, None, None, :]
    # term2[i, j, k, r, s] = T[r, j, k] * [s == i]
    term3 = t.transpose(0, 2, 1)[:, None, :, :, None] * eye[None, :, None, None, :]
    # term3[i, j, k, r, s] = T[i, r, k] * [s == j]
    return f.reduce(c - term2 - term3).reshape(n**3, n * n)


def _dual_leibniz_system(a: StructureAlgebra) -> np.ndarray:
    """Rows: ``delta(e_i e_j)(e_k) - delta(e_i)(e_j e_k) - delta(e_j)(e_k e_i)``."""
    f = a.field
    n = a.dim
    t = a.table
    eye = f.eye(n)
    # unknown F[r, s] = delta(e_s)(e_r)
    term1 = eye[None, None, :, :, None] * t[:, :, None, None, :]
    # term1[i,j,k,r,s] = [r == k] T[i,j,s]
    term2 = t[None, :, :, :, None] * eye[:, None, None, None, :]
    # term2[i,j,k,r,s] = T[j,k,r] [s == i]
    term3 = t.transpose(1, 0, 2)[:, None, :, :, None] * eye[None, :, None, None, :]
    # term3[i,j,k,r,s] = T[k,i,r] [s == j]
    return f.reduce(term1 - term2 - term3).reshape(n**3, n * n)


def derivation_space(a: StructureAlgebra) -> Subspace:
    """All derivations ``A -> A``, flattened."""
    return kernel(a.field, _leibniz_system(a))


def is_derivation(a: StructureAlgebra, d) -> bool:
    f = a.field
    vec = f.asarray(d).reshape(-1)
    return f.is_zero(f.matmul(_leibniz_system(a), vec))


def inner_derivation_space(a: StructureAlgebra) -> Subspace:
    """``x -> x m - m x`` for ``m`` in A."""
    f = a.field
    rows = []
    for i in range(a.dim):
        e = a.basis_element(i)
        rows.append(f.reduce(a.right_mult(e) - a.left_mult(e)).reshape(-1))
    return rref(f, np.array(rows))


def h1_dimension(a: StructureAlgebra) -> int:
    der, inn = derivation_space(a), inner_derivation_space(a)
    if not subspace_leq(inn, der):
        raise ArithmeticError("inner derivation failed the Leibniz system")
    return der.dim - inn.dim


def dual_derivation_space(a: StructureAlgebra) -> Subspace:
    return kernel(a.field, _dual_leibniz_system(a))


def dual_inner_space(a: StructureAlgebra) -> Subspace:
    """``x -> x.tau - tau.x``, i.e. ``delta(e_j)(e_k) = tau(e_k e_j) - tau(e_j e_k)``."""
    f = a.field
    t = a.table
    # for tau = e_l^*: F[k, j] = T[k, j, l] - T[j, k, l]
    rows = f.reduce(t - t.transpose(1, 0, 2)).transpose(2, 0, 1).reshape(a.dim, -1)
    return rref(f, rows)


def all_dual_derivations_inner(a: StructureAlgebra) -> bool:
    der, inn = dual_derivation_space(a), dual_inner_space(a)
    if not subspace_leq(inn, der):
        raise ArithmeticError("inner dual derivation failed the Leibniz system")
    return der.dim == inn.dim


def maps_into(a: StructureAlgebra, target: Subspace) -> Subspace:
    """Linear maps ``A -> A`` (flattened) whose image lies in ``target``."""
    f = a.field
    n = a.dim
    ann = kernel(f, target.basis) if target.dim else Subspace.full(f, n)
    if ann.dim == 0:
        return Subspace.full(f, n * n)
    # functional g kills column j of D: sum_r g_r D[r, j] = 0
    rows = np.einsum("gr,js->gjrs", ann.basis, f.eye(n)).reshape(ann.dim * n, n * n)
    return kernel(f, f.reduce(rows))


@dataclass(frozen=True)
class Escape:
    """A derivation ``matrix`` and basis index ``j`` with ``matrix[:, j]`` outside ``target``."""

    matrix: np.ndarray
    basis_index: int
    image: np.ndarray

    def describe(self, a: StructureAlgebra) -> str:
        return f"D({a.labels[self.basis_index]}) = {a.format_element(self.image)}"


def escaping_derivation(
    a: StructureAlgebra, derivations: Sequence[np.ndarray], target: Subspace
) -> Optional[Escape]:
    """First ``(D, j)`` over the given derivations with ``D(e_j)`` outside ``target``."""
    n = a.dim
    for d in derivations:
        m = a.field.asarray(d).reshape(n, n)
        for j in range(n):
            if not target.field.is_zero(target.residual(m[:, j])):
                return Escape(m.copy(), j, m[:, j].copy())
    return None


def corollary_me_check(a: StructureAlgebra, strategy: Optional[SpanStrategy] = None) -> bool:
    """Every derivation of A has image in the span of square-zero elements."""
    nil = square_zero_span(a, strategy)
    der = derivation_space(a)
    return escaping_derivation(a, list(der.basis), nil.span) is None


def theorem_we_escape(
    a: StructureAlgebra,
    module_basis: Subspace,
    strategy: Optional[SpanStrategy] = None,
    derivations: Optional[Sequence[np.ndarray]] = None,
) -> Optional[Escape]:
    """A derivation into the bimodule whose image leaves the Theta span, if any.

    By default every basis derivation ``A -> M`` is tried; ``derivations``
    puts specific maps first (each is checked to be a derivation into ``M``).
    """
    theta = theta_span(a, module_basis, strategy).span
    into_m = subspace_intersect(derivation_space(a), maps_into(a, module_basis))
    candidates = []
    for d in derivations or ():
        vec = a.field.asarray(d).reshape(-1)
        if not into_m.field.is_zero(into_m.residual(vec)):
            raise ValueError("supplied map is not a derivation into the module")
        candidates.append(vec)
    candidates.extend(into_m.basis)
    return escaping_derivation(a, candidates, theta)


def theorem_we_check(
    a: StructureAlgebra, module_basis: Subspace, strategy: Optional[SpanStrategy] = None
) -> bool:
    return theorem_we_escape(a, module_basis, strategy) is None


def euler_derivation(field: Field, a0_dim: int, k: int) -> np.ndarray:
    """``sum_m a_m u^m -> sum_m m a_m u^m`` on ``A0 (x) F[u]/(u^k)``."""
    n = a0_dim * k
    d = field.zeros((n, n))
    for i in range(a0_dim):
        for m in range(k):
            d[i * k + m, i * k + m] = field.scalar(m)
    return d
