"""Finite-dimensional unital associative algebras given by structure constants."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .exactlinalg import Field, Subspace, kernel, rref, subspace_leq

__all__ = [
    "AlgebraError",
    "StructureAlgebra",
    "ValidationReport",
    "centralizer",
    "center",
    "commutator_subspace",
    "direct_product",
    "image",
    "is_bimodule",
    "left_ideal",
    "mat",
    "mat_over",
    "one_sided_slice",
    "polynomial_quotient",
    "relabel",
    "tensor_product",
    "tensor_with_trunc",
    "tri",
    "trunc",
    "zero_pair_slice",
]


class AlgebraError(ValueError):
    """Invalid algebra data or builder arguments."""


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    reason: str = ""
    triple: Optional[tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class StructureAlgebra:
    """``table[i, j]`` holds the coordinates of ``e_i e_j``; ``unit`` those of 1."""

    field: Field
    table: np.ndarray
    unit: np.ndarray
    name: str = ""
    labels: tuple[str, ...] = dc_field(default=())

    def __post_init__(self):
        table = self.field.asarray(self.table)
        unit = self.field.asarray(self.unit).reshape(-1)
        n = unit.shape[0]
        if n < 1:
            raise AlgebraError("algebra must have dimension at least 1")
        if table.shape != (n, n, n):
            raise AlgebraError(f"table shape {table.shape} does not match dimension {n}")
        table.setflags(write=False)
        unit.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "unit", unit)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"e{i}" for i in range(n)))
        elif len(self.labels) != n:
            raise AlgebraError("one label per basis element required")

    @property
    def dim(self) -> int:
        return self.unit.shape[0]

    def __repr__(self) -> str:
        return f"StructureAlgebra({self.name or '?'}, dim={self.dim}, field={self.field})"

    def same_structure(self, other: "StructureAlgebra") -> bool:
        return (
            self.field == other.field
            and self.dim == other.dim
            and bool(np.all(self.table == other.table))
            and bool(np.all(self.unit == other.unit))
        )

    # elements

    def element(self, coords) -> np.ndarray:
        x = self.field.asarray(coords).reshape(-1)
        if x.shape[0] != self.dim:
            raise AlgebraError(f"element of length {x.shape[0]} in algebra of dim {self.dim}")
        return x

    def basis_element(self, i: int) -> np.ndarray:
        x = self.field.zeros(self.dim)
        x[i] = self.field.scalar(1)
        return x

    def one(self) -> np.ndarray:
        return self.unit.copy()

    def multiply(self, x, y) -> np.ndarray:
        x, y = self.element(x), self.element(y)
        n = self.dim
        return self.field.matmul(np.outer(x, y).reshape(-1), self.table.reshape(n * n, n))

    def left_mult(self, x) -> np.ndarray:
        """Matrix of ``u -> x u`` acting on column coordinates."""
        x = self.element(x)
        n = self.dim
        return self.field.matmul(x, self.table.reshape(n, n * n)).reshape(n, n).T.copy()

    def right_mult(self, y) -> np.ndarray:
        """Matrix of ``u -> u y``."""
        y = self.element(y)
        n = self.dim
        swapped = self.table.transpose(1, 0, 2).reshape(n, n * n)
        return self.field.matmul(y, swapped).reshape(n, n).T.copy()

    def format_element(self, x) -> str:
        x = self.element(x)
        terms = []
        for c, lab in zip(x, self.labels):
            if c == 0:
                continue
            c = self.field.format_scalar(c)
            terms.append(lab if c in (1, "1") else f"{c}*{lab}")
        return " + ".join(terms) if terms else "0"

    # axioms

    def validate(self) -> ValidationReport:
        """Check associativity on all basis triples and the two-sided unit law."""
        f, n, t = self.field, self.dim, self.table
        flat = t.reshape(n * n, n)
        # lhs[i, j, k, :] = (e_i e_j) e_k ; rhs[i, j, k, :] = e_i (e_j e_k)
        lhs = f.matmul(flat, t.reshape(n, n * n)).reshape(n, n, n, n)
        rhs = np.stack([f.matmul(flat, t[i]) for i in range(n)]).reshape(n, n, n, n)
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            i, j, k = (int(v) for v in bad[0][:3])
            return ValidationReport(False, f"associativity fails on (e{i} e{j}) e{k}", (i, j, k))
        eye = f.eye(n)
        left = f.matmul(self.unit, t.reshape(n, n * n)).reshape(n, n)
        right = f.matmul(self.unit, t.transpose(1, 0, 2).reshape(n, n * n)).reshape(n, n)
        for name, prod in (("unit * e", left), ("e * unit", right)):
            bad = np.argwhere(np.any(prod != eye, axis=1))
            if bad.size:
                i = int(bad[0][0])
                return ValidationReport(False, f"unit law fails: {name}{i} != e{i}", (i,))
        return ValidationReport(True)

    def to_dict(self) -> dict:
        fmt = np.vectorize(self.field.format_scalar, otypes=[object])
        return {
            "field": "rational" if self.field.p is None else {"gf": self.field.p},
            "dim": self.dim,
            "unit": fmt(self.unit).tolist(),
            "table": fmt(self.table).tolist(),
            "labels": list(self.labels),
            "name": self.name,
        }


# ---------------------------------------------------------------------------
# subspaces attached to an algebra


def image(field: Field, m: np.ndarray) -> Subspace:
    """Column space of ``m``."""
    return rref(field, np.asarray(m).T)


def center(a: StructureAlgebra) -> Subspace:
    n = a.dim
    blocks = [a.field.reduce(a.left_mult(a.basis_element(i)) - a.right_mult(a.basis_element(i))) for i in range(n)]
    return kernel(a.field, np.vstack(blocks))


def commutator_subspace(a: StructureAlgebra) -> Subspace:
    """``[A, A]`` as a subspace of A."""
    t = a.table
    diffs = a.field.reduce(t - t.transpose(1, 0, 2)).reshape(a.dim * a.dim, a.dim)
    return rref(a.field, diffs)


def zero_pair_slice(a: StructureAlgebra, x) -> Subspace:
    """``{z : xz = zx = 0}``."""
    return kernel(a.field, np.vstack([a.left_mult(x), a.right_mult(x)]))


def centralizer(a: StructureAlgebra, x) -> Subspace:
    return kernel(a.field, a.field.reduce(a.left_mult(x) - a.right_mult(x)))


def one_sided_slice(a: StructureAlgebra, x) -> Subspace:
    """``{z : xz = 0}``."""
    return kernel(a.field, a.left_mult(x))


def left_ideal(a: StructureAlgebra, x) -> Subspace:
    """``A x``."""
    return image(a.field, a.right_mult(x))


def is_bimodule(a: StructureAlgebra, m: Subspace) -> bool:
    """Whether ``m`` is closed under left and right multiplication by A."""
    if m.dim == 0:
        return True
    for i in range(a.dim):
        e = a.basis_element(i)
        for op in (a.left_mult(e), a.right_mult(e)):
            moved = a.field.matmul(op, m.basis.T).T
            if not subspace_leq(rref(a.field, moved), m):
                return False
    return True


# ---------------------------------------------------------------------------
# builders


def _check_size(k: int, minimum: int, what: str) -> None:
    if not isinstance(k, (int, np.integer)) or k < minimum:
        raise AlgebraError(f"{what} needs size >= {minimum}, got {k!r}")


def mat(k: int, field: Field) -> StructureAlgebra:
    """Full matrix algebra M_k with matrix units ordered row-major."""
    _check_size(k, 1, "mat")
    n = k * k
    t = field.zeros((n, n, n))
    one = field.scalar(1)
    for a in range(k):
        for b in range(k):
            for d in range(k):
                t[a * k + b, b * k + d, a * k + d] = one
    unit = field.zeros(n)
    for a in range(k):
        unit[a * k + a] = one
    labels = tuple(f"E{a + 1}{b + 1}" for a in range(k) for b in range(k))
    return StructureAlgebra(field, t, unit, name=f"mat({k})", labels=labels)


def tri(k: int, field: Field) -> StructureAlgebra:
    """Upper triangular matrices T_k; units E_ab (a <= b) row-major."""
    _check_size(k, 1, "tri")
    pairs = [(a, b) for a in range(k) for b in range(a, k)]
    index = {p: i for i, p in enumerate(pairs)}
    n = len(pairs)
    t = field.zeros((n, n, n))
    one = field.scalar(1)
    for (a, b), i in index.items():
        for (c, d), j in index.items():
            if b == c:
                t[i, j, index[(a, d)]] = one
    unit = field.zeros(n)
    for a in range(k):
        unit[index[(a, a)]] = one
    labels = tuple(f"E{a + 1}{b + 1}" for a, b in pairs)
    return StructureAlgebra(field, t, unit, name=f"tri({k})", labels=labels)


def polynomial_quotient(coeffs: Sequence, field: Field, name: str = "") -> StructureAlgebra:
    """``F[X]/(f)`` for monic ``f = X^k + c_{k-1} X^{k-1} + ... + c_0``.

    ``coeffs`` lists ``c_0, ..., c_{k-1}``; the basis is ``1, X, ..., X^{k-1}``.
    """
    k = len(coeffs)
    _check_size(k, 1, "polynomial_quotient")
    c = field.asarray(list(coeffs))
    # powers[m] = coordinates of X^m for m < 2k - 1
    powers = [field.zeros(k) for _ in range(2 * k - 1)]
    for m in range(k):
        powers[m][m] = field.scalar(1)
    for m in range(k, 2 * k - 1):
        prev = powers[m - 1]
        shifted = field.zeros(k)
        shifted[1:] = prev[:-1]
        powers[m] = field.reduce(shifted - prev[-1] * c)
    t = field.zeros((k, k, k))
    for i in range(k):
        for j in range(k):
            t[i, j] = powers[i + j]
    labels = tuple("1" if m == 0 else ("u" if m == 1 else f"u^{m}") for m in range(k))
    return StructureAlgebra(field, t, powers[0], name=name or f"poly({','.join(map(str, coeffs))})", labels=labels)


def trunc(k: int, field: Field) -> StructureAlgebra:
    """Truncated polynomials ``F[u]/(u^k)``, basis ``1, u, ..., u^{k-1}``."""
    _check_size(k, 2, "trunc")
    return polynomial_quotient([0] * k, field, name=f"trunc({k})")


def _require_same_field(a: StructureAlgebra, b: StructureAlgebra) -> Field:
    if a.field != b.field:
        raise AlgebraError(f"field mismatch: {a.field} vs {b.field}")
    return a.field


def direct_product(a: StructureAlgebra, b: StructureAlgebra) -> StructureAlgebra:
    """``A x B`` with the basis of A followed by the basis of B."""
    field = _require_same_field(a, b)
    na, nb = a.dim, b.dim
    n = na + nb
    t = field.zeros((n, n, n))
    t[:na, :na, :na] = a.table
    t[na:, na:, na:] = b.table
    unit = np.concatenate([a.unit, b.unit])
    labels = tuple(f"({lab},0)" for lab in a.labels) + tuple(f"(0,{lab})" for lab in b.labels)
    return StructureAlgebra(field, t, unit, name=f"prod({a.name},{b.name})", labels=labels)


def tensor_product(a: StructureAlgebra, b: StructureAlgebra, name: str = "") -> StructureAlgebra:
    """``A (x) B`` with basis ``e_i (x) f_k`` at index ``i * dim(B) + k``."""
    field = _require_same_field(a, b)
    na, nb = a.dim, b.dim
    t = np.einsum("ijm,kln->ikjlmn", a.table, b.table)
    t = field.reduce(t.reshape(na * nb, na * nb, na * nb))
    unit = field.reduce(np.einsum("i,k->ik", a.unit, b.unit).reshape(-1))
    labels = tuple(
        la if lb == "1" else (lb if la == "1" else f"{la}*{lb}") for la in a.labels for lb in b.labels
    )
    return StructureAlgebra(field, t, unit, name=name or f"tensor({a.name},{b.name})", labels=labels)


def tensor_with_trunc(a0: StructureAlgebra, k: int) -> StructureAlgebra:
    """``A0 (x) F[u]/(u^k)``, A0-index major."""
    _check_size(k, 2, "tensor_with_trunc")
    return tensor_product(a0, trunc(k, a0.field), name=f"tensor_trunc({a0.name},{k})")


def mat_over(k: int, c: StructureAlgebra) -> StructureAlgebra:
    """``M_k(C)``; basis ``E_ab c_m`` at index ``(a k + b) dim(C) + m``."""
    _check_size(k, 1, "mat_over")
    return tensor_product(mat(k, c.field), c, name=f"mat_over({k},{c.name})")


def relabel(a: StructureAlgebra, perm: Sequence[int]) -> StructureAlgebra:
    """Same algebra in the basis ``f_r = e_{perm[r]}``."""
    perm = list(perm)
    if sorted(perm) != list(range(a.dim)):
        raise AlgebraError("perm must be a permutation of the basis indices")
    idx = np.ix_(perm, perm, perm)
    return StructureAlgebra(
        a.field, a.table[idx], a.unit[perm], name=a.name, labels=tuple(a.labels[p] for p in perm)
    )
