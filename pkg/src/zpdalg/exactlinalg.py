"""Exact linear algebra over prime fields and the rationals.

Matrices are plain numpy arrays: ``int64`` residues for GF(p) and ``object``
arrays of :class:`fractions.Fraction` for Q.  Over GF(2) row reduction runs on
rows packed into Python integers (bit ``j`` holds column ``j``); both paths
return the same canonical reduced row echelon form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "AmbientMismatchError",
    "Field",
    "Subspace",
    "GF2",
    "annihilator",
    "gf2_kernel",
    "gf2_rref",
    "kernel",
    "pack_rows",
    "rank",
    "rref",
    "solve_linear",
    "span",
    "subspace_contains",
    "subspace_intersect",
    "subspace_leq",
    "subspace_sum",
    "unpack_rows",
]

_INT64_LIMIT = 2**63 - 1


class AmbientMismatchError(ValueError):
    """Raised when subspaces or vectors live in different ambient spaces."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Field:
    """A prime field GF(p) (``p`` set) or the rationals (``p is None``)."""

    p: Optional[int] = None

    def __post_init__(self):
        if self.p is not None:
            if not isinstance(self.p, (int, np.integer)) or not 2 <= self.p <= 2**31:
                raise ValueError(f"field characteristic out of range: {self.p!r}")
            if not _is_prime(int(self.p)):
                raise ValueError(f"{self.p} is not prime")
            object.__setattr__(self, "p", int(self.p))

    @classmethod
    def gf(cls, p: int) -> "Field":
        return cls(p)

    @classmethod
    def rational(cls) -> "Field":
        return cls(None)

    @property
    def is_prime(self) -> bool:
        return self.p is not None

    @property
    def characteristic(self) -> int:
        return 0 if self.p is None else self.p

    @property
    def dtype(self):
        return np.int64 if self.p is not None else object

    def __str__(self) -> str:
        return "QQ" if self.p is None else f"GF({self.p})"

    # scalars

    def scalar(self, x):
        """Coerce an int, Fraction or ``"num/den"`` string into the field."""
        if isinstance(x, str):
            x = Fraction(x.strip())
        if self.p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in {self}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def inv(self, x):
        if self.p is None:
            x = Fraction(x)
            if x == 0:
                raise ZeroDivisionError("inverse of zero")
            return 1 / x
        x = int(x) % self.p
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p)

    def format_scalar(self, x) -> object:
        if self.p is not None:
            return int(x)
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    # arrays

    def asarray(self, data) -> np.ndarray:
        arr = np.asarray(data)
        if self.p is None:
            if arr.dtype == object or arr.dtype.kind in "US":
                out = np.empty(arr.shape, dtype=object)
                flat = out.reshape(-1)
                for i, x in enumerate(arr.reshape(-1)):
                    flat[i] = self.scalar(x)
                return out
            if arr.size == 0:
                return np.empty(arr.shape, dtype=object)
            return np.vectorize(Fraction, otypes=[object])(arr.astype(np.int64))
        if arr.dtype == object or arr.dtype.kind in "US":
            out = np.empty(arr.shape, dtype=np.int64)
            flat = out.reshape(-1)
            for i, x in enumerate(arr.reshape(-1)):
                flat[i] = self.scalar(x)
            return out
        if arr.size == 0:
            return np.zeros(arr.shape, dtype=np.int64)
        return np.mod(arr.astype(np.int64), self.p)

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        if self.p is None:
            return arr
        return np.mod(arr, self.p)

    def zeros(self, shape) -> np.ndarray:
        if self.p is None:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape, dtype=np.int64)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.scalar(1)
        return out

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact product ``a @ b``; falls back to Python ints on int64 overflow risk."""
        if self.p is None:
            return a @ b
        inner = a.shape[-1] if a.ndim else 1
        if inner * (self.p - 1) ** 2 <= _INT64_LIMIT:
            return np.mod(a @ b, self.p)
        out = a.astype(object) @ b.astype(object)
        return np.mod(out, self.p).astype(np.int64)

    def random(self, rng: np.random.Generator, shape, low: int = -3, high: int = 3) -> np.ndarray:
        """Uniform field elements over GF(p); integers in ``[low, high]`` over Q."""
        if self.p is None:
            return self.asarray(rng.integers(low, high + 1, size=shape))
        return rng.integers(0, self.p, size=shape).astype(np.int64)

    def is_zero(self, arr: np.ndarray) -> bool:
        return not np.any(arr != 0)


GF2 = Field(2)


# ---------------------------------------------------------------------------
# bit-packed GF(2)


def pack_rows(arr: np.ndarray) -> list[int]:
    """Pack a 0/1 matrix into one Python int per row (bit j = column j)."""
    arr = np.asarray(arr)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] == 0:
        return [0] * arr.shape[0]
    packed = np.packbits((arr % 2).astype(np.uint8), axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def unpack_rows(rows: Sequence[int], ncols: int) -> np.ndarray:
    nbytes = max(1, (ncols + 7) // 8)
    out = np.zeros((len(rows), ncols), dtype=np.int64)
    for i, v in enumerate(rows):
        bits = np.unpackbits(
            np.frombuffer(int(v).to_bytes(nbytes, "little"), dtype=np.uint8),
            bitorder="little",
        )
        out[i] = bits[:ncols]
    return out


def gf2_echelon_insert(echelon: dict[int, int], v: int) -> bool:
    """Reduce ``v`` against an echelon dict ``{lowest bit: row}``; insert if new."""
    while v:
        low = v & -v
        row = echelon.get(low)
        if row is None:
            echelon[low] = v
            return True
        v ^= row
    return False


def gf2_rref(rows: Iterable[int]) -> list[int]:
    """Canonical RREF of packed rows, sorted by pivot column."""
    echelon: dict[int, int] = {}
    for v in rows:
        gf2_echelon_insert(echelon, v)
    return gf2_echelon_finish(echelon)


def gf2_echelon_finish(echelon: dict[int, int]) -> list[int]:
    """Back-substitute an echelon dict into sorted canonical RREF rows."""
    lows = sorted(echelon, reverse=True)
    reduced: dict[int, int] = {}
    for low in lows:
        v = echelon[low]
        rest = v ^ low
        for other, r in reduced.items():
            if rest & other:
                v ^= r
                rest = v ^ low
        reduced[low] = v
    return [reduced[low] for low in sorted(reduced)]


def gf2_kernel(rows: Sequence[int], ncols: int) -> list[int]:
    """Packed canonical basis of ``{v : row . v = 0 for every row}``."""
    basis = gf2_rref(rows)
    pivot_bits = [r & -r for r in basis]
    pivot_mask = 0
    for b in pivot_bits:
        pivot_mask |= b
    out = []
    for f in range(ncols):
        fb = 1 << f
        if pivot_mask & fb:
            continue
        v = fb
        for r, pb in zip(basis, pivot_bits):
            if r & fb:
                v |= pb
        out.append(v)
    return gf2_rref(out)


# ---------------------------------------------------------------------------
# generic dense path


def _rref_dense(field: Field, m: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    a = field.asarray(m).copy()
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c] != 0)
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = field.reduce(a[r] * field.inv(a[r, c]))
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col != 0)
        if hit.size:
            a[hit] = field.reduce(a[hit] - np.outer(col[hit], a[r]))
        pivots.append(c)
        r += 1
    return a[:r], tuple(pivots)


def _as_matrix(field: Field, m, ncols: Optional[int] = None) -> np.ndarray:
    arr = field.asarray(m)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size or ncols is None else arr.reshape(0, ncols)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return arr


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of ``field**ambient_dim`` held by its canonical RREF basis."""

    field: Field
    ambient_dim: int
    basis: np.ndarray
    pivots: tuple[int, ...]

    def __post_init__(self):
        self.basis.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.field == other.field
            and self.ambient_dim == other.ambient_dim
            and self.pivots == other.pivots
            and bool(np.all(self.basis == other.basis))
        )

    def __hash__(self) -> int:
        return hash((self.field, self.ambient_dim, self.pivots, tuple(map(str, self.basis.ravel()))))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim}, field={self.field})"

    def __contains__(self, v) -> bool:
        return subspace_contains(self, v)

    def __le__(self, other: "Subspace") -> bool:
        return subspace_leq(self, other)

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return subspace_intersect(self, other)

    def residual(self, v) -> np.ndarray:
        """``v`` minus its projection along the pivot coordinates; zero iff ``v`` is inside."""
        v = self.field.asarray(v)
        if v.shape != (self.ambient_dim,):
            raise AmbientMismatchError(f"vector of length {v.shape} vs ambient {self.ambient_dim}")
        if not self.pivots:
            return v
        coeffs = v[list(self.pivots)]
        return self.field.reduce(v - self.field.matmul(coeffs, self.basis))

    def packed(self) -> list[int]:
        if self.field.p != 2:
            raise ValueError("packed rows only exist over GF(2)")
        return pack_rows(self.basis) if self.dim else []

    @classmethod
    def zero(cls, field: Field, ambient_dim: int) -> "Subspace":
        return cls(field, ambient_dim, field.zeros((0, ambient_dim)), ())

    @classmethod
    def full(cls, field: Field, ambient_dim: int) -> "Subspace":
        return cls(field, ambient_dim, field.eye(ambient_dim), tuple(range(ambient_dim)))

    @classmethod
    def from_packed(cls, field: Field, rows: Sequence[int], ambient_dim: int) -> "Subspace":
        """Build from packed GF(2) rows already in canonical RREF."""
        basis = unpack_rows(rows, ambient_dim)
        pivots = tuple((r & -r).bit_length() - 1 for r in rows)
        return cls(field, ambient_dim, basis, pivots)


def rref(field: Field, m, packed: Optional[bool] = None) -> Subspace:
    """Row space of ``m`` in canonical form.

    ``packed`` selects the bit-packed GF(2) elimination; by default it is used
    whenever the field is GF(2).
    """
    m = _as_matrix(field, m)
    ncols = m.shape[1]
    if packed is None:
        packed = field.p == 2
    if packed:
        if field.p != 2:
            raise ValueError("bit-packed reduction requires GF(2)")
        return Subspace.from_packed(field, gf2_rref(pack_rows(m)), ncols)
    basis, pivots = _rref_dense(field, m)
    return Subspace(field, ncols, basis, pivots)


span = rref


def rank(field: Field, m) -> int:
    return rref(field, m).dim


def kernel(field: Field, m, packed: Optional[bool] = None) -> Subspace:
    """Right kernel ``{v : m v = 0}``."""
    m = _as_matrix(field, m)
    ncols = m.shape[1]
    if packed is None:
        packed = field.p == 2
    if packed:
        if field.p != 2:
            raise ValueError("bit-packed reduction requires GF(2)")
        return Subspace.from_packed(field, gf2_kernel(pack_rows(m), ncols), ncols)
    r = rref(field, m, packed=False)
    free = [c for c in range(ncols) if c not in set(r.pivots)]
    vecs = field.zeros((len(free), ncols))
    one = field.scalar(1)
    for k, f in enumerate(free):
        vecs[k, f] = one
        for i, pc in enumerate(r.pivots):
            vecs[k, pc] = field.reduce(-r.basis[i, f]) if field.p else -r.basis[i, f]
    ker = rref(field, vecs, packed=False)
    assert ker.dim + r.dim == ncols
    return ker


def annihilator(s: Subspace) -> Subspace:
    """Functionals (as coordinate vectors) vanishing on ``s``."""
    if s.dim == 0:
        return Subspace.full(s.field, s.ambient_dim)
    return kernel(s.field, s.basis)


def _check_ambient(s: Subspace, t: Subspace) -> None:
    if s.ambient_dim != t.ambient_dim or s.field != t.field:
        raise AmbientMismatchError(
            f"{s.field}^{s.ambient_dim} vs {t.field}^{t.ambient_dim}"
        )


def subspace_contains(s: Subspace, v) -> bool:
    return s.field.is_zero(s.residual(v))


def subspace_leq(s: Subspace, t: Subspace) -> bool:
    _check_ambient(s, t)
    if s.dim > t.dim:
        return False
    if s.dim == 0:
        return True
    if t.dim == 0:
        return False
    coeffs = s.basis[:, list(t.pivots)]
    res = s.field.reduce(s.basis - s.field.matmul(coeffs, t.basis))
    return s.field.is_zero(res)


def subspace_sum(s: Subspace, t: Subspace) -> Subspace:
    _check_ambient(s, t)
    return rref(s.field, np.vstack([s.basis, t.basis]))


def subspace_intersect(s: Subspace, t: Subspace) -> Subspace:
    """Intersection via the kernel of ``[S^T | -T^T]``."""
    _check_ambient(s, t)
    field = s.field
    if s.dim == 0 or t.dim == 0:
        return Subspace.zero(field, s.ambient_dim)
    stacked = np.hstack([s.basis.T, field.reduce(-t.basis.T)])
    ker = kernel(field, stacked)
    if ker.dim == 0:
        return Subspace.zero(field, s.ambient_dim)
    coeffs = ker.basis[:, : s.dim]
    return rref(field, field.matmul(coeffs, s.basis))


def solve_linear(field: Field, m, b) -> Optional[np.ndarray]:
    """Some ``x`` with ``m x = b`` (free variables zero), or ``None``."""
    m = _as_matrix(field, m)
    b = field.asarray(b).reshape(-1)
    if m.shape[0] != b.shape[0]:
        raise ValueError(f"{m.shape[0]} equations but right-hand side of length {b.shape[0]}")
    ncols = m.shape[1]
    aug = np.hstack([m, b.reshape(-1, 1)])
    r = rref(field, aug)
    if ncols in r.pivots:
        return None
    x = field.zeros(ncols)
    for i, pc in enumerate(r.pivots):
        x[pc] = r.basis[i, ncols]
    if not np.all(field.matmul(m, x) == b):
        raise ArithmeticError("solution failed substitution check")
    return x
