"""Spans of the zero-product varieties of an algebra.

Every span here is generated, one element ``x`` at a time, by a linear slice:
the ``z`` with ``xz = zx = 0`` (two-sided), ``xz = 0`` (one-sided), ``xz = zx``
(commuting), or for Theta the ``m`` in a bimodule with ``xmx = 0``.  Since the
slice only depends on the line through ``x``, exhaustive mode visits one
representative per line (first nonzero coordinate equal to 1).

Over GF(2) enumeration walks a Gray code so that the packed columns of
``L_x`` and ``R_x`` change by a single XOR per step.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .algebra import StructureAlgebra, is_bimodule
from .exactlinalg import (
    Field,
    Subspace,
    gf2_echelon_finish,
    gf2_echelon_insert,
    kernel,
    pack_rows,
    rref,
    subspace_leq,
)
from .tensorops import kappa, mu, mu1

__all__ = [
    "BimoduleError",
    "SpanResult",
    "SpanStrategy",
    "StrategyError",
    "commuting_span",
    "default_workers",
    "one_sided_zero_span",
    "square_zero_span",
    "theta_span",
    "zero_pair_span",
]

EXHAUSTIVE = "exhaustive"
MONTE_CARLO = "monte_carlo"
_IDLE_FACTOR = 64


class StrategyError(ValueError):
    """The requested strategy cannot run on this algebra."""

    def __init__(self, message: str, required_cap: Optional[int] = None):
        super().__init__(message)
        self.required_cap = required_cap


class BimoduleError(ValueError):
    """A module basis that is not closed under multiplication by the algebra."""


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("ZPDALG_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SpanStrategy:
    mode: str = EXHAUSTIVE
    enumeration_cap: int = 2**20
    sample_window: int = 20
    sample_range: tuple[int, int] = (-3, 3)
    seed: int = 0
    workers: Optional[int] = None

    def __post_init__(self):
        mode = {"mc": MONTE_CARLO}.get(self.mode, self.mode)
        if mode not in (EXHAUSTIVE, MONTE_CARLO):
            raise StrategyError(f"unknown strategy mode {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        if self.sample_window < 1:
            raise StrategyError("sample_window must be positive")

    @property
    def exhaustive(self) -> bool:
        return self.mode == EXHAUSTIVE

    def check(self, a: StructureAlgebra) -> None:
        if not self.exhaustive:
            return
        if a.field.p is None:
            raise StrategyError("exhaustive enumeration needs a finite field; use monte_carlo over QQ")
        points = a.field.p ** a.dim
        if points > self.enumeration_cap:
            raise StrategyError(
                f"{a.field}^{a.dim} has {points} points, above the enumeration cap "
                f"{self.enumeration_cap}; rerun with cap >= {points}",
                required_cap=points,
            )

    @classmethod
    def default_for(cls, field: Field, **kwargs) -> "SpanStrategy":
        """Exhaustive over finite fields, sampling over Q."""
        return cls(mode=EXHAUSTIVE if field.p is not None else MONTE_CARLO, **kwargs)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "enumeration_cap": self.enumeration_cap,
            "sample_window": self.sample_window,
            "sample_range": list(self.sample_range),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SpanResult:
    span: Subspace
    exact: bool
    points_processed: int

    @property
    def dim(self) -> int:
        return self.span.dim


# ---------------------------------------------------------------------------
# GF(2) bit-packed scan


def _pack(vec) -> int:
    return pack_rows(np.asarray(vec).reshape(1, -1))[0]


def _gf2_tables(a: StructureAlgebra, kind: str) -> tuple[list[int], int]:
    """Per basis element ``e_i``: the packed columns of the slice map of ``e_i``.

    Column ``j`` occupies bits ``[j*w, (j+1)*w)``; returns ``(tables, w)``.
    """
    n = a.dim
    t = a.table
    left = [[_pack(t[i, j]) for j in range(n)] for i in range(n)]  # e_i e_j
    right = [[_pack(t[j, i]) for j in range(n)] for i in range(n)]  # e_j e_i
    if kind == "zero_pair":
        w = 2 * n
        cols = [[left[i][j] | (right[i][j] << n) for j in range(n)] for i in range(n)]
    elif kind == "one_sided":
        w = n
        cols = left
    elif kind == "commuting":
        w = n
        cols = [[left[i][j] ^ right[i][j] for j in range(n)] for i in range(n)]
    elif kind in ("square_zero", "theta"):
        # left block then right block
        w = n
        cols = [left[i] + right[i] for i in range(n)]
    else:
        raise ValueError(kind)
    tables = []
    for i in range(n):
        big = 0
        for j, c in enumerate(cols[i]):
            big |= c << (j * w)
        tables.append(big)
    return tables, w


def _gray_points(n: int, prefix: int, low_bits: int, tables: list[int]) -> Iterator[tuple[int, int]]:
    """Yield ``(x, packed slice map)`` for all ``x = prefix | low`` with ``x != 0``."""
    state = 0
    x = prefix
    for i in range(low_bits, n):
        if (prefix >> i) & 1:
            state ^= tables[i]
    if x:
        yield x, state
    for s in range(1, 1 << low_bits):
        i = (s & -s).bit_length() - 1
        x ^= 1 << i
        state ^= tables[i]
        yield x, state


def _gf2_scan(job) -> tuple[list[int], int]:
    kind, n, tables, w, prefix, low_bits, bound_dim, module_rows = job
    mask = (1 << n) - 1
    wmask = (1 << w) - 1
    echelon: dict[int, int] = {}
    processed = 0
    shifts = [j * w for j in range(n)]
    for x, state in _gray_points(n, prefix, low_bits, tables):
        processed += 1
        if kind == "square_zero":
            sq = 0
            v = x
            while v:
                low = v & -v
                sq ^= (state >> shifts[low.bit_length() - 1]) & mask
                v ^= low
            if sq == 0:
                gf2_echelon_insert(echelon, x)
        elif kind == "theta":
            right_off = n * n

            def lmul(v, state=state):
                out = 0
                while v:
                    low = v & -v
                    out ^= (state >> shifts[low.bit_length() - 1]) & mask
                    v ^= low
                return out

            def rmul(v, state=state):
                out = 0
                while v:
                    low = v & -v
                    out ^= (state >> (right_off + shifts[low.bit_length() - 1])) & mask
                    v ^= low
                return out

            dep: dict[int, tuple[int, int]] = {}
            am = [lmul(m) for m in module_rows]
            for k, m in enumerate(module_rows):
                v = lmul(rmul(m))
                tag = 1 << k
                while v:
                    low = v & -v
                    e = dep.get(low)
                    if e is None:
                        dep[low] = (v, tag)
                        break
                    v ^= e[0]
                    tag ^= e[1]
                else:
                    g = 0
                    while tag:
                        low = tag & -tag
                        g ^= am[low.bit_length() - 1]
                        tag ^= low
                    gf2_echelon_insert(echelon, g)
        else:
            # kernel of the slice map = dependencies among its n columns
            dep = {}
            spread = 0
            v = x
            while v:
                low = v & -v
                spread |= 1 << ((low.bit_length() - 1) * n)
                v ^= low
            for j in range(n):
                v = (state >> shifts[j]) & wmask
                tag = 1 << j
                while v:
                    low = v & -v
                    e = dep.get(low)
                    if e is None:
                        dep[low] = (v, tag)
                        break
                    v ^= e[0]
                    tag ^= e[1]
                else:
                    # x (x) z with z = tag; blocks of width n never overlap
                    gf2_echelon_insert(echelon, tag * spread)
        if bound_dim is not None and len(echelon) >= bound_dim:
            break
    return list(echelon.values()), processed


def _gf2_exhaustive(
    a: StructureAlgebra,
    kind: str,
    ambient: int,
    strategy: SpanStrategy,
    bound_dim: Optional[int],
    module_rows: tuple[int, ...] = (),
) -> tuple[Subspace, int]:
    n = a.dim
    tables, w = _gf2_tables(a, kind)
    workers = strategy.workers or default_workers()
    high = 0
    while (1 << high) < workers and high < n:
        high += 1
    low_bits = n - high
    jobs = [
        (kind, n, tables, w, prefix << low_bits, low_bits, bound_dim, module_rows)
        for prefix in range(1 << high)
    ]
    if len(jobs) == 1:
        results = [_gf2_scan(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_gf2_scan, jobs))
    echelon: dict[int, int] = {}
    processed = 0
    for rows, count in results:
        processed += count
        for r in rows:
            gf2_echelon_insert(echelon, r)
    return Subspace.from_packed(a.field, gf2_echelon_finish(echelon), ambient), processed


# ---------------------------------------------------------------------------
# generic dense path


def _projective_points(field: Field, n: int) -> Iterator[np.ndarray]:
    p = field.p
    for lead in range(n):
        for tail in itertools.product(range(p), repeat=n - lead - 1):
            x = np.zeros(n, dtype=np.int64)
            x[lead] = 1
            x[lead + 1 :] = tail
            yield x


def _sample_points(a: StructureAlgebra, strategy: SpanStrategy) -> Iterator[np.ndarray]:
    rng = np.random.default_rng(strategy.seed)
    lo, hi = strategy.sample_range
    while True:
        x = a.field.random(rng, a.dim, lo, hi)
        if not a.field.is_zero(x):
            yield x


def _accumulate(
    a: StructureAlgebra,
    ambient: int,
    generators: Callable[[np.ndarray], Optional[np.ndarray]],
    strategy: SpanStrategy,
    bound_dim: Optional[int],
) -> tuple[Subspace, int]:
    field = a.field
    current = Subspace.zero(field, ambient)
    processed = 0
    stale = 0
    points = _projective_points(field, a.dim) if strategy.exhaustive else _sample_points(a, strategy)
    idle = 0
    for x in points:
        processed += 1
        gens = generators(x)
        grew = False
        if gens is not None and len(gens):
            idle = 0
            fresh = [g for g in gens if not field.is_zero(current.residual(g))]
            if fresh:
                current = rref(field, np.vstack([current.basis, np.asarray(fresh)]))
                grew = True
        else:
            idle += 1
        if bound_dim is not None and current.dim >= bound_dim:
            break
        if not strategy.exhaustive:
            # a round is a sample with a nonzero slice; empty slices cannot grow the span
            if gens is not None and len(gens):
                stale = 0 if grew else stale + 1
            if stale >= strategy.sample_window or idle >= strategy.sample_window * _IDLE_FACTOR:
                break
    return current, processed


def _tensor_generators(a: StructureAlgebra, x: np.ndarray, slice_basis: np.ndarray) -> np.ndarray:
    return a.field.reduce(np.einsum("i,kj->kij", x, slice_basis).reshape(len(slice_basis), -1))


def _slice_matrix(a: StructureAlgebra, x: np.ndarray, kind: str) -> np.ndarray:
    lx = a.left_mult(x)
    if kind == "one_sided":
        return lx
    rx = a.right_mult(x)
    if kind == "zero_pair":
        return np.vstack([lx, rx])
    return a.field.reduce(lx - rx)


def _tensor_span(a: StructureAlgebra, kind: str, strategy: Optional[SpanStrategy], bound: Subspace) -> SpanResult:
    strategy = strategy or SpanStrategy.default_for(a.field)
    strategy.check(a)
    n = a.dim
    if strategy.exhaustive and a.field.p == 2:
        span, processed = _gf2_exhaustive(a, kind, n * n, strategy, bound.dim)
    else:

        def gens(x):
            z = kernel(a.field, _slice_matrix(a, x, kind))
            return _tensor_generators(a, x, z.basis) if z.dim else None

        span, processed = _accumulate(a, n * n, gens, strategy, bound.dim)
    if not subspace_leq(span, bound):
        raise ArithmeticError(f"{kind} span escaped its defining kernel")
    return SpanResult(span, strategy.exhaustive, processed)


def zero_pair_span(a: StructureAlgebra, strategy: Optional[SpanStrategy] = None) -> SpanResult:
    """``span{x (x) y : xy = yx = 0}`` inside A (x) A."""
    return _tensor_span(a, "zero_pair", strategy, kernel(a.field, mu(a)))


def one_sided_zero_span(a: StructureAlgebra, strategy: Optional[SpanStrategy] = None) -> SpanResult:
    """``span{x (x) y : xy = 0}``."""
    return _tensor_span(a, "one_sided", strategy, kernel(a.field, mu1(a)))


def commuting_span(a: StructureAlgebra, strategy: Optional[SpanStrategy] = None) -> SpanResult:
    """``span{x (x) y : xy = yx}``."""
    return _tensor_span(a, "commuting", strategy, kernel(a.field, kappa(a)))


def square_zero_span(a: StructureAlgebra, strategy: Optional[SpanStrategy] = None) -> SpanResult:
    """The span N_A of square-zero elements of A.

    The square-zero set is not cut out by a linear slice, so sampling over Q
    would almost never hit it; monte_carlo is refused there.
    """
    strategy = strategy or SpanStrategy.default_for(a.field)
    if not strategy.exhaustive and a.field.p is None:
        raise StrategyError("square-zero span over QQ needs exhaustive enumeration, which QQ does not allow")
    strategy.check(a)
    n = a.dim
    if strategy.exhaustive and a.field.p == 2:
        span, processed = _gf2_exhaustive(a, "square_zero", n, strategy, n)
    else:

        def gens(x):
            return x[None, :] if a.field.is_zero(a.multiply(x, x)) else None

        span, processed = _accumulate(a, n, gens, strategy, n)
    return SpanResult(span, strategy.exhaustive, processed)


def theta_span(
    a: StructureAlgebra, module_basis: Subspace, strategy: Optional[SpanStrategy] = None
) -> SpanResult:
    """``span{x m : x in A, m in M, x m x = 0}`` for a bimodule ``M`` inside A."""
    strategy = strategy or SpanStrategy.default_for(a.field)
    if module_basis.ambient_dim != a.dim:
        raise BimoduleError("module basis does not live in the algebra")
    if not is_bimodule(a, module_basis):
        raise BimoduleError("module is not closed under left and right multiplication")
    strategy.check(a)
    n = a.dim
    if module_basis.dim == 0:
        return SpanResult(module_basis, strategy.exhaustive, 0)
    if strategy.exhaustive and a.field.p == 2:
        span, processed = _gf2_exhaustive(
            a, "theta", n, strategy, module_basis.dim, tuple(module_basis.packed())
        )
    else:
        field = a.field
        mb = module_basis.basis

        def gens(x):
            lx = a.left_mult(x)
            sandwich = field.matmul(field.matmul(lx, a.right_mult(x)), mb.T)
            c = kernel(field, sandwich)
            if c.dim == 0:
                return None
            m = field.matmul(c.basis, mb)
            return field.matmul(lx, m.T).T

        span, processed = _accumulate(a, n, gens, strategy, module_basis.dim)
    if not subspace_leq(span, module_basis):
        raise ArithmeticError("theta span escaped the module")
    return SpanResult(span, strategy.exhaustive, processed)
