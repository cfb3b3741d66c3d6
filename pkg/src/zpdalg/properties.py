"""Deciding zpd, zLpd and 2-zpd, with self-checking certificates.

In finite dimension a bilinear functional is a vector in the dual of A (x) A.
"Vanishes on the pairs" means it annihilates the corresponding span S, and
"has the required form" means it lies in the row space D of the relevant
multiplication map.  So the property holds iff ``S^perp <= D``, equivalently
iff ``ker(map) <= S``.  The primal deciders test the second inclusion, the
``_dual`` decider the first.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .algebra import StructureAlgebra
from .exactlinalg import Subspace, annihilator, kernel, rref, solve_linear, subspace_leq
from .tensorops import apply_form, flatten, format_tensor, kappa, mu, mu1
from .zerospans import (
    SpanResult,
    SpanStrategy,
    StrategyError,
    _gf2_tables,
    _gray_points,
    _pack,
    _projective_points,
    commuting_span,
    one_sided_zero_span,
    zero_pair_span,
)

__all__ = [
    "Certificate",
    "UnsupportedCharacteristicError",
    "check_symmetric_half",
    "check_teq_iii",
    "check_xyzw_identity",
    "decompose_functional",
    "is_2zpd",
    "is_2zpd_dual",
    "is_zlpd",
    "is_zpd",
    "teq_iii_violation",
    "verify_decomposition",
]

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

_MAPS = {"zpd": mu1, "zlpd": kappa, "two_zpd": mu}


class UnsupportedCharacteristicError(ValueError):
    """Operation needs a field of characteristic other than 2."""


@dataclass
class Certificate:
    """Verdict for one property plus the evidence that re-checks it.

    ``kernel`` is the kernel of the multiplication map for the property and
    ``span`` the span of its zero pairs.  A ``fails`` verdict carries a form
    ``phi`` vanishing on ``span`` and a tensor ``t`` in ``kernel`` with
    ``phi(t) = 1``: no functional of the required shape can see ``t``, so
    ``phi`` is not of that shape.
    """

    property: str
    verdict: str
    exact: bool
    kernel: Subspace
    span: Subspace
    points_processed: int = 0
    phi: Optional[np.ndarray] = None
    t: Optional[np.ndarray] = None
    route: str = "primal"
    extra: dict = dc_field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def verify(self, a: StructureAlgebra) -> bool:
        f = a.field
        m = _MAPS[self.property](a)
        if self.span.dim and not f.is_zero(f.matmul(m, self.span.basis.T)):
            return False
        if self.verdict == HOLDS:
            return subspace_leq(self.kernel, self.span)
        if self.verdict == FAILS:
            if self.phi is None or self.t is None:
                return False
            if not f.is_zero(f.matmul(m, self.t)) or apply_form(a, self.phi, self.t) == 0:
                return False
            flat = flatten(self.phi)
            return all(f.matmul(flat, s) == 0 for s in self.span.basis)
        return self.verdict == INCONCLUSIVE and not self.exact

    def to_dict(self, a: StructureAlgebra) -> dict:
        fmt = np.vectorize(a.field.format_scalar, otypes=[object])
        out = {
            "property": self.property,
            "verdict": self.verdict,
            "exact": self.exact,
            "route": self.route,
            "kernel_dim": self.kernel.dim,
            "span_dim": self.span.dim,
            "points_processed": self.points_processed,
        }
        if self.phi is not None:
            out["witness_form"] = fmt(self.phi).tolist()
            out["witness_tensor"] = fmt(self.t).tolist()
            out["witness_tensor_terms"] = format_tensor(a, self.t)
        out.update(self.extra)
        return out


def _witness(a: StructureAlgebra, ker: Subspace, span: Subspace) -> tuple[np.ndarray, np.ndarray]:
    """First kernel basis vector outside the span, and the earliest form separating it."""
    f = a.field
    n = a.dim
    t = next(row for row in ker.basis if not f.is_zero(span.residual(row)))
    system = np.vstack([span.basis, t[None, :]])
    rhs = f.zeros(span.dim + 1)
    rhs[-1] = f.scalar(1)
    phi = solve_linear(f, system, rhs)
    if phi is None:
        raise ArithmeticError("separating functional does not exist; span bookkeeping is broken")
    return phi.reshape(n, n), t.copy()


def _decide(a: StructureAlgebra, prop: str, result: SpanResult) -> Certificate:
    ker = kernel(a.field, _MAPS[prop](a))
    span = result.span
    if subspace_leq(ker, span):
        cert = Certificate(prop, HOLDS, result.exact, ker, span, result.points_processed)
    elif not result.exact:
        cert = Certificate(prop, INCONCLUSIVE, False, ker, span, result.points_processed)
    else:
        phi, t = _witness(a, ker, span)
        cert = Certificate(prop, FAILS, True, ker, span, result.points_processed, phi=phi, t=t)
    if not cert.verify(a):
        raise ArithmeticError(f"{prop} certificate failed self-verification")
    return cert


def is_2zpd(
    a: StructureAlgebra, strategy: Optional[SpanStrategy] = None, span: Optional[SpanResult] = None
) -> Certificate:
    """2-zpd iff ``ker(mu) <= span{x (x) y : xy = yx = 0}``."""
    return _decide(a, "two_zpd", span or zero_pair_span(a, strategy))


def is_zpd(
    a: StructureAlgebra, strategy: Optional[SpanStrategy] = None, span: Optional[SpanResult] = None
) -> Certificate:
    return _decide(a, "zpd", span or one_sided_zero_span(a, strategy))


def is_zlpd(
    a: StructureAlgebra, strategy: Optional[SpanStrategy] = None, span: Optional[SpanResult] = None
) -> Certificate:
    return _decide(a, "zlpd", span or commuting_span(a, strategy))


def is_2zpd_dual(
    a: StructureAlgebra, strategy: Optional[SpanStrategy] = None, span: Optional[SpanResult] = None
) -> Certificate:
    """Functional-space check: every form killing the zero-pair span is ``tau1(xy) + tau2(yx)``."""
    f = a.field
    result = span or zero_pair_span(a, strategy)
    vanishing = annihilator(result.span)
    decomposable = rref(f, mu(a))
    ker = kernel(f, mu(a))
    extra = {"annihilator_dim": vanishing.dim, "decomposable_dim": decomposable.dim}
    if subspace_leq(vanishing, decomposable):
        verdict, phi, t = HOLDS, None, None
    elif not result.exact:
        verdict, phi, t = INCONCLUSIVE, None, None
    else:
        flat = next(row for row in vanishing.basis if not f.is_zero(decomposable.residual(row)))
        rhs = f.zeros(2 * a.dim + 1)
        rhs[-1] = f.scalar(1)
        t = solve_linear(f, np.vstack([mu(a), flat[None, :]]), rhs)
        if t is None:
            raise ArithmeticError("form outside the decomposable space sees no kernel tensor")
        verdict, phi = FAILS, flat.reshape(a.dim, a.dim)
    cert = Certificate(
        "two_zpd", verdict, result.exact, ker, result.span, result.points_processed,
        phi=phi, t=t, route="dual", extra=extra,
    )
    if not cert.verify(a):
        raise ArithmeticError("dual certificate failed self-verification")
    return cert


# ---------------------------------------------------------------------------
# commuting-pair test: for zw = wz, z(x)w - zw(x)1 must lie in the zero-pair span


def teq_iii_violation(
    a: StructureAlgebra, strategy: Optional[SpanStrategy] = None, span: Optional[SpanResult] = None
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """First commuting pair ``(z, w)`` with ``z (x) w - zw (x) 1`` outside the zero-pair span."""
    strategy = strategy or SpanStrategy.default_for(a.field)
    if not strategy.exhaustive:
        raise StrategyError("the commuting-pair test runs by exhaustive enumeration only")
    strategy.check(a)
    result = span or zero_pair_span(a, strategy)
    if not result.exact:
        raise StrategyError("the commuting-pair test needs an exact zero-pair span")
    n = a.dim
    f = a.field
    if f.p == 2:
        echelon = {r & -r: r for r in result.span.packed()}
        hit = _gf2_teq_scan(a, echelon)
        if hit is None:
            return None
        z, w = hit
        bits = lambda v: np.array([(v >> i) & 1 for i in range(n)], dtype=np.int64)
        return bits(z), bits(w)
    for z in _projective_points(f, n):
        cent = kernel(f, f.reduce(a.left_mult(z) - a.right_mult(z)))
        for w in cent.basis:
            t = f.reduce(np.outer(z, w).reshape(-1) - np.outer(a.multiply(z, w), a.unit).reshape(-1))
            if not f.is_zero(result.span.residual(t)):
                return z, w.copy()
    return None


def _gf2_teq_scan(a: StructureAlgebra, echelon: dict[int, int]) -> Optional[tuple[int, int]]:
    n = a.dim
    mask = (1 << n) - 1
    tables, _ = _gf2_tables(a, "square_zero")
    unit = _pack(a.unit)
    right_off = n * n

    def member(v: int) -> bool:
        while v:
            row = echelon.get(v & -v)
            if row is None:
                return False
            v ^= row
        return True

    def spread(v: int) -> int:
        out = 0
        while v:
            low = v & -v
            out |= 1 << ((low.bit_length() - 1) * n)
            v ^= low
        return out

    for z, state in _gray_points(n, 0, n, tables):
        left = [(state >> (j * n)) & mask for j in range(n)]
        dep: dict[int, tuple[int, int]] = {}
        sz = spread(z)
        for j in range(n):
            v = left[j] ^ ((state >> (right_off + j * n)) & mask)
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
                zw = 0
                rest = tag
                while rest:
                    low = rest & -rest
                    zw ^= left[low.bit_length() - 1]
                    rest ^= low
                if not member(tag * sz ^ unit * spread(zw)):
                    return z, tag
    return None


def check_teq_iii(
    a: StructureAlgebra, strategy: Optional[SpanStrategy] = None, span: Optional[SpanResult] = None
) -> bool:
    return teq_iii_violation(a, strategy, span) is None


# ---------------------------------------------------------------------------
# identities satisfied by forms


def _triple_products(a: StructureAlgebra) -> np.ndarray:
    """``out[b, c, d]`` = coordinates of ``e_b e_c e_d``."""
    n = a.dim
    f = a.field
    return f.matmul(a.table.reshape(n * n, n), a.table.reshape(n, n * n)).reshape(n, n, n, n)


def check_xyzw_identity(a: StructureAlgebra, phi, triples: Optional[np.ndarray] = None) -> bool:
    """``phi(xy, zw) + phi(wx, yz) == phi(x, yzw) + phi(wxy, z)`` on all basis quadruples."""
    f = a.field
    n = a.dim
    b = f.asarray(phi)
    t3 = _triple_products(a) if triples is None else triples
    pairs = a.table.reshape(n * n, n)
    g = f.matmul(f.matmul(pairs, b), pairs.T).reshape(n, n, n, n)  # g[a,b,c,d] = phi(e_a e_b, e_c e_d)
    lhs = f.reduce(g + g.transpose(1, 2, 3, 0))
    flat3 = t3.reshape(n**3, n)
    h = f.matmul(b, flat3.T).reshape(n, n, n, n)  # phi(e_a, e_b e_c e_d)
    q = f.matmul(flat3, b).reshape(n, n, n, n)  # q[d,a,b,c] = phi(e_d e_a e_b, e_c)
    rhs = f.reduce(h + q.transpose(1, 2, 3, 0))
    return bool(np.all(lhs == rhs))


def decompose_functional(a: StructureAlgebra, phi) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """``(tau1, tau2)`` with ``phi(x, y) = tau1(xy) + tau2(yx)``, or ``None``."""
    f = a.field
    n = a.dim
    sol = solve_linear(f, mu(a).T, flatten(f.asarray(phi)))
    if sol is None:
        return None
    tau1, tau2 = sol[:n], sol[n:]
    if not verify_decomposition(a, phi, tau1, tau2):
        raise ArithmeticError("decomposition failed reconstruction")
    return tau1, tau2


def verify_decomposition(a: StructureAlgebra, phi, tau1, tau2) -> bool:
    """Check ``phi(e_i, e_j) = tau1(e_i e_j) + tau2(e_j e_i)`` on every basis pair."""
    f = a.field
    t = a.table
    recon = f.reduce(
        f.matmul(t, f.asarray(tau1)) + f.matmul(t.transpose(1, 0, 2), f.asarray(tau2))
    )
    return bool(np.all(recon == f.asarray(phi)))


def check_symmetric_half(a: StructureAlgebra, phi) -> bool:
    """``phi(y, w) == phi(yw + wy, 1) / 2`` on all basis pairs (char != 2)."""
    f = a.field
    if f.p == 2:
        raise UnsupportedCharacteristicError("the halving identity needs characteristic != 2")
    b = f.asarray(phi)
    if not np.all(b == b.T):
        raise ValueError("form is not symmetric")
    half = f.inv(2)
    sym = f.reduce(a.table + a.table.transpose(1, 0, 2))  # e_i e_j + e_j e_i
    against_one = f.matmul(b, a.unit)  # phi(v, 1) as a functional of v
    rhs = f.reduce(f.matmul(sym, against_one) * half)
    return bool(np.all(rhs == b))
