import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import GF3, QQ, SMALL
from zpdalg.algebra import direct_product, mat, tri, trunc
from zpdalg.exactlinalg import GF2, annihilator, rref, subspace_contains
from zpdalg.properties import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    UnsupportedCharacteristicError,
    check_symmetric_half,
    check_teq_iii,
    check_xyzw_identity,
    decompose_functional,
    is_2zpd,
    is_2zpd_dual,
    is_zlpd,
    is_zpd,
    teq_iii_violation,
    verify_decomposition,
)
from zpdalg.tensorops import apply_form, flatten, mu, simple_tensor
from zpdalg.zerospans import SpanStrategy, StrategyError, zero_pair_span

# (zpd, zlpd, 2-zpd) from the enumerated spans against the kernels
VERDICTS = {
    "mat1_gf2": (HOLDS, HOLDS, HOLDS),
    "mat2_gf2": (HOLDS, HOLDS, HOLDS),
    "mat2_gf3": (HOLDS, HOLDS, HOLDS),
    "tri2_gf2": (HOLDS, HOLDS, HOLDS),
    "tri3_gf2": (HOLDS, HOLDS, HOLDS),
    "trunc2_gf2": (FAILS, HOLDS, FAILS),
    "trunc2_gf3": (FAILS, HOLDS, FAILS),
    "trunc3_gf3": (FAILS, HOLDS, FAILS),
    "gf2_cubed": (HOLDS, HOLDS, HOLDS),
    "gf4_over_gf2": (FAILS, HOLDS, FAILS),
}


def trace_form(a, k):
    """phi(x, y) = tr(xy) on M_k in the matrix-unit basis."""
    n = a.dim
    phi = a.field.zeros((n, n))
    for i in range(n):
        for j in range(n):
            prod = a.multiply(a.basis_element(i), a.basis_element(j))
            phi[i, j] = a.field.reduce(sum(prod[d * k + d] for d in range(k)))
    return phi


@pytest.mark.parametrize("name", sorted(VERDICTS))
def test_verdicts(name):
    a = SMALL[name]()
    certs = (is_zpd(a), is_zlpd(a), is_2zpd(a))
    assert tuple(c.verdict for c in certs) == VERDICTS[name]
    for c in certs:
        assert c.exact and c.verify(a)


def test_dual_numbers_witness():
    a = trunc(2, GF2)
    cert = is_2zpd(a)
    assert cert.verdict == FAILS
    assert cert.kernel.dim == 2 and cert.span.dim == 1
    assert cert.phi.tolist() == [[0, 1], [0, 0]]
    assert cert.t.tolist() == [0, 1, 1, 0]
    u = a.basis_element(1)
    assert apply_form(a, cert.phi, simple_tensor(a, u, u)) == 0
    assert apply_form(a, cert.phi, cert.t) == 1
    assert decompose_functional(a, cert.phi) is None


def test_witness_self_check_rejects_tampering():
    a = trunc(2, GF2)
    cert = is_2zpd(a)
    cert.phi = np.array([[0, 0], [0, 1]])  # sees u(x)u, which is in the span
    assert not cert.verify(a)


def test_dual_route_examples():
    a = trunc(2, GF2)
    cert = is_2zpd_dual(a)
    assert cert.verdict == FAILS and cert.extra["annihilator_dim"] == 3
    assert cert.extra["decomposable_dim"] < 3
    assert is_2zpd_dual(mat(2, GF2)).verdict == HOLDS


def test_finite_field_extension_is_not_two_sided_zpd():
    # commutative: tau1(xy) + tau2(yx) = (tau1 + tau2)(xy), so D has dim 2 < 4
    a = SMALL["gf4_over_gf2"]()
    cert = is_2zpd_dual(a)
    assert cert.extra["annihilator_dim"] == 4
    assert cert.extra["decomposable_dim"] == 2
    assert cert.verdict == FAILS


def test_rational_sampling_never_fails():
    a = trunc(2, QQ)
    for seed in range(3):
        cert = is_2zpd(a, SpanStrategy("mc", seed=seed))
        assert cert.verdict == INCONCLUSIVE and not cert.exact and cert.verify(a)
    assert is_2zpd(mat(2, QQ)).verdict == HOLDS


def test_one_dimensional_algebra():
    a = SMALL["mat1_gf2"]()
    assert is_zpd(a).holds and is_zlpd(a).holds


def test_span_can_be_reused():
    a = tri(2, GF2)
    span = zero_pair_span(a)
    assert is_2zpd(a, span=span).verdict == is_2zpd_dual(a, span=span).verdict == HOLDS


# --- cross-property invariants ---------------------------------------------


def test_two_sided_implies_one_sided_and_lie(small_algebra):
    a = small_algebra
    if is_2zpd(a).holds:
        assert is_zpd(a).holds and is_zlpd(a).holds


def test_primal_and_dual_agree(small_algebra):
    a = small_algebra
    assert is_2zpd(a).verdict == is_2zpd_dual(a).verdict


def test_commuting_pair_equivalence(small_algebra):
    a = small_algebra
    lhs = is_2zpd(a).holds
    rhs = is_zlpd(a).holds and check_teq_iii(a)
    assert lhs == rhs


def test_commuting_pair_examples():
    assert check_teq_iii(mat(2, GF2))
    a = trunc(2, GF2)
    z, w = teq_iii_violation(a)
    zw = a.multiply(z, w)
    t = (simple_tensor(a, z, w) - simple_tensor(a, zw, a.unit)) % 2
    assert not subspace_contains(zero_pair_span(a).span, t)
    one = a.unit
    assert not np.any((simple_tensor(a, one, one) - simple_tensor(a, a.multiply(one, one), one)) % 2)
    # the generic (non-packed) scan finds a violation over GF(3) as well
    assert teq_iii_violation(trunc(2, GF3)) is not None
    with pytest.raises(StrategyError):
        check_teq_iii(mat(2, QQ))


PRODUCT_FACTORS = {
    "mat2": lambda: mat(2, GF2),
    "tri2": lambda: tri(2, GF2),
    "trunc2": lambda: trunc(2, GF2),
    "f2": lambda: mat(1, GF2),
}


@pytest.mark.parametrize("left", sorted(PRODUCT_FACTORS))
@pytest.mark.parametrize("right", sorted(PRODUCT_FACTORS))
def test_direct_product_law(left, right):
    a, b = PRODUCT_FACTORS[left](), PRODUCT_FACTORS[right]()
    both = is_2zpd(a).holds and is_2zpd(b).holds
    assert is_2zpd(direct_product(a, b)).holds == both


# --- identities on forms ---------------------------------------------------


def test_trace_form_identities():
    a = mat(2, GF3)
    phi = trace_form(a, 2)
    assert check_xyzw_identity(a, phi)
    assert check_xyzw_identity(a, np.zeros((4, 4), dtype=np.int64))
    assert check_symmetric_half(a, phi)
    tau1, tau2 = decompose_functional(a, phi)
    assert verify_decomposition(a, phi, tau1, tau2)
    z = decompose_functional(a, np.zeros((4, 4), dtype=np.int64))
    assert not np.any(z[0]) and not np.any(z[1])


def test_trace_form_decomposes_over_gf2():
    a = mat(2, GF2)
    phi = trace_form(a, 2)
    tau1, tau2 = decompose_functional(a, phi)
    assert verify_decomposition(a, phi, tau1, tau2)
    assert verify_decomposition(a, phi, np.array([1, 0, 0, 1]), np.zeros(4, dtype=np.int64))


def test_symmetric_half_preconditions():
    a = mat(2, GF2)
    with pytest.raises(UnsupportedCharacteristicError):
        check_symmetric_half(a, trace_form(a, 2))
    b = mat(2, GF3)
    lopsided = np.zeros((4, 4), dtype=np.int64)
    lopsided[0, 1] = 1
    with pytest.raises(ValueError):
        check_symmetric_half(b, lopsided)


def test_identity_can_fail():
    # a generic form on a non-commutative algebra breaks the quadruple identity
    a = mat(2, GF2)
    phi = np.zeros((4, 4), dtype=np.int64)
    phi[0, 1] = 1
    assert not check_xyzw_identity(a, phi)


@pytest.mark.parametrize("name", [n for n, v in sorted(VERDICTS.items()) if v[0] == HOLDS])
def test_vanishing_forms_satisfy_quadruple_identity(name):
    a = SMALL[name]()
    for row in annihilator(zero_pair_span(a).span).basis:
        assert check_xyzw_identity(a, row.reshape(a.dim, a.dim))


@pytest.mark.parametrize("name", sorted(VERDICTS))
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_decompose_iff_in_row_space(name, seed):
    a = SMALL[name]()
    f = a.field
    rng = np.random.default_rng(seed)
    rows = rref(f, mu(a))
    phi = f.random(rng, (a.dim, a.dim))
    if rng.random() < 0.5:  # bias half the draws into the row space
        phi = f.matmul(f.random(rng, rows.dim), rows.basis).reshape(a.dim, a.dim)
    got = decompose_functional(a, phi)
    assert (got is not None) == subspace_contains(rows, flatten(phi))
    if got is not None:
        assert verify_decomposition(a, phi, *got)
