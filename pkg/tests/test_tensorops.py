import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import SMALL
from zpdalg.algebra import mat, trunc
from zpdalg.exactlinalg import GF2, kernel, rank, subspace_contains
from zpdalg.tensorops import (
    apply_form,
    flatten,
    format_tensor,
    kappa,
    mu,
    mu1,
    mu2,
    simple_tensor,
    swap_tensor,
    unflatten,
)


def test_mu1_of_dual_numbers():
    a = trunc(2, GF2)
    # columns 1(x)1, 1(x)u, u(x)1, u(x)u -> 1, u, u, 0
    assert mu1(a).T.tolist() == [[1, 0], [0, 1], [0, 1], [0, 0]]
    assert rank(GF2, mu1(a)) == 2
    assert kernel(GF2, mu1(a)).dim == 2


def test_kappa_of_commutative_is_zero():
    assert not np.any(kappa(trunc(3, GF2)))


def test_orthogonal_idempotents_in_kernel():
    a = mat(2, GF2)
    t = simple_tensor(a, a.basis_element(0), a.basis_element(3))
    assert subspace_contains(kernel(GF2, mu(a)), t)
    assert kernel(GF2, mu(a)).dim == 16 - rank(GF2, mu(a))


def test_apply_form_examples():
    a = trunc(2, GF2)
    u = a.basis_element(1)
    t = simple_tensor(a, u, u)
    assert apply_form(a, np.zeros((2, 2), dtype=int), t) == 0
    assert apply_form(a, np.eye(2, dtype=int), t) == 1


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(SMALL)), st.integers(0, 2**32 - 1))
def test_maps_on_simple_tensors(name, seed):
    a = SMALL[name]()
    f = a.field
    rng = np.random.default_rng(seed)
    for _ in range(5):
        x, y, z = (f.random(rng, a.dim) for _ in range(3))
        t = simple_tensor(a, x, y)
        assert np.array_equal(f.matmul(mu1(a), t), a.multiply(x, y))
        assert np.array_equal(f.matmul(mu2(a), t), a.multiply(y, x))
        phi = f.random(rng, (a.dim, a.dim))
        assert apply_form(a, phi, t) == f.matmul(f.matmul(x, phi), y)
        lhs = apply_form(a, phi, simple_tensor(a, x, f.reduce(y + z)))
        rhs = f.reduce(apply_form(a, phi, t) + apply_form(a, phi, simple_tensor(a, x, z)))
        assert lhs == rhs
        assert np.array_equal(swap_tensor(a, t), simple_tensor(a, y, x))


def test_mu1_surjective_and_kappa_kernel(small_algebra):
    a = small_algebra
    f = a.field
    assert rank(f, mu1(a)) == a.dim
    kk = kernel(f, kappa(a))
    for i in range(a.dim):
        e = a.basis_element(i)
        assert subspace_contains(kk, simple_tensor(a, e, e))
    commutative = bool(np.all(a.table == a.table.transpose(1, 0, 2)))
    assert commutative == (not np.any(kappa(a)))


def test_flatten_roundtrip():
    phi = np.arange(9).reshape(3, 3)
    assert np.array_equal(unflatten(flatten(phi), 3), phi)


def test_format_tensor():
    a = trunc(2, GF2)
    assert format_tensor(a, np.array([0, 1, 1, 0])) == "1(x)u + u(x)1"
    assert format_tensor(a, np.zeros(4, dtype=int)) == "0"
