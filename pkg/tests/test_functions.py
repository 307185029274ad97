import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import CLOSED_FORMS, central_grad, central_hess
from saddlescope import functions as fn
from saddlescope.errors import CapabilityError, DomainError, NumericError


def _points(F, k, seed, box=2.0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < k:
        p = rng.uniform(-box, box, F.n + F.m)
        if F.in_domain(p[: F.n], p[F.n :]) and np.linalg.norm(p[: F.n]) > 0.1:
            out.append(p)
    return out


@pytest.mark.parametrize("name", sorted(fn.CATALOG))
def test_catalog_values_match_closed_forms(name):
    F = fn.catalog_function(name)
    for p in _points(F, 20, 1):
        assert F(*F.split(p)) == pytest.approx(CLOSED_FORMS[name](p), rel=1e-13, abs=1e-13)


def test_point_values():
    assert fn.eval_F(fn.augmented_lagrangian(), [0, 0, 0], [0]) == 0.0
    assert fn.eval_F(fn.quasi(), [0], [0]) == pytest.approx(2.0)
    assert fn.eval_F(fn.quartic_ring(), [1, 0], [0]) == 0.0


def test_gradient_examples():
    L = fn.augmented_lagrangian()
    np.testing.assert_allclose(fn.grad(L, "x", [1, -2, 4], [8]), [20, -8, 6])
    assert fn.grad(fn.xz_squared(), "z", [1], [1])[0] == pytest.approx(2.0)
    np.testing.assert_allclose(fn.grad(fn.quartic_ring(), "x", [1, 0], [0]), [0, 0], atol=1e-15)


def test_hessian_examples():
    Q = fn.quasi()
    assert fn.hess_block(Q, "xx", [0], [0])[0, 0] == pytest.approx(4.0)
    assert fn.hess_block(Q, "xz", [0], [0])[0, 0] == pytest.approx(0.0, abs=1e-15)
    L = fn.augmented_lagrangian()
    rng = np.random.default_rng(3)
    for _ in range(10):
        assert np.all(fn.hess_block(L, "zz", rng.normal(size=3), rng.normal(size=1)) == 0)


@pytest.mark.parametrize("name", sorted(fn.CATALOG))
def test_analytic_derivatives_against_oracle(name):
    """Gradients and Hessians agree with an independent central-difference oracle."""
    F = fn.catalog_function(name)
    f = CLOSED_FORMS[name]
    for p in _points(F, 15, 7):
        x, z = F.split(p)
        g = np.concatenate([fn.grad(F, "x", x, z), fn.grad(F, "z", x, z)])
        np.testing.assert_allclose(g, central_grad(f, p), rtol=1e-6, atol=1e-6)
        hxx, hxz, hzz = fn.hess_blocks(F, x, z)
        H = np.block([[hxx, hxz], [hxz.T, hzz]])
        np.testing.assert_allclose(H, central_hess(f, p), rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("name", sorted(fn.CATALOG))
def test_hessian_block_symmetries(name):
    F = fn.catalog_function(name)
    for p in _points(F, 10, 11):
        x, z = F.split(p)
        np.testing.assert_allclose(fn.hess_block(F, "xx", x, z), fn.hess_block(F, "xx", x, z).T, atol=1e-10)
        np.testing.assert_allclose(fn.hess_block(F, "zx", x, z), fn.hess_block(F, "xz", x, z).T, atol=1e-10)


def test_linear_in_z_for_augmented_lagrangian():
    L = fn.augmented_lagrangian()
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = rng.uniform(-2, 2, 3)
        g1 = fn.grad(L, "z", x, rng.uniform(-2, 2, 1))
        g2 = fn.grad(L, "z", x, rng.uniform(-2, 2, 1))
        assert np.max(np.abs(g1 - g2)) < 1e-10


def test_fd_validate_passes_and_catches_wrong_gradient():
    L = fn.augmented_lagrangian()
    pts = [(p[:3], p[3:]) for p in np.random.default_rng(0).uniform(-2, 2, (100, 4))]
    assert fn.fd_validate(L, pts, 1e-5).verdict == "pass"
    bad = fn.SaddleFunction(3, 1, L.value, lambda x, z: L.grad_x(x, z) + 1e-3, L.grad_z, L.hess, name="bad")
    cert = fn.fd_validate(bad, pts, 1e-5)
    assert cert.verdict == "fail"
    assert cert.worst_witness["quantity"] == "grad_x"


def test_fd_validate_ring_and_without_providers():
    R = fn.ring_lagrangian()
    pts = [(p[:3], p[3:]) for p in _points(R, 50, 2)]
    assert fn.fd_validate(R, pts, 1e-5).verdict == "pass"
    bare = fn.SaddleFunction(1, 1, lambda x, z: float(x[0] * z[0]))
    assert fn.fd_validate(bare, [([1.0], [1.0])], 1e-5).verdict == "inconclusive"


def test_domain_guard_raises():
    R = fn.ring_lagrangian()
    with pytest.raises(DomainError):
        fn.eval_F(R, [0, 0, 0], [0])
    with pytest.raises(DomainError):
        fn.grad(R, "x", [0, 0, 0], [1])
    with pytest.raises(DomainError):
        fn.eval_F(fn.quasi(), [0, 0], [0])


def test_non_finite_value_is_numeric_error():
    F = fn.SaddleFunction(1, 1, lambda x, z: float("inf") if x[0] > 1 else 0.0, name="blow")
    with pytest.raises(NumericError):
        fn.eval_F(F, [10.0], [0.0])


def test_c1_function_has_no_hessian():
    F = fn.SaddleFunction(1, 1, lambda x, z: float(x[0] * z[0]), smoothness="C1")
    with pytest.raises(CapabilityError):
        fn.hess_block(F, "xx", [1.0], [1.0])


def test_finite_difference_fallback_without_providers():
    F = fn.SaddleFunction(1, 1, lambda x, z: float(x[0] ** 2 * z[0] - z[0] ** 3))
    np.testing.assert_allclose(fn.grad(F, "x", [1.5], [2.0]), [6.0], rtol=1e-8)
    hxx, hxz, hzz = fn.hess_blocks(F, [1.5], [2.0])
    assert hxx[0, 0] == pytest.approx(4.0, rel=1e-4)
    assert hxz[0, 0] == pytest.approx(3.0, rel=1e-4)
    assert hzz[0, 0] == pytest.approx(-12.0, rel=1e-4)


@settings(max_examples=50, deadline=None)
@given(c=st.floats(0.1, 20.0), p=st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_scaling_multiplies_every_derivative(c, p):
    L = fn.augmented_lagrangian()
    C = fn.scaled(L, c)
    x, z = np.array(p[:3]), np.array(p[3:])
    assert C(x, z) == pytest.approx(c * L(x, z), rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(fn.grad(C, "x", x, z), c * fn.grad(L, "x", x, z), rtol=1e-12, atol=1e-12)
    for a, b in zip(fn.hess_blocks(C, x, z), fn.hess_blocks(L, x, z)):
        np.testing.assert_allclose(a, c * b, rtol=1e-12, atol=1e-12)
