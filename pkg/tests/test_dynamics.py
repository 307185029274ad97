import math

import numpy as np
import pytest

from saddlescope import functions as fn
from saddlescope.dynamics import (
    PATCHY_A1, PATCHY_A2, continuity_defect, fd_jacobian, jacobian_at, limit_jacobians,
    patchy_field, saddle_field, single_patch,
)
from saddlescope.errors import CapabilityError, DomainError


def test_saddle_field_examples():
    np.testing.assert_allclose(saddle_field(fn.augmented_lagrangian())([-1.5, -1.5, 3, 0]), 0, atol=1e-14)
    np.testing.assert_allclose(saddle_field(fn.xz_squared())([1.0, 1.0]), [-1, 2])
    s = np.array([0.9, 0.7, 0.2, 0.3])
    x = s[:3]
    want = np.concatenate([-2 * (1 - 1 / np.linalg.norm(x)) * x - np.array([0, 0, s[3]]), [x[2] - 0.5]])
    np.testing.assert_allclose(saddle_field(fn.ring_lagrangian())(s), want, rtol=1e-14)


def test_jacobian_examples():
    xs = np.array([math.sqrt(0.75), 0.0, 0.5])
    J = jacobian_at(saddle_field(fn.ring_lagrangian()), np.concatenate([xs, [0.0]]))
    e3 = np.array([0.0, 0.0, 1.0])
    want = np.block([[-2 * np.outer(xs, xs), -e3[:, None]], [e3[None, :], np.zeros((1, 1))]])
    np.testing.assert_allclose(J, want, atol=1e-12)
    np.testing.assert_allclose(jacobian_at(saddle_field(fn.xz_squared()), [1.0, 0.0]), [[0, 0], [0, 2]])


@pytest.mark.parametrize("name", sorted(fn.CATALOG))
def test_jacobian_against_finite_differences(name):
    X = saddle_field(fn.catalog_function(name))
    rng = np.random.default_rng(21)
    for _ in range(50):
        s = rng.uniform(-2, 2, X.dim)
        if name in ("ring_lagrangian", "quartic_ring") and np.linalg.norm(s[: X.dim - 1]) < 0.2:
            continue
        J = jacobian_at(X, s)
        Jfd = fd_jacobian(X, s)
        assert np.max(np.abs(J - Jfd)) / max(1.0, np.max(np.abs(J))) < 1e-5


def test_no_hessian_means_no_jacobian():
    F = fn.SaddleFunction(1, 1, lambda x, z: float(x[0] * z[0]), smoothness="C1")
    with pytest.raises(CapabilityError):
        jacobian_at(saddle_field(F), [1.0, 1.0])


def test_domain_guard_on_field():
    with pytest.raises(DomainError):
        saddle_field(fn.ring_lagrangian())([0.0, 0.0, 0.0, 1.0])


def test_limit_jacobians_patchy():
    P = patchy_field()
    mats = limit_jacobians(P, [1.0, 1.0, 1.0])
    assert len(mats) == 2
    np.testing.assert_allclose(mats[0], PATCHY_A1)
    np.testing.assert_allclose(mats[1], PATCHY_A2)
    inner = limit_jacobians(P, [2.0, 0.0, 0.0])
    assert len(inner) == 1
    np.testing.assert_allclose(inner[0], PATCHY_A1 + np.outer(np.ones(3), [4.0, 0.0, -4.0]))


def test_single_patch_limit_is_jacobian():
    X = saddle_field(fn.augmented_lagrangian())
    s = [0.3, -0.2, 1.0, 0.5]
    mats = limit_jacobians(single_patch(X), s)
    assert len(mats) == 1
    np.testing.assert_array_equal(mats[0], jacobian_at(X, s))


def test_patchy_continuity_on_boundary():
    P = patchy_field()
    rng = np.random.default_rng(8)
    for _ in range(100):
        a, b = rng.uniform(-5, 5, 2)
        assert continuity_defect(P, [a, b, a]) < 1e-9


def test_patch_interiors_disjoint_and_covering():
    P = patchy_field()
    for s in np.random.default_rng(3).uniform(-3, 3, (500, 3)):
        m = P.memberships(s)
        assert np.sum(m > 0) <= 1
        assert P.closure_patches(s)


def test_critical_iff_zero_field_on_sets():
    X = saddle_field(fn.ring_lagrangian())
    for th in np.linspace(0, 2 * np.pi, 13):
        s = [math.sqrt(0.75) * math.cos(th), math.sqrt(0.75) * math.sin(th), 0.5, 0.0]
        assert np.linalg.norm(X(s)) < 1e-14
