import numpy as np
import pytest

from saddlescope import functions as fn
from saddlescope.dynamics import Patch, PiecewiseField, VectorField, patchy_field, saddle_field, single_patch
from saddlescope.errors import NumericError
from saddlescope.integrate import IntegratorConfig, integrate, integrate_piecewise, monitor


def rk4_order_factor(dt=0.05):
    X = saddle_field(fn.augmented_lagrangian())
    s0 = [1.0, -2.0, 4.0, 8.0]
    base = IntegratorConfig(t_max=2.0, sample_every=0.5, stop_field_norm=0.0)
    ref = integrate(X, s0, base.replace(rtol=1e-12, atol=1e-14)).endpoint
    e1 = np.linalg.norm(integrate(X, s0, base.replace(method="rk4_fixed", dt=dt)).endpoint - ref)
    e2 = np.linalg.norm(integrate(X, s0, base.replace(method="rk4_fixed", dt=dt / 2)).endpoint - ref)
    return e1 / e2


def test_rk4_is_fourth_order():
    assert 12 <= rk4_order_factor() <= 20


def test_exponential_decay_against_closed_form():
    X = VectorField(2, lambda s: np.array([-s[0], -3 * s[1]]), name="decay")
    tr = integrate(X, [1.0, 2.0], IntegratorConfig(t_max=3.0, stop_field_norm=0.0))
    want = np.column_stack([np.exp(-tr.times), 2 * np.exp(-3 * tr.times)])
    assert np.max(np.abs(tr.states - want)) < 1e-8
    assert tr.stop_reason == "t_max"
    assert tr.times[-1] == 3.0


def test_samples_hit_the_grid_exactly():
    X = VectorField(1, lambda s: -s, name="decay")
    tr = integrate(X, [1.0], IntegratorConfig(t_max=1.0, sample_every=0.1, stop_field_norm=0.0))
    np.testing.assert_allclose(tr.times, np.round(np.arange(11) * 0.1, 12), atol=1e-15)
    assert np.all(np.diff(tr.times) > 0)


def test_equilibrium_gives_single_sample():
    tr = integrate(saddle_field(fn.augmented_lagrangian()), [-1.5, -1.5, 3.0, 0.0])
    assert len(tr) == 1 and tr.stop_reason == "converged"


def test_blowup_and_domain_error():
    X = VectorField(1, lambda s: s * s, name="blow")
    assert integrate(X, [1.0], IntegratorConfig(t_max=5.0)).stop_reason == "blowup"
    R = saddle_field(fn.ring_lagrangian())
    # a radial flow that is driven straight into the guarded origin
    inward = VectorField(4, lambda s: np.concatenate([-s[:3] / np.linalg.norm(s[:3]), [0.0]]),
                         domain_guard=R.domain_guard, name="inward")
    tr = integrate(inward, [0.5, 0.0, 0.0, 0.0], IntegratorConfig(t_max=2.0))
    assert tr.stop_reason == "domain_error"
    assert tr.times[-1] < 0.6


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValueError):
        IntegratorConfig(rtol=0.0)


def test_step_budget_raises():
    X = VectorField(1, lambda s: -s, name="decay")
    with pytest.raises(NumericError):
        integrate(X, [1.0], IntegratorConfig(method="rk4_fixed", dt=1e-3, t_max=10.0, max_steps=100))


def test_augmented_lagrangian_run_and_objective():
    tr = integrate(saddle_field(fn.augmented_lagrangian()), [1.0, -2.0, 4.0, 8.0])
    assert tr.stop_reason == "converged"
    np.testing.assert_allclose(tr.endpoint, [-1.5, -1.5, 3.0, 0.0], atol=0.02)
    obj = monitor(tr, "objective", lambda s: (s[0] + s[1] + s[2]) ** 2)
    assert obj[-1] < 1e-4 and obj[0] > 1


def test_quasi_run():
    tr = integrate(saddle_field(fn.quasi()), [0.5, 0.2])
    np.testing.assert_allclose(tr.endpoint, [0, 0], atol=0.02)


def test_xz_squared_conservation():
    tr = integrate(saddle_field(fn.xz_squared()), [5.0, 5.0])
    energy = tr.states[:, 0] ** 2 + 0.5 * tr.states[:, 1] ** 2
    assert np.max(np.abs(energy - 37.5)) < 1e-4


def test_single_patch_wrapper_is_bitwise_equal():
    X = saddle_field(fn.quasi())
    a = integrate(X, [0.5, 0.2])
    b = integrate_piecewise(single_patch(X), [0.5, 0.2])
    np.testing.assert_array_equal(a.times, b.times)
    np.testing.assert_array_equal(a.states, b.states)


def test_patchy_fixed_points_stay_fixed():
    P = patchy_field()
    for c in (-2.0, 0.0, 1.3):
        tr = integrate_piecewise(P, [c, c, c])
        assert len(tr) == 1 and tr.stop_reason == "converged"


def crossing_field():
    """Continuous two-patch field on R^2 that crosses s1 = 0 at t = ln 2 from (1, 0)."""
    f1 = VectorField(2, lambda s: np.array([-1.0 - s[0], 1.0]), name="right")
    f2 = VectorField(2, lambda s: np.array([-1.0 - 2.0 * s[0], 1.0]), name="left")
    return PiecewiseField(2, (Patch(lambda s: s[0], f1, "s1>=0"), Patch(lambda s: -s[0], f2, "s1<0")), name="kink")


def test_boundary_crossing_is_localized():
    tr = integrate_piecewise(crossing_field(), [1.0, 0.0], IntegratorConfig(t_max=3.0, stop_field_norm=0.0))
    assert len(tr.events) == 1
    ev = tr.events[0]
    assert abs(ev["membership"]) < 1e-9
    assert (ev["from"], ev["to"]) == (0, 1)
    assert ev["time"] == pytest.approx(np.log(2.0), abs=1e-9)
    # after the switch s1 follows s1' = -1 - 2 s1 from 0
    t = tr.times[-1] - np.log(2.0)
    assert tr.endpoint[0] == pytest.approx(-0.5 * (1 - np.exp(-2 * t)), abs=1e-8)


def test_patchy_never_crosses_its_switching_plane():
    # d = x1 - x3 obeys d' = -d or d' = -3d, so the sign of d is invariant
    tr = integrate_piecewise(patchy_field(), [-1.0, 0.0, 1.0])
    assert tr.events == []
    assert np.all(tr.states[:, 0] - tr.states[:, 2] < 0)


def test_patchy_default_run():
    tr = integrate_piecewise(patchy_field(), [1.0, 1.6, -1.2])
    np.testing.assert_allclose(tr.endpoint, [2.88, 2.88, 2.88], atol=0.02)


def test_determinism():
    X = saddle_field(fn.xz_squared())
    a = integrate(X, [5.0, 5.0])
    b = integrate(X, [5.0, 5.0])
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.times, b.times)
