import numpy as np
import pytest

from pinchflow.errors import DomainError
from pinchflow.geometry import Ambient
from pinchflow.reference import (
    SphereSolution,
    _rk4,
    euclid_blowup,
    euclid_radius,
    hyperbolic_radius,
    integrate_sphere_ode,
    sphere_speed,
)


def test_euclidean_closed_form():
    assert euclid_blowup(1.0, 2, 2.0) == 4.0
    assert euclid_blowup(2.0, 2, 2.0) == 2.0
    assert euclid_radius(1.0, 2, 2.0, 2.0) == pytest.approx(2.0)
    t = np.linspace(0, 3.9, 50)
    np.testing.assert_allclose(euclid_radius(1.0, 2, 2.0, t), 1 / (1 - t / 4))


def test_euclidean_domain():
    with pytest.raises(DomainError) as exc:
        euclid_radius(1.0, 2, 2.0, 4.0)
    assert exc.value.blowup_time == 4.0
    with pytest.raises(DomainError):
        euclid_blowup(1.0, 2, 1.0)
    with pytest.raises(DomainError):
        euclid_blowup(0.0, 2, 2.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_integrator_reproduces_euclidean_closed_form(p):
    t = np.linspace(0, 0.9 * euclid_blowup(1.0, 2, p), 7)
    num = integrate_sphere_ode(lambda r: sphere_speed(Ambient.EUCLIDEAN, r, 2, p), 1.0, t)
    np.testing.assert_allclose(num, euclid_radius(1.0, 2, p, t), rtol=1e-10)


def test_hyperbolic_against_fixed_step_rk4():
    f = lambda r: (2 / np.tanh(r)) ** -2.0  # noqa: E731

    def fixed(h):
        r = 1.0
        for _ in range(int(round(10.0 / h))):
            r = _rk4(f, r, h)
        return r

    coarse, fine = fixed(1e-2), fixed(5e-3)
    assert abs(coarse - fine) / fine < 1e-8
    assert hyperbolic_radius(1.0, 2, 2.0, 10.0) == pytest.approx(fine, rel=1e-9)


def test_hyperbolic_linear_growth_and_small_radius_limit():
    t = np.array([20.0, 40.0])
    r = hyperbolic_radius(1.0, 2, 2.0, t)
    assert (r[1] - r[0]) / 20.0 == pytest.approx(0.25, rel=1e-4)
    small = hyperbolic_radius(1e-3, 2, 2.0, 1e-6)
    assert small == pytest.approx(euclid_radius(1e-3, 2, 2.0, 1e-6), rel=1e-6)


def test_hyperbolic_unsorted_times():
    t = np.array([3.0, 1.0, 2.0])
    r = hyperbolic_radius(1.0, 2, 2.0, t)
    assert np.all(np.diff(r[[1, 2, 0]]) > 0)


def test_sphere_solution_table():
    sol = SphereSolution(Ambient.EUCLIDEAN, 1.0)
    tab = sol.table(3.0, 4)
    np.testing.assert_allclose(tab[:, 1], [1, 4 / 3, 2, 4])
    with pytest.raises(DomainError):
        sol.table(5.0)
    assert SphereSolution(Ambient.HYPERBOLIC, 1.0).blowup_time == np.inf
