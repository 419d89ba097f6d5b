import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinchflow.diagnostics import (
    DiagnosticsRecord,
    PinchingConfig,
    SERIES_COLUMNS,
    best_fit_sphere_axisym,
    fit_decay_rate,
    hausdorff_decay_exponent,
    laplace_beltrami,
    make_record,
    pinching_nodes,
    rescaled,
    validate_initial_pinching,
)
from pinchflow.errors import DomainError, FitError
from pinchflow.geometry import Ambient, AxisymGrid, GraphState, off_center_sphere, weingarten_axisym

E, H = Ambient.EUCLIDEAN, Ambient.HYPERBOLIC


def test_pinching_config_range():
    assert PinchingConfig(0.1).gamma == pytest.approx(0.6)
    for bad in (0.0, 0.5, 0.6, -0.1):
        with pytest.raises(DomainError):
            PinchingConfig(bad)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(0.05, 10.0), c0=st.floats(0.01, 0.49))
def test_umbilic_points_are_strictly_pinched(r, c0):
    cfg = PinchingConfig(c0)
    z, B = pinching_nodes(np.array([1 / r]), np.array([1 / r]), E, cfg)
    assert z[0] == pytest.approx(-c0 * B[0] ** 2, rel=1e-12)
    assert z[0] < 0


def test_hyperbolic_shift():
    z, B = pinching_nodes(np.array([2.0]), np.array([2.0]), H, PinchingConfig(0.1))
    assert B[0] == 2.0 and z[0] == pytest.approx(-0.4)


def test_validate_initial_pinching():
    g = AxisymGrid(64)
    cfg = PinchingConfig(0.1)
    good = GraphState(E, g, 1 + 0.02 * np.cos(2 * g.theta))
    assert validate_initial_pinching(good, cfg).passed
    bad = GraphState(E, g, 1 + 0.3 * np.cos(4 * g.theta))
    check = validate_initial_pinching(bad, cfg)
    assert not check.passed and check.z_max >= 0
    # hyperbolic spheres of radius 1 are horoconvex but perturbed ones are not pinched
    assert validate_initial_pinching(GraphState(H, g, np.ones(64)), cfg).passed
    assert not validate_initial_pinching(GraphState(H, g, 1 + 0.05 * np.cos(3 * g.theta)),
                                         cfg).passed


@pytest.mark.parametrize("d", [0.0, 0.1, -0.25])
def test_best_fit_sphere_recovers_offset(d):
    g = AxisymGrid(128)
    fit = best_fit_sphere_axisym(GraphState(E, g, off_center_sphere(g.theta, d, 2.0)))
    assert fit.dist_hausdorff < 1e-10
    assert fit.center_offset == pytest.approx(d, abs=1e-9)
    assert fit.radius == pytest.approx(2.0, rel=1e-10)


def test_best_fit_sphere_perturbed():
    g = AxisymGrid(128)
    fit = best_fit_sphere_axisym(GraphState(E, g, 1 + 0.05 * np.cos(2 * g.theta)))
    assert 0.04 < fit.dist_hausdorff <= 0.05


def test_fit_decay_rate_exact():
    t = np.linspace(0, 10, 200)
    assert fit_decay_rate(t, 3 * np.exp(-0.7 * t)) == pytest.approx(0.7, rel=1e-12)
    assert fit_decay_rate(t, np.exp(-0.7 * t), window=(2, 8)) == pytest.approx(0.7)
    with pytest.raises(FitError):
        fit_decay_rate(t[:5], np.exp(-t[:5]))
    with pytest.raises(FitError):
        fit_decay_rate(t, -np.exp(-t))


def test_hausdorff_exponent_power_law():
    R = np.geomspace(1, 30, 300)
    assert hausdorff_decay_exponent(R, 0.1 * R ** -1.7) == pytest.approx(-1.7, rel=1e-10)
    with pytest.raises(FitError):
        hausdorff_decay_exponent(np.geomspace(1, 5, 50), np.ones(50))
    # samples under the floor are ignored
    d = 0.1 * R ** -2.0
    d[-20:] = 0.0
    assert hausdorff_decay_exponent(R, d) == pytest.approx(-2.0)


def test_record_columns_and_rescaling():
    g = AxisymGrid(64)
    s = GraphState(E, g, np.full(64, 2.0), t=1.0)
    rec = make_record(s, weingarten_axisym(s), 0.01, PinchingConfig(0.1))
    assert SERIES_COLUMNS[:4] == ("t", "dt", "u_min", "u_max") and len(SERIES_COLUMNS) == 19
    assert isinstance(rec, DiagnosticsRecord) and rec.osc == 0.0 and rec.chi_max == 0.5
    r = rescaled(rec, E, 2.0)
    assert r.u_tilde_min == 1.0 and r.kt_max == pytest.approx(1.0)
    rh = rescaled(rec, H, 0.25)
    assert rh.u_tilde_min == 1.75 and rh.kt_min == rec.kappa_min


@pytest.mark.parametrize("amb", [E, H])
def test_laplace_beltrami_first_harmonic(amb):
    """On a geodesic sphere of radius r, ``cos theta`` has eigenvalue ``-2 / vartheta(r)^2``."""
    errs = []
    for n in (64, 128):
        g = AxisymGrid(n)
        s = GraphState(amb, g, np.full(n, 1.3))
        lap = laplace_beltrami(s, np.cos(g.theta))
        expected = -2 * np.cos(g.theta) / amb.vartheta(1.3) ** 2
        errs.append(np.max(np.abs(lap - expected)))
    assert errs[1] < 1e-3 and errs[0] / errs[1] > 3.5
