import numpy as np
import pytest
from scipy import integrate as spi

from hypnls.errors import ResolutionError
from hypnls.grid import ModelParams, make_radial_grid
from hypnls.morawetz import (
    build_weight,
    morawetz_action,
    morawetz_inequality_ratio,
    morawetz_monotonicity_residual,
    radial_derivative,
    weight,
    weight_certify,
    weight_derivative,
    weight_second_derivative,
)
from hypnls.nls import SolverConfig, evolve_nls, gaussian_data
from hypnls.spectral import get_transform
from hypnls.strichartz import linear_trajectory


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("r", [0.3, 1.0, 4.0, 12.0])
def test_derivative_quad_oracle(d, r):
    ref = spi.quad(lambda s: np.sinh(s) ** (d - 1), 0, r, epsrel=1e-13)[0] / np.sinh(r) ** (d - 1)
    assert weight_derivative(d, r) == pytest.approx(ref, rel=1e-10)


def test_closed_form_d3():
    r = np.array([0.5, 1.0, 3.0])
    s, c = np.sinh(r), np.cosh(r)
    np.testing.assert_allclose(weight_derivative(3, r), (s * c - r) / (2 * s * s), rtol=1e-12)
    assert weight_derivative(3, 1.0) == pytest.approx(0.2944868, abs=1e-6)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_limits(d):
    for r in (1e-4, 1e-3):
        assert weight_derivative(d, r) == pytest.approx(r / d, rel=1e-5)
    assert weight_derivative(d, 0.0) == 0.0
    assert weight_second_derivative(d, 0.0) == pytest.approx(1.0 / d)
    assert abs(weight_derivative(d, 20.0) - 1.0 / (d - 1)) <= 1e-8


def test_weight_slope():
    assert (weight(3, 30.0) - weight(3, 15.0)) / 15.0 == pytest.approx(0.5, rel=1e-3)
    assert weight(3, 0.0) == 0.0
    r = np.array([2.0, 0.5, 1.0])
    np.testing.assert_allclose(weight(3, r), [weight(3, x) for x in r])
    # a(r) ~ r^2/(2d) near zero
    assert weight(3, 1e-3) == pytest.approx(1e-6 / 6, rel=1e-5)


def test_second_derivative_identity():
    r = np.linspace(0.2, 10, 50)
    h = 1e-5
    fd = (weight_derivative(3, r + h) - weight_derivative(3, r - h)) / (2 * h)
    np.testing.assert_allclose(weight_second_derivative(3, r), fd, atol=1e-8)
    assert np.all(weight_second_derivative(3, r) >= -1e-12)


def test_certify_passes(p3):
    g = make_radial_grid(p3, 40.0, 16384)
    rep = weight_certify(build_weight(p3, g), p3)
    assert rep.all_passed, rep.to_csv()


@pytest.fixture(scope="module")
def setup(p3):
    tr = get_transform(make_radial_grid(p3, 40.0, 2048))
    return tr, build_weight(p3, tr.grid), gaussian_data(tr, width=1.0)


def test_action_of_real_field_vanishes(setup):
    tr, w, phi = setup
    assert morawetz_action(tr, phi, w) == 0.0


def test_action_conjugation_flips_sign(setup):
    tr, w, phi = setup
    u = phi * np.exp(0.7j * tr.grid.nodes)
    m = morawetz_action(tr, u, w)
    assert m > 0
    assert morawetz_action(tr, np.conj(u), w) == pytest.approx(-m, rel=1e-12)


def test_action_cauchy_schwarz(setup):
    tr, w, phi = setup
    u = phi * np.exp(1.3j * tr.grid.nodes**2)
    du = radial_derivative(tr, u)
    vw = tr.grid.vol_weights
    bound = 2 * np.sqrt(np.dot(w.da_vals**2 * np.abs(u) ** 2, vw) * np.dot(np.abs(du) ** 2, vw))
    assert abs(morawetz_action(tr, u, w)) <= bound


def test_spectral_and_centered_derivatives_agree(setup):
    tr, _, phi = setup
    r = tr.grid.nodes
    u = phi * np.exp(0.5j * r**2)
    a = radial_derivative(tr, u, "spectral")
    b = radial_derivative(tr, u, "centered")
    assert np.max(np.abs(a - b)) < 1e-3
    exact = (-2 * r + 1j * r) * u
    assert np.max(np.abs(a - exact)) < 1e-8


def test_linear_flow_monotone(setup, p3):
    tr, w, phi = setup
    traj = linear_trajectory(tr, p3, phi, np.arange(0, 2.0 + 1e-9, 0.005))
    rep = morawetz_monotonicity_residual(traj, w, method="spectral")
    assert rep.get("worst_violation").passed
    assert rep.value("identity_defect") < 1e-3


def test_zero_field(setup, p3):
    tr, w, _ = setup
    traj = evolve_nls(np.zeros(tr.grid.size), SolverConfig(dt=0.01, t_end=0.1, snapshot_stride=1), p3, tr)
    rep = morawetz_monotonicity_residual(traj, w)
    assert rep.value("worst_violation") == 0.0 and rep.all_passed
    assert morawetz_inequality_ratio(traj) == 0.0


def test_resolution_error(setup, p3):
    tr, w, phi = setup
    traj = evolve_nls(phi, SolverConfig(dt=0.01, t_end=0.5, snapshot_stride=5), p3, tr)
    with pytest.raises(ResolutionError):
        morawetz_monotonicity_residual(traj, w)


def test_ratio_nondecreasing(setup, p3):
    tr, _, phi = setup
    traj = evolve_nls(phi, SolverConfig(dt=0.01, t_end=2.0, snapshot_stride=5), p3, tr)
    vals = [morawetz_inequality_ratio(traj, T) for T in (0.5, 1.0, 2.0)]
    assert np.all(np.diff(vals) > 0)
