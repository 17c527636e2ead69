import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypnls.errors import InvalidParameterError, ShapeError
from hypnls.grid import ModelParams, l2_inner, lp_norm, make_radial_grid
from hypnls.spectral import RadialTransform, analytic_calibration, get_transform, plancherel_density


def rel_err(g, a, b):
    return lp_norm(g, a - b, 2) / lp_norm(g, b, 2)


def test_lambda_grid(tr3):
    sg = tr3.sgrid
    assert sg.dlam == pytest.approx(np.pi / 40)
    assert sg.lambdas[0] == pytest.approx(np.pi / 40)
    assert np.all(np.diff(sg.lambdas) > 0)
    assert np.all(sg.plancherel_weights >= 0)


def test_d3_calibration_is_exact_sine_pair(tr3):
    assert tr3.scheme == "sine"
    assert tr3.sgrid.calibration == pytest.approx(1 / (2 * np.pi**2), rel=1e-12)
    np.testing.assert_allclose(tr3.sgrid.density, tr3.sgrid.lambdas**2 / (2 * np.pi**2), rtol=1e-12)


@pytest.mark.parametrize("d", [2, 4, 5])
def test_fitted_calibration_matches_sphere_constant(d):
    tr = get_transform(make_radial_grid(ModelParams(d, 0.5), 20.0, 512))
    assert tr.sgrid.calibration == pytest.approx(analytic_calibration(d), rel=1e-6)


def test_round_trip_d3_standard_grid():
    g = make_radial_grid(ModelParams(3, 0.5), 40.0, 4096)
    tr = RadialTransform(g)
    f = np.exp(-(g.nodes**2))
    t0 = time.perf_counter()
    back = tr.inverse(tr.forward(f))
    assert time.perf_counter() - t0 < 1.0
    assert rel_err(g, back, f) <= 1e-8


def test_round_trip_d2(tr2):
    g = tr2.grid
    f = np.exp(-(g.nodes**2))
    assert rel_err(g, tr2.inverse(tr2.forward(f)), f) <= 1e-5


def test_zero_maps_to_zero(tr3):
    assert np.all(tr3.forward(np.zeros(tr3.grid.size)) == 0)
    assert np.all(tr3.inverse(np.zeros(tr3.sgrid.size)) == 0)


def test_forward_closed_form_d3(tr3):
    # f = e^{-r} / (4 pi sinh r)  ->  f~(lam) = 1 / (1 + lam^2)
    g = tr3.grid
    f = np.exp(-g.nodes) / (4 * np.pi * np.sinh(g.nodes))
    lam = tr3.sgrid.lambdas
    F = tr3.forward(f)
    np.testing.assert_allclose(F[:200], 1 / (1 + lam[:200] ** 2), atol=2e-4)


def test_forward_real_for_real_input(tr2):
    F = tr2.forward(np.exp(-(tr2.grid.nodes**2)))
    assert np.isrealobj(F) or np.abs(F.imag).max() < 1e-14


def test_shape_errors(tr3):
    with pytest.raises(ShapeError):
        tr3.forward(np.ones(5))
    with pytest.raises(ShapeError):
        tr3.inverse(np.ones(5))


def test_h1_norm_green_identity(tr3):
    g = tr3.grid
    r = g.nodes
    f = np.exp(-((r - 2.0) ** 2))
    df = -2 * (r - 2.0) * f
    # -int f Laplacian f = int |f_r|^2, and the symbol of -Laplacian is lam^2 + rho^2
    assert tr3.h1_norm(f) ** 2 == pytest.approx(lp_norm(g, df, 2) ** 2, rel=1e-6)
    assert tr3.h1_norm(np.zeros(g.size)) == 0


def test_hs_apply_identity_and_composition(tr3):
    f = np.exp(-(tr3.grid.nodes**2))
    np.testing.assert_array_equal(tr3.hs_apply(f, 0), f)
    two = tr3.hs_apply(tr3.hs_apply(f, 1.0), 1.0)
    np.testing.assert_allclose(two, tr3.hs_apply(f, 2.0), atol=1e-12)


def test_plancherel_defect_gaussian(tr3):
    f = np.exp(-(tr3.grid.nodes**2))
    assert tr3.plancherel_defect(f, f) <= 1e-8
    assert tr3.plancherel_defect(f, np.zeros_like(f)) == 0.0


def test_disjoint_spectra_are_orthogonal(tr3):
    n = tr3.sgrid.size
    F = np.zeros(n)
    G = np.zeros(n)
    F[:20] = 1.0
    G[40:60] = 1.0
    f, g = tr3.inverse(F), tr3.inverse(G)
    assert abs(l2_inner(tr3.grid, f, g)) < 1e-12 * lp_norm(tr3.grid, f) * lp_norm(tr3.grid, g)
    assert abs(tr3.spectral_inner(F, G)) == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_fields_parseval_d3(seed):
    tr = get_transform(make_radial_grid(ModelParams(3, 0.5), 40.0, 1024))
    rng = np.random.default_rng(seed)
    r = tr.grid.nodes
    f = sum(rng.normal() * np.exp(-(((r - rng.uniform(0, 5)) / rng.uniform(0.5, 2)) ** 2)) for _ in range(3))
    g = sum(rng.normal() * np.exp(-(((r - rng.uniform(0, 5)) / rng.uniform(0.5, 2)) ** 2)) for _ in range(3))
    assert tr.plancherel_defect(f, g) <= 1e-6


def test_plancherel_density_values():
    lam = np.array([1.0, 2.0])
    np.testing.assert_allclose(plancherel_density(3, lam), lam**2 / (2 * np.pi**2), rtol=1e-10)
    assert plancherel_density(ModelParams(2, 0.5), 0.0) == 0.0
    with pytest.raises(InvalidParameterError):
        plancherel_density(3, -1.0)
