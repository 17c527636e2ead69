import numpy as np
import pytest
from scipy import integrate as spi

from hypnls.convolution import (
    kunze_stein_rhs,
    ks_ratio,
    ks_test_family,
    l1_ratio,
    phi0_bound_ratio,
    radial_convolve,
)
from hypnls.errors import DegenerateInputError
from hypnls.grid import lp_norm
from hypnls.propagator import mollify


@pytest.fixture(scope="module")
def fields(tr3):
    r = tr3.grid.nodes
    return np.exp(-(r**2)), np.exp(-((r - 3.0) ** 2)), np.exp(-2 * r)


def test_heat_kernel_convolution_is_mollifier(tr3, fields):
    f = fields[0]
    K = tr3.inverse(np.exp(-(0.3 * tr3.sgrid.lambdas) ** 2))
    assert lp_norm(tr3.grid, radial_convolve(tr3, f, K) - mollify(tr3, f, 0.3)) <= 1e-10 * lp_norm(tr3.grid, f)


def test_commutative_and_associative(tr3, fields):
    f, K1, K2 = fields
    g = tr3.grid
    assert lp_norm(g, radial_convolve(tr3, f, K1) - radial_convolve(tr3, K1, f)) <= 1e-10 * lp_norm(g, f)
    a = radial_convolve(tr3, radial_convolve(tr3, f, K1), K2)
    b = radial_convolve(tr3, f, radial_convolve(tr3, K1, K2))
    assert lp_norm(g, a - b) <= 1e-9 * lp_norm(g, a)


def test_parseval_bound(tr3, fields):
    f, K, _ = fields
    lhs = lp_norm(tr3.grid, radial_convolve(tr3, f, K))
    assert lhs <= lp_norm(tr3.grid, f) * np.abs(tr3.forward(K)).max() * (1 + 1e-10)


def test_rhs_closed_form(tr3):
    K = np.exp(-3 * tr3.grid.nodes)
    ref = spi.quad(lambda r: np.exp(-4 * r) * (r + 1) * np.sinh(r) ** 2, 0, 40, epsabs=0, epsrel=1e-13)[0]
    fine = tr3.grid
    assert kunze_stein_rhs(tr3, K) == pytest.approx(ref, rel=1e-4)
    assert kunze_stein_rhs(tr3, np.zeros(fine.size)) == 0


def test_rhs_closed_form_fine_grid(p3):
    from hypnls.grid import make_radial_grid
    from hypnls.spectral import get_transform

    tr = get_transform(make_radial_grid(p3, 40.0, 16384))
    K = np.exp(-3 * tr.grid.nodes)
    # int e^{-4r}(r+1) sinh^2 r dr = 1/32 + 1/8 - 1/18 + ... evaluated by quad
    ref = spi.quad(lambda r: np.exp(-4 * r) * (r + 1) * np.sinh(r) ** 2, 0, 40, epsabs=0, epsrel=1e-13)[0]
    assert kunze_stein_rhs(tr, K) == pytest.approx(ref, rel=1e-7)


def test_gain_for_shell_kernels(tr3):
    r = tr3.grid.nodes
    rhs, l1 = [], []
    for n in (2, 6, 10):
        K = ((r >= n) & (r < n + 1)).astype(float)
        rhs.append(kunze_stein_rhs(tr3, K))
        l1.append(lp_norm(tr3.grid, K, 1))
    gain = [a / b for a, b in zip(rhs, l1)]
    # gain factor behaves like e^{-rho n}(n+1)
    assert gain[2] / gain[0] == pytest.approx(np.exp(-8) * 11 / 3, rel=0.2)


def test_degenerate_inputs(tr3, fields):
    z = np.zeros(tr3.grid.size)
    with pytest.raises(DegenerateInputError):
        ks_ratio(tr3, fields[0], z)
    with pytest.raises(DegenerateInputError):
        ks_ratio(tr3, z, fields[0])
    with pytest.raises(DegenerateInputError):
        l1_ratio(tr3, fields[0], z)


def test_phi0_bound(tr3):
    fam = ks_test_family(tr3, seed=3)
    r = tr3.grid.nodes
    for c in (2.0, 10.0):
        K = np.exp(-((r - c) ** 2))
        assert max(phi0_bound_ratio(tr3, f, K) for _, f in fam.items()) <= 1 + 1e-6


def test_family_seeded(tr3):
    a = ks_test_family(tr3, seed=5)
    b = ks_test_family(tr3, seed=5)
    assert a.names == b.names
    for x, y in zip(a.fields, b.fields):
        np.testing.assert_array_equal(x, y)
    assert all(np.all(f >= 0) for f in a.fields)


def test_narrow_kernel_ratio_nearly_constant(tr3):
    K = np.exp(-((tr3.grid.nodes / 0.05) ** 2))
    vals = [ks_ratio(tr3, f, K) for _, f in ks_test_family(tr3).items()]
    assert max(vals) / min(vals) < 1.05
