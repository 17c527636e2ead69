"""Radial convolution through the spectral product, and Kunze-Stein ratios."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .grid import check_field, lp_norm
from .spectral import RadialTransform
from .spherical import spherical_table

__all__ = [
    "radial_convolve",
    "kunze_stein_rhs",
    "ks_ratio",
    "l1_ratio",
    "phi0_bound_ratio",
    "ks_test_family",
    "KSFamily",
]


def radial_convolve(tr: RadialTransform, f, K) -> np.ndarray:
    """``f * K`` computed as ``inverse(forward(f) forward(K))``."""
    return tr.inverse(tr.forward(f) * tr.forward(K))


def kunze_stein_rhs(tr: RadialTransform, K) -> float:
    """``int_0^inf |K(r)| e^{-rho r} (r+1) sinh^{2 rho}(r) dr`` on the grid.

    The sphere-area factor is left out; it only rescales the ratio.
    """
    g = tr.grid
    K = check_field(g, K, "kernel")
    r = g.nodes
    return float(np.dot(np.abs(K) * np.exp(-tr.rho * r) * (r + 1.0), g.vol_weights) / g.omega)


def _conv_norm_ratio(tr: RadialTransform, f, K) -> float:
    nf = lp_norm(tr.grid, f, 2)
    if nf == 0:
        raise DegenerateInputError("f is identically zero")
    return lp_norm(tr.grid, radial_convolve(tr, f, K), 2) / nf


def ks_ratio(tr: RadialTransform, f, K) -> float:
    """``||f*K||_2 / (||f||_2 * kunze_stein_rhs(K))``."""
    rhs = kunze_stein_rhs(tr, K)
    if rhs == 0:
        raise DegenerateInputError("kernel is identically zero")
    return _conv_norm_ratio(tr, f, K) / rhs


def l1_ratio(tr: RadialTransform, f, K) -> float:
    """Same as :func:`ks_ratio` but normalised by ``||K||_1``."""
    n1 = lp_norm(tr.grid, K, 1)
    if n1 == 0:
        raise DegenerateInputError("kernel is identically zero")
    return _conv_norm_ratio(tr, f, K) / n1


def phi0_bound_ratio(tr: RadialTransform, f, K) -> float:
    """``||f*K||_2 / (||f||_2 int |K| Phi_0 dmu)``; at most 1 for radial K."""
    g = tr.grid
    phi0 = spherical_table(g.d, np.array([0.0]), g.nodes)[:, 0]
    denom = float(np.dot(np.abs(K) * phi0, g.vol_weights))
    if denom == 0:
        raise DegenerateInputError("kernel is identically zero")
    return _conv_norm_ratio(tr, f, K) / denom


@dataclass(frozen=True)
class KSFamily:
    """Named nonnegative test functions on a grid."""

    names: tuple
    fields: tuple

    def items(self):
        return zip(self.names, self.fields)


def ks_test_family(tr: RadialTransform, seed: int = 0, n_random: int = 4) -> KSFamily:
    """Gaussians, shifted bumps, exponential tails and seeded random mixtures.

    Exponential tails ``e^{-a rho r}`` with ``a`` close to 1 are the members
    whose spectrum concentrates near ``lambda = 0``.
    """
    r = tr.grid.nodes
    rho = tr.rho
    names, fields = [], []
    for w in (0.5, 1.0, 2.0, 4.0):
        names.append(f"gauss_w{w:g}")
        fields.append(np.exp(-((r / w) ** 2)))
    for c in (2.0, 5.0, 10.0, 15.0):
        if c < tr.grid.r_max - 3:
            names.append(f"bump_c{c:g}")
            fields.append(np.exp(-((r - c) ** 2)))
    for a in (1.02, 1.05, 1.2, 1.5, 2.0, 3.0):
        names.append(f"exp_a{a:g}")
        fields.append(np.exp(-a * rho * r))
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        centres = rng.uniform(0.0, min(15.0, 0.5 * tr.grid.r_max), size=3)
        widths = rng.uniform(0.3, 3.0, size=3)
        amps = rng.uniform(0.1, 1.0, size=3)
        f = sum(a * np.exp(-(((r - c) / w) ** 2)) for a, c, w in zip(amps, centres, widths))
        names.append(f"random_{i}")
        fields.append(f)
    return KSFamily(tuple(names), tuple(fields))
