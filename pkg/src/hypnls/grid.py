"""Radial coordinates, volume measure and finite-difference Laplacian on H^d.

Fields are plain complex (or real) numpy arrays sampled at the interior
nodes ``r_j = j*dr`` for ``j = 1..n-1``; the value at ``r_max`` is an
implied Dirichlet zero and ``r = 0`` is never stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import ConfigurationError, InvalidParameterError, ShapeError

__all__ = [
    "ModelParams",
    "RadialGrid",
    "make_radial_grid",
    "sphere_area",
    "radial_laplacian",
    "integrate",
    "lp_norm",
    "l2_inner",
    "check_field",
]


def sphere_area(d: int) -> float:
    """Area of the unit sphere S^{d-1}, ``2 pi^{d/2} / Gamma(d/2)``."""
    return float(2.0 * np.exp(0.5 * d * np.log(np.pi) - gammaln(0.5 * d)))


@dataclass(frozen=True)
class ModelParams:
    """Dimension and nonlinearity of the defocusing NLS on H^d.

    Parameters
    ----------
    d : int
        Dimension, at least 2.
    sigma : float
        Power in ``u |u|^{2 sigma}``; energy-subcritical, i.e.
        ``0 < sigma < 2/(d-2)`` for ``d >= 3``.
    """

    d: int = 3
    sigma: float = 0.5
    rho: float = field(init=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ConfigurationError(f"dimension must be an integer >= 2, got {self.d}", "d")
        object.__setattr__(self, "d", int(self.d))
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}", "sigma")
        if self.d >= 3 and self.sigma >= 2.0 / (self.d - 2):
            raise ConfigurationError(
                f"sigma={self.sigma} is not energy-subcritical for d={self.d} "
                f"(need sigma < {2.0 / (self.d - 2):g})",
                "sigma",
            )
        object.__setattr__(self, "rho", 0.5 * (self.d - 1))


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform radial grid with hyperbolic volume weights.

    Use :func:`make_radial_grid` to construct.

    Attributes
    ----------
    d : int
    r_max : float
    n : int
        Number of intervals; there are ``n - 1`` interior nodes.
    dr : float
    nodes : ndarray
        ``r_j = j*dr``, ``j = 1..n-1``.
    vol_weights : ndarray
        ``omega_{d-1} sinh^{d-1}(r_j) dr``.
    """

    d: int
    r_max: float
    n: int
    dr: float
    nodes: np.ndarray
    vol_weights: np.ndarray

    @property
    def size(self) -> int:
        return self.n - 1

    @property
    def omega(self) -> float:
        return sphere_area(self.d)

    def same_as(self, other: "RadialGrid") -> bool:
        return (
            self is other
            or (self.d == other.d and self.n == other.n and self.r_max == other.r_max)
        )

    def __repr__(self) -> str:
        return f"RadialGrid(d={self.d}, r_max={self.r_max:g}, n={self.n})"


# sinh^{d-1}(r) must stay comfortably inside double range
_MAX_LOG_WEIGHT = 690.0


def make_radial_grid(params: ModelParams, r_max: float, n: int) -> RadialGrid:
    """Build the radial grid ``r_j = j r_max / n``.

    Raises
    ------
    ConfigurationError
        If ``r_max <= 0``, ``n < 8``, or the volume weights would overflow.
    """
    if not np.isfinite(r_max) or r_max <= 0:
        raise ConfigurationError(f"r_max must be positive, got {r_max}", "r_max")
    if int(n) != n or n < 8:
        raise ConfigurationError(f"n must be an integer >= 8, got {n}", "n")
    n = int(n)
    d = params.d
    if (d - 1) * (r_max - np.log(2.0)) > _MAX_LOG_WEIGHT:
        raise ConfigurationError(
            f"r_max={r_max} overflows sinh^{d - 1}(r) in double precision", "r_max"
        )
    dr = r_max / n
    nodes = dr * np.arange(1, n, dtype=float)
    weights = sphere_area(d) * np.sinh(nodes) ** (d - 1) * dr
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return RadialGrid(d=d, r_max=float(r_max), n=n, dr=dr, nodes=nodes, vol_weights=weights)


def check_field(grid: RadialGrid, f, name: str = "field") -> np.ndarray:
    """Return ``f`` as an array, raising :class:`ShapeError` on mismatch."""
    arr = np.asarray(f)
    if arr.shape != (grid.size,):
        raise ShapeError(f"{name} has shape {arr.shape}, grid expects ({grid.size},)")
    return arr


def radial_laplacian(grid: RadialGrid, params: ModelParams, f) -> np.ndarray:
    """Central-difference ``f'' + (d-1) coth(r) f'``.

    The Dirichlet value 0 is used beyond the last node. At ``r_1`` the
    missing value ``f(0)`` is reconstructed from the even extension
    ``f(-r) = f(r)``, i.e. from the quadratic ``a + b r^2`` through
    ``r_1, r_2``, which keeps the stencil second order for smooth radial f.
    """
    if params.d != grid.d:
        raise ShapeError(f"grid built for d={grid.d}, params have d={params.d}")
    f = check_field(grid, f)
    h = grid.dr
    ext = np.zeros(grid.size + 2, dtype=np.result_type(f, float))
    ext[1:-1] = f
    ext[0] = (4.0 * f[0] - f[1]) / 3.0
    d2 = (ext[2:] - 2.0 * ext[1:-1] + ext[:-2]) / h**2
    d1 = (ext[2:] - ext[:-2]) / (2.0 * h)
    return d2 + (grid.d - 1) / np.tanh(grid.nodes) * d1


def integrate(grid: RadialGrid, f) -> complex:
    """``sum_j f(r_j) vol_weights[j]``; complex for complex integrands."""
    f = check_field(grid, f, "integrand")
    val = np.dot(f, grid.vol_weights)
    return complex(val) if np.iscomplexobj(val) else float(val)


def lp_norm(grid: RadialGrid, f, p: float = 2.0) -> float:
    """``(int |f|^p dmu)^{1/p}`` for finite ``p >= 1``."""
    if not p >= 1 or not np.isfinite(p):
        raise InvalidParameterError(f"p must be finite and >= 1, got {p}")
    a = np.abs(check_field(grid, f))
    if p == 2:
        s = np.dot(a * a, grid.vol_weights)
    else:
        s = np.dot(a**p, grid.vol_weights)
    return float(s ** (1.0 / p))


def l2_inner(grid: RadialGrid, f, g) -> complex:
    """``int f conj(g) dmu``."""
    f = check_field(grid, f)
    g = check_field(grid, g)
    return complex(np.dot(f * np.conj(g), grid.vol_weights))
