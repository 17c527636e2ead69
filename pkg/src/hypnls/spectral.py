"""Radial Fourier transform on H^d.

The spectral nodes are ``lambda_k = k pi / r_max``, ``k = 1..n-1``. The
inverse transform is the Riemann sum of the inversion integral over
``lambda > 0`` with Plancherel weights ``c * |Gamma(rho+i lam)/Gamma(i lam)|^2 dlam``.

Three forward schemes are used, chosen by dimension:

``"sine"`` (d = 3)
    Exact discrete sine transform pair built on the closed form of Phi.
``"quadrature"`` (odd d >= 5)
    Trapezoid quadrature of ``int f Phi dmu`` against a cached Phi table.
``"collocation"`` (even d)
    Solve ``inverse(F) = f``. The quadrature integrand is odd at r = 0 in
    even dimensions, which leaves an O(dr^2) error at every frequency;
    inverting the synthesis sidesteps it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import DegenerateInputError, InvalidParameterError, ShapeError
from .grid import ModelParams, RadialGrid, check_field, l2_inner, lp_norm, make_radial_grid, sphere_area
from .spherical import _gauss_legendre, density_profile, spherical_table

__all__ = [
    "SpectralGrid",
    "RadialTransform",
    "get_transform",
    "plancherel_density",
    "analytic_calibration",
    "default_calibration",
    "sine_forward",
    "sine_inverse",
]


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Spectral nodes and calibrated Plancherel weights."""

    d: int
    r_max: float
    lambdas: np.ndarray
    dlam: float
    density: np.ndarray
    plancherel_weights: np.ndarray
    calibration: float

    @property
    def size(self) -> int:
        return self.lambdas.size


def analytic_calibration(d: int) -> float:
    """``omega_{d-1} / (2 pi)^d``; used only as a test oracle."""
    return sphere_area(d) / (2.0 * np.pi) ** d


def sine_forward(f: np.ndarray, nodes: np.ndarray, lambdas: np.ndarray, dr: float) -> np.ndarray:
    """d = 3 forward transform ``(4 pi / lam) dr sum_j f_j sinh(r_j) sin(lam r_j)``."""
    return (2.0 * np.pi * dr / lambdas) * scipy.fft.dst(f * np.sinh(nodes), type=1)


def sine_inverse(F: np.ndarray, nodes: np.ndarray, lambdas: np.ndarray, dlam: float, calibration: float) -> np.ndarray:
    """d = 3 synthesis ``sum_k F_k Phi_k(r_j) c lam_k^2 dlam``."""
    return (0.5 * calibration * dlam / np.sinh(nodes)) * scipy.fft.dst(F * lambdas, type=1)


def _reference_profile(r_max: float):
    width = min(1.0, r_max / 6.0)
    return width, (lambda r: np.exp(-((r / width) ** 2)))


def _reference_spectrum(d: int, r_max: float, lambdas: np.ndarray) -> np.ndarray:
    """Transform of the reference Gaussian by Gauss-Legendre in r.

    Gauss-Legendre has no endpoint defect at r = 0, so this is accurate in
    every dimension. Frequencies past the Gaussian's numerical support are
    set to zero.
    """
    width, prof = _reference_profile(r_max)
    rb = min(r_max, 9.0 * width)
    keep = lambdas <= 20.0 / width
    x, w = _gauss_legendre(400)
    r = 0.5 * rb * (x + 1.0)
    w = 0.5 * rb * w * sphere_area(d) * np.sinh(r) ** (d - 1) * prof(r)
    out = np.zeros(lambdas.size)
    out[keep] = (spherical_table(d, lambdas[keep], r) * w[:, None]).sum(axis=0)
    return out


def _fit_calibration(grid: RadialGrid, synth_unit, analysis=None) -> float:
    """Least-squares constant c with ``c * synth_unit(F_ref) ~ f_ref``.

    ``F_ref`` is ``analysis(f_ref)`` when a calibration-free forward map is
    available (so the fitted c makes the discrete pair an exact round
    trip), and the Gauss-Legendre reference spectrum otherwise.
    """
    _, prof = _reference_profile(grid.r_max)
    f = prof(grid.nodes)
    lam = np.pi / grid.r_max * np.arange(1, grid.n)
    F = analysis(f) if analysis is not None else _reference_spectrum(grid.d, grid.r_max, lam)
    g = synth_unit(F)
    w = grid.vol_weights
    return float(np.dot(f * g, w) / np.dot(g * g, w))


class RadialTransform:
    """Forward/inverse radial transform bound to one grid.

    Instances are immutable after construction and safe to share between
    threads. Use :func:`get_transform` to reuse cached instances.

    Parameters
    ----------
    grid : RadialGrid
    calibration : float, optional
        Override the numerically fitted density constant.
    """

    def __init__(self, grid: RadialGrid, calibration: float | None = None):
        self.grid = grid
        self.d = grid.d
        self.rho = 0.5 * (grid.d - 1)
        n = grid.n
        lam = np.pi / grid.r_max * np.arange(1, n, dtype=float)
        dlam = np.pi / grid.r_max
        profile = density_profile(lam, self.rho)
        self._table = None
        self._lu = None
        if self.d == 3:
            self.scheme = "sine"
            synth = lambda F: sine_inverse(F, grid.nodes, lam, dlam, 1.0)  # noqa: E731
            analysis = lambda f: sine_forward(f, grid.nodes, lam, grid.dr)  # noqa: E731
        else:
            self.scheme = "collocation" if self.d % 2 == 0 else "quadrature"
            self._table = spherical_table(self.d, lam, grid.nodes)
            self._table.setflags(write=False)
            unit_w = profile * dlam
            synth = lambda F: self._table @ (F * unit_w)  # noqa: E731
            analysis = None
        if calibration is None:
            calibration = _fit_calibration(grid, synth, analysis)
        weights = calibration * profile * dlam
        for arr in (lam, profile, weights):
            arr.setflags(write=False)
        self.sgrid = SpectralGrid(
            d=self.d,
            r_max=grid.r_max,
            lambdas=lam,
            dlam=dlam,
            density=calibration * profile,
            plancherel_weights=weights,
            calibration=float(calibration),
        )
        if self.scheme == "collocation":
            # rows scaled by sqrt(volume weight) so the system is close to orthogonal
            self._row_scale = np.sqrt(grid.vol_weights)
            self._lu = scipy.linalg.lu_factor(self._row_scale[:, None] * self._table * weights[None, :])

    # -- core pair ---------------------------------------------------------

    def forward(self, f) -> np.ndarray:
        """Spectrum ``f~(lambda_k)``."""
        f = check_field(self.grid, f)
        g = self.grid
        sg = self.sgrid
        if self.scheme == "sine":
            return sine_forward(f, g.nodes, sg.lambdas, g.dr)
        if self.scheme == "quadrature":
            return self._table.T @ (f * g.vol_weights)
        return scipy.linalg.lu_solve(self._lu, self._row_scale * f)

    def inverse(self, F) -> np.ndarray:
        """Field ``sum_k F_k Phi_k(r_j) w_k``."""
        F = np.asarray(F)
        if F.shape != (self.sgrid.size,):
            raise ShapeError(f"spectrum has shape {F.shape}, expected ({self.sgrid.size},)")
        g = self.grid
        sg = self.sgrid
        if self.scheme == "sine":
            return sine_inverse(F, g.nodes, sg.lambdas, sg.dlam, sg.calibration)
        return self._table @ (F * sg.plancherel_weights)

    def apply_multiplier(self, f, m) -> np.ndarray:
        """``inverse(m * forward(f))`` for a multiplier sampled on the lambdas."""
        return self.inverse(np.asarray(m) * self.forward(f))

    # -- derived quantities ------------------------------------------------

    @property
    def eigenvalues(self) -> np.ndarray:
        """``lambda_k^2 + rho^2``, the symbol of ``-Laplacian``."""
        return self.sgrid.lambdas**2 + self.rho**2

    def spectral_inner(self, F, G) -> complex:
        return complex(np.dot(F * np.conj(G), self.sgrid.plancherel_weights))

    def h1_norm(self, f) -> float:
        """``sqrt(sum (lam^2 + rho^2) |f~|^2 w)``."""
        F = self.forward(f)
        return float(np.sqrt(np.dot(self.eigenvalues * np.abs(F) ** 2, self.sgrid.plancherel_weights)))

    def h1_norm_spectrum(self, F) -> float:
        return float(np.sqrt(np.dot(self.eigenvalues * np.abs(F) ** 2, self.sgrid.plancherel_weights)))

    def hs_apply(self, f, s: float) -> np.ndarray:
        """``(-Laplacian)^{s/2} f`` via the multiplier ``(lam^2 + rho^2)^{s/2}``."""
        if s == 0:
            return np.array(check_field(self.grid, f), copy=True)
        return self.apply_multiplier(f, self.eigenvalues ** (0.5 * s))

    def plancherel_defect(self, f, g) -> float:
        """Relative mismatch of physical and spectral inner products."""
        nf = lp_norm(self.grid, f, 2)
        ng = lp_norm(self.grid, g, 2)
        if nf == 0 or ng == 0:
            return 0.0
        phys = l2_inner(self.grid, f, g)
        spec = self.spectral_inner(self.forward(f), self.forward(g))
        return abs(phys - spec) / (nf * ng)

    def __repr__(self) -> str:
        return f"RadialTransform({self.grid!r}, scheme={self.scheme!r})"


@lru_cache(maxsize=8)
def _cached_transform(d: int, r_max: float, n: int) -> RadialTransform:
    return RadialTransform(make_radial_grid(ModelParams(d=d, sigma=_any_sigma(d)), r_max, n))


def _any_sigma(d: int) -> float:
    return 0.5 if d <= 4 else 1.0 / (d - 2)


def get_transform(grid: RadialGrid) -> RadialTransform:
    """Shared transform for grids with identical (d, r_max, n)."""
    return _cached_transform(grid.d, grid.r_max, grid.n)


@lru_cache(maxsize=16)
def default_calibration(d: int) -> float:
    """Density constant fitted on a reference grid (r_max = 16, n = 512)."""
    return _cached_transform(d, 16.0, 512).sgrid.calibration


def plancherel_density(params: ModelParams | int, lam, calibration: float | None = None):
    """Calibrated Plancherel density ``c |Gamma(rho+i lam)/Gamma(i lam)|^2``.

    ``lam = 0`` returns 0 by continuity. Negative ``lam`` raise.
    """
    d = params if isinstance(params, int) else params.d
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0):
        raise InvalidParameterError("density is evaluated for lambda >= 0")
    c = default_calibration(d) if calibration is None else calibration
    return c * density_profile(lam_arr, 0.5 * (d - 1))


def require_nonzero(value: float, what: str) -> float:
    if value == 0:
        raise DegenerateInputError(f"{what} is zero")
    return value
