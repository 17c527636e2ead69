"""Pullback by the free flow, Cauchy tests in H^1 and the flat-space baseline."""

from __future__ import annotations

import numpy as np
import scipy.fft

from .errors import ContaminatedRunError, RangeError, ShapeError, UnsupportedDimensionError
from .grid import ModelParams, RadialGrid, check_field, sphere_area
from .nls import SolverConfig, Trajectory, evolve_nls
from .propagator import linear_multiplier
from .spectral import SpectralGrid

__all__ = [
    "pullback",
    "h1_distance",
    "cauchy_profile",
    "consecutive_distances",
    "scattering_state",
    "EuclideanTransform",
    "make_euclidean_transform",
    "euclidean_baseline_evolve",
]


def pullback(tr, u_t, t: float) -> np.ndarray:
    """``W(-t) u(t)``."""
    F = tr.forward(check_field(tr.grid, u_t))
    return tr.inverse(np.conj(linear_multiplier(tr, t)) * F)


def h1_distance(tr, f, g) -> float:
    return tr.h1_norm(np.asarray(f) - np.asarray(g))


def _checkpoint_fields(traj: Trajectory, checkpoints) -> list:
    cps = [float(t) for t in checkpoints]
    t0, t1 = float(traj.times[0]), traj.t_final
    for t in cps:
        if t < t0 - 1e-9 or t > t1 + 1e-9:
            raise RangeError(f"checkpoint t={t} outside [{t0:g}, {t1:g}]")
    return [traj.field_at(t) for t in cps]


def cauchy_profile(traj: Trajectory, checkpoints) -> np.ndarray:
    """Symmetric matrix of H^1 distances between pullbacks at the checkpoints.

    Raises
    ------
    RangeError
        Fewer than three checkpoints, or a checkpoint outside the run.
    """
    if len(checkpoints) < 3:
        raise RangeError("need at least three checkpoints")
    tr = traj.transform
    fields = _checkpoint_fields(traj, checkpoints)
    # the H^1 norm is unitarily invariant, so work in spectral space
    spectra = []
    for t, u in zip(checkpoints, fields):
        spectra.append(np.conj(linear_multiplier(tr, float(t))) * tr.forward(u))
    k = len(spectra)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = tr.h1_norm_spectrum(spectra[i] - spectra[j])
    return out


def consecutive_distances(profile: np.ndarray) -> np.ndarray:
    """Superdiagonal of a Cauchy profile."""
    return np.diag(np.asarray(profile), 1).copy()


def scattering_state(traj: Trajectory, checkpoints=None):
    """Estimate ``u_+`` as the pullback at the final time.

    The residual is the H^1 distance between pullbacks at the last two
    checkpoints (default: the final time and half of it).

    Raises
    ------
    ContaminatedRunError
        If the boundary alarm tripped during the run.
    """
    if traj.alarm_tripped:
        bf = float(np.max(traj.boundary_series))
        raise ContaminatedRunError("boundary alarm tripped; scattering state unreliable", bf, traj.t_final)
    tr = traj.transform
    if checkpoints is None:
        checkpoints = [0.5 * traj.t_final, traj.t_final]
    t_a, t_b = float(checkpoints[-2]), float(checkpoints[-1])
    ua, ub = _checkpoint_fields(traj, [t_a, t_b])
    plus = pullback(tr, ub, t_b)
    residual = h1_distance(tr, pullback(tr, ua, t_a), plus)
    return plus, float(residual)


class EuclideanTransform:
    """Radial transform on flat 3-space by the substitution ``w = r u``.

    Exposes the same interface as :class:`~hypnls.spectral.RadialTransform`
    so the solver and the scattering tools run unchanged. The symbol of
    ``-Laplacian`` is ``lambda^2`` and the H^1 weight is ``1 + lambda^2``.
    """

    scheme = "sine"

    def __init__(self, grid: RadialGrid):
        if grid.d != 3:
            raise UnsupportedDimensionError("the flat baseline is implemented for d = 3 only")
        self.grid = grid
        self.d = 3
        self.rho = 0.0
        lam = np.pi / grid.r_max * np.arange(1, grid.n, dtype=float)
        dlam = np.pi / grid.r_max
        c = 1.0 / (2.0 * np.pi**2)
        dens = c * lam**2
        for arr in (lam, dens):
            arr.setflags(write=False)
        w = dens * dlam
        w.setflags(write=False)
        self.sgrid = SpectralGrid(d=3, r_max=grid.r_max, lambdas=lam, dlam=dlam, density=dens,
                                  plancherel_weights=w, calibration=c)

    def forward(self, f) -> np.ndarray:
        f = check_field(self.grid, f)
        g = self.grid
        return (2.0 * np.pi * g.dr / self.sgrid.lambdas) * scipy.fft.dst(f * g.nodes, type=1)

    def inverse(self, F) -> np.ndarray:
        F = np.asarray(F)
        if F.shape != (self.sgrid.size,):
            raise ShapeError(f"spectrum has shape {F.shape}, expected ({self.sgrid.size},)")
        sg = self.sgrid
        return (0.5 * sg.calibration * sg.dlam / self.grid.nodes) * scipy.fft.dst(F * sg.lambdas, type=1)

    def apply_multiplier(self, f, m) -> np.ndarray:
        return self.inverse(np.asarray(m) * self.forward(f))

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.sgrid.lambdas**2

    def h1_norm_spectrum(self, F) -> float:
        return float(np.sqrt(np.dot((1.0 + self.sgrid.lambdas**2) * np.abs(F) ** 2, self.sgrid.plancherel_weights)))

    def h1_norm(self, f) -> float:
        return self.h1_norm_spectrum(self.forward(f))

    def hs_apply(self, f, s: float) -> np.ndarray:
        return self.apply_multiplier(f, (1.0 + self.sgrid.lambdas**2) ** (0.5 * s))

    def __repr__(self) -> str:
        return f"EuclideanTransform(r_max={self.grid.r_max:g}, n={self.grid.n})"


def make_euclidean_transform(params: ModelParams, r_max: float, n: int) -> EuclideanTransform:
    """Flat grid with weights ``4 pi r^2 dr`` on the same nodes as the hyperbolic grid."""
    if params.d != 3:
        raise UnsupportedDimensionError("the flat baseline is implemented for d = 3 only")
    from .grid import make_radial_grid

    hyp = make_radial_grid(params, r_max, n)
    w = sphere_area(3) * hyp.nodes**2 * hyp.dr
    w.setflags(write=False)
    grid = RadialGrid(d=3, r_max=hyp.r_max, n=hyp.n, dr=hyp.dr, nodes=hyp.nodes, vol_weights=w)
    return EuclideanTransform(grid)


def euclidean_baseline_evolve(phi, cfg: SolverConfig, params: ModelParams, tr: EuclideanTransform | None = None,
                              r_max: float | None = None, n: int | None = None) -> Trajectory:
    """Radial NLS on flat 3-space with the same Strang scheme.

    Either pass a prebuilt :class:`EuclideanTransform` or ``r_max`` and ``n``.
    """
    if params.d != 3:
        raise UnsupportedDimensionError("the flat baseline is implemented for d = 3 only")
    if tr is None:
        if r_max is None or n is None:
            raise ValueError("give either a transform or r_max and n")
        tr = make_euclidean_transform(params, r_max, n)
    traj = evolve_nls(phi, cfg, params, tr)
    traj.meta["geometry"] = "euclidean"
    return traj
