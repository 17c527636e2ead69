"""Radial nonlinear Schrodinger dynamics on hyperbolic space."""

from .errors import (
    AccuracyError,
    ConfigurationError,
    ContaminatedRunError,
    DegenerateInputError,
    DivergentKernelError,
    HypNLSError,
    InvalidParameterError,
    RangeError,
    ResolutionError,
    ShapeError,
    UnsupportedDimensionError,
)
from .grid import ModelParams, RadialGrid, integrate, l2_inner, lp_norm, make_radial_grid, radial_laplacian
from .spectral import RadialTransform, SpectralGrid, get_transform, plancherel_density
from .spherical import c_function, spherical_function, spherical_table
from .propagator import decay_envelope, dispersive_ratio, evolve_linear, kernel_eval, mollify
from .convolution import kunze_stein_rhs, ks_ratio, radial_convolve
from .nls import SolverConfig, Trajectory, energy, evolve_nls, gaussian_data, mass
from .morawetz import build_weight, morawetz_action, weight, weight_derivative
from .strichartz import ExponentSet, exponents, s_norm, spacetime_norm, strichartz_constant
from .scattering import cauchy_profile, euclidean_baseline_evolve, pullback, scattering_state
from .report import DiagnosticsReport, Row
from .experiments import EXPERIMENTS, ExperimentConfig, run, sweep

__version__ = "0.1.0"
