"""Free Schrodinger flow, mollifier, explicit kernel and dispersive ratios."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import DivergentKernelError, InvalidParameterError
from .grid import ModelParams, RadialGrid
from .spectral import RadialTransform, get_transform

__all__ = [
    "KernelSample",
    "evolve_linear",
    "linear_multiplier",
    "mollify",
    "kernel_eval",
    "dispersive_ratio",
    "decay_envelope",
    "loglog_slope",
]


def linear_multiplier(tr: RadialTransform, t: float) -> np.ndarray:
    """``exp(-i t (lambda^2 + rho^2))`` on the spectral nodes."""
    return np.exp(-1j * t * tr.eigenvalues)


def evolve_linear(tr: RadialTransform, f, t: float) -> np.ndarray:
    """``W(t) f``; unitary for the discrete spectral inner product."""
    if t == 0:
        return np.array(f, dtype=complex, copy=True)
    return tr.apply_multiplier(f, linear_multiplier(tr, t))


def mollify(tr: RadialTransform, f, eps: float) -> np.ndarray:
    """``P_eps f`` with multiplier ``exp(-eps^2 lambda^2)``."""
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    out = tr.apply_multiplier(f, np.exp(-(eps * tr.sgrid.lambdas) ** 2))
    return out.real if np.isrealobj(f) else out


@dataclass(frozen=True)
class KernelSample:
    """Values of ``K_t`` (the kernel of ``P_eps W(t)``) on grid nodes.

    Attributes
    ----------
    wrap_free : bool
        True when the spectral sum was taken on a domain large enough that
        periodic images of the kernel are below double precision.
    r_eval : float
        Truncation radius of the spectral sum actually used.
    """

    t: float
    eps: float
    d: int
    nodes: np.ndarray
    values: np.ndarray
    wrap_free: bool
    r_eval: float


# images of the kernel sit at distance >= 2 r_eval - r; their size is
# exp(-x^2 eps^2 / (4 |z|^2)) with z = eps^2 + i t, so this many |z|/eps
# of clearance puts them below 1e-16
_IMAGE_CLEARANCE = 13.0


def kernel_eval(params: ModelParams, t: float, eps: float, grid: RadialGrid, *, pad: bool = True) -> KernelSample:
    """Kernel ``K_t(r) = sum_k e^{-(it + eps^2) lam_k^2 - it rho^2} Phi_k(r) w_k``.

    This is the inverse transform of the pure multiplier. A truncated
    spectral sum represents the kernel periodised at distance ``2 r_max``;
    for d = 3 the sum is therefore carried out on an enlarged sine grid
    with the same spacing (cheap with the DST) so that no image reaches the
    nodes of ``grid``. Other dimensions use ``grid`` itself and report
    whether it is image-free.

    Raises
    ------
    DivergentKernelError
        If ``t == 0`` and ``eps == 0``.
    """
    if t == 0 and eps == 0:
        raise DivergentKernelError("K_0 without mollification is a delta")
    if eps < 0:
        raise InvalidParameterError("eps must be >= 0")
    tr = get_transform(grid)
    rho = params.rho
    zabs = np.hypot(t, eps**2)
    need = grid.r_max + 0.5 * _IMAGE_CLEARANCE * zabs / eps if eps > 0 else np.inf
    if params.d == 3 and pad and eps > 0 and need > grid.r_max:
        n_big = scipy.fft.next_fast_len(int(np.ceil(need / grid.dr)) + 1, real=True)
        r_eval = n_big * grid.dr
        lam = np.pi / r_eval * np.arange(1, n_big)
        m = np.exp(-(1j * t + eps**2) * lam**2 - 1j * t * rho**2)
        # only the first grid.size nodes are kept; sinh past them may overflow
        full = scipy.fft.dst(m * lam, type=1)[: grid.size]
        vals = (0.5 * tr.sgrid.calibration * np.pi / r_eval / np.sinh(grid.nodes)) * full
        wrap_free = True
    else:
        lam = tr.sgrid.lambdas
        m = np.exp(-(1j * t + eps**2) * lam**2 - 1j * t * rho**2)
        vals = tr.inverse(m)
        r_eval = grid.r_max
        wrap_free = bool(need <= grid.r_max)
    return KernelSample(
        t=float(t),
        eps=float(eps),
        d=params.d,
        nodes=grid.nodes,
        values=np.asarray(vals, dtype=complex),
        wrap_free=wrap_free,
        r_eval=float(r_eval),
    )


def dispersive_ratio(sample: KernelSample, params: ModelParams, r_limit: float | None = None) -> float:
    """``sup_r |K_t(r)| / [(|t|^{-d/2} + |t|^{-1}) e^{-rho r} (1+r)^{rho+1}]``."""
    if sample.t == 0:
        raise InvalidParameterError("dispersive ratio needs t != 0")
    t = abs(sample.t)
    r = sample.nodes
    # evaluate in logs so large r does not underflow the envelope
    log_env = np.log(t ** (-0.5 * params.d) + 1.0 / t) - params.rho * r + (params.rho + 1) * np.log1p(r)
    ratio = np.abs(sample.values) * np.exp(-log_env)
    if r_limit is not None:
        ratio = ratio[r <= r_limit]
    return float(ratio.max())


def decay_envelope(t: float, q: float, d: int | None = None) -> float:
    """``B(t) = |t|^{-2/q}`` for ``|t| <= 1`` and ``|t|^{-1}`` beyond.

    Returns ``inf`` at ``t = 0``.
    """
    if not q > 2 or (d is not None and q > (2 * d + 4) / d + 1e-15):
        raise InvalidParameterError(f"q={q} outside (2, (2d+4)/d]")
    t = abs(t)
    if t == 0:
        return float("inf")
    return t ** (-2.0 / q) if t <= 1 else 1.0 / t


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
