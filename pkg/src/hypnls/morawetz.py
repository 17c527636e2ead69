"""Radial Morawetz weight, action and monotonicity diagnostics.

The weight ``a`` solves ``Laplacian a = 1`` with ``a(0) = a'(0) = 0``:

    a'(r) = sinh^{1-d}(r) int_0^r sinh^{d-1}(s) ds,
    a''(r) = 1 - (d-1) coth(r) a'(r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import DegenerateInputError, ResolutionError
from .grid import ModelParams, RadialGrid, radial_laplacian
from .report import DiagnosticsReport
from .spherical import _gauss_legendre

__all__ = [
    "MorawetzWeight",
    "weight_derivative",
    "weight",
    "weight_second_derivative",
    "build_weight",
    "weight_certify",
    "radial_derivative",
    "morawetz_action",
    "morawetz_terms",
    "morawetz_monotonicity_residual",
    "morawetz_inequality_ratio",
    "ratio_observables",
    "morawetz_observable",
]

_GL_ORDER = 20


def weight_derivative(params: ModelParams | int, r):
    """``a'(r)``, evaluated as ``int_0^min(r, L) (sinh(r-v)/sinh r)^{d-1} dv``.

    The integrand decays like ``e^{-(d-1) v}``, so the upper limit is cut at
    ``L = 40/(d-1)``; composite Gauss-Legendre on unit panels.
    """
    d = params if isinstance(params, int) else params.d
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    cut = 40.0 / (d - 1)
    top = np.minimum(r, cut)
    npan = max(1, int(np.ceil(min(r.max(initial=0.0), cut))))
    x, w = _gauss_legendre(_GL_ORDER)
    # panel-local nodes in [0, 1]
    loc = (np.arange(npan)[:, None] + 0.5 * (x[None, :] + 1.0)).ravel() / npan
    wts = np.tile(0.5 * w, npan) / npan
    out = np.zeros_like(r)
    pos = r > 0
    rp = r[pos][:, None]
    v = top[pos][:, None] * loc[None, :]
    # sinh(r - v)/sinh(r) without overflow
    ratio = np.exp(-v) * (-np.expm1(-2.0 * (rp - v))) / (-np.expm1(-2.0 * rp))
    out[pos] = top[pos] * (ratio ** (d - 1) @ wts)
    return float(out[0]) if scalar else out


def weight_second_derivative(params: ModelParams | int, r):
    """``a''(r) = 1 - (d-1) coth(r) a'(r)``; equals ``1/d`` at the origin."""
    d = params if isinstance(params, int) else params.d
    r = np.asarray(r, dtype=float)
    da = weight_derivative(d, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 1.0 - (d - 1) * da / np.tanh(r)
    return np.where(r == 0, 1.0 / d, val) if np.ndim(val) else (1.0 / d if r == 0 else float(val))


def weight(params: ModelParams | int, r):
    """``a(r) = int_0^r a'(s) ds`` by Gauss-Legendre between sorted nodes."""
    d = params if isinstance(params, int) else params.d
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    order = np.argsort(r)
    rs = r[order]
    edges = np.concatenate([[0.0], rs])
    x, w = _gauss_legendre(8)
    out = np.empty_like(rs)
    acc = 0.0
    # split long gaps so each panel has width <= 1
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        m = max(1, int(np.ceil(b - a)))
        sub = np.linspace(a, b, m + 1)
        lo, hi = sub[:-1, None], sub[1:, None]
        s = 0.5 * (hi - lo) * (x[None, :] + 1.0) + lo
        acc += float(np.sum(0.5 * (hi - lo) * w[None, :] * weight_derivative(d, s.ravel()).reshape(s.shape)))
        out[i] = acc
    res = np.empty_like(out)
    res[order] = out
    return float(res[0]) if scalar else res


@dataclass(frozen=True, eq=False)
class MorawetzWeight:
    """Weight samples on a grid."""

    grid: RadialGrid
    a_vals: np.ndarray
    da_vals: np.ndarray
    d2a_vals: np.ndarray


def build_weight(params: ModelParams, grid: RadialGrid) -> MorawetzWeight:
    r = grid.nodes
    return MorawetzWeight(
        grid=grid,
        a_vals=weight(params, r),
        da_vals=weight_derivative(params, r),
        d2a_vals=weight_second_derivative(params, r),
    )


def weight_certify(w: MorawetzWeight, params: ModelParams, experiment: str = "morawetz_weight") -> DiagnosticsReport:
    """Check ``Laplacian a = 1``, ``0 <= a' <= 1/(d-1)``, ``a'' >= 0``.

    The Laplacian is the finite-difference operator applied to ``a``, so
    it is an independent check of the quadrature for ``a`` and ``a'``.
    """
    g = w.grid
    d = params.d
    rep = DiagnosticsReport()
    interior = g.nodes <= 0.9 * g.r_max
    lap = radial_laplacian(g, params, w.a_vals)
    rep.add(experiment, "sup_laplacian_minus_one", np.abs(lap - 1.0)[interior].max(), 1e-6,
            meta=f"interior 90%; r_max={g.r_max:g} n={g.n}")
    rep.add(experiment, "sup_da", w.da_vals.max(), 1.0 / (d - 1) + 1e-8)
    rep.add(experiment, "min_da", w.da_vals.min(), 0.0, op=">=")
    rep.add(experiment, "min_d2a", w.d2a_vals.min(), -1e-10, op=">=")
    # a'' from the identity against a centred difference of a'
    fd = np.gradient(w.da_vals, g.dr)
    rep.add(experiment, "second_derivative_identity_residual",
            np.abs(fd - w.d2a_vals)[1:-1][interior[1:-1]].max(), 10 * g.dr**2,
            meta="centred difference of a' vs 1-(d-1)coth(r)a'")
    mono = np.diff(w.a_vals)
    rep.add(experiment, "min_increment_a", mono.min(), 0.0, op=">=")
    if d == 3:
        exact = (np.sinh(1.0) * np.cosh(1.0) - 1.0) / (2.0 * np.sinh(1.0) ** 2)
        rep.add(experiment, "da_at_1_abs_error", abs(weight_derivative(3, 1.0) - exact), 1e-6,
                meta=f"closed form {exact:.9f}")
    return rep


def radial_derivative(tr, u, method: str = "centered") -> np.ndarray:
    """``du/dr`` on the grid.

    ``"centered"`` uses central differences with the even extension at the
    origin and the Dirichlet zero at ``r_max``. ``"spectral"`` (d = 3 sine
    scheme only) differentiates the sine series of ``u sinh r``.
    """
    g = tr.grid
    u = np.asarray(u)
    if method == "spectral" and getattr(tr, "scheme", None) == "sine":
        F = tr.forward(u)
        sg = tr.sgrid
        x = np.zeros(g.n + 1, dtype=complex)
        x[1:-1] = F * sg.lambdas**2
        gp = 0.5 * sg.calibration * sg.dlam * scipy.fft.dct(x, type=1)[1:-1]
        return gp / np.sinh(g.nodes) - u / np.tanh(g.nodes)
    if method not in ("centered", "spectral"):
        raise ValueError(f"unknown derivative method {method!r}")
    ext = np.concatenate([[(4 * u[0] - u[1]) / 3], u, [0.0]])
    return (ext[2:] - ext[:-2]) / (2 * g.dr)


def morawetz_action(tr, u, w: MorawetzWeight, method: str = "centered") -> float:
    """``M_a = 2 Im int a'(r) conj(u) u_r dmu``."""
    du = radial_derivative(tr, u, method)
    return 2.0 * float(np.dot(w.da_vals * np.imag(np.conj(u) * du), tr.grid.vol_weights))


def morawetz_terms(tr, u, w: MorawetzWeight, sigma: float, coupling: float = 1.0, method: str = "centered"):
    """Return ``(M_a, hessian_term, sigma_term)`` for one field.

    ``hessian_term = 4 int a'' |u_r|^2 dmu`` and
    ``sigma_term = coupling * 2 sigma/(sigma+1) int |u|^{2 sigma+2} dmu``.
    """
    du = radial_derivative(tr, u, method)
    vw = tr.grid.vol_weights
    m = 2.0 * float(np.dot(w.da_vals * np.imag(np.conj(u) * du), vw))
    hess = 4.0 * float(np.dot(w.d2a_vals * np.abs(du) ** 2, vw))
    pot = coupling * 2.0 * sigma / (sigma + 1.0) * float(np.dot(np.abs(u) ** (2 * sigma + 2), vw))
    return m, hess, pot


def morawetz_observable(w: MorawetzWeight, params: ModelParams, coupling: float = 1.0, method: str = "centered"):
    """Observable for :func:`~hypnls.nls.evolve_nls` recording
    ``(M_a, hessian_term, sigma_term)`` after every step."""

    def terms(tr, u):
        return morawetz_terms(tr, u, w, params.sigma, coupling, method)

    return terms


def morawetz_monotonicity_residual(traj, w: MorawetzWeight | None = None, *, method: str = "centered",
                                   max_interval: float = 0.01, tol: float = 1e-3,
                                   experiment: str = "morawetz") -> DiagnosticsReport:
    """Per-interval check of ``dM/dt >= sigma_term``.

    Uses the per-step ``"morawetz"`` observable when the run recorded it
    (every solver step is an interval), otherwise the snapshots, computing
    the terms with ``w``. ``dM/dt`` is the difference quotient over each
    interval and the right-hand terms are averaged over the interval
    (trapezoid). Reported quantities are relative to ``max_t sigma_term``
    (or to the Hessian term for the free flow):

    ``worst_violation``
        ``min_i (dM/dt - sigma_term)``; nonnegative means no violation.
    ``identity_defect``
        ``max_i |dM/dt - hessian_term - sigma_term|``, the discretisation
        error of the full identity.
    """
    obs = getattr(traj, "observables", None) or {}
    if "morawetz" in obs:
        times = np.asarray(traj.series_times)
        terms = np.asarray(obs["morawetz"])
        method = traj.meta.get("morawetz_method", method)
    else:
        if w is None:
            raise ValueError("no recorded Morawetz series; pass the weight")
        times = np.asarray(traj.times)
        terms = None
    if times.size < 2:
        raise ResolutionError("need at least two snapshots")
    dts = np.diff(times)
    if dts.max() > max_interval * (1 + 1e-9):
        raise ResolutionError(f"snapshot interval {dts.max():g} exceeds {max_interval:g}")
    if terms is None:
        tr = traj.transform
        terms = np.array([morawetz_terms(tr, u, w, traj.params.sigma, traj.config.coupling, method)
                          for u in traj.fields])
    m, hess, pot = terms.T
    rate = np.diff(m) / dts
    pot_avg = 0.5 * (pot[1:] + pot[:-1])
    hess_avg = 0.5 * (hess[1:] + hess[:-1])
    scale = pot.max() if pot.max() > 0 else hess.max()
    rep = DiagnosticsReport()
    if scale == 0:
        rep.add(experiment, "worst_violation", 0.0, -tol, op=">=", meta="zero field")
        rep.add(experiment, "identity_defect", 0.0)
        return rep
    viol = (rate - pot_avg) / scale
    defect = np.abs(rate - pot_avg - hess_avg) / scale
    meta = f"derivative={method}; interval={dts.max():g}"
    rep.add(experiment, "worst_violation", viol.min(), -tol, op=">=", meta=meta)
    rep.add(experiment, "identity_defect", defect.max(), meta=meta)
    rep.add(experiment, "min_hessian_term", hess.min(), 0.0, op=">=")
    return rep


def ratio_observables(params: ModelParams) -> dict:
    """Per-step observables that let :func:`morawetz_inequality_ratio` use
    every solver step instead of the stored snapshots."""
    p = 2 * params.sigma + 2

    def power(tr, u):
        return float(np.dot(np.abs(u) ** p, tr.grid.vol_weights))

    def mass_h1(tr, u):
        return float(np.sqrt(np.dot(np.abs(u) ** 2, tr.grid.vol_weights))) * tr.h1_norm(u)

    return {"power_integral": power, "mass_times_h1": mass_h1}


def morawetz_inequality_ratio(traj, t_end: float | None = None) -> float:
    """``int_0^T int |u|^{2 sigma+2} / sup_t ||u||_2 ||u||_{H^1}``.

    Left-endpoint Riemann sum over the per-step observables from
    :func:`ratio_observables` when the run recorded them, otherwise over the
    snapshots. Zero data give 0.
    """
    obs = getattr(traj, "observables", None) or {}
    if "power_integral" in obs and "mass_times_h1" in obs:
        times = np.asarray(traj.series_times)
        dens = np.asarray(obs["power_integral"])
        prod = np.asarray(obs["mass_times_h1"])
    else:
        times = np.asarray(traj.times)
        if times.size == 0:
            raise DegenerateInputError("empty trajectory")
        tr = traj.transform
        p = 2 * traj.params.sigma + 2
        vw = tr.grid.vol_weights
        dens = np.array([float(np.dot(np.abs(u) ** p, vw)) for u in traj.fields])
        prod = np.array([np.sqrt(float(np.dot(np.abs(u) ** 2, vw))) * tr.h1_norm(u) for u in traj.fields])
    if times.size == 0:
        raise DegenerateInputError("empty trajectory")
    T = times[-1] if t_end is None else t_end
    sel = times <= T + 1e-9
    ts = times[sel]
    num = float(np.sum(dens[sel][:-1] * np.diff(ts)))
    den = float(prod[sel].max())
    if den == 0:
        return 0.0
    return num / den
