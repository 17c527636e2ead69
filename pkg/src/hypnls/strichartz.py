"""Strichartz exponents, space-time norms and empirical Strichartz ratios."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidParameterError
from .grid import ModelParams
from .report import DiagnosticsReport

__all__ = [
    "ExponentSet",
    "exponents",
    "admissible_time_exponent",
    "spacetime_norm",
    "s_norm",
    "holder_check",
    "linear_trajectory",
    "strichartz_constant",
    "split_intervals",
]


@dataclass(frozen=True)
class ExponentSet:
    """``q``, its admissible partner ``r_adm`` and the power exponents.

    ``p_sigma = min(2 sigma + 2, (2d+4)/d)`` and
    ``q_sigma = p p' / (p - p') = p / (p - 2)``.
    """

    d: int
    q: float
    r_adm: float
    p_sigma: float
    q_sigma: float

    @property
    def admissibility_residual(self) -> float:
        return abs(2.0 / self.q - self.d * (0.5 - 1.0 / self.r_adm))


def exponents(params: ModelParams, q: float) -> ExponentSet:
    """Exponent set for ``q`` in ``(2, (2d+4)/d]``."""
    d = params.d
    qmax = (2.0 * d + 4.0) / d
    if not (2.0 < q <= qmax * (1 + 1e-14)):
        raise InvalidParameterError(f"q={q} outside (2, {qmax:g}]")
    r_adm = 2.0 * d * q / (d * q - 4.0)
    p = min(2.0 * params.sigma + 2.0, qmax)
    pp = p / (p - 1.0)
    q_sigma = p * pp / (p - pp)
    return ExponentSet(d=d, q=float(q), r_adm=float(r_adm), p_sigma=float(p), q_sigma=float(q_sigma))


def admissible_time_exponent(d: int, r: float) -> float:
    """The ``p`` with ``2/p = d (1/2 - 1/r)``."""
    s = d * (0.5 - 1.0 / r)
    return np.inf if s == 0 else 2.0 / s


def _space_norms(traj, p2: float, order: int = 0) -> np.ndarray:
    tr = traj.transform
    w = tr.grid.vol_weights
    out = np.empty(len(traj.times))
    for i, u in enumerate(traj.fields):
        v = tr.hs_apply(u, 1.0) if order == 1 else u
        out[i] = float(np.dot(np.abs(v) ** p2, w)) ** (1.0 / p2)
    return out


def _time_norm(times: np.ndarray, vals: np.ndarray, p1: float) -> float:
    if np.isinf(p1):
        return float(vals.max())
    if times.size < 2:
        return 0.0
    # left-endpoint Riemann sum; the last snapshot closes the interval
    return float(np.sum(vals[:-1] ** p1 * np.diff(times)) ** (1.0 / p1))


def spacetime_norm(traj, p1: float, p2: float, order: int = 0) -> float:
    """``L^{p1}_t L^{p2}_x`` norm over the snapshots (``p1 = inf`` allowed)."""
    if len(traj.times) == 0:
        raise DegenerateInputError("empty trajectory")
    if p1 < 1 or p2 < 1:
        raise InvalidParameterError("exponents must be >= 1")
    return _time_norm(np.asarray(traj.times), _space_norms(traj, p2, order), p1)


def s_norm(traj, q: float, order: int = 0) -> float:
    """``sup(L^{inf,2}, L^{q,r}, L^{q,q})``, of ``(-Laplacian)^{1/2} u`` when ``order = 1``."""
    if order not in (0, 1):
        raise InvalidParameterError("order must be 0 or 1")
    ex = exponents(traj.params, q)
    return max(
        spacetime_norm(traj, np.inf, 2.0, order),
        spacetime_norm(traj, q, ex.r_adm, order),
        spacetime_norm(traj, q, q, order),
    )


def holder_check(traj, q: float) -> dict:
    """Both sides of ``||f||_{L^{q,q}} <= |I|^{1/q-1/p} ||f||_{L^{p,q}}``.

    ``p`` is the time exponent admissible with space exponent ``q``. The
    discrete inequality is exact Holder for the Riemann sum. The bound
    against ``L^{inf,2} + L^{q,r}`` is reported as a ratio, since its
    constant is not fixed.
    """
    times = np.asarray(traj.times)
    length = times[-1] - times[0]
    ex = exponents(traj.params, q)
    p = admissible_time_exponent(traj.params.d, q)
    lqq = spacetime_norm(traj, q, q)
    lpq = spacetime_norm(traj, p, q)
    rhs = length ** (1.0 / q - 1.0 / p) * lpq
    interp = length ** (1.0 / q - 1.0 / p) * (spacetime_norm(traj, np.inf, 2.0) + spacetime_norm(traj, q, ex.r_adm))
    return {"lqq": lqq, "holder_rhs": rhs, "interpolation_ratio": lqq / interp if interp > 0 else 0.0, "p": p}


def linear_trajectory(tr, params: ModelParams, phi, times):
    """Trajectory of the free flow sampled exactly at ``times``."""
    from .nls import SolverConfig, Trajectory, mass
    from .propagator import linear_multiplier

    times = np.asarray(times, dtype=float)
    F = tr.forward(np.asarray(phi, dtype=complex))
    fields = np.array([tr.inverse(linear_multiplier(tr, t) * F) for t in times])
    m = np.array([mass(tr, u) for u in fields])
    dt = float(np.min(np.diff(times))) if times.size > 1 else 1.0
    cfg = SolverConfig(dt=dt, t_end=float(times[-1]), coupling=0.0, on_alarm="flag")
    return Trajectory(
        params=params,
        transform=tr,
        config=cfg,
        times=times,
        fields=fields,
        series_times=times,
        mass_series=m,
        energy_series=np.zeros_like(m),
        boundary_series=np.zeros_like(m),
    )


def strichartz_constant(tr, params: ModelParams, phi, q: float, horizons, *, dt_sample: float = 0.01,
                        experiment: str = "strichartz") -> DiagnosticsReport:
    """``||W(t) phi||_{L^{q,q}([0,T])} / ||phi||_2`` for each horizon.

    Rows: ``ratio_T`` per horizon, increments between successive horizons,
    and gated shape checks (increasing; increments decreasing; last
    increment below half the increment ending at the second horizon).
    """
    from .grid import lp_norm
    from .propagator import linear_multiplier

    horizons = sorted(float(T) for T in horizons)
    rep = DiagnosticsReport()
    n0 = lp_norm(tr.grid, phi, 2)
    if n0 == 0:
        for T in horizons:
            rep.add(experiment, f"ratio_T{T:g}", 0.0)
        return rep
    exponents(params, q)
    nsteps = int(round(horizons[-1] / dt_sample))
    F = tr.forward(np.asarray(phi, dtype=complex))
    w = tr.grid.vol_weights
    step = linear_multiplier(tr, dt_sample)
    dens = np.empty(nsteps)
    G = F.copy()
    for k in range(nsteps):
        u = tr.inverse(G)
        dens[k] = float(np.dot(np.abs(u) ** q, w))
        G = G * step
    cum = np.concatenate([[0.0], np.cumsum(dens) * dt_sample])
    ratios = []
    for T in horizons:
        k = int(round(T / dt_sample))
        ratios.append(cum[k] ** (1.0 / q) / n0)
        rep.add(experiment, f"ratio_T{T:g}", ratios[-1], meta=f"q={q:g}; left Riemann dt={dt_sample:g}")
    incs = np.diff(ratios)
    for T, inc in zip(horizons[1:], incs):
        rep.add(experiment, f"increment_T{T:g}", inc)
    if len(incs):
        rep.add(experiment, "min_increment", incs.min(), 0.0, op=">", meta="series increasing")
    if len(incs) > 1:
        rep.add(experiment, "max_increment_growth", np.max(incs[1:] / incs[:-1]), 1.0, op="<",
                meta="successive increment ratio")
        rep.add(experiment, "last_over_first_increment", incs[-1] / incs[0], 0.5, op="<")
    return rep


def split_intervals(traj, eps: float) -> list:
    """Greedy partition of the run into intervals with small local norm.

    Each interval ``I`` satisfies ``||u||_{L^{2 sigma+2}(I x H^d)} <= eps``
    (left Riemann sum over snapshots), except single snapshot intervals
    that exceed ``eps`` by themselves. Returns a list of ``(t_start, t_end)``.
    """
    times = np.asarray(traj.times)
    p = 2 * traj.params.sigma + 2
    dens = _space_norms(traj, p) ** p
    dts = np.diff(times)
    out = []
    start = 0
    acc = 0.0
    for i in range(times.size - 1):
        contrib = dens[i] * dts[i]
        if acc + contrib > eps**p and i > start:
            out.append((float(times[start]), float(times[i])))
            start = i
            acc = 0.0
        acc += contrib
    out.append((float(times[start]), float(times[-1])))
    return out
