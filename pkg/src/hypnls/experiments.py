"""Named experiments, their configuration, and parameter sweeps.

Every experiment returns a :class:`~hypnls.report.DiagnosticsReport`. Rows
carry no timings or paths, so identical configurations give identical CSV
bytes.
"""

from __future__ import annotations

import json
import math
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .convolution import ks_ratio, ks_test_family, l1_ratio, phi0_bound_ratio
from .errors import ConfigurationError, ContaminatedRunError
from .grid import ModelParams, lp_norm, make_radial_grid, radial_laplacian
from .morawetz import (
    build_weight,
    morawetz_inequality_ratio,
    morawetz_monotonicity_residual,
    morawetz_observable,
    ratio_observables,
    weight_certify,
    weight_derivative,
)
from .nls import SolverConfig, evolve_nls, gaussian_data, write_snapshots, write_trajectory_csv
from .propagator import dispersive_ratio, evolve_linear, kernel_eval, loglog_slope
from .report import DiagnosticsReport
from .scattering import (
    cauchy_profile,
    consecutive_distances,
    euclidean_baseline_evolve,
    h1_distance,
    make_euclidean_transform,
    pullback,
    scattering_state,
)
from .spectral import get_transform
from .spherical import phi_closed_form_d3, spherical_table
from .strichartz import (
    exponents,
    holder_check,
    linear_trajectory,
    s_norm,
    spacetime_norm,
    split_intervals,
    strichartz_constant,
)

__all__ = [
    "EXPERIMENTS",
    "SWEEP_AXES",
    "ExperimentConfig",
    "default_options",
    "load_config",
    "run",
    "sweep",
    "clear_cache",
]

EXPERIMENTS = (
    "plancherel",
    "dispersive",
    "kunze_stein",
    "conservation",
    "morawetz",
    "strichartz",
    "scatter",
    "euclid_contrast",
)

SWEEP_AXES = ("d", "sigma", "r_max", "n", "dt", "t_end", "snapshot_stride", "seed")

# long-time runs need room for the dispersing wave packet
_LONG_GRID = (300.0, 8192)

_PRESETS = {
    "plancherel": {},
    "dispersive": {},
    "kunze_stein": {},
    "conservation": {"grid": _LONG_GRID, "t_end": 20.0},
    "morawetz": {"grid": _LONG_GRID, "t_end": 40.0},
    "strichartz": {"grid": _LONG_GRID, "t_end": 10.0, "snapshot_stride": 10},
    "scatter": {"grid": _LONG_GRID, "t_end": 40.0},
    "euclid_contrast": {"grid": _LONG_GRID, "t_end": 40.0, "sigma": 0.3},
}

_DATA_OPTIONS = {"data": "gaussian", "data_width": 2.0, "data_h1": 1.0}

_OPTIONS = {
    "plancherel": {
        "data_width": 1.0,
        "n_random": 3,
        "eigen_lambdas": [1.0, 5.0, 20.0],
        "eigen_r_max": 10.0,
        "eigen_ns": [1024, 2048, 4096, 8192],
    },
    "dispersive": {
        "times": [0.05, 0.2, 1.0, 5.0, 20.0],
        "eps": 0.04,
        "small_time_grid": [2.0, 1024],
        "small_time_eps": 0.01,
        "small_times": [1e-3, 1e-1, 17],
        "large_times": [5.0, 50.0, 9],
        "slope_r_limit": 1.0,
    },
    "kunze_stein": {"centres": [2.0, 5.0, 10.0, 15.0], "n_random": 4},
    "conservation": dict(_DATA_OPTIONS, order_check=True),
    "morawetz": dict(
        _DATA_OPTIONS, horizons=[5.0, 10.0, 20.0, 40.0], weight_grid=[40.0, 16384], refine_check=True
    ),
    "strichartz": dict(
        _DATA_OPTIONS,
        horizons=[5.0, 10.0, 20.0, 40.0],
        dt_sample=0.01,
        q_values=None,
        holder_interval=1.0,
        split_eps=[0.5, 0.25],
    ),
    "scatter": dict(_DATA_OPTIONS, checkpoints=[5.0, 10.0, 20.0, 40.0]),
    "euclid_contrast": dict(_DATA_OPTIONS, checkpoints=[5.0, 10.0, 20.0, 40.0]),
}


def default_options(experiment: str) -> dict:
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}",
                                 "experiment")
    return json.loads(json.dumps(_OPTIONS[experiment]))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs.

    Build with :meth:`preset`, :func:`load_config`, or directly. Unset
    ``options`` keys fall back to :func:`default_options`.
    """

    experiment: str
    params: ModelParams = field(default_factory=ModelParams)
    grid: tuple = (40.0, 4096)
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 0
    output_dir: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        defaults = default_options(self.experiment)
        if len(self.grid) != 2:
            raise ConfigurationError("grid must be (r_max, n)", "grid")
        r_max, n = self.grid
        object.__setattr__(self, "grid", (float(r_max), int(n)))
        # validates r_max, n and overflow
        make_radial_grid(self.params, *self.grid)
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigurationError("seed must be a nonnegative integer", "seed")
        unknown = set(self.options) - set(defaults)
        if unknown:
            raise ConfigurationError(f"unknown option(s) for {self.experiment}: {sorted(unknown)}",
                                     f"options.{sorted(unknown)[0]}")

    @classmethod
    def preset(cls, experiment: str, **overrides) -> "ExperimentConfig":
        """Standard configuration of an experiment, with flat overrides.

        Flat keys are ``d, sigma, r_max, n, dt, t_end, snapshot_stride,
        boundary_alarm, seed, output_dir, options``.
        """
        default_options(experiment)
        flat = {"d": 3, "sigma": 0.5, "r_max": 40.0, "n": 4096, "dt": 1e-3, "t_end": 1.0,
                "snapshot_stride": 100, "boundary_alarm": 1e-6, "seed": 0, "output_dir": None, "options": {}}
        pre = dict(_PRESETS[experiment])
        if "grid" in pre:
            flat["r_max"], flat["n"] = pre.pop("grid")
        flat.update(pre)
        for key, val in overrides.items():
            if key not in flat:
                raise ConfigurationError(f"unknown configuration key {key!r}", key)
            flat[key] = val
        return _from_flat(experiment, flat)

    def option(self, key: str):
        if key in self.options:
            return self.options[key]
        return default_options(self.experiment)[key]

    def with_value(self, axis: str, value) -> "ExperimentConfig":
        """Copy with one flat field changed (used by :func:`sweep`)."""
        if axis not in SWEEP_AXES:
            raise ConfigurationError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}", axis)
        flat = self.to_flat()
        flat[axis] = value
        return _from_flat(self.experiment, flat)

    def to_flat(self) -> dict:
        return {
            "d": self.params.d,
            "sigma": self.params.sigma,
            "r_max": self.grid[0],
            "n": self.grid[1],
            "dt": self.solver.dt,
            "t_end": self.solver.t_end,
            "snapshot_stride": self.solver.snapshot_stride,
            "boundary_alarm": self.solver.boundary_alarm,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "options": dict(self.options),
        }

    def to_json(self) -> str:
        return json.dumps(dict(experiment=self.experiment, **self.to_flat()), sort_keys=True, indent=2)


def _from_flat(experiment: str, flat: dict) -> ExperimentConfig:
    try:
        params = ModelParams(d=int(flat["d"]), sigma=float(flat["sigma"]))
    except ValueError as exc:
        raise ConfigurationError(str(exc), getattr(exc, "field", "params")) from exc
    solver = SolverConfig(
        dt=float(flat["dt"]),
        t_end=float(flat["t_end"]),
        snapshot_stride=int(flat["snapshot_stride"]),
        boundary_alarm=float(flat["boundary_alarm"]),
        on_alarm="flag",
    )
    return ExperimentConfig(
        experiment=experiment,
        params=params,
        grid=(float(flat["r_max"]), int(flat["n"])),
        solver=solver,
        seed=int(flat["seed"]),
        output_dir=flat.get("output_dir"),
        options=dict(flat.get("options") or {}),
    )


def load_config(source, experiment: str | None = None) -> ExperimentConfig:
    """Read a JSON configuration (path, JSON text or dict).

    Schema: an object with optional ``experiment`` and the flat keys of
    :meth:`ExperimentConfig.preset`. ``experiment`` given as an argument
    takes precedence.
    """
    if isinstance(source, dict):
        data = dict(source)
    else:
        text = Path(source).read_text() if not str(source).lstrip().startswith("{") else str(source)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"configuration is not valid JSON: {exc}", "config") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a JSON object", "config")
    name = experiment or data.pop("experiment", None)
    data.pop("experiment", None)
    if name is None:
        raise ConfigurationError("no experiment named", "experiment")
    return ExperimentConfig.preset(name, **data)


# -- trajectory cache -----------------------------------------------------

_CACHE: "OrderedDict[tuple, object]" = OrderedDict()
_CACHE_LOCK = threading.Lock()
_CACHE_SIZE = 3


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def _initial_data(cfg: ExperimentConfig, tr):
    kind = cfg.option("data")
    if kind == "zero":
        return np.zeros(tr.grid.size, dtype=complex)
    if kind != "gaussian":
        raise ConfigurationError(f"unknown data kind {kind!r}", "options.data")
    return gaussian_data(tr, width=float(cfg.option("data_width")), h1=float(cfg.option("data_h1")))


def _trajectory(cfg: ExperimentConfig, *, dt: float | None = None, geometry: str = "hyperbolic",
                morawetz: bool = False):
    """Run (or reuse) the NLS trajectory described by ``cfg``.

    Runs with the Morawetz observables also serve requests without them.
    """
    solver = cfg.solver if dt is None else replace(cfg.solver, dt=dt)
    base = (geometry, cfg.params.d, cfg.params.sigma, cfg.grid, solver, cfg.option("data"),
            float(cfg.option("data_width")), float(cfg.option("data_h1")))
    keys = [base + (True,)] if morawetz else [base + (False,), base + (True,)]
    with _CACHE_LOCK:
        for k in keys:
            if k in _CACHE:
                _CACHE.move_to_end(k)
                return _CACHE[k]
    if geometry == "euclidean":
        tr = make_euclidean_transform(cfg.params, *cfg.grid)
        traj = euclidean_baseline_evolve(_initial_data(cfg, tr), solver, cfg.params, tr)
    else:
        tr = get_transform(make_radial_grid(cfg.params, *cfg.grid))
        obs = None
        if morawetz:
            w = build_weight(cfg.params, tr.grid)
            method = "spectral" if tr.scheme == "sine" else "centered"
            obs = dict(ratio_observables(cfg.params))
            obs["morawetz"] = morawetz_observable(w, cfg.params, solver.coupling, method)
        traj = evolve_nls(_initial_data(cfg, tr), solver, cfg.params, tr, observables=obs)
        if morawetz:
            traj.meta["morawetz_method"] = method
    with _CACHE_LOCK:
        _CACHE[keys[0]] = traj
        while len(_CACHE) > _CACHE_SIZE:
            _CACHE.popitem(last=False)
    return traj


def _boundary_row(rep: DiagnosticsReport, name: str, traj, label: str = "") -> None:
    rep.add(name, f"boundary_fraction_max{label}", float(np.max(traj.boundary_series)),
            traj.config.boundary_alarm, meta="mass fraction in r > 0.9 r_max")


def _order(coarse: float, fine: float) -> float:
    if coarse <= 0 or fine <= 0:
        return float("nan")
    return math.log2(coarse / fine)


# -- experiments ----------------------------------------------------------


def _smooth_random_fields(r: np.ndarray, rng: np.random.Generator, count: int) -> list:
    out = []
    for _ in range(count):
        c = rng.uniform(0.0, 4.0, size=3)
        w = rng.uniform(0.5, 2.0, size=3)
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        out.append(sum(ai * np.exp(-(((r - ci) / wi) ** 2)) for ai, ci, wi in zip(a, c, w)))
    return out


def _exp_plancherel(cfg: ExperimentConfig) -> DiagnosticsReport:
    name = "plancherel"
    p = cfg.params
    g = make_radial_grid(p, *cfg.grid)
    tr = get_transform(g)
    rep = DiagnosticsReport()
    tol = 1e-8 if tr.scheme == "sine" else 1e-5
    f = np.exp(-((g.nodes / float(cfg.option("data_width"))) ** 2))
    back = tr.inverse(tr.forward(f))
    err = lp_norm(g, back - f, 2) / lp_norm(g, f, 2)
    meta = f"d={p.d} r_max={g.r_max:g} n={g.n} scheme={tr.scheme}"
    rep.add(name, "round_trip_rel_err", err, tol, meta=meta)
    rep.add(name, "plancherel_defect_gaussian", tr.plancherel_defect(f, f), tol if p.d == 3 else None, meta=meta)
    rng = np.random.default_rng(cfg.seed)
    fields = _smooth_random_fields(g.nodes, rng, int(cfg.option("n_random")))
    worst_rt, worst_pd = 0.0, 0.0
    for i, u in enumerate(fields):
        worst_rt = max(worst_rt, lp_norm(g, tr.inverse(tr.forward(u)) - u, 2) / lp_norm(g, u, 2))
        worst_pd = max(worst_pd, tr.plancherel_defect(u, fields[(i + 1) % len(fields)]))
    rep.add(name, "round_trip_rel_err_random", worst_rt, tol, meta=f"seed={cfg.seed}")
    rep.add(name, "plancherel_defect_random", worst_pd, tol if p.d == 3 else None, meta=f"seed={cfg.seed}")
    rep.add(name, "calibration", tr.sgrid.calibration)

    # eigenfunction residual of the finite-difference Laplacian
    ns = [int(n) for n in cfg.option("eigen_ns")]
    r_eig = float(cfg.option("eigen_r_max"))
    for lam in cfg.option("eigen_lambdas"):
        lam = float(lam)
        res = []
        for n in ns:
            ge = make_radial_grid(p, r_eig, n)
            if p.d == 3:
                phi = phi_closed_form_d3(lam, ge.nodes)
            else:
                phi = spherical_table(p.d, np.array([lam]), ge.nodes)[:, 0].real
            lap = radial_laplacian(ge, p, phi)
            interior = ge.nodes <= 0.9 * ge.r_max
            res.append(float(np.abs(lap + (lam**2 + p.rho**2) * phi)[interior].max()))
        orders = [_order(a, b) for a, b in zip(res[:-1], res[1:])]
        rep.add(name, f"eigen_residual_lam{lam:g}", res[-1],
                meta=f"sup over r <= {0.9 * r_eig:g}; n={ns[-1]}")
        rep.add(name, f"eigen_order_lam{lam:g}", min(orders), 1.9, op=">=",
                meta="min over refinements " + ",".join(f"{o:.4f}" for o in orders))
    return rep


def _exp_dispersive(cfg: ExperimentConfig) -> DiagnosticsReport:
    name = "dispersive"
    p = cfg.params
    r_max, n = cfg.grid
    eps = float(cfg.option("eps"))
    times = [float(t) for t in cfg.option("times")]
    rep = DiagnosticsReport()
    sup = {}
    for nn in (n, 2 * n):
        g = make_radial_grid(p, r_max, nn)
        for e in (eps, 0.5 * eps):
            vals = []
            wrap = True
            for t in times:
                s = kernel_eval(p, t, e, g)
                wrap &= s.wrap_free
                vals.append(dispersive_ratio(s, p))
            sup[(nn, e)] = max(vals)
            rep.add(name, f"sup_ratio_n{nn}_eps{e:g}", sup[(nn, e)], meta=f"image_free={str(wrap).lower()}")
    base = sup[(n, eps)]
    rep.add(name, "ratio_change_eps_halving", abs(sup[(n, 0.5 * eps)] - base) / base, 0.1, op="<")
    rep.add(name, "ratio_change_grid_doubling", abs(sup[(2 * n, eps)] - base) / base, 0.1, op="<")

    sr, sn = cfg.option("small_time_grid")
    gs = make_radial_grid(p, float(sr), int(sn))
    lo, hi, k = cfg.option("small_times")
    ts = np.logspace(math.log10(lo), math.log10(hi), int(k))
    rl = float(cfg.option("slope_r_limit"))
    e_small = float(cfg.option("small_time_eps"))
    sups = [np.abs(kernel_eval(p, t, e_small, gs).values[gs.nodes <= rl]).max() for t in ts]
    slope = loglog_slope(ts, sups)
    meta = f"t in [{lo:g},{hi:g}] eps={e_small:g} r<={rl:g}"
    rep.add(name, "small_time_slope", slope, meta=meta)
    rep.add(name, "small_time_slope_error", abs(slope + 0.5 * p.d), 0.1, meta=f"|slope + d/2|; {meta}")

    g = make_radial_grid(p, r_max, n)
    lo, hi, k = cfg.option("large_times")
    ts = np.logspace(math.log10(lo), math.log10(hi), int(k))
    sups = [np.abs(kernel_eval(p, t, eps, g).values[g.nodes <= rl]).max() for t in ts]
    rep.add(name, "large_time_slope", loglog_slope(ts, sups), -0.95,
            meta=f"t in [{lo:g},{hi:g}] eps={eps:g} r<={rl:g}")
    return rep


def _exp_kunze_stein(cfg: ExperimentConfig) -> DiagnosticsReport:
    name = "kunze_stein"
    p = cfg.params
    g = make_radial_grid(p, *cfg.grid)
    tr = get_transform(g)
    fam = ks_test_family(tr, seed=cfg.seed, n_random=int(cfg.option("n_random")))
    centres = [float(c) for c in cfg.option("centres")]
    rep = DiagnosticsReport()
    ks_max, l1_max, phi0_max = [], [], 0.0
    for c in centres:
        K = np.exp(-((g.nodes - c) ** 2))
        ks = [(ks_ratio(tr, f, K), nm) for nm, f in fam.items()]
        l1 = [l1_ratio(tr, f, K) for _, f in fam.items()]
        phi0_max = max(phi0_max, max(phi0_bound_ratio(tr, f, K) for _, f in fam.items()))
        best = max(ks)
        ks_max.append(best[0])
        l1_max.append(max(l1))
        rep.add(name, f"ks_max_c{c:g}", best[0], meta=f"argmax={best[1]}")
        rep.add(name, f"l1_max_c{c:g}", l1_max[-1])
    spread = (max(ks_max) - min(ks_max)) / max(ks_max)
    rep.add(name, "ks_translation_spread", spread, 0.1, op="<", meta="(max-min)/max of ks_max over centres")
    shift = centres[-1] - centres[0]
    rep.add(name, "l1_collapse_factor", l1_max[0] / l1_max[-1], math.exp(p.rho * 5.0), op=">",
            meta=f"l1_max(c={centres[0]:g}) / l1_max(c={centres[-1]:g}); threshold exp(5 rho)")
    rep.add(name, "ks_over_l1_growth", (ks_max[-1] / l1_max[-1]) / (ks_max[0] / l1_max[0]),
            meta=f"gain of the weighted bound over the L1 bound across a shift of {shift:g}")
    rep.add(name, "phi0_bound_ratio_max", phi0_max, 1.0 + 1e-6,
            meta="||f*K||/(||f|| int |K| Phi_0); sharp radial bound")
    return rep


def _exp_conservation(cfg: ExperimentConfig) -> DiagnosticsReport:
    name = "conservation"
    rep = DiagnosticsReport()
    traj = _trajectory(cfg)
    meta = f"T={cfg.solver.t_end:g} dt={cfg.solver.dt:g} r_max={cfg.grid[0]:g} n={cfg.grid[1]}"
    rep.add(name, "mass_drift", traj.mass_drift(), 1e-10, meta=meta)
    rep.add(name, "energy_drift", traj.energy_drift(), 1e-5, meta=meta)
    _boundary_row(rep, name, traj)
    if cfg.option("order_check") and cfg.option("data") != "zero":
        coarse = _trajectory(cfg, dt=2 * cfg.solver.dt)
        rep.add(name, "energy_drift_coarse", coarse.energy_drift(), meta=f"dt={2 * cfg.solver.dt:g}")
        rep.add(name, "energy_drift_order", _order(coarse.energy_drift(), traj.energy_drift()), 1.8, op=">=",
                meta="log2 of drift ratio under dt halving")
    return rep


def _exp_morawetz(cfg: ExperimentConfig) -> DiagnosticsReport:
    name = "morawetz"
    p = cfg.params
    rep = DiagnosticsReport()
    wr, wn = cfg.option("weight_grid")
    wg = make_radial_grid(p, float(wr), int(wn))
    rep.extend(weight_certify(build_weight(p, wg), p, experiment=name))
    if p.d == 3:
        rep.add(name, "da_at_1", weight_derivative(3, 1.0), meta="closed form (sinh r cosh r - r)/(2 sinh^2 r) at r=1")

    fine = _trajectory(cfg, morawetz=True)
    _boundary_row(rep, name, fine)
    rf = morawetz_monotonicity_residual(fine, experiment=name)
    rep.extend(rf)
    horizons = [float(T) for T in cfg.option("horizons") if T <= cfg.solver.t_end + 1e-9]
    ratios = [morawetz_inequality_ratio(fine, T) for T in horizons]
    for T, v in zip(horizons, ratios):
        rep.add(name, f"ratio_T{T:g}", v, meta="int int |u|^{2s+2} / sup ||u||_2 ||u||_H1")
    incs = np.diff(ratios)
    if len(incs):
        rep.add(name, "ratio_min_increment", incs.min(), 0.0, op=">=", meta="nondecreasing in horizon")
    if len(incs) > 1 and incs[0] > 0:
        rep.add(name, "ratio_last_over_first_increment", incs[-1] / incs[0], 0.5, op="<")
    if cfg.option("refine_check") and cfg.option("data") != "zero":
        coarse = _trajectory(cfg, dt=2 * cfg.solver.dt, morawetz=True)
        rc = morawetz_monotonicity_residual(coarse, experiment=name)
        df, dc = rf.value("identity_defect"), rc.value("identity_defect")
        rep.add(name, "identity_defect_coarse", dc, meta=f"dt={2 * cfg.solver.dt:g}")
        rep.add(name, "identity_defect_order", _order(dc, df), 1.8, op=">=", meta="log2 under dt halving")
        if horizons:
            rcoarse = morawetz_inequality_ratio(coarse, horizons[-1])
            rep.add(name, "ratio_refinement_change", abs(rcoarse - ratios[-1]) / ratios[-1], 0.05,
                    meta=f"T={horizons[-1]:g}; dt vs 2 dt")
    return rep


def _exp_strichartz(cfg: ExperimentConfig) -> DiagnosticsReport:
    name = "strichartz"
    p = cfg.params
    g = make_radial_grid(p, *cfg.grid)
    tr = get_transform(g)
    rep = DiagnosticsReport()
    qmax = (2.0 * p.d + 4.0) / p.d
    qs = cfg.option("q_values")
    qs = [float(q) for q in qs] if qs else [2.0 + (qmax - 2.0) * k / 4 for k in (1, 2, 3)] + [qmax]
    worst = 0.0
    for q in qs:
        ex = exponents(p, q)
        worst = max(worst, ex.admissibility_residual)
    ex = exponents(p, qmax)
    rep.add(name, "admissibility_residual_max", worst, 1e-12, meta=f"{len(qs)} exponent sets")
    rep.add(name, "p_sigma", ex.p_sigma)
    rep.add(name, "q_sigma", ex.q_sigma)

    phi = _initial_data(cfg, tr)
    rep.extend(strichartz_constant(tr, p, phi, qmax, cfg.option("horizons"),
                                   dt_sample=float(cfg.option("dt_sample")), experiment=name))

    # local norms on one interval of the free flow
    length = float(cfg.option("holder_interval"))
    dts = float(cfg.option("dt_sample"))
    lin = linear_trajectory(tr, p, phi, np.linspace(0.0, length, int(round(length / dts)) + 1))
    n0 = lp_norm(g, phi, 2)
    if n0 > 0:
        rep.add(name, "linf2_unitarity_error", abs(spacetime_norm(lin, np.inf, 2.0) - n0) / n0, 1e-10)
        hc = holder_check(lin, qmax)
        rep.add(name, "holder_excess", hc["lqq"] / hc["holder_rhs"], 1.0 + 1e-12,
                meta=f"|I|={length:g}; L^(q,q) over |I|^(1/q-1/p) L^(p,q)")
        rep.add(name, "interpolation_ratio", hc["interpolation_ratio"],
                meta="L^(q,q) over |I|^(1/q-1/p) (L^(inf,2) + L^(q,r)); constant not fixed")
        for q in (qs[0], qmax):
            rep.add(name, f"s0_norm_q{q:.6g}", s_norm(lin, q, 0))
            rep.add(name, f"s1_norm_q{q:.6g}", s_norm(lin, q, 1))

    # interval splitting of a nonlinear run in the norm L^{2 sigma + 2}
    traj = _trajectory(cfg)
    _boundary_row(rep, name, traj)
    rep.add(name, "nls_spacetime_norm_sigma", spacetime_norm(traj, ex.q_sigma, ex.p_sigma),
            meta=f"L^(q_sigma, p_sigma) over [0,{cfg.solver.t_end:g}]")
    for e in cfg.option("split_eps"):
        parts = split_intervals(traj, float(e))
        rep.add(name, f"split_intervals_eps{float(e):g}", len(parts),
                meta=f"local L^{2 * p.sigma + 2:g} norm <= {float(e):g}")
    return rep


def _scatter_rows(rep, name, traj, checkpoints, label=""):
    prof = cauchy_profile(traj, checkpoints)
    dist = consecutive_distances(prof)
    for a, b, v in zip(checkpoints[:-1], checkpoints[1:], dist):
        rep.add(name, f"cauchy{label}_t{a:g}_t{b:g}", v, meta="H1 distance of pullbacks")
    return dist


def _exp_scatter(cfg: ExperimentConfig) -> DiagnosticsReport:
    name = "scatter"
    rep = DiagnosticsReport()
    traj = _trajectory(cfg)
    _boundary_row(rep, name, traj)
    cps = [float(t) for t in cfg.option("checkpoints")]
    dist = _scatter_rows(rep, name, traj, cps)
    phi = traj.fields[0]
    tr = traj.transform
    if np.max(dist) == 0:
        rep.add(name, "final_over_first", 0.0, meta="zero data")
        return rep
    rep.add(name, "min_consecutive_decrease", float(np.min(-np.diff(dist))), 0.0, op=">",
            meta="strictly decreasing distances")
    rep.add(name, "final_over_first", dist[-1] / dist[0], 0.25)
    if traj.alarm_tripped:
        rep.add(name, "scattering_state_available", 0.0, 1.0, op=">=", meta="boundary alarm tripped")
        return rep
    half = [cps[-3], cps[-2]]
    u_half, res_half = scattering_state(traj, half)
    u_plus, res = scattering_state(traj, cps[-2:])
    rep.add(name, f"residual_T{cps[-2]:g}", res_half)
    rep.add(name, f"residual_T{cps[-1]:g}", res)
    rep.add(name, "residual_halving_ratio", res / res_half, 0.5, meta="horizon doubled")
    m0 = lp_norm(tr.grid, phi, 2)
    rep.add(name, "u_plus_mass_error", abs(lp_norm(tr.grid, u_plus, 2) - m0) / m0, 1e-8)
    back = evolve_linear(tr, u_plus, traj.t_final)
    rep.add(name, "reevolve_error_over_residual", h1_distance(tr, back, traj.fields[-1]) / res, 2.0,
            meta="||W(T) u_plus - u(T)||_H1 / residual")
    rep.add(name, "u_plus_h1", tr.h1_norm(u_plus))
    rep.add(name, "pullback_t0_error", h1_distance(tr, pullback(tr, phi, 0.0), phi), 1e-12)
    return rep


def _exp_euclid(cfg: ExperimentConfig) -> DiagnosticsReport:
    name = "euclid_contrast"
    rep = DiagnosticsReport()
    cps = [float(t) for t in cfg.option("checkpoints")]
    hyp = _trajectory(cfg)
    euc = _trajectory(cfg, geometry="euclidean")
    _boundary_row(rep, name, hyp, "_hyperbolic")
    _boundary_row(rep, name, euc, "_euclidean")
    dh = _scatter_rows(rep, name, hyp, cps, "_hyperbolic")
    de = _scatter_rows(rep, name, euc, cps, "_euclidean")
    if dh[0] == 0 or de[0] == 0:
        rep.add(name, "contrast_factor", 0.0, meta="zero data")
        return rep
    rh, re_ = dh[-1] / dh[0], de[-1] / de[0]
    rep.add(name, "final_over_first_hyperbolic", rh)
    rep.add(name, "final_over_first_euclidean", re_)
    rep.add(name, "contrast_factor", re_ / rh, 2.0, op=">=", advisory=True,
            meta=f"sigma={cfg.params.sigma:g}; qualitative")
    return rep


_RUNNERS = {
    "plancherel": _exp_plancherel,
    "dispersive": _exp_dispersive,
    "kunze_stein": _exp_kunze_stein,
    "conservation": _exp_conservation,
    "morawetz": _exp_morawetz,
    "strichartz": _exp_strichartz,
    "scatter": _exp_scatter,
    "euclid_contrast": _exp_euclid,
}


def _write_artifacts(cfg: ExperimentConfig, rep: DiagnosticsReport, stem: str) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep.write_csv(out / f"{stem}.csv")
    if cfg.experiment in ("conservation", "scatter"):
        traj = _trajectory(cfg)
        write_trajectory_csv(traj, out / f"{stem}_series.csv")
        write_snapshots(traj, out / f"{stem}_snapshots.bin")


def run(config: ExperimentConfig, *, write: bool = True) -> DiagnosticsReport:
    """Run one experiment and, if ``output_dir`` is set, write its CSV.

    A contaminated run is reported as a failed row rather than raised.
    """
    try:
        rep = _RUNNERS[config.experiment](config)
    except ContaminatedRunError as exc:
        rep = DiagnosticsReport()
        rep.add(config.experiment, "contaminated_run", exc.boundary_fraction, config.solver.boundary_alarm,
                meta=f"t={exc.time:g}")
    if write and config.output_dir:
        _write_artifacts(config, rep, config.experiment)
    return rep


def _label(value) -> str:
    return f"{value:.6g}" if isinstance(value, float) else str(value)


def sweep(base: ExperimentConfig, axis: str, values, *, threads: int = 1) -> DiagnosticsReport:
    """One report section per value plus aggregate rows.

    Sections are ordered as ``values`` regardless of completion order.
    """
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}", axis)
    values = list(values)
    out = DiagnosticsReport()
    if not values:
        return out
    configs = [base.with_value(axis, v) for v in values]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(lambda c: run(c, write=False), configs))
    else:
        reports = [run(c, write=False) for c in configs]
    for v, rep in zip(values, reports):
        tag = f"{base.experiment}[{axis}={_label(v)}]"
        for row in rep:
            out.rows.append(replace(row, experiment=tag))
    _aggregate(out, base.experiment, axis, values, reports)
    if base.output_dir:
        Path(base.output_dir).mkdir(parents=True, exist_ok=True)
        out.write_csv(Path(base.output_dir) / f"{base.experiment}_sweep_{axis}.csv")
    return out


def _aggregate(out: DiagnosticsReport, name: str, axis: str, values, reports) -> None:
    tag = f"{name}[sweep {axis}]"
    out.add(tag, "sections", len(reports))
    out.add(tag, "sections_all_passed", float(all(r.all_passed for r in reports)), 1.0, op=">=")
    if name == "scatter":
        ok = []
        for r in reports:
            try:
                ok.append(r.get("min_consecutive_decrease").passed and r.get("final_over_first").passed)
            except KeyError:
                ok.append(False)
        out.add(tag, "all_cauchy_monotone", float(all(ok)), 1.0, op=">=")
    if name == "kunze_stein":
        vals = [max(r.value(q.quantity) for q in r if q.quantity.startswith("ks_max_")) for r in reports]
        out.add(tag, "max_ks_ratio", max(vals))
    if name == "conservation" and axis == "dt" and len(values) >= 2:
        drifts = [r.value("energy_drift") for r in reports]
        if min(drifts) > 0:
            out.add(tag, "energy_drift_order_fit", loglog_slope(values, drifts), 1.8, op=">=")
