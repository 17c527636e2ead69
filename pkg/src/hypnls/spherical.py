"""Elementary spherical functions Phi_lambda(r) on H^d.

Three evaluation routes are provided:

* ``d = 3`` closed form ``sin(lambda r) / (lambda sinh r)``;
* a scalar Gauss-Legendre quadrature of the angular integral, used as
  the reference for all d;
* a vectorised table builder (angular quadrature near the origin, the
  Harish-Chandra expansion elsewhere) for dense transform matrices.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import gammaln, loggamma, roots_legendre

from .errors import AccuracyError, InvalidParameterError

__all__ = [
    "spherical_function",
    "spherical_table",
    "c_function",
    "density_profile",
    "phi_closed_form_d3",
]


@lru_cache(maxsize=256)
def _gauss_legendre(order: int):
    x, w = roots_legendre(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _angle_norm(d: int) -> float:
    # 1 / int_0^pi sin^{d-2}(theta) dtheta
    return float(np.exp(gammaln(0.5 * d) - gammaln(0.5 * (d - 1)) - 0.5 * np.log(np.pi)))


def phi_closed_form_d3(lam, r):
    """``sin(lam r) / (lam sinh r)`` with the removable singularities filled."""
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    lr = lam * r
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(lr == 0, 1.0, np.sin(lr) / np.where(lr == 0, 1.0, lr))
        shr = np.where(r == 0, 1.0, r / np.where(r == 0, 1.0, np.sinh(r)))
    return sinc * shr


def _phi_panels(lam: float, r: float, rho: float, base_order: int):
    """Composite Gauss-Legendre estimate of Phi_lambda(r) for r > 0.

    Uses u = tan(theta/2) = e^{s - r}, which turns the angular integral into
    ``C 4^rho e^{(i lam - rho) r} int e^{2 rho s} (1+e^{2s})^{-i lam - rho}
    (1+e^{2(s-r)})^{i lam - rho} ds`` over the real line. The phase is
    monotone with total variation ``2 lam r``, so each panel gets an order
    proportional to its share of that phase.
    """
    tail = 40.0 / (2.0 * rho)
    core = np.linspace(-4.0, r + 4.0, int(np.ceil(r + 8.0)) + 1)
    edges = np.concatenate([[-4.0 - tail], core, [r + 4.0 + tail]])

    def phase(s):
        return -lam * np.logaddexp(0.0, 2 * s) + lam * np.logaddexp(0.0, 2 * (s - r))

    total = 0j
    ph = phase(edges)
    for a, b, dphi in zip(edges[:-1], edges[1:], np.abs(np.diff(ph))):
        order = base_order + int(np.ceil(2.0 * dphi))
        x, w = _gauss_legendre(order)
        s = 0.5 * (b - a) * (x + 1.0) + a
        logv = (
            2 * rho * s
            - (1j * lam + rho) * np.logaddexp(0.0, 2 * s)
            + (1j * lam - rho) * np.logaddexp(0.0, 2 * (s - r))
        )
        total += 0.5 * (b - a) * np.dot(w, np.exp(logv))
    return total


def spherical_function(d, lam: float, r: float, *, tol: float = 1e-11) -> complex:
    """Phi_lambda(r) normalised by Phi_lambda(0) = 1.

    ``d`` is the dimension or a :class:`~hypnls.grid.ModelParams`.

    For ``d = 3`` the closed form is returned; otherwise the angular
    integral is computed by composite Gauss-Legendre quadrature, doubling
    the per-panel order until two successive estimates agree to ``tol``.

    Raises
    ------
    AccuracyError
        If the quadrature does not converge.
    """
    d = int(getattr(d, "d", d))
    if not r >= 0:
        raise InvalidParameterError(f"r must be >= 0, got {r}")
    if r == 0:
        return 1.0 + 0.0j
    lam = float(lam)
    if d == 3:
        return complex(phi_closed_form_d3(lam, r))
    rho = 0.5 * (d - 1)
    pref = _angle_norm(d) * 4.0**rho * np.exp((1j * lam - rho) * r)
    order = 24
    prev = pref * _phi_panels(lam, r, rho, order)
    residual = np.inf
    for _ in range(4):
        order *= 2
        cur = pref * _phi_panels(lam, r, rho, order)
        residual = abs(cur - prev)
        if residual <= tol * max(1.0, abs(cur)):
            return complex(cur)
        prev = cur
    raise AccuracyError(f"angular quadrature for Phi at lambda={lam}, r={r} did not converge", residual)


def c_function(lam, rho: float):
    """Harish-Chandra c-function ``Gamma(2rho) Gamma(i lam) / (Gamma(rho) Gamma(rho + i lam))``."""
    lam = np.asarray(lam, dtype=complex)
    return np.exp(
        gammaln(2 * rho) - gammaln(rho) + loggamma(1j * lam) - loggamma(rho + 1j * lam)
    )


def density_profile(lam, rho: float):
    """Uncalibrated Plancherel profile ``|Gamma(rho + i lam) / Gamma(i lam)|^2``.

    Zero at ``lam = 0`` by continuity.
    """
    lam = np.asarray(lam, dtype=float)
    out = np.zeros(lam.shape)
    nz = lam != 0
    z = 1j * np.abs(lam[nz])
    out[nz] = np.exp(2.0 * (loggamma(rho + z) - loggamma(z)).real)
    return out if out.ndim else float(out)


def _hc_coefficients(lam: np.ndarray, rho: float, kmax: int) -> np.ndarray:
    a = np.zeros((kmax + 1, lam.size), dtype=complex)
    a[0] = 1.0
    acc = np.zeros(lam.size, dtype=complex)
    for k in range(1, kmax + 1):
        acc += a[k - 1] * (1j * lam - rho - 2 * (k - 1))
        a[k] = -rho * acc / (k * (k - 1j * lam))
    return a


def _hc_table(lam: np.ndarray, r: np.ndarray, rho: float, tol: float = 1e-17) -> np.ndarray:
    """Phi via ``2 Re[c(lam) e^{(i lam - rho) r} sum_k a_k e^{-2kr}]``.

    The expansion converges for r > 0; the number of terms is chosen per
    row so that ``e^{-2 K r}`` drops below ``tol``.
    """
    kneed = np.ceil(np.log(1.0 / tol) / (2.0 * r)).astype(int) + 2
    a = _hc_coefficients(lam, rho, int(kneed.max()))
    c = c_function(lam, rho)
    out = np.empty((r.size, lam.size))
    for k_rows in np.unique(kneed):
        idx = np.flatnonzero(kneed == k_rows)
        z = np.exp(-2.0 * r[idx])[:, None]
        acc = np.zeros((idx.size, lam.size), dtype=complex)
        for k in range(k_rows, -1, -1):
            acc = acc * z + a[k][None, :]
        ph = np.exp(np.outer(r[idx], 1j * lam) - rho * r[idx][:, None])
        out[idx] = 2.0 * (c[None, :] * ph * acc).real
    return out


def _theta_table(lam: np.ndarray, r: np.ndarray, d: int) -> np.ndarray:
    """Plain angular Gauss-Legendre quadrature; accurate for small r only."""
    rho = 0.5 * (d - 1)
    order = 24 + int(np.ceil(4.0 * lam.max(initial=0.0) * r.max(initial=0.0)))
    x, w = _gauss_legendre(order)
    th = 0.5 * np.pi * (x + 1.0)
    sw = 0.5 * np.pi * w * np.sin(th) ** (d - 2)
    sw = sw / sw.sum()
    out = np.empty((r.size, lam.size))
    for i, ri in enumerate(r):
        lb = np.log(np.cosh(ri) - np.sinh(ri) * np.cos(th))
        amp = sw * np.exp(-rho * lb)
        out[i] = amp @ np.cos(np.outer(lb, lam))
    return out


def spherical_table(d: int, lam, r) -> np.ndarray:
    """Matrix ``Phi[i, k] = Phi_{lam_k}(r_i)`` for real ``lam`` and ``r > 0``.

    Rows with ``lam_max * r <= 20`` use angular quadrature, the rest the
    Harish-Chandra expansion. For ``d = 3`` the closed form is used.
    """
    lam = np.abs(np.asarray(lam, dtype=float).ravel())
    r = np.asarray(r, dtype=float).ravel()
    if np.any(r <= 0):
        raise InvalidParameterError("table nodes must satisfy r > 0")
    if d == 3:
        return phi_closed_form_d3(lam[None, :], r[:, None])
    rho = 0.5 * (d - 1)
    lmax = lam.max(initial=0.0)
    split = min(0.5, 20.0 / lmax) if lmax > 0 else 0.5
    split = max(split, 0.02)
    out = np.empty((r.size, lam.size))
    small = r < split
    zero = lam == 0
    if np.any(small):
        out[small] = _theta_table(lam, r[small], d)
    if np.any(~small):
        big = np.flatnonzero(~small)
        # lambda = 0 is a pole of c(lambda); use the angular route there
        if np.any(~zero):
            out[np.ix_(big, np.flatnonzero(~zero))] = _hc_table(lam[~zero], r[big], rho)
        if np.any(zero):
            out[np.ix_(big, np.flatnonzero(zero))] = np.array(
                [[spherical_function(d, 0.0, ri).real] for ri in r[big]]
            )
    return out
