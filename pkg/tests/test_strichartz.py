import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypnls.errors import DegenerateInputError, InvalidParameterError
from hypnls.grid import ModelParams, lp_norm
from hypnls.nls import gaussian_data
from hypnls.strichartz import (
    admissible_time_exponent,
    exponents,
    holder_check,
    linear_trajectory,
    s_norm,
    spacetime_norm,
    split_intervals,
    strichartz_constant,
)


def test_endpoint_exponents(p3):
    ex = exponents(p3, 10 / 3)
    assert ex.r_adm == pytest.approx(10 / 3)
    assert ex.p_sigma == 3.0 and ex.q_sigma == pytest.approx(3.0)


def test_q3(p3):
    ex = exponents(p3, 3.0)
    assert ex.r_adm == pytest.approx(3.6)
    assert ex.admissibility_residual <= 1e-12


@pytest.mark.parametrize("sigma", [0.3, 0.5, 2 / 3, 1.0, 1.9])
def test_q_sigma_formula(sigma):
    d = 3
    ex = exponents(ModelParams(d=d, sigma=sigma), 3.0)
    assert ex.q_sigma == pytest.approx(max(2 * sigma + 2, (d + 2) * sigma) / (2 * sigma) if sigma <= 2 / d
                                       else (d + 2) / 2)


@settings(max_examples=50)
@given(st.integers(2, 6), st.floats(0.0, 1.0))
def test_admissibility_property(d, frac):
    qmax = (2 * d + 4) / d
    q = 2 + 1e-6 + frac * (qmax - 2 - 1e-6)
    ex = exponents(ModelParams(d=d, sigma=0.2), q)
    assert ex.admissibility_residual <= 1e-12
    assert admissible_time_exponent(d, ex.r_adm) == pytest.approx(q, rel=1e-10)


@pytest.mark.parametrize("q", [2.0, 1.5, 4.0])
def test_q_out_of_range(p3, q):
    with pytest.raises(InvalidParameterError):
        exponents(p3, q)


def test_zero_and_constant(tr3, p3):
    times = np.linspace(0, 2, 21)
    zero = linear_trajectory(tr3, p3, np.zeros(tr3.grid.size), times)
    assert spacetime_norm(zero, 3, 3) == 0 and s_norm(zero, 3.0) == 0 and s_norm(zero, 3.0, 1) == 0
    phi = gaussian_data(tr3)
    const = linear_trajectory(tr3, p3, phi, times)
    const.fields[:] = phi
    assert spacetime_norm(const, 4.0, 3.0) == pytest.approx(2.0 ** 0.25 * lp_norm(tr3.grid, phi, 3), rel=1e-12)


def test_empty_trajectory(tr3, p3):
    traj = linear_trajectory(tr3, p3, gaussian_data(tr3), [0.0])
    traj.times = np.array([])
    traj.fields = np.zeros((0, tr3.grid.size))
    with pytest.raises(DegenerateInputError):
        spacetime_norm(traj, 2, 2)


def test_unitarity(tr3, p3):
    phi = gaussian_data(tr3, h1=None)
    traj = linear_trajectory(tr3, p3, phi, np.linspace(0, 5, 11))
    assert spacetime_norm(traj, np.inf, 2) == pytest.approx(lp_norm(tr3.grid, phi), rel=1e-12)


def test_scaling(tr3, p3):
    phi = gaussian_data(tr3)
    traj = linear_trajectory(tr3, p3, phi, np.linspace(0, 2, 11))
    traj2 = linear_trajectory(tr3, p3, 3 * phi, np.linspace(0, 2, 11))
    assert spacetime_norm(traj2, 3, 3) == pytest.approx(3 * spacetime_norm(traj, 3, 3), rel=1e-12)


def test_holder(tr3, p3):
    traj = linear_trajectory(tr3, p3, gaussian_data(tr3), np.linspace(0, 1, 101))
    res = holder_check(traj, 10 / 3)
    assert res["lqq"] <= res["holder_rhs"] * (1 + 1e-12)


def test_constant_series(tr3, p3):
    zero = strichartz_constant(tr3, p3, np.zeros(tr3.grid.size), 10 / 3, [1, 2])
    assert [r.value for r in zero] == [0.0, 0.0]
    rep = strichartz_constant(tr3, p3, gaussian_data(tr3), 10 / 3, [1, 2, 4, 8], dt_sample=0.02)
    assert rep.get("min_increment").passed


def test_split_intervals(tr3, p3):
    traj = linear_trajectory(tr3, p3, gaussian_data(tr3), np.linspace(0, 4, 81))
    parts = split_intervals(traj, 0.2)
    assert parts[0][0] == 0.0 and parts[-1][1] == pytest.approx(4.0)
    assert all(a[1] == b[0] for a, b in zip(parts[:-1], parts[1:]))
    assert len(split_intervals(traj, 100.0)) == 1
