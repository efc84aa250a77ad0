"""1-D finite-difference cross-check solver."""

from dataclasses import replace

import numpy as np
import pytest

from percopod import model, oracle

DEPTH = 1.388


@pytest.fixture(scope="module")
def params():
    return model.ModelParameters()


def test_grid_defaults_and_validation():
    grid = oracle.Grid1D()
    assert grid.n == 201 and grid.depth == DEPTH
    assert grid.x3[0] == 0.0 and grid.x3[-1] == -DEPTH
    assert grid.spacing == pytest.approx(DEPTH / 200.0, rel=1e-15)
    with pytest.raises(ValueError):
        oracle.Grid1D(n=2)
    with pytest.raises(ValueError):
        oracle.Grid1D(depth=0.0)


def test_head_reaches_published_steady_profile(params):
    result = oracle.fd_solve("head", params, params.t_bar)
    exact = model.steady_head_profile(params, DEPTH, result.x3)
    np.testing.assert_allclose(result.values[-1], exact, rtol=1e-8)
    bottom = oracle.profile_at(result, [-DEPTH])[0]
    assert abs(bottom - 1162.36) / 1162.36 < 5e-3, (
        f"bottom head {bottom} vs published 1162.36"
    )


def test_heat_equalizes_to_inlet(params):
    t_end = model.dissolution_horizon(params, 4.3888e-3)
    result = oracle.fd_solve("heat", params, t_end, q0=-6527.72)
    np.testing.assert_allclose(result.values[-1], params.T_z0, rtol=1e-6)
    # and the transient is warming everywhere
    early = oracle.fd_solve(
        "heat", params, t_end, q0=-6527.72, output_times=[t_end / 100.0, t_end]
    )
    # tolerance covers linear-solver roundoff on the 88-degree field
    assert np.all(np.diff(early.values, axis=0) >= -1e-6)


def test_transport_no_flow_reduction_matches_closed_form(params):
    still = replace(params, Phi_1=0.0)
    t_end = model.dissolution_horizon(params, 4.3888e-3)
    times = np.linspace(0.0, t_end, 7)
    result = oracle.fd_solve("transport", still, t_end, q0=0.0, output_times=times)
    expected = oracle.caffeine_balance(still, result.times)
    for row, value in zip(result.values, expected):
        np.testing.assert_allclose(row, value, rtol=1e-8, atol=1e-20)


def test_transport_profile_decreases_with_depth_at_end(params):
    t_end = model.dissolution_horizon(params, 4.3888e-3)
    result = oracle.fd_solve("transport", params, t_end, q0=-6527.72)
    final = result.values[-1]
    assert np.all(final >= 0.0), "no negative concentrations on the line"
    assert final[0] > final[-1], "outflow drains the bottom first"


def test_steady_refinement_sits_on_the_floor(params):
    """The scheme is exact for affine steady states at any resolution, so
    refinement has nothing left to reduce -- only rounding remains."""
    for n in (26, 51, 101, 201):
        result = oracle.fd_solve(
            "head", params, params.t_bar, grid=oracle.Grid1D(n=n)
        )
        exact = model.steady_head_profile(params, DEPTH, result.x3)
        dev = np.max(np.abs(result.values[-1] - exact))
        assert dev < 1e-6, f"n={n}: steady affine deviation {dev}"


def test_transient_refinement_is_second_order(params):
    """Half the spacing, a quarter of the error, while the head front is
    still inside the column (time error frozen by a tiny fixed dt)."""
    t_end, dt = 2e-6, 2e-9
    solutions = {}
    for n in (26, 51, 101, 201):
        result = oracle.fd_solve(
            "head", params, t_end, grid=oracle.Grid1D(n=n), dt=dt
        )
        solutions[n] = result.values[-1]
    errors = []
    for n in (26, 51, 101):
        stride = 200 // (n - 1)
        errors.append(np.max(np.abs(solutions[n] - solutions[201][::stride])))
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all(ratios >= 3.5), (
        f"halving ratios {ratios} must stay near 4 (second order)"
    )


def test_solid_path_first_order_in_dt(params):
    t_end = 2e-4
    exact = model.solid_concentration(params.C10s, params.alpha1, t_end)
    errors = []
    for dt in (t_end / 100, t_end / 200, t_end / 400):
        result = oracle.fd_solve("solid", params, t_end, dt=dt)
        errors.append(abs(result.values[-1, 0] - exact))
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all(np.abs(ratios - 2.0) < 0.2), (
        f"implicit Euler halving ratios {ratios} should be near 2"
    )


def test_caffeine_balance_closed_form(params):
    assert oracle.caffeine_balance(params, 0.0) == 0.0
    t = 3.3e-4
    expected = 0.695 / 0.305 * 0.01254 * (1.0 - np.exp(-3184.9 * t))
    assert oracle.caffeine_balance(params, t) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(ValueError):
        oracle.caffeine_balance(params, -1.0)


def test_profile_at_interpolates(params):
    result = oracle.fd_solve("head", params, params.t_bar)
    x_mid = -0.5 * (result.x3[3] + result.x3[4]).item() * -1.0
    value = oracle.profile_at(result, [result.x3[3], x_mid])[1]
    between = 0.5 * (result.values[-1, 3] + result.values[-1, 4])
    assert value == pytest.approx(between, rel=1e-12)
    first = oracle.profile_at(result, result.x3, time_index=0)
    np.testing.assert_array_equal(first, result.values[0])


def test_output_times_hit_exactly(params):
    times = [1e-5, 5e-5, 2e-4]
    result = oracle.fd_solve("head", params, 2e-4, output_times=times)
    np.testing.assert_allclose(result.times, times, rtol=1e-12)


def test_validation_errors(params):
    with pytest.raises(ValueError):
        oracle.fd_solve("vorticity", params, 1e-4)
    with pytest.raises(ValueError):
        oracle.fd_solve("heat", params, 1e-4)  # q0 missing
    with pytest.raises(ValueError):
        oracle.fd_solve("transport", params, 1e-4)  # q0 missing
    with pytest.raises(ValueError):
        oracle.fd_solve("head", params, 0.0)
    with pytest.raises(ValueError):
        oracle.fd_solve("head", params, 1e-4, dt=-1.0)
    with pytest.raises(ValueError):
        oracle.fd_solve("head", params, 1e-4, output_times=[2e-4])
