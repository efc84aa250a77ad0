"""Physical model: parameters, dissolution law, staged problem builders."""

from dataclasses import replace

import numpy as np
import pytest

from percopod import model
from percopod.collocation import Dirichlet, Neumann, RobinMin
from percopod.kernels import PolyBasis, RadialKernel, shape_from_spacing
from percopod.nodes import cylinder_nodes, nearest_neighbor_stats


@pytest.fixture(scope="module")
def params():
    return model.ModelParameters()


def test_default_parameters(params):
    assert params.h_z0 == 6118.3
    assert params.alpha1 == 3184.9
    assert params.C10s == 0.01254
    assert params.eps == 0.305
    assert params.eps_s == pytest.approx(0.695, rel=1e-15)
    assert params.lam == 432.0


def test_parameter_validation():
    with pytest.raises(ValueError):
        model.ModelParameters(eps=0.0)
    with pytest.raises(ValueError):
        model.ModelParameters(eps=1.2)
    with pytest.raises(ValueError):
        model.ModelParameters(k=-1.0)
    with pytest.raises(ValueError):
        model.ModelParameters(alpha1=0.0)
    with pytest.raises(ValueError):
        model.ModelParameters(Phi_1=-5.0)
    # zero leakage coefficients are allowed (used by the no-flow reduction)
    model.ModelParameters(Phi_1=0.0, Phi_h=0.0)


def test_alpha_rate_polynomial():
    coeffs = model.AlphaCoefficients(A0=1, a=2, b=3, c=4, d=5, f=6, l=7, m=8)
    # 1 + 2*3 + 3*2 + 4*9 + 5*4 + 6*6 + 7*18 + 8*12
    assert model.alpha_rate(coeffs, 2.0, 3.0) == 327.0
    assert model.alpha_rate(model.AlphaCoefficients(), 6.0, 88.0) == 0.0


def test_solid_concentration(params):
    assert model.solid_concentration(params.C10s, params.alpha1, 0.0) == 0.01254
    t = np.array([0.0, 1e-4, 2e-4])
    values = model.solid_concentration(params.C10s, params.alpha1, t)
    np.testing.assert_allclose(
        values, 0.01254 * np.exp(-3184.9 * t), rtol=1e-15
    )
    assert isinstance(model.solid_concentration(params.C10s, params.alpha1, 1e-4), float)
    with pytest.raises(ValueError):
        model.solid_concentration(params.C10s, params.alpha1, -1.0)


def test_dissolution_horizon_roundtrip(params):
    horizon = model.dissolution_horizon(params, 4.3888e-3)
    assert horizon == pytest.approx(3.2964e-4, rel=1e-4), (
        "published final value is reached after about 28.5 seconds"
    )
    back = model.solid_concentration(params.C10s, params.alpha1, horizon)
    assert back == pytest.approx(4.3888e-3, rel=1e-12)
    with pytest.raises(ValueError):
        model.dissolution_horizon(params, 0.0)
    with pytest.raises(ValueError):
        model.dissolution_horizon(params, 1.0)


def test_reaction_rates_balance(params):
    assert model.reaction_rate_liquid(params, 0.0) == pytest.approx(
        0.695 * 3184.9 * 0.01254, rel=1e-12
    )
    for t in (0.0, 1e-4, 5e-4):
        assert model.reaction_rate_liquid(params, t) + model.reaction_rate_solid(
            params, t
        ) == 0.0


def test_pressure_from_head():
    assert model.pressure_from_head(10.0, 10.0, 2.0) == 0.0
    np.testing.assert_allclose(
        model.pressure_from_head(np.array([5.0, 6.0]), np.array([-1.0, 0.0]), 3.0),
        [18.0, 18.0],
    )


def test_dispersion_tensor(params):
    q0 = -6527.7
    D = model.dispersion_tensor(params, (0.0, 0.0, q0))
    speed = abs(q0)
    iso = params.eps * params.D1 + params.betaT1 * speed
    assert D[0, 0] == pytest.approx(iso, rel=1e-12)
    assert D[1, 1] == pytest.approx(iso, rel=1e-12)
    assert D[2, 2] == pytest.approx(
        iso + (params.betaL1 + params.betaT1) * speed, rel=1e-12
    )
    assert np.all(np.linalg.eigvalsh(D) > 0.0), "dispersion must stay SPD"

    bear = model.dispersion_tensor(params, (0.0, 0.0, q0), bear_convention=True)
    assert bear[2, 2] == pytest.approx(
        iso + (params.betaL1 - params.betaT1) * speed, rel=1e-12
    )
    np.testing.assert_array_equal(bear[0, 0], D[0, 0])

    still = model.dispersion_tensor(params, (0.0, 0.0, 0.0))
    np.testing.assert_allclose(still, params.eps * params.D1 * np.eye(3), rtol=1e-15)


def test_head_problem_structure(params):
    op, bcs = model.head_problem(params)
    assert op.time_coeff == params.S0
    assert op.diffusion == params.k * params.f_mu
    assert op.advection is None and op.source is None
    assert isinstance(bcs["top"], Dirichlet) and bcs["top"].value == params.h_z0
    assert isinstance(bcs["lateral"], Neumann) and bcs["lateral"].value == 0.0
    bottom = bcs["bottom"]
    assert isinstance(bottom, RobinMin)
    assert bottom.phi == params.Phi_h and bottom.threshold == params.h_C
    assert bottom.flux_offset == 0.0, "chi = 0 leaves no gravity offset"


def test_head_problem_gravity_offset():
    params = model.ModelParameters(chi=1.0)
    _, bcs = model.head_problem(params)
    assert bcs["bottom"].flux_offset == pytest.approx(-params.k * params.f_mu)


def test_transport_problem_structure(params):
    q0 = -6527.7
    op, bcs = model.transport_problem(params, q0)
    assert op.time_coeff == params.eps
    np.testing.assert_allclose(
        op.diffusion, model.dispersion_tensor(params, (0.0, 0.0, q0)), rtol=1e-15
    )
    np.testing.assert_allclose(op.advection, [0.0, 0.0, q0], rtol=1e-15)
    pts = np.zeros((3, 3))
    np.testing.assert_allclose(
        op.source(0.0, pts), np.full(3, model.reaction_rate_liquid(params, 0.0)),
        rtol=1e-15,
    )
    assert isinstance(bcs["top"], Neumann) and bcs["top"].diffusive
    assert isinstance(bcs["lateral"], Neumann) and bcs["lateral"].diffusive
    assert isinstance(bcs["bottom"], RobinMin)
    assert bcs["bottom"].phi == params.Phi_1
    assert bcs["bottom"].threshold == params.C_1C


def test_heat_problem_structure(params):
    q0 = -6527.7
    op, bcs = model.heat_problem(params, q0)
    capacity = params.eps * params.rhoc + params.eps_s * params.rhoscs
    assert op.time_coeff == pytest.approx(3.4879e-3, rel=1e-4)
    assert op.time_coeff == pytest.approx(capacity, rel=1e-15)
    assert op.diffusion == params.lam
    np.testing.assert_allclose(op.advection, [0.0, 0.0, params.rhoc * q0], rtol=1e-15)
    assert isinstance(bcs["top"], Dirichlet) and bcs["top"].value == params.T_z0
    assert isinstance(bcs["lateral"], Neumann) and isinstance(bcs["bottom"], Neumann)


def test_initial_fields(params):
    nodes = cylinder_nodes(1.0, 0.6, 3)
    head = model.initial_head(params, nodes)
    np.testing.assert_array_equal(head, np.full(nodes.n, params.h_z0))
    temp = model.initial_temperature(params, nodes)
    np.testing.assert_array_equal(temp[nodes.top_idx], params.T_z0)
    others = np.setdiff1d(np.arange(nodes.n), nodes.top_idx)
    np.testing.assert_array_equal(temp[others], params.T0)
    conc = model.initial_concentration(params, nodes)
    np.testing.assert_array_equal(conc, np.zeros(nodes.n))


def test_steady_head_slope_and_profile(params):
    height = 1.388
    slope = model.steady_head_slope(params, height)
    # balance of the conductive column against the outlet leakage
    drop = params.Phi_h * (params.h_z0 - params.h_C) / (
        params.k * params.f_mu + params.Phi_h * height
    )
    assert slope == pytest.approx(drop, rel=1e-13)
    assert model.steady_head_profile(params, height, 0.0) == params.h_z0
    bottom = model.steady_head_profile(params, height, -height)
    assert bottom == pytest.approx(1162.34, rel=1e-4), (
        "published bottom head for the benchmark pod"
    )


def test_extract_q0_affine_field(params):
    nodes = cylinder_nodes(1.0, 0.6, 3)
    _, mean_nn = nearest_neighbor_stats(nodes)
    from percopod.collocation import CollocationBasis, fit_coefficients

    basis = CollocationBasis(
        RadialKernel("multiquadric", shape_from_spacing("multiquadric", mean_nn)),
        PolyBasis(1),
        nodes,
    )
    slope = 1234.5
    coeffs = fit_coefficients(basis, params.h_z0 + slope * nodes.points[:, 2])
    q0 = model.extract_q0(coeffs, basis, params)
    assert q0 == pytest.approx(-params.k * params.f_mu * slope, rel=1e-8)
    # uniform head means no flow at all (chi = 0)
    coeffs_flat = fit_coefficients(basis, np.full(nodes.n, params.h_z0))
    assert abs(model.extract_q0(coeffs_flat, basis, params)) < 1e-6


def test_darcy_flux_component(params):
    assert model.darcy_flux_component(params, 0.0) == 0.0
    assert model.darcy_flux_component(params, -3570.0) == pytest.approx(
        params.k * params.f_mu * 3570.0, rel=1e-13
    )
    tilted = replace(params, chi=1.0)
    assert model.darcy_flux_component(tilted, 0.0) == pytest.approx(
        -params.k * params.f_mu
    )
