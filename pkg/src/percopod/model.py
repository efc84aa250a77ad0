"""Percolation physics for a single-species coffee pod.

Four coupled fields on the cylinder: hydraulic head h, liquid caffeine
concentration C, solid caffeine concentration C_s, and temperature T.
The first-order dissolution law decouples C_s analytically,

    C_s(t) = C_s(0) * exp(-alpha1 * t),

and with constant density/viscosity the head decouples from transport and
heat, so the stages run: head first, then the Darcy flux is frozen and
drives transport and heat.  Units are cm / d / Kg / J / degC throughout;
pressure only appears through an explicit conversion from head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collocation import Dirichlet, Neumann, OperatorSpec, RobinMin
from .dae import FieldSeries

#: Gravity through the head definition h = p / (rho0 g) + x3 never enters
#: the dynamics; it only matters when converting back to pressure.


@dataclass(frozen=True)
class ModelParameters:
    """Physical constants of the percolation model (cm / d / Kg / J / degC).

    Defaults describe a standard espresso pod: 6 bar inlet head at 88 degC
    driving hot water through a puck of radius 3 cm and height 1.388 cm.
    """

    p_z0: float = 6.0  # inlet pressure, bar (reporting only)
    T_z0: float = 88.0  # inlet temperature, degC
    eps: float = 0.305  # porosity
    k: float = 1.8282  # hydraulic conductivity, cm/d
    t_bar: float = 2.3148e-4  # nominal brew duration, d (20 s)
    rho0: float = 0.01  # density scale entering only unit conversions
    h_z0: float = 6118.3  # inlet hydraulic head, cm
    alpha1: float = 3184.9  # dissolution rate, 1/d
    S0: float = 1e-5  # specific storage, 1/cm
    betaT1: float = 10.0  # transverse dispersivity, cm
    betaL1: float = 100.0  # longitudinal dispersivity, cm
    D1: float = 0.864  # molecular diffusion, cm^2/d
    rhoc: float = 4.18e-3  # liquid volumetric heat capacity, J/(cm^3 degC)
    rhoscs: float = 3.184e-3  # solid volumetric heat capacity, J/(cm^3 degC)
    lam: float = 432.0  # thermal conductivity, J/(d cm degC)
    f_mu: float = 1.0  # viscosity relation factor
    chi: float = 0.0  # buoyancy coupling coefficient
    Phi_h: float = 5.616  # outlet head-transfer coefficient, 1/d
    Phi_1: float = 259200.0  # outlet mass-transfer coefficient, cm/d
    T0: float = 70.0  # initial pod temperature, degC
    C10s: float = 0.01254  # initial solid caffeine, Kg/L
    h_C: float = 0.0  # outlet head threshold, cm
    C_1C: float = 0.0  # outlet concentration threshold, Kg/L

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"porosity must lie in (0, 1), got {self.eps}")
        positive = (
            "k", "t_bar", "alpha1", "S0", "D1", "rhoc", "rhoscs", "lam", "f_mu", "C10s",
        )
        for name in positive:
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        nonnegative = ("betaT1", "betaL1", "Phi_h", "Phi_1")
        for name in nonnegative:
            if getattr(self, name) < 0.0:
                raise ValueError(
                    f"{name} must be non-negative, got {getattr(self, name)}"
                )

    @property
    def eps_s(self):
        """Solid volume fraction 1 - eps."""
        return 1.0 - self.eps


@dataclass(frozen=True)
class AlphaCoefficients:
    """Quadratic response surface for a dissolution rate in (T, p):

    alpha = A0 + a T + b p + c T^2 + d p^2 + f T p + l T^2 p + m T p^2.
    """

    A0: float = 0.0
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    f: float = 0.0
    l: float = 0.0
    m: float = 0.0


def alpha_rate(coeffs, p, T):
    """Evaluate the dissolution-rate response surface at pressure p and
    temperature T."""
    return (
        coeffs.A0
        + coeffs.a * T
        + coeffs.b * p
        + coeffs.c * T * T
        + coeffs.d * p * p
        + coeffs.f * T * p
        + coeffs.l * T * T * p
        + coeffs.m * T * p * p
    )


def solid_concentration(c10s, alpha1, t):
    """Exact solid caffeine concentration c10s * exp(-alpha1 * t), t in days."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("time must be non-negative")
    out = c10s * np.exp(-alpha1 * t)
    return float(out) if out.ndim == 0 else out


def reaction_rate_liquid(params, t):
    """Caffeine release into the liquid per bulk volume, alpha1 eps_s C_s(t)."""
    return params.alpha1 * params.eps_s * solid_concentration(
        params.C10s, params.alpha1, t
    )


def reaction_rate_solid(params, t):
    """Solid-side counterpart; the two balance to zero by construction."""
    return -reaction_rate_liquid(params, t)


def dissolution_horizon(params, final_value):
    """Time (days) at which the solid concentration decays to ``final_value``."""
    if not 0.0 < final_value < params.C10s:
        raise ValueError(
            f"final value must lie in (0, {params.C10s}), got {final_value}"
        )
    return float(np.log(params.C10s / final_value) / params.alpha1)


def pressure_from_head(head, x3, rho_g):
    """Convert head to pressure via p = (h - x3) * rho_g.

    ``rho_g`` is the explicit weight density (pressure per length) of the
    working fluid in whatever pressure unit the caller wants back.
    """
    return (np.asarray(head, dtype=float) - np.asarray(x3, dtype=float)) * rho_g


def dispersion_tensor(params, q, bear_convention=False):
    """Hydrodynamic dispersion for Darcy flux q (a 3-vector).

    Isotropic part eps D1 + betaT |q|; the flow-aligned part uses
    (betaL + betaT) q q^T / |q| by default, or the textbook
    (betaL - betaT) combination when ``bear_convention`` is set.
    """
    q = np.asarray(q, dtype=float)
    speed = float(np.linalg.norm(q))
    D = (params.eps * params.D1 + params.betaT1 * speed) * np.eye(3)
    if speed > 0.0:
        combo = (
            params.betaL1 - params.betaT1
            if bear_convention
            else params.betaL1 + params.betaT1
        )
        D += combo * np.outer(q, q) / speed
    return D


def head_problem(params):
    """Operator and boundary conditions for hydraulic head.

    S0 dh/dt - div(k f_mu grad h) = 0; fixed head on top, no-flow wall,
    and a one-sided leakage law at the outlet that only discharges while
    the head exceeds the ambient threshold.
    """
    conductivity = params.k * params.f_mu
    op = OperatorSpec(time_coeff=params.S0, diffusion=conductivity)
    bottom_normal_x3 = -1.0
    bcs = {
        "top": Dirichlet(params.h_z0),
        "lateral": Neumann(0.0),
        "bottom": RobinMin(
            phi=params.Phi_h,
            threshold=params.h_C,
            flux_offset=conductivity * params.chi * bottom_normal_x3,
        ),
    }
    return op, bcs


def darcy_flux_component(params, dh_dx3):
    """Vertical Darcy flux from the vertical head gradient,
    q3 = -k f_mu (dh/dx3 + chi)."""
    return -params.k * params.f_mu * (dh_dx3 + params.chi)


def extract_q0(head_series, basis, params):
    """Mean vertical Darcy flux over interior nodes from the final head.

    The head settles to its steady profile long before transport matters,
    so the frozen-flux stages use a single scalar q0 (negative: downward).
    """
    from .collocation import basis_gradients

    if isinstance(head_series, FieldSeries):
        coeffs = head_series.coeffs[-1]
    else:
        coeffs = np.asarray(head_series, dtype=float)
    interior = basis.nodes.interior_idx
    grads = basis_gradients(basis, basis.nodes.points[interior])
    dh_dx3 = grads[:, :, 2] @ coeffs
    return float(np.mean(darcy_flux_component(params, dh_dx3)))


def transport_problem(params, q0, bear_convention=False):
    """Operator and boundary conditions for liquid caffeine.

    eps dC/dt - div(D grad C) + q . grad C = alpha1 eps_s C_s(t) with
    q = (0, 0, q0); no dispersive flux through top and wall, one-sided
    dispersive outflow at the bottom.
    """
    q = np.array([0.0, 0.0, float(q0)])
    D = dispersion_tensor(params, q, bear_convention)

    def release(t, X):
        return np.full(len(X), reaction_rate_liquid(params, t))

    op = OperatorSpec(
        time_coeff=params.eps, diffusion=D, advection=q, source=release
    )
    bcs = {
        "top": Neumann(0.0, diffusive=True),
        "lateral": Neumann(0.0, diffusive=True),
        "bottom": RobinMin(phi=params.Phi_1, threshold=params.C_1C),
    }
    return op, bcs


def heat_problem(params, q0):
    """Operator and boundary conditions for temperature.

    (eps rho c + eps_s rho_s c_s) dT/dt - div(lambda grad T)
    + rho c q . grad T = 0; fixed inlet temperature on top, insulated
    wall and outlet.
    """
    capacity = params.eps * params.rhoc + params.eps_s * params.rhoscs
    op = OperatorSpec(
        time_coeff=capacity,
        diffusion=params.lam,
        advection=np.array([0.0, 0.0, params.rhoc * float(q0)]),
    )
    bcs = {
        "top": Dirichlet(params.T_z0),
        "lateral": Neumann(0.0, diffusive=True),
        "bottom": Neumann(0.0, diffusive=True),
    }
    return op, bcs


def initial_head(params, nodes):
    """Uniform inlet head everywhere (the pre-infusion pressurized state)."""
    return np.full(nodes.n, params.h_z0)


def initial_temperature(params, nodes):
    """Pod preheated to T0, already at inlet temperature on the top face."""
    T = np.full(nodes.n, params.T0)
    T[nodes.top_idx] = params.T_z0
    return T


def initial_concentration(params, nodes):
    """Fresh water: no dissolved caffeine anywhere."""
    return np.zeros(nodes.n)


def steady_head_slope(params, height):
    """Vertical slope s of the steady head profile h_z0 + s x3.

    Balancing conduction against outlet leakage gives
    s = Phi_h (h_z0 - h_C) / (k f_mu + Phi_h height).
    """
    conductivity = params.k * params.f_mu
    return (
        params.Phi_h
        * (params.h_z0 - params.h_C)
        / (conductivity + params.Phi_h * height)
    )


def steady_head_profile(params, height, x3):
    """Steady head at elevation x3 (x3 = 0 at the inlet, negative below)."""
    return params.h_z0 + steady_head_slope(params, height) * np.asarray(x3, dtype=float)
