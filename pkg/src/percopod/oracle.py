"""Independent 1-D cross-check of the percolation physics.

All three distributed fields are radially uniform in the pod model
(axial flow, insulated wall), so their exact solutions depend on x3 only.
This module solves the same equations on a vertical line with classic
second-order central differences (advection included: the dispersion term
dominates so strongly here that the cell Peclet number stays orders of
magnitude below the oscillation threshold) and implicit Euler in time --
a method family disjoint from RBF collocation, so agreement between the
two is meaningful evidence.

The dissolution ODE is included as a 0-D field for completeness.  Its
source enters the transport equation through exact per-step averaging of
the exponential, which makes the uniform no-flow reduction reproduce the
closed-form caffeine balance to rounding error rather than to O(dt).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .model import dispersion_tensor, solid_concentration

FIELDS = ("head", "heat", "transport", "solid")


@dataclass(frozen=True)
class Grid1D:
    """Uniform vertical grid from x3 = 0 down to x3 = -depth."""

    n: int = 201
    depth: float = 1.388

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need at least 3 grid points, got {self.n}")
        if self.depth <= 0.0:
            raise ValueError(f"depth must be positive, got {self.depth}")

    @property
    def x3(self):
        return np.linspace(0.0, -self.depth, self.n)

    @property
    def spacing(self):
        return self.depth / (self.n - 1)


@dataclass(frozen=True)
class OracleResult:
    times: np.ndarray
    values: np.ndarray  # (len(times), n)
    x3: np.ndarray


def profile_at(result, x3, time_index=-1):
    """Interpolate one recorded profile at elevations x3 (<= 0)."""
    values = result.values[time_index]
    return np.interp(np.asarray(x3, dtype=float), result.x3[::-1], values[::-1])


@dataclass
class _LineProblem:
    tau: float
    diffusion: float
    w: float  # downward advective speed in the depth coordinate
    top_dirichlet: float | None  # None means no-flow
    robin_phi: float | None  # bottom: None means no-flow
    robin_threshold: float = 0.0
    flux_offset: float = 0.0
    init: float = 0.0


def _line_problem(field, params, q0):
    if field == "head":
        return _LineProblem(
            tau=params.S0,
            diffusion=params.k * params.f_mu,
            w=0.0,
            top_dirichlet=params.h_z0,
            robin_phi=params.Phi_h,
            robin_threshold=params.h_C,
            flux_offset=params.k * params.f_mu * params.chi * -1.0,
            init=params.h_z0,
        )
    if q0 is None:
        raise ValueError(f"field {field!r} needs the frozen Darcy flux q0")
    if field == "heat":
        return _LineProblem(
            tau=params.eps * params.rhoc + params.eps_s * params.rhoscs,
            diffusion=params.lam,
            w=-params.rhoc * q0,
            top_dirichlet=params.T_z0,
            robin_phi=None,
            init=params.T0,
        )
    if field == "transport":
        D = dispersion_tensor(params, np.array([0.0, 0.0, q0]))
        return _LineProblem(
            tau=params.eps,
            diffusion=float(D[2, 2]),
            w=-q0,
            top_dirichlet=None,
            robin_phi=params.Phi_1,
            robin_threshold=params.C_1C,
            init=0.0,
        )
    raise ValueError(f"unknown field {field!r}; expected one of {FIELDS}")


def _assemble_banded(prob, grid, dt, active):
    """Banded matrix (ab-format, bandwidths (2, 2)) and fixed rhs parts.

    Diffusion and advection both use central differences; with the flux
    boundary rows on second-order one-sided stencils the whole scheme is
    second order in space.
    """
    n, h = grid.n, grid.spacing
    D, w, tau = prob.diffusion, prob.w, prob.tau
    main = np.full(n, tau / dt + 2.0 * D / (h * h))
    s1 = np.full(n, -D / (h * h) + w / (2.0 * h))
    l1 = np.full(n, -D / (h * h) - w / (2.0 * h))
    s2 = np.zeros(n)
    l2 = np.zeros(n)
    rhs_fixed = np.zeros(n)

    if prob.top_dirichlet is not None:
        main[0], s1[0], s2[0] = 1.0, 0.0, 0.0
        rhs_fixed[0] = prob.top_dirichlet
    else:
        main[0], s1[0], s2[0] = -3.0, 4.0, -1.0  # du/d(depth) = 0
        rhs_fixed[0] = 0.0

    flux = D / (2.0 * h)  # one-sided (D du/d(depth)) at the last node
    if prob.robin_phi is None or not active:
        main[-1], l1[-1], l2[-1] = 3.0 * flux, -4.0 * flux, flux
        rhs_fixed[-1] = -prob.flux_offset
    else:
        main[-1], l1[-1], l2[-1] = 3.0 * flux + prob.robin_phi, -4.0 * flux, flux
        rhs_fixed[-1] = prob.robin_phi * prob.robin_threshold - prob.flux_offset

    ab = np.zeros((5, n))
    ab[0, 2:] = s2[:-2]
    ab[1, 1:] = s1[:-1]
    ab[2, :] = main
    ab[3, :-1] = l1[1:]
    ab[4, :-2] = l2[2:]
    return ab, rhs_fixed


def fd_solve(
    field,
    params,
    t_end,
    q0=None,
    grid=None,
    dt=None,
    output_times=None,
    max_branch_iter=10,
):
    """March one field on the line (or the dissolution ODE) to ``t_end``.

    ``output_times`` are hit exactly by shortening substeps; by default the
    initial and final profiles are recorded.  Returns an
    :class:`OracleResult` with one row of values per recorded time.
    """
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if dt is None:
        dt = params.t_bar / 2000.0
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if output_times is None:
        checkpoints = np.array([0.0, t_end])
    else:
        checkpoints = np.unique(np.asarray(output_times, dtype=float))
        if checkpoints[0] < 0.0 or checkpoints[-1] > t_end * (1 + 1e-12):
            raise ValueError("output times must lie within [0, t_end]")
        if checkpoints[-1] < t_end:
            checkpoints = np.append(checkpoints, t_end)

    if field == "solid":
        return _solve_solid(params, dt, checkpoints)
    grid = grid if grid is not None else Grid1D(depth=1.388)
    prob = _line_problem(field, params, q0)

    interior = slice(1, grid.n - 1)
    u = np.full(grid.n, prob.init)
    times, rows = [], []
    if checkpoints[0] == 0.0:
        times.append(0.0)
        rows.append(u.copy())
        checkpoints = checkpoints[1:]

    active = prob.robin_phi is not None and u[-1] > prob.robin_threshold
    t = 0.0
    alpha1, release = params.alpha1, params.eps_s * params.C10s
    has_source = field == "transport"
    for target in checkpoints:
        n_sub = max(1, int(np.ceil((target - t) / dt - 1e-9)))
        h_sub = (target - t) / n_sub
        for m in range(n_sub):
            t_next = t + h_sub
            rhs_time = np.zeros(grid.n)
            rhs_time[interior] = (prob.tau / h_sub) * u[interior]
            if has_source:
                # Exact step average of alpha1 eps_s C10s exp(-alpha1 t).
                avg = release * (
                    np.exp(-alpha1 * t) - np.exp(-alpha1 * t_next)
                ) / h_sub
                rhs_time[interior] += avg
            for _ in range(max_branch_iter):
                ab, rhs_fixed = _assemble_banded(prob, grid, h_sub, active)
                u_new = solve_banded((2, 2), ab, rhs_fixed + rhs_time)
                now_active = (
                    prob.robin_phi is not None and u_new[-1] > prob.robin_threshold
                )
                if now_active == active:
                    break
                active = now_active
            else:
                raise RuntimeError(f"outflow branch kept flipping at t={t_next}")
            u = u_new
            t = t_next
        times.append(t)
        rows.append(u.copy())
    return OracleResult(
        times=np.asarray(times), values=np.asarray(rows), x3=grid.x3
    )


def _solve_solid(params, dt, checkpoints):
    """Implicit Euler for dC_s/dt = -alpha1 C_s, one value per row."""
    u = params.C10s
    times, rows = [], []
    if checkpoints[0] == 0.0:
        times.append(0.0)
        rows.append([u])
        checkpoints = checkpoints[1:]
    t = 0.0
    for target in checkpoints:
        n_sub = max(1, int(np.ceil((target - t) / dt - 1e-9)))
        h_sub = (target - t) / n_sub
        for _ in range(n_sub):
            u = u / (1.0 + params.alpha1 * h_sub)
            t += h_sub
        times.append(t)
        rows.append([u])
    return OracleResult(
        times=np.asarray(times), values=np.asarray(rows), x3=np.zeros(1)
    )


def caffeine_balance(params, t):
    """Closed-form uniform no-flow liquid concentration
    (eps_s / eps) * C10s * (1 - exp(-alpha1 t))."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("time must be non-negative")
    out = params.eps_s / params.eps * params.C10s * (1.0 - np.exp(-params.alpha1 * t))
    return float(out) if out.ndim == 0 else out
