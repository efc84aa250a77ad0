"""Time integration of the linearly implicit system A du/dt = b(t, u).

A is singular (boundary and constraint rows are zero), so the system is a
semi-explicit DAE.  Stepping uses BDF1 for the first step and
variable-step BDF2 afterwards; each step solves the implicit equations by
Newton iteration with the thresholded boundary branches handled as an
active set.  Since b is affine once the branches are fixed, Newton settles
in a couple of iterations.  Local error is estimated by step doubling and
the doubled (two half-step) solution is the one kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class StepFailure(RuntimeError):
    """A single implicit step did not converge."""


class IntegrationFailure(RuntimeError):
    """The adaptive loop could not reach the end time."""


@dataclass
class DaeState:
    """Accepted solution at time t, plus the history one step back that
    BDF2 needs.  ``active`` records the settled threshold branches."""

    t: float
    u: np.ndarray
    active: np.ndarray
    u_prev: np.ndarray | None = None
    dt_prev: float | None = None


@dataclass
class FieldSeries:
    """Recorded trajectory: coefficient vectors and nodal values per time."""

    times: np.ndarray
    coeffs: np.ndarray
    nodal_values: np.ndarray
    stats: dict = field(default_factory=dict)


def _solve_rowscaled(M, rhs):
    """Solve M x = rhs with rows equilibrated to unit infinity norm.

    Interior rows scale like 1/dt while boundary rows carry the physical
    flux coefficients, so raw row norms can differ by many orders of
    magnitude; equilibration keeps the factorization well behaved.
    """
    scale = np.max(np.abs(M), axis=1)
    scale[scale == 0.0] = 1.0
    return np.linalg.solve(M / scale[:, None], rhs / scale)


def consistent_initialize(system, nodal_values, t0=0.0, max_iter=25):
    """Coefficients that interpolate ``nodal_values`` at interior nodes
    while satisfying every algebraic row exactly at t0.

    Boundary rows generally override the requested nodal values there;
    the returned state is a valid starting point for :func:`integrate`.
    """
    nodal_values = np.asarray(nodal_values, dtype=float)
    nodes = system.basis.nodes
    if nodal_values.shape != (nodes.n,):
        raise ValueError(f"expected {nodes.n} nodal values, got {nodal_values.shape}")
    interior = nodes.interior_idx
    interp = system.eval_matrix[interior]

    alg_rows = np.flatnonzero(~system.diff_mask)
    base_rhs = system.const[alg_rows].copy()
    if system.source is not None:
        # Algebraic rows carry no source, so nothing to add here.
        pass

    active = system.robin_active(
        _nodal_guess(system, nodal_values)
    ) if system.robin_idx.size else np.empty(0, dtype=bool)
    for _ in range(max_iter):
        M = np.vstack([interp, system.lin[alg_rows]])
        rhs = np.concatenate([nodal_values[interior], base_rhs])
        if active.any():
            # Fold phi * (threshold - value_row @ u) into the active rows.
            local = np.searchsorted(alg_rows, system.robin_idx[active])
            M[len(interior) + local] += (
                system.robin_phi[active, None] * system.robin_values[active]
            )
            rhs[len(interior) + local] += (
                system.robin_phi[active] * system.robin_threshold[active]
            )
        try:
            u = _solve_rowscaled(M, rhs)
        except np.linalg.LinAlgError:
            # Interior interpolation can conflict with the constraints for
            # degenerate bases; keep the algebraic rows exact and satisfy
            # the interpolation conditions in the least-squares sense.
            weight = 1e8
            M[len(interior) :] *= weight
            rhs[len(interior) :] *= weight
            u = np.linalg.lstsq(M, rhs, rcond=None)[0]
        new_active = system.robin_active(u)
        if np.array_equal(new_active, active):
            break
        active = new_active
    else:
        raise IntegrationFailure("threshold branches failed to settle during init")
    residual = system.rhs(t0, u)[alg_rows]
    if np.max(np.abs(residual), initial=0.0) > 1e-6 * max(1.0, np.max(np.abs(u))):
        raise IntegrationFailure("initialization left inconsistent algebraic rows")
    return DaeState(t=float(t0), u=u, active=new_active)


def _nodal_guess(system, nodal_values):
    """Rough coefficient guess (kernel weights = nodal values won't do;
    only threshold screening needs it, via the value rows at robin nodes)."""
    # Branch flags only depend on u_hat at the robin nodes; interpolating
    # the requested nodal values gives exactly those.
    from .collocation import fit_coefficients

    return fit_coefficients(system.basis, nodal_values)


def step(system, state, dt, max_newton=12):
    """One implicit step from ``state`` by BDF1 (no history) or BDF2.

    The right-hand side is affine once the threshold branches are fixed, so
    each Newton correction lands exactly on the root of the current branch
    linearization; the iteration converges the moment the branch flags stop
    changing, which is the convergence test used here.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    t1 = state.t + dt
    if state.u_prev is None or state.dt_prev is None:
        alpha0 = 1.0
        history = -state.u
        guess = state.u.copy()
    else:
        rho = dt / state.dt_prev
        alpha0 = (1.0 + 2.0 * rho) / (1.0 + rho)
        history = -(1.0 + rho) * state.u + (rho * rho / (1.0 + rho)) * state.u_prev
        guess = state.u + rho * (state.u - state.u_prev)

    A = system.A
    a_hist = A @ (history / dt)
    v = guess
    flags = system.robin_active(v)
    for _ in range(max_newton):
        F = (alpha0 / dt) * (A @ v) + a_hist - system.rhs(t1, v)
        J = (alpha0 / dt) * A - system.rhs_jacobian(flags)
        try:
            delta = _solve_rowscaled(J, -F)
        except np.linalg.LinAlgError as exc:
            raise StepFailure(f"singular iteration matrix at t={t1}") from exc
        v = v + delta
        if not np.all(np.isfinite(v)):
            raise StepFailure(f"non-finite iterate at t={t1}")
        new_flags = system.robin_active(v)
        if np.array_equal(new_flags, flags):
            return DaeState(t=t1, u=v, active=new_flags, u_prev=state.u, dt_prev=dt)
        flags = new_flags
    raise StepFailure(f"threshold branches kept flipping at t={t1}")


def _error_norm(diff, u_ref, rtol, atol):
    scale = atol + rtol * np.abs(u_ref)
    return float(np.sqrt(np.mean((diff / scale) ** 2)))


def integrate(
    system,
    state,
    t_end,
    output_times=None,
    rtol=1e-6,
    atol=1e-8,
    dt_init=None,
    fixed_dt=None,
    max_steps=200_000,
):
    """March the system from ``state.t`` to ``t_end``.

    Adaptive by default: each step is taken whole and as two half steps,
    the difference drives acceptance and step-size selection, and the more
    accurate half-step result is kept.  The error is measured on the nodal
    field values rather than on the basis coefficients: the coefficients
    are large and nearly cancelling, so solver roundoff in them is orders
    of magnitude above the accuracy actually delivered at the nodes, and
    controlling them would pin the step size at the noise floor.
    ``fixed_dt`` disables the control (useful for convergence studies).
    ``output_times`` selects the recorded instants (hit exactly); by
    default every accepted step is recorded.

    Returns a :class:`FieldSeries`; ``stats`` reports step counts, the
    largest algebraic residual seen at accepted steps, and whether the
    threshold branches stayed consistent with the accepted solutions.
    """
    t0, span = state.t, t_end - state.t
    if span <= 0.0:
        raise ValueError(f"t_end must exceed the state time, got {t_end} <= {t0}")
    if output_times is not None:
        outputs = np.unique(np.asarray(output_times, dtype=float))
        if outputs.size and (outputs[0] < t0 - 1e-12 * span or outputs[-1] > t_end + 1e-12 * span):
            raise ValueError("output times must lie within [state.t, t_end]")
        pending = [t for t in outputs if t > t0 + 1e-12 * span]
        record_all = False
        record_t0 = bool(outputs.size) and outputs[0] <= t0 + 1e-12 * span
    else:
        pending = []
        record_all = True
        record_t0 = True

    alg_rows = np.flatnonzero(~system.diff_mask)
    times, coeffs = [], []
    stats = {
        "n_accepted": 0,
        "n_rejected": 0,
        "max_alg_residual": 0.0,
        "active_set_stable": True,
    }

    def record(s):
        times.append(s.t)
        coeffs.append(s.u.copy())

    def bookkeep(s):
        residual = system.rhs(s.t, s.u)[alg_rows]
        if residual.size:
            stats["max_alg_residual"] = max(
                stats["max_alg_residual"], float(np.max(np.abs(residual)))
            )
        if not np.array_equal(system.robin_active(s.u), s.active):
            stats["active_set_stable"] = False

    if record_t0:
        record(state)
    bookkeep(state)

    if fixed_dt is not None:
        if fixed_dt <= 0.0:
            raise ValueError(f"fixed_dt must be positive, got {fixed_dt}")
        n_steps = max(1, round(span / fixed_dt))
        grid = t0 + span * np.arange(1, n_steps + 1) / n_steps
        for t_next in grid:
            state = step(system, state, t_next - state.t)
            stats["n_accepted"] += 1
            bookkeep(state)
            if record_all or (pending and state.t >= pending[0] - 1e-12 * span):
                while pending and state.t >= pending[0] - 1e-12 * span:
                    pending.pop(0)
                record(state)
        return _pack(system, times, coeffs, stats)

    dt = dt_init if dt_init is not None else 1e-4 * span
    dt_min = 1e-13 * span
    # A spatially unstable discretization (Kansa systems can carry spurious
    # growing eigenmodes at unlucky node/shape combinations) blows up
    # *smoothly*, so step-doubling keeps accepting; cap the norm growth and
    # fail with a diagnosis instead of marching to overflow.
    blowup = 1e9 * max(1.0, float(np.max(np.abs(system.eval_matrix @ state.u))))
    for _ in range(max_steps):
        if state.t >= t_end - 1e-12 * span:
            break
        limit = pending[0] if pending else t_end
        dt = min(dt, t_end - state.t, limit - state.t)
        order = 1 if state.u_prev is None else 2
        try:
            big = step(system, state, dt)
            mid = step(system, state, 0.5 * dt)
            fine = step(system, mid, 0.5 * dt)
        except StepFailure:
            stats["n_rejected"] += 1
            dt *= 0.5
            if dt < dt_min:
                raise IntegrationFailure(f"step size underflow at t={state.t}")
            continue
        fine_nodal = system.eval_matrix @ fine.u
        diff_nodal = system.eval_matrix @ (big.u - fine.u)
        if np.max(np.abs(fine_nodal)) > blowup:
            raise IntegrationFailure(
                f"solution norm exploded at t={state.t}; the spatial "
                "discretization is likely unstable for this node cloud and "
                "shape parameter"
            )
        err = _error_norm(diff_nodal, fine_nodal, rtol, atol) / (2.0**order - 1.0)
        if err <= 1.0:
            state = fine
            stats["n_accepted"] += 1
            bookkeep(state)
            hit_output = pending and state.t >= pending[0] - 1e-12 * span
            if record_all or hit_output:
                while pending and state.t >= pending[0] - 1e-12 * span:
                    pending.pop(0)
                record(state)
            growth = 2.0 if err == 0.0 else min(2.0, 0.9 * err ** (-1.0 / (order + 1)))
            dt *= max(growth, 0.2)
        else:
            stats["n_rejected"] += 1
            dt *= max(0.2, min(0.9, 0.9 * err ** (-1.0 / (order + 1))))
            if dt < dt_min:
                raise IntegrationFailure(f"step size underflow at t={state.t}")
    else:
        raise IntegrationFailure(f"exceeded {max_steps} steps")
    return _pack(system, times, coeffs, stats)


def _pack(system, times, coeffs, stats):
    coeffs = np.asarray(coeffs) if coeffs else np.empty((0, system.size))
    nodal = coeffs @ system.eval_matrix.T
    return FieldSeries(
        times=np.asarray(times), coeffs=coeffs, nodal_values=nodal, stats=stats
    )
