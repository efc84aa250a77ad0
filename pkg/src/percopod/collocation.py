"""Kansa-type collocation: ansatz, operator rows and system assembly.

The trial function is

    u_hat(t, x) = sum_i  u_i(t) * phi(|x - x_i|)  +  sum_l  u_{n+l}(t) * P_l(x)

with one kernel per node plus a low-degree monomial tail.  Interior nodes
carry the PDE

    tau * du/dt - div(D grad u) + a . grad u + c u = f,

boundary nodes carry their boundary condition, and the monomial tail is
balanced by orthogonality constraints sum_i P_l(x_i) u_i = 0.  Assembly
produces the linearly implicit system

    A  du/dt = b(t, u),

where A keeps interpolation rows at interior nodes and zero rows at
boundary/constraint positions, and b collects the (affine, except for
threshold fluxes) right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .kernels import PolyBasis, RadialKernel
from .nodes import BOTTOM, LATERAL, TOP, NodeSet


class AssemblyError(ValueError):
    """Inconsistent problem data at assembly time."""


@dataclass(frozen=True)
class OperatorSpec:
    """Coefficients of  tau du/dt - div(D grad u) + a . grad u + c u = f.

    ``diffusion`` may be a scalar, a 3x3 tensor, or a callable x -> 3x3
    tensor; for spatially varying tensors ``diffusion_div`` must supply the
    row-wise divergence of D (a vector, or a callable x -> vector).
    ``source`` maps (t, X) with X of shape (n, 3) to n values.
    """

    time_coeff: float = 1.0
    diffusion: object = 0.0
    advection: object = None
    diffusion_div: object = None
    reaction: float = 0.0
    source: Callable | None = None


@dataclass(frozen=True)
class Dirichlet:
    """u = value."""

    value: float


@dataclass(frozen=True)
class Neumann:
    """grad u . n = value, or (D grad u) . n = value when ``diffusive``."""

    value: float = 0.0
    diffusive: bool = False


@dataclass(frozen=True)
class RobinMin:
    """(D grad u) . n + flux_offset = phi * min(threshold - u, 0).

    A one-sided outflow law: as long as u stays at or below the threshold
    the condition degenerates to a weighted no-flow condition; once u
    exceeds it, flux proportional to the excess leaves the domain.
    """

    phi: float
    threshold: float = 0.0
    flux_offset: float = 0.0


@dataclass(frozen=True)
class CollocationBasis:
    """Kernel + optional monomial tail tied to a fixed node set."""

    kernel: RadialKernel
    poly: PolyBasis | None
    nodes: NodeSet

    @property
    def n(self):
        return self.nodes.n

    @property
    def m(self):
        return self.poly.count if self.poly is not None else 0

    @property
    def size(self):
        return self.n + self.m


def basis_values(basis, X):
    """Values of all n + m basis functions at points X, shape (len(X), n + m)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    diff = X[:, None, :] - basis.nodes.points[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=2))
    out = np.empty((len(X), basis.size))
    out[:, : basis.n] = basis.kernel.value(r)
    if basis.m:
        out[:, basis.n :] = basis.poly.values(X)
    return out


def basis_gradients(basis, X):
    """Gradients of all basis functions, shape (len(X), n + m, 3)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    diff = X[:, None, :] - basis.nodes.points[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=2))
    g1, _ = basis.kernel.radial_factors(r)
    out = np.empty((len(X), basis.size, 3))
    out[:, : basis.n, :] = g1[:, :, None] * diff
    if basis.m:
        out[:, basis.n :, :] = basis.poly.gradients(X)
    return out


def basis_hessians(basis, X):
    """Hessians of all basis functions, shape (len(X), n + m, 3, 3)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    diff = X[:, None, :] - basis.nodes.points[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=2))
    g1, g2 = basis.kernel.radial_factors(r)
    outer = diff[:, :, :, None] * diff[:, :, None, :]
    out = np.empty((len(X), basis.size, 3, 3))
    out[:, : basis.n] = g1[:, :, None, None] * np.eye(3) + g2[:, :, None, None] * outer
    if basis.m:
        out[:, basis.n :] = basis.poly.hessians(X)
    return out


def evaluate_field(basis, coeffs, X):
    """Evaluate the trial function at arbitrary points."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.size,):
        raise ValueError(f"expected {basis.size} coefficients, got {coeffs.shape}")
    return basis_values(basis, X) @ coeffs


def _check_distinct(nodes):
    if nodes.n < 2:
        return
    dist, _ = cKDTree(nodes.points).query(nodes.points, k=2)
    if np.min(dist[:, 1]) <= 0.0:
        raise AssemblyError("node set contains duplicate points")


def build_mass_matrix(basis):
    """The singular mass matrix A: interpolation rows at interior nodes,
    zero rows at boundary and constraint positions."""
    _check_distinct(basis.nodes)
    A = np.zeros((basis.size, basis.size))
    idx = basis.nodes.interior_idx
    if idx.size:
        A[idx] = basis_values(basis, basis.nodes.points[idx])
    return A


def fit_coefficients(basis, nodal_values):
    """Coefficients interpolating given values at every node, subject to the
    monomial orthogonality constraints."""
    nodal_values = np.asarray(nodal_values, dtype=float)
    if nodal_values.shape != (basis.n,):
        raise ValueError(f"expected {basis.n} nodal values, got {nodal_values.shape}")
    _check_distinct(basis.nodes)
    M = np.zeros((basis.size, basis.size))
    M[: basis.n] = basis_values(basis, basis.nodes.points)
    if basis.m:
        M[basis.n :, : basis.n] = basis.poly.values(basis.nodes.points).T
    rhs = np.concatenate([nodal_values, np.zeros(basis.m)])
    return np.linalg.solve(M, rhs)


def _tensor_at(diffusion, x):
    D = diffusion(x) if callable(diffusion) else diffusion
    D = np.asarray(D, dtype=float)
    if D.ndim == 0:
        return float(D) * np.eye(3)
    if D.shape != (3, 3):
        raise AssemblyError(f"diffusion tensor must be 3x3, got shape {D.shape}")
    return D


def _vector_at(vec, x):
    if vec is None:
        return None
    v = np.asarray(vec(x) if callable(vec) else vec, dtype=float)
    if v.shape != (3,):
        raise AssemblyError(f"expected a 3-vector, got shape {v.shape}")
    return v


def operator_row(basis, op, x):
    """Row vector r with r @ coeffs = (L u_hat)(x) for the spatial part
    L u = -div(D grad u) + a . grad u + c u."""
    x = np.asarray(x, dtype=float)
    G = basis_gradients(basis, x[None])[0]
    H = basis_hessians(basis, x[None])[0]
    D = _tensor_at(op.diffusion, x)
    row = -np.einsum("ab,sab->s", D, H)
    drift = _vector_at(op.advection, x)
    div_d = _vector_at(op.diffusion_div, x)
    if div_d is not None:
        drift = -div_d if drift is None else drift - div_d
    elif callable(op.diffusion):
        raise AssemblyError("callable diffusion requires diffusion_div")
    if drift is not None:
        row += G @ drift
    if op.reaction:
        row += op.reaction * basis_values(basis, x[None])[0]
    return row


@dataclass(frozen=True)
class BoundaryRow:
    """One collocated boundary condition, as residual  const - linear @ u
    plus an optional thresholded term  phi * min(threshold - value_row @ u, 0)."""

    linear: np.ndarray
    const: float
    robin: tuple | None = None  # (phi, threshold, value_row)


def boundary_row(basis, bc, x, normal, diffusion=1.0):
    """Collocate one boundary condition at x with outward unit normal.

    ``diffusion`` supplies D for flux-type conditions (diffusive Neumann
    and RobinMin); plain Neumann rows ignore it.
    """
    x = np.asarray(x, dtype=float)
    normal = np.asarray(normal, dtype=float)
    if isinstance(bc, Dirichlet):
        return BoundaryRow(basis_values(basis, x[None])[0], float(bc.value))
    G = basis_gradients(basis, x[None])[0]
    if isinstance(bc, Neumann):
        direction = _tensor_at(diffusion, x) @ normal if bc.diffusive else normal
        return BoundaryRow(G @ direction, float(bc.value))
    if isinstance(bc, RobinMin):
        flux = G @ (_tensor_at(diffusion, x) @ normal)
        values = basis_values(basis, x[None])[0]
        return BoundaryRow(
            flux, -float(bc.flux_offset), (float(bc.phi), float(bc.threshold), values)
        )
    raise AssemblyError(f"unknown boundary condition {bc!r}")


@dataclass
class CollocationSystem:
    """Assembled system  A du/dt = b(t, u)  with

        b(t, u) = const + source(t) - lin @ u + thresholded boundary fluxes.

    ``diff_mask`` marks the differential rows (interior nodes); all other
    rows are algebraic.  A is exactly the interpolation rows there and zero
    elsewhere, so the constraint structure is explicit.
    """

    basis: CollocationBasis
    A: np.ndarray
    lin: np.ndarray
    const: np.ndarray
    diff_mask: np.ndarray
    eval_matrix: np.ndarray
    time_coeff: float
    source: Callable | None = None
    robin_idx: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))
    robin_phi: np.ndarray = field(default_factory=lambda: np.empty(0))
    robin_threshold: np.ndarray = field(default_factory=lambda: np.empty(0))
    robin_values: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    @property
    def size(self):
        return len(self.const)

    def rhs(self, t, u):
        b = self.const.copy()
        if self.source is not None:
            pts = self.basis.nodes.points[self.basis.nodes.interior_idx]
            b[self.basis.nodes.interior_idx] += (
                np.asarray(self.source(t, pts), dtype=float) / self.time_coeff
            )
        b -= self.lin @ u
        if self.robin_idx.size:
            vals = self.robin_values @ u
            b[self.robin_idx] += self.robin_phi * np.minimum(
                self.robin_threshold - vals, 0.0
            )
        return b

    def robin_active(self, u):
        """Branch flags of the thresholded fluxes: True where u exceeds
        the threshold (flux flowing)."""
        if not self.robin_idx.size:
            return np.empty(0, dtype=bool)
        return self.robin_values @ u > self.robin_threshold

    def rhs_jacobian(self, active):
        """d b / d u for a fixed set of branch flags."""
        J = -self.lin
        active = np.asarray(active, dtype=bool)
        if active.any():
            J = J.copy()
            rows = self.robin_idx[active]
            J[rows] -= self.robin_phi[active, None] * self.robin_values[active]
        return J

    def nodal_values(self, u):
        """Trial-function values at every node."""
        return self.eval_matrix @ u


def assemble(basis, op, boundary_specs):
    """Build the full system for one scalar field.

    ``boundary_specs`` maps the class names ``top`` / ``lateral`` /
    ``bottom`` to boundary conditions; every class present in the node set
    must be covered.
    """
    nodes = basis.nodes
    _check_distinct(nodes)
    if not op.time_coeff > 0.0:
        raise AssemblyError(f"time coefficient must be positive, got {op.time_coeff}")
    parts = {TOP: nodes.top_idx, LATERAL: nodes.lateral_idx, BOTTOM: nodes.bottom_idx}
    for name, idx in parts.items():
        if idx.size and name not in boundary_specs:
            raise AssemblyError(f"missing boundary condition for {name!r} nodes")

    size = basis.size
    lin = np.zeros((size, size))
    const = np.zeros(size)
    diff_mask = np.zeros(size, dtype=bool)
    diff_mask[nodes.interior_idx] = True

    interior = nodes.interior_idx
    if interior.size:
        X = nodes.points[interior]
        G = basis_gradients(basis, X)
        H = basis_hessians(basis, X)
        if callable(op.diffusion):
            if op.diffusion_div is None:
                raise AssemblyError("callable diffusion requires diffusion_div")
            rows = np.empty((len(X), size))
            for i, x in enumerate(X):
                rows[i] = -np.einsum("ab,sab->s", _tensor_at(op.diffusion, x), H[i])
        else:
            D = _tensor_at(op.diffusion, None)
            rows = -np.einsum("ab,nsab->ns", D, H)
        for i, x in enumerate(X):
            drift = _vector_at(op.advection, x)
            div_d = _vector_at(op.diffusion_div, x)
            if div_d is not None:
                drift = -div_d if drift is None else drift - div_d
            if drift is not None:
                rows[i] += G[i] @ drift
        if op.reaction:
            rows += op.reaction * basis_values(basis, X)
        lin[interior] = rows / op.time_coeff

    robin = []
    for name, idx in parts.items():
        if not idx.size:
            continue
        bc = boundary_specs[name]
        for j in idx:
            br = boundary_row(basis, bc, nodes.points[j], nodes.normals[j], op.diffusion)
            lin[j] = br.linear
            const[j] = br.const
            if br.robin is not None:
                robin.append((j, *br.robin))

    if basis.m:
        P = basis.poly.values(nodes.points)
        lin[basis.n :, : basis.n] = -P.T

    system = CollocationSystem(
        basis=basis,
        A=build_mass_matrix(basis),
        lin=lin,
        const=const,
        diff_mask=diff_mask,
        eval_matrix=basis_values(basis, nodes.points),
        time_coeff=float(op.time_coeff),
        source=op.source,
    )
    if robin:
        system.robin_idx = np.asarray([r[0] for r in robin], dtype=np.intp)
        system.robin_phi = np.asarray([r[1] for r in robin])
        system.robin_threshold = np.asarray([r[2] for r in robin])
        system.robin_values = np.vstack([r[3] for r in robin])
    return system


def solve_steady(system, t=0.0, max_iter=25):
    """Solve b(t, u) = 0 with the thresholded branches settled by
    active-set iteration."""
    rhs = system.const.copy()
    if system.source is not None:
        nodes = system.basis.nodes
        pts = nodes.points[nodes.interior_idx]
        rhs[nodes.interior_idx] += (
            np.asarray(system.source(t, pts), dtype=float) / system.time_coeff
        )
    active = np.zeros(system.robin_idx.size, dtype=bool)
    for _ in range(max_iter):
        M = system.lin.copy()
        r = rhs.copy()
        if active.any():
            sel = system.robin_idx[active]
            M[sel] += system.robin_phi[active, None] * system.robin_values[active]
            r[sel] += system.robin_phi[active] * system.robin_threshold[active]
        u = np.linalg.solve(M, r)
        new_active = system.robin_active(u)
        if np.array_equal(new_active, active):
            return u
        active = new_active
    raise AssemblyError("threshold branches failed to settle in steady solve")
