"""Cylindrical collocation point clouds with boundary classification.

The pod occupies x1^2 + x2^2 <= R^2, -L <= x3 <= 0.  Nodes are generated
slice by slice: each horizontal disk carries a small square lattice in the
middle, optional transitional rows on superellipses, and a closing ring on
the circle itself.  The rings of the first and last slice are removed so
every node belongs to exactly one of interior / top / lateral / bottom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

INTERIOR = "interior"
TOP = "top"  # inflow face, x3 = 0
LATERAL = "lateral"  # impermeable wall, x1^2 + x2^2 = R^2
BOTTOM = "bottom"  # outflow face, x3 = -L


class GeometryError(ValueError):
    """Infeasible node-generation parameters."""


@dataclass(frozen=True)
class DiskPattern:
    """Horizontal layout of one circular slice.

    ``square_n`` x ``square_n`` lattice points fill the middle (0 disables,
    1 keeps only the center).  Each transitional row places ``arc_counts[i]``
    points on the superellipse |x|^p + |y|^p = rho^p with p =
    ``arc_exponents[i]`` and rho = ``arc_radii[i] * R``; exponents above 2
    bulge toward the square, easing the lattice-to-circle transition.  The
    final ``ring_n`` points sit exactly on the bounding circle.
    """

    square_n: int = 7
    square_half_width: float = 0.5  # fraction of the disk radius
    arc_counts: tuple = (24,)
    arc_radii: tuple = (0.85,)  # fractions of the disk radius
    arc_exponents: tuple = (2.4,)
    ring_n: int = 24

    def __post_init__(self):
        if self.square_n < 0:
            raise GeometryError(f"square_n must be >= 0, got {self.square_n}")
        if self.square_n > 1 and not 0.0 < self.square_half_width < 1.0:
            raise GeometryError(
                f"square_half_width must lie in (0, 1), got {self.square_half_width}"
            )
        if self.ring_n < 3:
            raise GeometryError(f"ring_n must be >= 3, got {self.ring_n}")
        if not (len(self.arc_counts) == len(self.arc_radii) == len(self.arc_exponents)):
            raise GeometryError("arc_counts, arc_radii and arc_exponents must align")
        for count, rho, p in zip(self.arc_counts, self.arc_radii, self.arc_exponents):
            if count < 1:
                raise GeometryError(f"arc count must be >= 1, got {count}")
            if not 0.0 < rho < 1.0:
                raise GeometryError(f"arc radius fraction must lie in (0, 1), got {rho}")
            if p < 2.0:
                raise GeometryError(f"arc exponent must be >= 2, got {p}")

    @property
    def points_per_slice(self):
        inner = self.square_n**2 + sum(self.arc_counts)
        return inner + self.ring_n


def disk_pattern(radius, pattern=DiskPattern()):
    """Node coordinates of one slice, shape (n, 2); the ring fills the
    last ``pattern.ring_n`` rows.

    Raises :class:`GeometryError` if an inner point reaches the circle or
    two points coincide.
    """
    if radius <= 0.0:
        raise GeometryError(f"radius must be positive, got {radius}")
    groups = []
    if pattern.square_n == 1:
        groups.append(np.zeros((1, 2)))
    elif pattern.square_n > 1:
        w = pattern.square_half_width * radius
        ticks = np.linspace(-w, w, pattern.square_n)
        xx, yy = np.meshgrid(ticks, ticks)
        groups.append(np.column_stack([xx.ravel(), yy.ravel()]))
    for count, rho_frac, p in zip(
        pattern.arc_counts, pattern.arc_radii, pattern.arc_exponents
    ):
        rho = rho_frac * radius
        # Staggered against the ring so neighbours interleave.
        theta = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        cos, sin = np.cos(theta), np.sin(theta)
        x = rho * np.sign(cos) * np.abs(cos) ** (2.0 / p)
        y = rho * np.sign(sin) * np.abs(sin) ** (2.0 / p)
        groups.append(np.column_stack([x, y]))
    theta = 2.0 * np.pi * np.arange(pattern.ring_n) / pattern.ring_n
    ring = radius * np.column_stack([np.cos(theta), np.sin(theta)])

    inner = np.vstack(groups) if groups else np.empty((0, 2))
    if inner.size:
        r_inner = np.hypot(inner[:, 0], inner[:, 1])
        if np.max(r_inner) >= radius * (1.0 - 1e-9):
            raise GeometryError(
                "inner pattern reaches the bounding circle; "
                "shrink the lattice or the transitional rows"
            )
    points = np.vstack([inner, ring])
    if len(points) > 1:
        dist, _ = cKDTree(points).query(points, k=2)
        if np.min(dist[:, 1]) <= 1e-12 * radius:
            raise GeometryError("slice pattern contains coincident points")
    return points


@dataclass(frozen=True)
class NodeSet:
    """An immutable cloud of collocation nodes on the cylinder.

    ``interior_idx``, ``top_idx``, ``lateral_idx`` and ``bottom_idx``
    partition ``range(n)``.  ``normals`` holds outward unit normals on
    boundary nodes and zero rows on interior ones.
    """

    points: np.ndarray
    interior_idx: np.ndarray
    top_idx: np.ndarray
    lateral_idx: np.ndarray
    bottom_idx: np.ndarray
    normals: np.ndarray
    radius: float
    height: float

    def __post_init__(self):
        points = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        normals = np.ascontiguousarray(np.asarray(self.normals, dtype=float))
        idx = {
            "interior_idx": np.asarray(self.interior_idx, dtype=np.intp),
            "top_idx": np.asarray(self.top_idx, dtype=np.intp),
            "lateral_idx": np.asarray(self.lateral_idx, dtype=np.intp),
            "bottom_idx": np.asarray(self.bottom_idx, dtype=np.intp),
        }
        if points.ndim != 2 or points.shape[1] != 3:
            raise GeometryError(f"points must have shape (n, 3), got {points.shape}")
        if normals.shape != points.shape:
            raise GeometryError("normals must match points in shape")
        merged = np.sort(np.concatenate(list(idx.values())))
        if not np.array_equal(merged, np.arange(len(points))):
            raise GeometryError("index sets must partition range(n)")
        boundary = np.concatenate(
            [idx["top_idx"], idx["lateral_idx"], idx["bottom_idx"]]
        )
        if boundary.size:
            norms = np.linalg.norm(normals[boundary], axis=1)
            if not np.allclose(norms, 1.0, atol=1e-12):
                raise GeometryError("boundary normals must be unit vectors")
        for name, arr in idx.items():
            object.__setattr__(self, name, arr)
        for arr in (points, normals) + tuple(idx.values()):
            arr.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "normals", normals)

    @property
    def n(self):
        return len(self.points)

    @property
    def boundary_idx(self):
        return np.sort(
            np.concatenate([self.top_idx, self.lateral_idx, self.bottom_idx])
        )

    def classes(self):
        """Per-node class labels as an object array of strings."""
        labels = np.empty(self.n, dtype=object)
        labels[self.interior_idx] = INTERIOR
        labels[self.top_idx] = TOP
        labels[self.lateral_idx] = LATERAL
        labels[self.bottom_idx] = BOTTOM
        return labels


def cylinder_nodes(radius, height, n_slices, pattern=DiskPattern()):
    """Stack ``n_slices`` disk patterns from x3 = 0 down to x3 = -height.

    The rings of the first and last slice are deleted so face nodes are
    classified top/bottom and only intermediate rings become lateral nodes.
    """
    if radius <= 0.0 or height <= 0.0:
        raise GeometryError(
            f"radius and height must be positive, got {radius}, {height}"
        )
    if n_slices < 2:
        raise GeometryError(f"need at least 2 slices, got {n_slices}")
    slice_pts = disk_pattern(radius, pattern)
    inner = slice_pts[: len(slice_pts) - pattern.ring_n]
    if inner.size == 0 and n_slices == 2:
        raise GeometryError("ring-only pattern with 2 slices leaves no nodes")
    levels = np.linspace(0.0, -height, n_slices)

    points, classes = [], []
    for k, x3 in enumerate(levels):
        face = k == 0 or k == n_slices - 1
        keep = inner if face else slice_pts
        n_keep = len(keep)
        if n_keep == 0:
            continue
        points.append(np.column_stack([keep, np.full(n_keep, x3)]))
        if k == 0:
            classes.extend([TOP] * n_keep)
        elif k == n_slices - 1:
            classes.extend([BOTTOM] * n_keep)
        else:
            classes.extend([INTERIOR] * len(inner) + [LATERAL] * pattern.ring_n)
    points = np.vstack(points)
    classes = np.asarray(classes, dtype=object)

    normals = np.zeros_like(points)
    top = np.flatnonzero(classes == TOP)
    lateral = np.flatnonzero(classes == LATERAL)
    bottom = np.flatnonzero(classes == BOTTOM)
    interior = np.flatnonzero(classes == INTERIOR)
    normals[top] = (0.0, 0.0, 1.0)
    normals[bottom] = (0.0, 0.0, -1.0)
    if lateral.size:
        wall = points[lateral]
        r = np.hypot(wall[:, 0], wall[:, 1])
        normals[lateral, 0] = wall[:, 0] / r
        normals[lateral, 1] = wall[:, 1] / r
    return NodeSet(
        points=points,
        interior_idx=interior,
        top_idx=top,
        lateral_idx=lateral,
        bottom_idx=bottom,
        normals=normals,
        radius=float(radius),
        height=float(height),
    )


def nearest_neighbor_stats(nodes):
    """(min, mean) nearest-neighbour distance of a NodeSet or (n, d) array."""
    pts = nodes.points if isinstance(nodes, NodeSet) else np.asarray(nodes, dtype=float)
    if len(pts) < 2:
        raise ValueError("need at least two nodes for neighbour statistics")
    dist, _ = cKDTree(pts).query(pts, k=2)
    nearest = dist[:, 1]
    return float(np.min(nearest)), float(np.mean(nearest))
