"""Node cloud generation for the cylindrical pod."""

import numpy as np
import pytest

from percopod.nodes import (
    BOTTOM,
    INTERIOR,
    LATERAL,
    TOP,
    DiskPattern,
    GeometryError,
    NodeSet,
    cylinder_nodes,
    disk_pattern,
    nearest_neighbor_stats,
)

RADIUS = 3.0
HEIGHT = 1.388


def test_disk_pattern_counts():
    pattern = DiskPattern()
    points = disk_pattern(RADIUS, pattern)
    assert pattern.points_per_slice == 97
    assert points.shape == (97, 2)
    # last ring_n points are the boundary ring
    ring = points[-pattern.ring_n:]
    np.testing.assert_allclose(np.hypot(ring[:, 0], ring[:, 1]), RADIUS, rtol=1e-12)
    inner = points[: -pattern.ring_n]
    assert np.all(np.hypot(inner[:, 0], inner[:, 1]) < RADIUS), (
        "inner points must stay strictly inside the rim"
    )


def test_disk_pattern_no_duplicates():
    points = disk_pattern(RADIUS, DiskPattern())
    from scipy.spatial import cKDTree

    d, _ = cKDTree(points).query(points, k=2)
    assert d[:, 1].min() > 1e-6, f"closest pair {d[:, 1].min()}"


def test_benchmark_cloud_counts():
    nodes = cylinder_nodes(RADIUS, HEIGHT, 6)
    assert nodes.n == 534
    assert len(nodes.interior_idx) == 292
    assert len(nodes.top_idx) == 73
    assert len(nodes.lateral_idx) == 96
    assert len(nodes.bottom_idx) == 73


def test_face_slices_drop_the_ring():
    nodes = cylinder_nodes(RADIUS, HEIGHT, 6)
    top = nodes.points[nodes.top_idx]
    np.testing.assert_array_equal(top[:, 2], np.zeros(len(top)))
    assert np.all(np.hypot(top[:, 0], top[:, 1]) < RADIUS), (
        "top face keeps only the interior disk points"
    )
    bottom = nodes.points[nodes.bottom_idx]
    np.testing.assert_allclose(bottom[:, 2], -HEIGHT, rtol=1e-12)


def test_classes_partition_and_labels():
    nodes = cylinder_nodes(RADIUS, HEIGHT, 6)
    merged = np.concatenate(
        [nodes.interior_idx, nodes.top_idx, nodes.lateral_idx, nodes.bottom_idx]
    )
    np.testing.assert_array_equal(np.sort(merged), np.arange(nodes.n))
    labels = nodes.classes()
    assert labels[nodes.interior_idx[0]] == INTERIOR
    assert labels[nodes.top_idx[0]] == TOP
    assert labels[nodes.lateral_idx[0]] == LATERAL
    assert labels[nodes.bottom_idx[0]] == BOTTOM


def test_normals():
    nodes = cylinder_nodes(RADIUS, HEIGHT, 6)
    np.testing.assert_array_equal(
        nodes.normals[nodes.top_idx], np.tile([0.0, 0.0, 1.0], (73, 1))
    )
    np.testing.assert_array_equal(
        nodes.normals[nodes.bottom_idx], np.tile([0.0, 0.0, -1.0], (73, 1))
    )
    lateral = nodes.normals[nodes.lateral_idx]
    np.testing.assert_allclose(np.linalg.norm(lateral, axis=1), 1.0, rtol=1e-12)
    np.testing.assert_array_equal(lateral[:, 2], np.zeros(96))
    # outward: aligned with the point's own (x1, x2)
    pts = nodes.points[nodes.lateral_idx]
    dots = np.sum(lateral[:, :2] * pts[:, :2] / RADIUS, axis=1)
    assert np.all(dots > 0.99), "lateral normals must point outward"


def test_slices_are_vertically_aligned():
    nodes = cylinder_nodes(RADIUS, HEIGHT, 6)
    levels = np.unique(np.round(nodes.points[:, 2], 12))
    assert len(levels) == 6
    np.testing.assert_allclose(np.diff(np.sort(levels)), HEIGHT / 5.0, rtol=1e-12)
    full = nodes.points[np.isclose(nodes.points[:, 2], levels[1])]
    again = nodes.points[np.isclose(nodes.points[:, 2], levels[2])]
    np.testing.assert_allclose(
        np.sort(full[:, :2], axis=0), np.sort(again[:, :2], axis=0), atol=1e-12
    )


def test_nearest_neighbor_stats_benchmark():
    nodes = cylinder_nodes(RADIUS, HEIGHT, 6)
    d_min, d_mean = nearest_neighbor_stats(nodes)
    assert abs(d_min - HEIGHT / 5.0) < 1e-12, (
        f"closest spacing should be the slice gap, got {d_min}"
    )
    assert abs(d_mean - HEIGHT / 5.0) < 1e-12, (
        f"nearly all nearest neighbours are vertical, got mean {d_mean}"
    )


def test_nearest_neighbor_stats_square():
    pts = np.array(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]
    )
    assert nearest_neighbor_stats(pts) == (1.0, 1.0)


def test_two_slice_cylinder():
    # both slices are faces, which drop the rim ring, so there are no
    # lateral nodes at all
    nodes = cylinder_nodes(1.0, 0.4, 2)
    assert len(nodes.interior_idx) == 0, "two slices leave no interior nodes"
    assert len(nodes.lateral_idx) == 0
    assert nodes.n == 2 * 73


def test_ring_only_pattern():
    pattern = DiskPattern(square_n=0, arc_counts=(), arc_radii=(), arc_exponents=(),
                          ring_n=8)
    points = disk_pattern(2.0, pattern)
    assert points.shape == (8, 2)
    np.testing.assert_allclose(np.hypot(points[:, 0], points[:, 1]), 2.0, rtol=1e-12)


def test_geometry_validation():
    with pytest.raises(GeometryError):
        DiskPattern(ring_n=2)
    with pytest.raises(GeometryError):
        DiskPattern(arc_radii=(1.2,), arc_counts=(8,), arc_exponents=(2.4,))
    with pytest.raises(GeometryError):
        DiskPattern(arc_exponents=(1.5,), arc_counts=(8,), arc_radii=(0.8,))
    with pytest.raises(GeometryError):
        DiskPattern(arc_counts=(8, 8), arc_radii=(0.5,), arc_exponents=(2.4, 2.4))
    with pytest.raises(GeometryError):
        cylinder_nodes(RADIUS, HEIGHT, 1)
    with pytest.raises(GeometryError):
        cylinder_nodes(-1.0, HEIGHT, 6)
    with pytest.raises(GeometryError):
        # half-width 1: square corners reach the unit circle
        disk_pattern(1.0, DiskPattern(square_half_width=1.0))


def test_nodeset_validation():
    points = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    normals = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    nodes = NodeSet(
        points=points,
        interior_idx=np.array([], dtype=int),
        top_idx=np.array([0]),
        lateral_idx=np.array([], dtype=int),
        bottom_idx=np.array([1]),
        normals=normals,
        radius=1.0,
        height=1.0,
    )
    assert nodes.n == 2
    with pytest.raises(GeometryError):
        NodeSet(
            points=points,
            interior_idx=np.array([0]),  # overlaps top
            top_idx=np.array([0]),
            lateral_idx=np.array([], dtype=int),
            bottom_idx=np.array([1]),
            normals=normals,
            radius=1.0,
            height=1.0,
        )
    bad_normals = normals.copy()
    bad_normals[0] = [0.0, 0.0, 2.0]
    with pytest.raises(GeometryError):
        NodeSet(
            points=points,
            interior_idx=np.array([], dtype=int),
            top_idx=np.array([0]),
            lateral_idx=np.array([], dtype=int),
            bottom_idx=np.array([1]),
            normals=bad_normals,
            radius=1.0,
            height=1.0,
        )


def test_points_are_read_only():
    nodes = cylinder_nodes(RADIUS, HEIGHT, 6)
    with pytest.raises(ValueError):
        nodes.points[0, 0] = 99.0
