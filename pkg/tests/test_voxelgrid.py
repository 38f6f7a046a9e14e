import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import window_mean_threshold
from sceneedit.config import FilterConfig
from sceneedit.errors import ClusterTooSmall
from sceneedit.placement.support import SupportCluster
from sceneedit.placement.voxelgrid import (
    VoxelGrid,
    build_voxel_grid,
    convolve_level,
    hierarchy,
)


def _cluster_from_points(points: np.ndarray) -> SupportCluster:
    points = np.asarray(points, dtype=np.float64)
    return SupportCluster(np.arange(len(points)), points, float(points[:, 2].mean()))


def _dense_plate_cluster(width: float, depth: float, spacing: float) -> SupportCluster:
    xs = np.arange(0.0, width + spacing / 2, spacing)
    ys = np.arange(0.0, depth + spacing / 2, spacing)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)], axis=1)
    return _cluster_from_points(pts)


def test_six_by_six_all_ones_grid():
    """A 6s x 6s dense plate with filter side 3 voxelizes to an all-ones 6x6."""
    cfg = FilterConfig(n=3)
    primary_width = 0.3          # s = 0.1
    cluster = _dense_plate_cluster(0.599, 0.599, 0.02)
    grid = build_voxel_grid(cluster, primary_width, cfg)
    assert grid.shape == (6, 6)
    assert grid.occupancy.all()
    assert grid.cell_size == pytest.approx(0.1)


def test_point_free_hole_leaves_zero_cell():
    cfg = FilterConfig(n=3)
    cluster = _dense_plate_cluster(0.599, 0.599, 0.02)
    pts = cluster.points
    # empty one interior cell: [0.2, 0.3) x [0.2, 0.3)
    keep = ~(
        (pts[:, 0] >= 0.2) & (pts[:, 0] < 0.3) & (pts[:, 1] >= 0.2) & (pts[:, 1] < 0.3)
    )
    grid = build_voxel_grid(_cluster_from_points(pts[keep]), 0.3, cfg)
    assert grid.occupancy[2, 2] == 0
    assert grid.occupancy.sum() == grid.occupancy.size - 1


def test_cluster_narrower_than_filter_raises():
    cfg = FilterConfig(n=3)
    cluster = _dense_plate_cluster(0.15, 0.599, 0.02)  # under 3 cells wide
    with pytest.raises(ClusterTooSmall):
        build_voxel_grid(cluster, 0.3, cfg)


def test_all_ones_convolution_stays_all_ones():
    cfg = FilterConfig(n=3, threshold=0.9)
    grid = VoxelGrid((0.0, 0.0), 0.1, np.ones((6, 6), dtype=np.uint8))
    out = convolve_level(grid, cfg)
    assert out.shape == (4, 4)
    assert out.occupancy.all()
    assert out.level == 1


def test_two_level_hierarchy_dimensions():
    """6x6 -> 4x4 -> 2x2 under a 3x3 filter."""
    cfg = FilterConfig(n=3, threshold=0.9)
    grid = VoxelGrid((0.0, 0.0), 0.1, np.ones((6, 6), dtype=np.uint8))
    levels = hierarchy(grid, cfg)
    assert [g.shape for g in levels] == [(6, 6), (4, 4), (2, 2)]
    assert [g.level for g in levels] == [0, 1, 2]


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("threshold", [0.5, 0.9, 1.0])
def test_convolution_matches_bruteforce_oracle(n, threshold):
    rng = np.random.default_rng(n * 100 + int(threshold * 10))
    cfg = FilterConfig(n=n, threshold=threshold)
    for _ in range(40):
        rows = rng.integers(n, 21)
        cols = rng.integers(n, 21)
        occupancy = (rng.random((rows, cols)) < 0.6).astype(np.uint8)
        grid = VoxelGrid((0.0, 0.0), 0.05, occupancy)
        out = convolve_level(grid, cfg)
        expected = window_mean_threshold(occupancy, n, threshold)
        assert np.array_equal(out.occupancy, expected)


def test_output_dimensions_formula():
    cfg = FilterConfig(n=4, threshold=0.5)
    grid = VoxelGrid((0, 0), 0.1, np.ones((9, 13), dtype=np.uint8))
    out = convolve_level(grid, cfg)
    assert out.shape == (6, 10)


@given(
    rows=st.integers(2, 16),
    cols=st.integers(2, 16),
    n=st.integers(2, 4),
    threshold=st.sampled_from([0.5, 0.9, 1.0]),
    seed=st.integers(0, 999),
)
@settings(max_examples=80, deadline=None)
def test_hierarchy_always_terminates_with_occupied_final(rows, cols, n, threshold, seed):
    rng = np.random.default_rng(seed)
    occupancy = (rng.random((rows, cols)) < 0.5).astype(np.uint8)
    if not occupancy.any():
        occupancy[0, 0] = 1
    cfg = FilterConfig(n=n, threshold=threshold)
    levels = hierarchy(VoxelGrid((0, 0), 0.1, occupancy), cfg)
    assert levels[-1].any_occupied()
    # stopping rule: either the next output is empty or the grid is small
    final = levels[-1]
    if final.shape[0] >= n and final.shape[1] >= n:
        assert not convolve_level(final, cfg).any_occupied()
    for before, after in zip(levels, levels[1:]):
        assert after.shape == (before.shape[0] - n + 1, before.shape[1] - n + 1)


def test_hierarchy_monotonicity_from_trace():
    """Every 1-cell at level L comes from a window whose mean met the
    threshold at level L-1."""
    rng = np.random.default_rng(5)
    occupancy = (rng.random((12, 12)) < 0.8).astype(np.uint8)
    cfg = FilterConfig(n=3, threshold=0.5)
    levels = hierarchy(VoxelGrid((0, 0), 0.1, occupancy), cfg)
    for before, after in zip(levels, levels[1:]):
        for i, j in np.argwhere(after.occupancy == 1):
            window = before.occupancy[i:i + 3, j:j + 3]
            assert window.mean() >= cfg.threshold
