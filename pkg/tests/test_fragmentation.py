import numpy as np
import pytest

from oddr.errors import KernelTooLarge
from oddr.fragmentation import fragment, fragment_window, windows_overlap


def _random_image(rng, h, w, c):
    return rng.random((h, w, c))


def test_operating_point_grid_shape():
    img = np.zeros((224, 224, 3))
    grid = fragment(img, 20, 10)
    # floor((224 - 20) / 10) + 1 = 21 per axis
    assert (grid.grid_rows, grid.grid_cols) == (21, 21)
    assert grid.n == 441
    assert grid.vectors.shape == (441, 20 * 20 * 3)


def test_single_window_equals_whole_image():
    rng = np.random.default_rng(0)
    img = _random_image(rng, 12, 12, 3)
    for stride in (1, 5, 12):
        grid = fragment(img, 12, stride)
        assert grid.n == 1
        assert np.array_equal(grid.vectors[0], img.reshape(-1))


def test_flattening_is_row_major_channel_last():
    rng = np.random.default_rng(1)
    img = _random_image(rng, 6, 7, 3)
    grid = fragment(img, 3, 2)
    vec = grid.vectors[1]  # grid cell (0, 1) -> window at (0, 2)
    expected = img[0:3, 2:5, :].reshape(-1)
    assert np.array_equal(vec, expected)


def test_kernel_too_large():
    img = np.zeros((16, 32, 1))
    with pytest.raises(KernelTooLarge):
        fragment(img, 17, 1)


def test_bad_stride_rejected():
    img = np.zeros((16, 16, 1))
    with pytest.raises(ValueError):
        fragment(img, 8, 0)
    with pytest.raises(ValueError):
        fragment(img, 8, 9)


def test_fragment_window_examples():
    img = np.zeros((224, 224, 3))
    grid = fragment(img, 20, 10)
    assert fragment_window(grid, 0) == (0, 0, 20)
    # index 22 on a 21-wide grid is cell (1, 1)
    assert fragment_window(grid, 22) == (10, 10, 20)
    last = grid.n - 1
    assert fragment_window(grid, last) == (10 * 20, 10 * 20, 20)


def test_fragment_window_out_of_range():
    grid = fragment(np.zeros((30, 30, 1)), 10, 10)
    with pytest.raises(IndexError):
        fragment_window(grid, grid.n)
    with pytest.raises(IndexError):
        grid.fragment(-1)


def test_windows_overlap_examples():
    grid = fragment(np.zeros((224, 224, 3)), 20, 10)
    assert windows_overlap(grid, 5, 5)  # self
    assert windows_overlap(grid, 0, 1)  # horizontally adjacent, 10 px shared
    # two grid columns apart: rectangles only touch at a zero-width boundary
    assert not windows_overlap(grid, 0, 2)
    assert windows_overlap(grid, 0, 22)  # diagonal neighbour


def test_windows_overlap_symmetric_and_reflexive():
    grid = fragment(np.zeros((60, 60, 1)), 20, 10)
    rng = np.random.default_rng(2)
    for _ in range(200):
        i, j = rng.integers(0, grid.n, size=2)
        assert windows_overlap(grid, i, i)
        assert windows_overlap(grid, i, j) == windows_overlap(grid, j, i)


def test_grid_closed_forms_over_random_tuples():
    rng = np.random.default_rng(3)
    for _ in range(100):
        h = int(rng.integers(4, 40))
        w = int(rng.integers(4, 40))
        k = int(rng.integers(1, min(h, w) + 1))
        stride = int(rng.integers(1, k + 1))
        grid = fragment(np.zeros((h, w, 1)), k, stride)
        assert grid.grid_rows == (h - k) // stride + 1
        assert grid.grid_cols == (w - k) // stride + 1
        assert grid.n == grid.grid_rows * grid.grid_cols
        assert len(grid.vectors) == grid.n


def test_reconstruction_property():
    rng = np.random.default_rng(4)
    img = _random_image(rng, 25, 31, 3)
    grid = fragment(img, 7, 3)
    k = grid.kernel_size
    for index in rng.integers(0, grid.n, size=40):
        r0, c0, _ = fragment_window(grid, int(index))
        window = grid.vectors[index].reshape(k, k, 3)
        assert np.array_equal(window, img[r0 : r0 + k, c0 : c0 + k, :])


def test_placement_is_injective():
    grid = fragment(np.zeros((50, 40, 1)), 10, 5)
    placements = {fragment_window(grid, i)[:2] for i in range(grid.n)}
    assert len(placements) == grid.n


def test_fragmentation_is_deterministic():
    rng = np.random.default_rng(5)
    img = _random_image(rng, 33, 29, 3)
    a = fragment(img, 9, 4)
    b = fragment(img, 9, 4)
    assert np.array_equal(a.vectors, b.vectors)
