"""Sliding-window image fragmentation with an invertible placement map.

Windows are k x k x C, start at pixel multiples of the stride, and only
fully in-bounds windows are kept, so every fragment vector has the same
length.  Flattening is row-major over pixels with channels last.  The whole
stage is deterministic; no randomness is consumed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import KernelTooLarge
from .validation import check_image


@dataclass(frozen=True)
class Fragment:
    index: int
    grid_row: int
    grid_col: int
    vector: np.ndarray


@dataclass(frozen=True)
class FragmentGrid:
    kernel_size: int
    stride: int
    grid_rows: int
    grid_cols: int
    vectors: np.ndarray  # (n, k*k*C), row per fragment in row-major grid order
    source_shape: tuple  # (H, W, C)

    @property
    def n(self) -> int:
        return self.grid_rows * self.grid_cols

    def fragment(self, index: int) -> Fragment:
        if not 0 <= index < self.n:
            raise IndexError(f"fragment index {index} out of range [0, {self.n})")
        return Fragment(
            index=index,
            grid_row=index // self.grid_cols,
            grid_col=index % self.grid_cols,
            vector=self.vectors[index],
        )


def fragment(image, kernel_size: int, stride: int) -> FragmentGrid:
    """Deconstruct an image into partially overlapping flattened windows."""
    img = check_image(image)
    h, w, c = img.shape
    k = int(kernel_size)
    if k > h or k > w:
        raise KernelTooLarge(f"kernel {k} exceeds image dims ({h}, {w})")
    if not 1 <= stride <= k:
        raise ValueError(f"stride must satisfy 1 <= str <= k, got {stride}")
    grid_rows = (h - k) // stride + 1
    grid_cols = (w - k) // stride + 1
    windows = np.lib.stride_tricks.sliding_window_view(img, (k, k), axis=(0, 1))
    windows = windows[::stride, ::stride]  # (grid_rows, grid_cols, C, k, k)
    vectors = np.ascontiguousarray(
        windows.transpose(0, 1, 3, 4, 2).reshape(grid_rows * grid_cols, k * k * c)
    )
    return FragmentGrid(
        kernel_size=k,
        stride=int(stride),
        grid_rows=grid_rows,
        grid_cols=grid_cols,
        vectors=vectors,
        source_shape=(h, w, c),
    )


def fragment_window(grid: FragmentGrid, index: int) -> tuple:
    """(row0, col0, k) of the fragment's source window; inverts placement."""
    if not 0 <= index < grid.n:
        raise IndexError(f"fragment index {index} out of range [0, {grid.n})")
    grid_row, grid_col = divmod(index, grid.grid_cols)
    return (grid_row * grid.stride, grid_col * grid.stride, grid.kernel_size)


def windows_overlap(grid: FragmentGrid, i: int, j: int) -> bool:
    """True iff the two fragments' pixel rectangles share at least one pixel."""
    ri, ci, k = fragment_window(grid, i)
    rj, cj, _ = fragment_window(grid, j)
    return abs(ri - rj) < k and abs(ci - cj) < k
