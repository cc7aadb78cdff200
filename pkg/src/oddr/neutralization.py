"""Neutralize detected clusters: place a d x d mask around each cluster
center and overwrite it with a truncated-SVD reconstruction that keeps a
chosen fraction of the singular-value mass."""

from dataclasses import dataclass

import numpy as np

from .errors import MaskTooLarge, NonFiniteError
from .fragmentation import FragmentGrid, fragment_window


@dataclass(frozen=True)
class MaskRegion:
    """Axis-aligned square region, fully inside its image."""

    row0: int
    col0: int
    size: int


@dataclass(frozen=True)
class TruncationResult:
    """Retained rank and the fraction of singular-value mass it preserves."""

    rank: int
    preserved: float


def make_mask(center_window, mask_size: int, dims) -> MaskRegion:
    """Square mask centered on the window's central pixel.

    A mask that would cross the image border is shifted, not shrunk, so the
    region is always exactly mask_size x mask_size.
    """
    h, w = int(dims[0]), int(dims[1])
    d = int(mask_size)
    if d > h or d > w:
        raise MaskTooLarge(f"mask size {d} exceeds image dims ({h}, {w})")
    row0, col0, k = center_window
    center_r = row0 + k // 2
    center_c = col0 + k // 2
    top = min(max(center_r - d // 2, 0), h - d)
    leftmost = min(max(center_c - d // 2, 0), w - d)
    return MaskRegion(row0=top, col0=leftmost, size=d)


def truncate_channel(matrix, info_fraction: float):
    """Lowest-rank SVD reconstruction whose singular-value mass fraction
    reaches ``info_fraction``.

    Returns (reconstruction, TruncationResult).  The rank is minimal: for
    rank > 1 dropping the last retained singular value would fall below the
    requested fraction.  A zero matrix keeps rank 1 and is reproduced
    exactly.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise NonFiniteError("matrix contains non-finite values")
    if not 0.0 < info_fraction <= 1.0:
        raise ValueError(f"info fraction must be in (0, 1], got {info_fraction}")
    u, sigma, vt = np.linalg.svd(m, full_matrices=False)
    total = sigma.sum()
    if total == 0.0:
        return np.zeros_like(m), TruncationResult(rank=1, preserved=1.0)
    fractions = np.minimum(np.cumsum(sigma) / total, 1.0)
    fractions[-1] = 1.0  # the full sum is exactly the whole mass
    rank = int(np.searchsorted(fractions, info_fraction)) + 1
    recon = (u[:, :rank] * sigma[:rank]) @ vt[:rank]
    return recon, TruncationResult(rank=rank, preserved=float(fractions[rank - 1]))


def neutralize(
    image,
    clusters,
    grid: FragmentGrid,
    mask_size: int,
    info_fraction: float,
    mode: str = "svd",
):
    """Overwrite each cluster's mask with its per-channel reconstruction.

    Masks are applied sequentially in the given cluster order, so a later
    overlapping mask operates on already-neutralized content.  Pixels outside
    every mask are left bit-identical; an empty cluster list returns the
    input unchanged.  ``mode="mean"`` replaces each mask channel with its
    mean value instead of the SVD reconstruction (ablation baseline).
    """
    if mode not in ("svd", "mean"):
        raise ValueError(f"mode must be 'svd' or 'mean', got {mode!r}")
    img = np.asarray(image, dtype=np.float64)
    reports = []
    if not clusters:
        return img, reports
    out = img.copy()
    h, w, channels = out.shape
    for cluster in clusters:
        window = fragment_window(grid, cluster.center)
        region = make_mask(window, mask_size, (h, w))
        r0, c0, d = region.row0, region.col0, region.size
        results = []
        for ch in range(channels):
            block = out[r0 : r0 + d, c0 : c0 + d, ch]
            if mode == "svd":
                recon, result = truncate_channel(block, info_fraction)
            else:
                recon = np.full_like(block, block.mean())
                result = TruncationResult(rank=1, preserved=1.0)
            out[r0 : r0 + d, c0 : c0 + d, ch] = np.clip(recon, 0.0, 1.0)
            results.append(result)
        reports.append((region, results))
    return out, reports
