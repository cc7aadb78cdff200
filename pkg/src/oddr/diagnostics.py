"""Statistical diagnostics: Mahalanobis-distance profiles of fragments and
Gaussian fragment statistics with the distribution-tolerance predicate.

The distance uses a diagonal covariance surrogate: with fragment dimension
k*k*C far above the fragment count, the full sample covariance is singular,
so each dimension is normalized by its own (floored) variance instead.  The
bi-modal separation between on-patch and off-patch fragments survives this
simplification; do not read the profile as full-covariance Mahalanobis.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroReferenceStd
from .fragmentation import FragmentGrid, fragment_window
from .neutralization import MaskRegion

VARIANCE_FLOOR = 1e-8


@dataclass(frozen=True)
class DistributionFit:
    """Per-dimension mean and floored variance over a fragment population."""

    mean: np.ndarray
    variance: np.ndarray


@dataclass(frozen=True)
class GaussianStats:
    """Per-channel mean and standard deviation."""

    mean: np.ndarray
    std: np.ndarray


def fit_fragment_distribution(fragments) -> DistributionFit:
    """Sample mean and population variance per dimension, variance floored."""
    vectors = fragments.vectors if isinstance(fragments, FragmentGrid) else np.asarray(fragments, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] < 2:
        raise ValueError("need an (n >= 2, D) fragment matrix")
    mean = vectors.mean(axis=0)
    variance = np.maximum(vectors.var(axis=0), VARIANCE_FLOOR)
    return DistributionFit(mean=mean, variance=variance)


def mahalanobis(fit: DistributionFit, x) -> float:
    """sqrt(sum_j (x_j - mean_j)^2 / variance_j) under the diagonal surrogate."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != fit.mean.shape:
        raise DimensionMismatch(f"vector has shape {x.shape}, fit expects {fit.mean.shape}")
    delta = x - fit.mean
    return float(np.sqrt(np.sum(delta * delta / fit.variance)))


def mahalanobis_profile(fit: DistributionFit, fragments) -> np.ndarray:
    """Distance of every fragment from the fitted distribution."""
    vectors = fragments.vectors if isinstance(fragments, FragmentGrid) else np.asarray(fragments, dtype=np.float64)
    if vectors.shape[1] != fit.mean.shape[0]:
        raise DimensionMismatch(
            f"fragments have dimension {vectors.shape[1]}, fit expects {fit.mean.shape[0]}"
        )
    delta = vectors - fit.mean
    return np.sqrt(np.sum(delta * delta / fit.variance, axis=1))


def _window_intersects(grid: FragmentGrid, index: int, region: MaskRegion) -> bool:
    r0, c0, k = fragment_window(grid, index)
    return (
        r0 < region.row0 + region.size
        and region.row0 < r0 + k
        and c0 < region.col0 + region.size
        and region.col0 < c0 + k
    )


def separation_gap(distances, grid: FragmentGrid, region: MaskRegion) -> float:
    """Mean distance of fragments touching ``region`` over the mean of the
    rest; 1.0 when either group is empty."""
    distances = np.asarray(distances, dtype=np.float64)
    inside = np.array([_window_intersects(grid, i, region) for i in range(grid.n)])
    if inside.all() or not inside.any():
        return 1.0
    return float(distances[inside].mean() / distances[~inside].mean())


def fragment_gaussian_stats(grid: FragmentGrid) -> GaussianStats:
    """Average the per-fragment, per-channel mean and std over all fragments."""
    k, c = grid.kernel_size, grid.source_shape[2]
    per_pixel = grid.vectors.reshape(grid.n, k * k, c)
    return GaussianStats(
        mean=per_pixel.mean(axis=1).mean(axis=0),
        std=per_pixel.std(axis=1).mean(axis=0),
    )


def region_gaussian_stats(image, region: MaskRegion) -> GaussianStats:
    """Per-channel mean and std of the pixels inside one region."""
    img = np.asarray(image, dtype=np.float64)
    block = img[region.row0 : region.row0 + region.size, region.col0 : region.col0 + region.size]
    flat = block.reshape(-1, img.shape[2])
    return GaussianStats(mean=flat.mean(axis=0), std=flat.std(axis=0))


def adaptive_tolerance_check(patch: GaussianStats, reference: GaussianStats) -> bool:
    """True iff every channel satisfies |mu - m| <= 0.5 and 1 <= sigma/std <= 2.

    The predicate mirrors the tolerance window inside which a
    distribution-matched patch is statistically inseparable from clean
    fragments.  A zero reference std makes the ratio undefined.
    """
    mu, sigma = np.atleast_1d(patch.mean), np.atleast_1d(patch.std)
    m, std = np.atleast_1d(reference.mean), np.atleast_1d(reference.std)
    if mu.shape != m.shape or sigma.shape != std.shape:
        raise DimensionMismatch("patch and reference stats have different channel counts")
    if np.any(std <= 0.0):
        raise ZeroReferenceStd("reference std must be positive")
    ratio = sigma / std
    return bool(np.all(np.abs(mu - m) <= 0.5) and np.all((1.0 <= ratio) & (ratio <= 2.0)))


def export_profile_csv(path, grid: FragmentGrid, distances) -> None:
    """Write ``fragment_index,row0,col0,distance`` rows for plotting."""
    distances = np.asarray(distances, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fragment_index", "row0", "col0", "distance"])
        for i in range(grid.n):
            r0, c0, _ = fragment_window(grid, i)
            writer.writerow([i, r0, c0, f"{distances[i]:.9g}"])
