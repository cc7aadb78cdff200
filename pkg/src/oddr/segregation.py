"""Rank fragments by anomaly score, keep the top (1-c)*n as outliers, and
group them into clusters of mutually overlapping windows."""

import math
from dataclasses import dataclass

import numpy as np

from .config import DefenseConfig, RngStream
from .fragmentation import FragmentGrid
from .iforest import build_forest, score_samples


@dataclass(frozen=True)
class AnomalyReport:
    """Per-fragment scores plus the canonical ranking.

    ``ranking`` sorts fragment indices by descending score, ties broken by
    ascending index, so it is a deterministic permutation of 0..n-1.
    """

    scores: np.ndarray
    ranking: np.ndarray


@dataclass(frozen=True)
class OutlierSet:
    """The first ``threshold_rank`` entries of the ranking, in rank order."""

    members: np.ndarray
    threshold_rank: int


@dataclass(frozen=True)
class Cluster:
    """One connected component of outliers; members sorted ascending."""

    members: tuple
    center: int


def subsample_size(n: int, frac: float) -> int:
    """Per-tree subsample count: round(frac * n), clamped to at least 2."""
    return max(2, int(math.floor(frac * n + 0.5)))


def score_fragments(grid: FragmentGrid, cfg: DefenseConfig, stream: RngStream) -> AnomalyReport:
    """Build the forest over all fragment vectors and score each one."""
    n = grid.n
    if n < 2:
        raise ValueError(f"need at least 2 fragments to score, got {n}")
    s = subsample_size(n, cfg.subsample_frac)
    forest = build_forest(grid.vectors, cfg.trees, s, stream)
    scores = score_samples(forest, grid.vectors)
    ranking = np.lexsort((np.arange(n), -scores))
    return AnomalyReport(scores=scores, ranking=ranking)


def select_outliers(report: AnomalyReport, confidence: float) -> OutlierSet:
    """Top max(1, floor((1-c)*n)) ranked fragments.

    The floor is evaluated with a tiny epsilon so that exact products such
    as 0.2 * 20 = 4 are not dragged down by float representation error.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    n = len(report.scores)
    r = max(1, int(math.floor((1.0 - confidence) * n + 1e-9)))
    return OutlierSet(members=report.ranking[:r].copy(), threshold_rank=r)


def cluster_center(members, report: AnomalyReport) -> int:
    """Member with the highest score, lowest index on ties."""
    members = list(members)
    if not members:
        raise ValueError("cluster has no members")
    return min(members, key=lambda m: (-report.scores[m], m))


def cluster_outliers(
    outliers: OutlierSet, grid: FragmentGrid, min_pts: int, report: AnomalyReport
) -> list:
    """Connected components of the window-overlap graph over the outliers.

    Components smaller than ``min_pts`` are discarded; the survivors are
    ordered by descending size, then ascending center index, independent of
    member enumeration order.
    """
    # windows i, j overlap iff |grid_row_i - grid_row_j| * stride < k and
    # likewise for columns, so overlap radius in grid cells is (k-1) // stride
    radius = (grid.kernel_size - 1) // grid.stride
    member_set = set(int(m) for m in outliers.members)
    seen = set()
    clusters = []
    for m in sorted(member_set):
        if m in seen:
            continue
        component = []
        frontier = [m]
        seen.add(m)
        while frontier:
            cur = frontier.pop()
            component.append(cur)
            row, col = divmod(cur, grid.grid_cols)
            for dr in range(-radius, radius + 1):
                for dc in range(-radius, radius + 1):
                    nr, nc = row + dr, col + dc
                    if 0 <= nr < grid.grid_rows and 0 <= nc < grid.grid_cols:
                        nb = nr * grid.grid_cols + nc
                        if nb in member_set and nb not in seen:
                            seen.add(nb)
                            frontier.append(nb)
        if len(component) >= min_pts:
            clusters.append(
                Cluster(
                    members=tuple(sorted(component)),
                    center=cluster_center(component, report),
                )
            )
    clusters.sort(key=lambda c: (-len(c.members), c.center))
    return clusters
