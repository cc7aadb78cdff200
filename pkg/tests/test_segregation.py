import numpy as np
import pytest

from oddr.config import DefenseConfig, RngStream
from oddr.fragmentation import fragment
from oddr.segregation import (
    AnomalyReport,
    cluster_center,
    cluster_outliers,
    score_fragments,
    select_outliers,
    subsample_size,
)


def _report(scores):
    scores = np.asarray(scores, dtype=np.float64)
    ranking = np.lexsort((np.arange(len(scores)), -scores))
    return AnomalyReport(scores=scores, ranking=ranking)


def _grid(h=224, w=224, k=20, stride=10):
    return fragment(np.zeros((h, w, 1)), k, stride)


def test_subsample_size_examples():
    assert subsample_size(441, 0.3) == 132
    assert subsample_size(2, 0.3) == 2  # floor clamp
    assert subsample_size(10, 1.0) == 10


def test_score_fragments_deterministic_and_sized():
    rng = np.random.default_rng(0)
    img = rng.random((64, 64, 1))
    grid = fragment(img, 16, 8)
    cfg = DefenseConfig(kernel_size=16, stride=8, trees=20)
    a = score_fragments(grid, cfg, RngStream(3))
    b = score_fragments(grid, cfg, RngStream(3))
    assert len(a.scores) == grid.n
    assert np.array_equal(a.scores, b.scores)
    assert np.array_equal(a.ranking, b.ranking)
    assert sorted(a.ranking.tolist()) == list(range(grid.n))


def test_ranking_descends_with_index_tiebreak():
    report = _report([0.5, 0.9, 0.5, 0.7])
    assert report.ranking.tolist() == [1, 3, 0, 2]


def test_select_outliers_operating_point():
    report = _report(np.linspace(1.0, 0.0, 441))
    out = select_outliers(report, 0.8)
    assert out.threshold_rank == 88  # floor(0.2 * 441)
    assert out.members.tolist() == list(range(88))


def test_select_outliers_floor_clamps_to_one():
    report = _report(np.linspace(1.0, 0.0, 10))
    out = select_outliers(report, 0.99)
    assert out.threshold_rank == 1
    assert out.members.tolist() == [0]


def test_select_outliers_tie_break_by_index():
    report = _report([0.5] * 5)
    out = select_outliers(report, 0.5)
    assert out.members.tolist() == [0, 1]


def test_select_outliers_exact_products_not_dragged_down():
    # (1 - 0.8) * 20 is exactly 4 despite float representation of 0.2
    report = _report(np.linspace(1.0, 0.0, 20))
    assert select_outliers(report, 0.8).threshold_rank == 4


def test_selected_scores_dominate_rest():
    rng = np.random.default_rng(1)
    scores = rng.random(100)
    report = _report(scores)
    out = select_outliers(report, 0.7)
    members = set(out.members.tolist())
    inside = min(scores[m] for m in members)
    outside = max(scores[m] for m in range(100) if m not in members)
    assert inside >= outside


def test_cluster_center_examples():
    report = _report([0.1, 0.1, 0.1, 0.9, 0.1, 0.1, 0.1, 0.7])
    assert cluster_center([3], report) == 3
    assert cluster_center([3, 7], report) == 3
    tied = _report([0.5] * 8)
    assert cluster_center([7, 3], tied) == 3


def _outliers_from_members(members, report):
    from oddr.segregation import OutlierSet

    return OutlierSet(members=np.asarray(members), threshold_rank=len(members))


def test_small_components_are_discarded():
    grid = _grid()
    report = _report(np.linspace(1.0, 0.0, grid.n))
    # three far-apart singletons: no window overlap, all below min_pts
    members = [0, 200, 440]
    out = _outliers_from_members(members, report)
    assert cluster_outliers(out, grid, 20, report) == []


def test_patch_block_forms_single_cluster():
    grid = _grid()
    # a 38x38 patch at (90, 90) touches windows with grid rows/cols 8..12
    members = [r * 21 + c for r in range(8, 13) for c in range(8, 13)]
    scores = np.zeros(grid.n)
    for m in members:
        scores[m] = 0.9
    scores[10 * 21 + 10] = 0.95  # the center window scores highest
    report = _report(scores)
    out = _outliers_from_members(members, report)
    clusters = cluster_outliers(out, grid, 20, report)
    assert len(clusters) == 1
    assert set(clusters[0].members) == set(members)
    assert clusters[0].center == 10 * 21 + 10


def test_two_far_regions_give_two_clusters():
    grid = _grid()
    block_a = [r * 21 + c for r in range(0, 5) for c in range(0, 5)]
    block_b = [r * 21 + c for r in range(15, 20) for c in range(15, 20)]
    scores = np.zeros(grid.n)
    for m in block_a:
        scores[m] = 0.8
    for m in block_b:
        scores[m] = 0.85
    report = _report(scores)
    out = _outliers_from_members(block_a + block_b, report)
    clusters = cluster_outliers(out, grid, 20, report)
    assert len(clusters) == 2
    assert {frozenset(c.members) for c in clusters} == {
        frozenset(block_a),
        frozenset(block_b),
    }


def test_cluster_ordering_size_then_center():
    grid = _grid()
    big = [r * 21 + c for r in range(0, 6) for c in range(0, 5)]  # 30 members
    small = [r * 21 + c for r in range(15, 20) for c in range(15, 20)]  # 25
    scores = np.zeros(grid.n)
    for m in big + small:
        scores[m] = 0.5
    report = _report(scores)
    out = _outliers_from_members(big + small, report)
    clusters = cluster_outliers(out, grid, 20, report)
    assert [len(c.members) for c in clusters] == [30, 25]


def test_clustering_ignores_member_enumeration_order():
    grid = _grid()
    members = [r * 21 + c for r in range(8, 13) for c in range(8, 13)]
    scores = np.zeros(grid.n)
    for m in members:
        scores[m] = 0.9
    report = _report(scores)
    rng = np.random.default_rng(2)
    baseline = None
    for _ in range(5):
        shuffled = list(members)
        rng.shuffle(shuffled)
        clusters = cluster_outliers(_outliers_from_members(shuffled, report), grid, 20, report)
        key = [(c.members, c.center) for c in clusters]
        if baseline is None:
            baseline = key
        assert key == baseline


def test_clusters_are_disjoint_subsets_of_outliers():
    rng = np.random.default_rng(3)
    grid = _grid(h=120, w=120, k=20, stride=10)
    scores = rng.random(grid.n)
    report = _report(scores)
    out = select_outliers(report, 0.6)
    clusters = cluster_outliers(out, grid, 3, report)
    member_set = set(out.members.tolist())
    seen = set()
    for cluster in clusters:
        assert set(cluster.members) <= member_set
        assert not (set(cluster.members) & seen)
        seen |= set(cluster.members)
        assert cluster.center in cluster.members


def test_score_fragments_needs_two():
    grid = fragment(np.zeros((20, 20, 1)), 20, 20)
    with pytest.raises(ValueError):
        score_fragments(grid, DefenseConfig(), RngStream(0))
