"""From-scratch isolation forest: randomized binary partition trees whose
short paths expose anomalies.

Trees split a uniformly random attribute at a uniformly random value between
that attribute's min and max, recursing until a height cap, a singleton, or
an all-identical subset.  A query's path length is the number of edges to
its terminating external node plus the average unsuccessful-search length
for that node's population, and the forest-mean path length is mapped to an
anomaly score in (0, 1] via ``2**(-mean / c(s))`` with ``s`` the per-tree
subsample size.

Trees are stored as flat arrays (feature, threshold, left, right, leaf_size)
and built/traversed by numba kernels so a full defend pass stays within the
per-sample latency budget on CPU.

Randomness contract (replayable): tree ``t`` of a forest draws from
``stream.child(t)`` the subsample indices (``choice`` without replacement),
then ``2**l_max`` attribute draws (``integers(0, D)``), then ``2**(l_max+1)``
unit uniforms.  Each split consumes one attribute draw and one uniform for
the split value; when the drawn attribute is constant at that node, one
extra uniform picks uniformly among the non-constant attributes (leaf if
there are none).
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .config import RngStream
from .errors import EmptyDataset, SubsampleTooLarge, SubsampleTooSmall
from .validation import check_points

# Euler-Mascheroni constant as used by the harmonic-number estimate.
EULER_GAMMA = 0.57721567


def avg_unsuccessful_path(n) -> float:
    """Average unsuccessful-search path length c(n) in a BST of n items.

    Uses the harmonic-number estimate H(i) = ln(i) + 0.57721567; returns 0
    for n <= 1 where no split is needed.
    """
    if n <= 1:
        return 0.0
    return 2.0 * (math.log(n - 1) + EULER_GAMMA) - 2.0 * (n - 1) / n


@njit(cache=True, nogil=True)
def _c_factor(n):
    if n <= 1:
        return 0.0
    return 2.0 * (np.log(n - 1.0) + EULER_GAMMA) - 2.0 * (n - 1.0) / n


@njit(cache=True, nogil=True)
def _build_tree(xs, dims, unis, height_cap, feature, threshold, left, right, leaf_size):
    """Iteratively grow one tree over ``xs``; returns the node count.

    ``dims``/``unis`` are the pre-drawn random streams; consumption order is
    part of the public randomness contract.
    """
    n_pts, n_dim = xs.shape
    idx = np.arange(n_pts)
    tmp = np.empty(n_pts, np.int64)
    # worst case one pending branch per level plus the current path
    stack = np.empty((height_cap + 2, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_pts
    stack[0, 3] = 0
    top = 1
    n_nodes = 1
    d_cur = 0
    u_cur = 0
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        size = end - start
        if depth >= height_cap or size <= 1:
            feature[node] = -1
            leaf_size[node] = size
            continue
        q = dims[d_cur]
        d_cur += 1
        lo = xs[idx[start], q]
        hi = lo
        for i in range(start + 1, end):
            v = xs[idx[i], q]
            if v < lo:
                lo = v
            elif v > hi:
                hi = v
        if lo == hi:
            # constant attribute: redraw uniformly among non-constant ones
            n_var = 0
            for d in range(n_dim):
                v0 = xs[idx[start], d]
                for i in range(start + 1, end):
                    if xs[idx[i], d] != v0:
                        n_var += 1
                        break
            if n_var == 0:
                feature[node] = -1
                leaf_size[node] = size
                continue
            pick = int(unis[u_cur] * n_var)
            u_cur += 1
            seen = 0
            for d in range(n_dim):
                v0 = xs[idx[start], d]
                varies = False
                for i in range(start + 1, end):
                    if xs[idx[i], d] != v0:
                        varies = True
                        break
                if varies:
                    if seen == pick:
                        q = d
                        break
                    seen += 1
            lo = xs[idx[start], q]
            hi = lo
            for i in range(start + 1, end):
                v = xs[idx[i], q]
                if v < lo:
                    lo = v
                elif v > hi:
                    hi = v
        p = lo + unis[u_cur] * (hi - lo)
        u_cur += 1
        if not (p < hi):  # float rounding may hit hi; keep min <= p < max
            p = lo
        n_left = 0
        for i in range(start, end):
            if xs[idx[i], q] < p:
                tmp[n_left] = idx[i]
                n_left += 1
        n_fill = n_left
        for i in range(start, end):
            if not (xs[idx[i], q] < p):
                tmp[n_fill] = idx[i]
                n_fill += 1
        for i in range(size):
            idx[start + i] = tmp[i]
        l_child = n_nodes
        r_child = n_nodes + 1
        n_nodes += 2
        feature[node] = q
        threshold[node] = p
        left[node] = l_child
        right[node] = r_child
        # push right first so the left child is grown next: random draws are
        # consumed in recursive preorder (node, left subtree, right subtree)
        stack[top, 0] = r_child
        stack[top, 1] = start + n_left
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = l_child
        stack[top, 1] = start
        stack[top, 2] = start + n_left
        stack[top, 3] = depth + 1
        top += 1
    return n_nodes


@njit(cache=True, nogil=True)
def _path_lengths(xq, feature, threshold, left, right, leaf_size, out):
    """Edges traversed per query point plus c(size) of the landing leaf."""
    for i in range(xq.shape[0]):
        node = 0
        depth = 0
        while feature[node] >= 0:
            if xq[i, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
            depth += 1
        out[i] = depth + _c_factor(leaf_size[node])


@dataclass(frozen=True)
class IsolationTree:
    """One partition tree in flat-array form; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_size: np.ndarray
    l_max: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def node_depths(self) -> np.ndarray:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return depths


@dataclass(frozen=True)
class IsolationForest:
    trees: tuple
    subsample_size: int


def build_tree(points, l_max: int, stream: RngStream, height: int = 0) -> IsolationTree:
    """Grow a single isolation tree over ``points`` starting at ``height``."""
    pts = check_points(points)
    if pts.shape[0] == 0:
        raise EmptyDataset("cannot build a tree over zero points")
    cap = max(int(l_max) - int(height), 0)
    g = stream.generator()
    dims = g.integers(0, pts.shape[1], size=2 ** cap).astype(np.int64)
    unis = g.random(2 ** (cap + 1))
    max_nodes = 2 ** (cap + 1) + 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.zeros(max_nodes, dtype=np.int64)
    right = np.zeros(max_nodes, dtype=np.int64)
    leaf_size = np.zeros(max_nodes, dtype=np.int64)
    n_nodes = _build_tree(pts, dims, unis, cap, feature, threshold, left, right, leaf_size)
    return IsolationTree(
        feature=feature[:n_nodes].copy(),
        threshold=threshold[:n_nodes].copy(),
        left=left[:n_nodes].copy(),
        right=right[:n_nodes].copy(),
        leaf_size=leaf_size[:n_nodes].copy(),
        l_max=cap,
    )


def build_forest(points, trees: int, subsample_size: int, stream: RngStream) -> IsolationForest:
    """Build ``trees`` isolation trees, each on its own uniform subsample.

    Subsamples are drawn without replacement; tree ``t`` consumes the
    sub-stream ``stream.child(t)``.  The height cap is ceil(log2(s)).
    """
    pts = check_points(points)
    n = pts.shape[0]
    s = int(subsample_size)
    if s < 2:
        raise SubsampleTooSmall(f"subsample size {s} < 2")
    if s > n:
        raise SubsampleTooLarge(f"subsample size {s} exceeds dataset size {n}")
    if trees < 1:
        raise ValueError(f"forest needs at least one tree, got {trees}")
    l_max = int(math.ceil(math.log2(s)))
    grown = []
    for t in range(int(trees)):
        child = stream.child(t)
        g = child.generator()
        sub = g.choice(n, size=s, replace=False)
        dims = g.integers(0, pts.shape[1], size=2 ** l_max).astype(np.int64)
        unis = g.random(2 ** (l_max + 1))
        xs = np.ascontiguousarray(pts[sub])
        max_nodes = 2 ** (l_max + 1) + 1
        feature = np.full(max_nodes, -1, dtype=np.int64)
        threshold = np.zeros(max_nodes, dtype=np.float64)
        left = np.zeros(max_nodes, dtype=np.int64)
        right = np.zeros(max_nodes, dtype=np.int64)
        leaf_size = np.zeros(max_nodes, dtype=np.int64)
        n_nodes = _build_tree(xs, dims, unis, l_max, feature, threshold, left, right, leaf_size)
        grown.append(
            IsolationTree(
                feature=feature[:n_nodes].copy(),
                threshold=threshold[:n_nodes].copy(),
                left=left[:n_nodes].copy(),
                right=right[:n_nodes].copy(),
                leaf_size=leaf_size[:n_nodes].copy(),
                l_max=l_max,
            )
        )
    return IsolationForest(trees=tuple(grown), subsample_size=s)


def path_lengths(tree: IsolationTree, X) -> np.ndarray:
    """Path length of every row of X through one tree."""
    pts = check_points(np.atleast_2d(X))
    out = np.empty(pts.shape[0], dtype=np.float64)
    _path_lengths(pts, tree.feature, tree.threshold, tree.left, tree.right, tree.leaf_size, out)
    return out


def path_length(tree: IsolationTree, x) -> float:
    """Edges from root to the terminating external node, plus c(leaf size)."""
    return float(path_lengths(tree, np.atleast_2d(x))[0])


def mean_path_lengths(forest: IsolationForest, X) -> np.ndarray:
    pts = check_points(np.atleast_2d(X))
    acc = np.zeros(pts.shape[0], dtype=np.float64)
    out = np.empty(pts.shape[0], dtype=np.float64)
    for tree in forest.trees:
        _path_lengths(pts, tree.feature, tree.threshold, tree.left, tree.right, tree.leaf_size, out)
        acc += out
    acc /= len(forest.trees)
    return acc


def score_from_mean_path(mean_path: float, subsample_size: int) -> float:
    """Anomaly score 2**(-mean_path / c(s)); 0.5 at the average path length."""
    return 2.0 ** (-np.asarray(mean_path, dtype=np.float64) / avg_unsuccessful_path(subsample_size))


def score_samples(forest: IsolationForest, X) -> np.ndarray:
    """Anomaly score of every row of X; near 1 flags outliers."""
    return np.asarray(score_from_mean_path(mean_path_lengths(forest, X), forest.subsample_size))


def anomaly_score(forest: IsolationForest, x) -> float:
    return float(score_samples(forest, np.atleast_2d(x))[0])


class IsolationForestDetector(BaseEstimator):
    """Isolation-forest anomaly scorer with the scikit-learn estimator API.

    Parameters
    ----------
    trees : int, default=100
        Ensemble size.
    subsample_frac : float, default=0.3
        Fraction of the training rows drawn (without replacement) per tree;
        the per-tree subsample size is max(2, round(frac * n)).
    seed : int, default=0
        Seed of the stream family used for subsampling and splits.

    Attributes
    ----------
    forest_ : IsolationForest
        The fitted ensemble.
    subsample_size_ : int
        Rows per tree actually used.
    n_features_in_ : int
        Feature count seen during fit.
    """

    def __init__(self, trees=100, subsample_frac=0.3, seed=0):
        self.trees = trees
        self.subsample_frac = subsample_frac
        self.seed = seed

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        n = X.shape[0]
        if n < 2:
            raise ValueError("need at least 2 samples to fit")
        if not 0.0 < self.subsample_frac <= 1.0:
            raise ValueError(f"subsample_frac must be in (0, 1], got {self.subsample_frac}")
        s = max(2, int(math.floor(self.subsample_frac * n + 0.5)))
        self.forest_ = build_forest(X, self.trees, s, RngStream(self.seed))
        self.subsample_size_ = s
        self.n_features_in_ = X.shape[1]
        return self

    def score_samples(self, X):
        """Anomaly score in (0, 1] per row; higher means more anomalous."""
        check_is_fitted(self, "forest_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return score_samples(self.forest_, X)

    def fit_score(self, X):
        return self.fit(X).score_samples(X)
