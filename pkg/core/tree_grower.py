"""
Tree Grower
===========

Grows one regression tree on gradient targets:

1. Per-era histograms of gradient sums and counts for the rows in a node
2. A candidate table with pooled and per-era gains / directions for every
   (feature, bin threshold) pair
3. Best-first (leaf-wise) expansion bounded by max_leaves and max_depth

Prediction walks raw-value thresholds, so no binning is needed at test time.
"""

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.binning import BinnedDataset, FeatureBins
from core.data_model import UNDEFINED, SplitCandidate, TrainConfig
from core.errors import DimensionMismatchError
from criteria.base_criterion import BaseCriterion, CandidateTable, GradAggregate
from criteria.split_criteria import child_value_array, direction_array, gain_array, make_criterion

logger = logging.getLogger(__name__)

LEAF = -1

SplitCallback = Callable[["Histogram", GradAggregate, np.ndarray, SplitCandidate], None]


# ===================
# HISTOGRAMS
# ===================
@dataclass(frozen=True, eq=False)
class Histogram:
    """Per feature f, era j, bin b: gradient sum and row count of a node's rows"""
    grad: np.ndarray            # d x M x B
    count: np.ndarray           # d x M x B
    era_grad: np.ndarray        # M, node gradient sum per era
    era_count: np.ndarray       # M
    n_bins: np.ndarray          # d, bins actually used per feature
    feature_bins: Tuple[FeatureBins, ...]

    @property
    def n_features(self) -> int:
        return self.grad.shape[0]

    @property
    def n_eras(self) -> int:
        return self.grad.shape[1]

    @property
    def pooled_grad(self) -> np.ndarray:
        """d x B gradient sums over all eras"""
        return self.grad.sum(axis=1)

    @property
    def pooled_count(self) -> np.ndarray:
        return self.count.sum(axis=1)

    def node_aggregate(self) -> GradAggregate:
        n = int(self.era_count.sum())
        if n == 0:
            return GradAggregate.empty()
        return GradAggregate(sum_grad=float(self.era_grad.sum()), sum_hess=float(n), count=n)


def _era_totals(eras: np.ndarray, gradients: np.ndarray, n_eras: int) -> Tuple[np.ndarray, np.ndarray]:
    era_grad = np.bincount(eras, weights=gradients, minlength=n_eras)
    era_count = np.bincount(eras, minlength=n_eras)
    return era_grad, era_count


def node_aggregate(binned: BinnedDataset, gradients: np.ndarray, rows: np.ndarray) -> GradAggregate:
    """Aggregate of a node's rows, summed the same way histograms sum them"""
    era_grad, era_count = _era_totals(binned.source.eras[rows], gradients[rows], binned.source.n_eras)
    n = int(era_count.sum())
    if n == 0:
        return GradAggregate.empty()
    return GradAggregate(sum_grad=float(era_grad.sum()), sum_hess=float(n), count=n)


def build_histogram(binned: BinnedDataset, gradients: np.ndarray, rows: Sequence[int]) -> Histogram:
    """
    Build the feature x era x bin aggregate table of a node

    Args:
        binned: binned training data
        gradients: per-row gradients, length N
        rows: indices of the rows in the node

    Returns:
        Histogram; sums are accumulated in row order so results are deterministic
    """
    rows = np.asarray(rows, dtype=np.int64)
    gradients = np.asarray(gradients, dtype=np.float64)
    n_features = binned.bins.shape[1]
    n_eras = binned.source.n_eras
    n_bins = binned.max_n_bins

    node_bins = binned.bins[rows].astype(np.int64)              # n x d
    node_eras = binned.source.eras[rows]
    node_grads = gradients[rows]

    cells = (
        (np.arange(n_features, dtype=np.int64) * (n_eras * n_bins))[np.newaxis, :]
        + (node_eras * n_bins)[:, np.newaxis]
        + node_bins
    ).ravel()
    size = n_features * n_eras * n_bins
    grad = np.bincount(cells, weights=np.repeat(node_grads, n_features), minlength=size)
    count = np.bincount(cells, minlength=size)

    era_grad, era_count = _era_totals(node_eras, node_grads, n_eras)
    return Histogram(
        grad=grad.reshape(n_features, n_eras, n_bins),
        count=count.reshape(n_features, n_eras, n_bins),
        era_grad=era_grad,
        era_count=era_count,
        n_bins=binned.n_bins,
        feature_bins=binned.feature_bins
    )


def build_candidate_table(hist: Histogram, node_agg: GradAggregate, l2: float,
                          feature_subset: Optional[Sequence[int]] = None) -> CandidateTable:
    """Pooled and per-era statistics for every (feature, threshold) candidate of a node"""
    n_features, n_eras, n_bins = hist.grad.shape
    n_thresholds = max(n_bins - 1, 0)

    # left child of threshold t holds bins 0..t
    era_left_grad = np.cumsum(hist.grad, axis=2)[:, :, :n_thresholds]
    era_left_count = np.cumsum(hist.count, axis=2)[:, :, :n_thresholds]
    era_right_grad = hist.era_grad[np.newaxis, :, np.newaxis] - era_left_grad
    era_right_count = hist.era_count[np.newaxis, :, np.newaxis] - era_left_count

    left_grad = np.cumsum(hist.pooled_grad, axis=1)[:, :n_thresholds]
    left_count = np.cumsum(hist.pooled_count, axis=1)[:, :n_thresholds]
    right_grad = node_agg.sum_grad - left_grad
    right_count = node_agg.count - left_count

    with np.errstate(divide='ignore', invalid='ignore'):
        pooled_gain = gain_array(
            node_agg.sum_grad, node_agg.sum_hess,
            left_grad, left_count.astype(np.float64),
            right_grad, right_count.astype(np.float64), l2
        )
        left_value = child_value_array(left_grad, left_count, l2)
        right_value = child_value_array(right_grad, right_count, l2)

        era_gains = gain_array(
            hist.era_grad[np.newaxis, :, np.newaxis], hist.era_count[np.newaxis, :, np.newaxis].astype(np.float64),
            era_left_grad, era_left_count.astype(np.float64),
            era_right_grad, era_right_count.astype(np.float64), l2
        )
        era_directions = direction_array(
            child_value_array(era_left_grad, era_left_count, l2),
            child_value_array(era_right_grad, era_right_count, l2)
        )

    era_defined = (era_left_count > 0) & (era_right_count > 0)
    era_gains = np.where(era_defined, era_gains, np.nan)
    era_directions = np.where(era_defined, era_directions, 0).astype(np.int64)

    thresholds = np.arange(n_thresholds)
    visible = np.zeros(n_features, dtype=bool)
    visible[np.arange(n_features) if feature_subset is None else np.asarray(feature_subset, dtype=np.int64)] = True
    in_scope = visible[:, np.newaxis] & (thresholds[np.newaxis, :] < (hist.n_bins - 1)[:, np.newaxis])

    def per_era(array: np.ndarray) -> np.ndarray:
        return np.transpose(array, (0, 2, 1)).reshape(n_features * n_thresholds, n_eras)

    return CandidateTable(
        feature_index=np.repeat(np.arange(n_features), n_thresholds),
        bin_threshold=np.tile(thresholds, n_features),
        in_scope=in_scope.ravel(),
        left_count=left_count.ravel(),
        right_count=right_count.ravel(),
        left_value=left_value.ravel(),
        right_value=right_value.ravel(),
        pooled_gain=pooled_gain.ravel(),
        era_gains=per_era(era_gains),
        era_defined=per_era(era_defined),
        directions=per_era(era_directions)
    )


# ===================
# SPLIT SELECTION
# ===================
def _select_best(scores: np.ndarray, pooled_gain: np.ndarray, valid: np.ndarray, tiebreak_by_gain: bool) -> int:
    """Highest score, then highest pooled gain, then lowest (feature, threshold)"""
    best = valid & (scores == scores[valid].max())
    if tiebreak_by_gain:
        best &= pooled_gain == pooled_gain[best].max()
    return int(np.flatnonzero(best)[0])


def find_best_split(hist: Histogram, node_agg: GradAggregate, config: TrainConfig,
                    feature_subset: Optional[Sequence[int]] = None,
                    criterion: Optional[BaseCriterion] = None) -> Optional[SplitCandidate]:
    """
    Best valid split of a node under the configured criterion

    Args:
        hist: node histogram
        node_agg: node aggregate (parent of every candidate)
        config: training config selecting criterion and validity rules
        feature_subset: features visible to the current tree (all when None)
        criterion: prebuilt criterion for config, to avoid rebuilding per node

    Returns:
        SplitCandidate, or None when no candidate is valid
    """
    if node_agg.count < 2:
        return None

    criterion = criterion or make_criterion(config)
    table = build_candidate_table(hist, node_agg, config.l2_regularization, feature_subset)
    if table.n_candidates == 0:
        return None

    scores, valid = criterion.score_candidates(table)
    if not valid.any():
        return None

    i = _select_best(scores, table.pooled_gain, valid, criterion.tiebreak_by_gain)
    feature = int(table.feature_index[i])
    threshold = int(table.bin_threshold[i])
    return SplitCandidate(
        feature_index=feature,
        bin_threshold=threshold,
        raw_threshold=hist.feature_bins[feature].threshold(threshold),
        score=float(scores[i]),
        pooled_gain=float(table.pooled_gain[i]),
        per_era_gains=tuple(
            float(g) if defined else UNDEFINED
            for g, defined in zip(table.era_gains[i], table.era_defined[i])
        ),
        per_era_directions=tuple(
            int(d) if defined else UNDEFINED
            for d, defined in zip(table.directions[i], table.era_defined[i])
        ),
        left_value=float(table.left_value[i]),
        right_value=float(table.right_value[i]),
        left_count=int(table.left_count[i]),
        right_count=int(table.right_count[i])
    )


def leaf_value(agg: GradAggregate, l2: float) -> float:
    """sum_grad / (sum_hess + lambda); the plain gradient mean when lambda = 0"""
    if agg.count < 1:
        raise ValueError("leaf value of an empty node")
    return float(child_value_array(agg.sum_grad, agg.sum_hess, l2))


# ===================
# TREES
# ===================
@dataclass(eq=False)
class TreeNode:
    """Internal node (split set) or leaf; rows/aggregate are training-time bookkeeping"""
    depth: int
    value: float = 0.0
    split: Optional[SplitCandidate] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    rows: Optional[np.ndarray] = None
    aggregate: Optional[GradAggregate] = None

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def feature_index(self) -> int:
        return self.split.feature_index if self.split else LEAF

    @property
    def raw_threshold(self) -> float:
        return self.split.raw_threshold if self.split else float('nan')


@dataclass(eq=False)
class RegressionTree:
    """Binary tree of raw-threshold splits, stored as preorder arrays for prediction"""
    root: TreeNode
    feature_subset: np.ndarray
    feature_index: np.ndarray = field(init=False)
    raw_threshold: np.ndarray = field(init=False)
    left_child: np.ndarray = field(init=False)
    right_child: np.ndarray = field(init=False)
    leaf_value: np.ndarray = field(init=False)
    splits: List[Optional[SplitCandidate]] = field(init=False)

    def __post_init__(self):
        self.feature_subset = np.asarray(self.feature_subset, dtype=np.int64)
        nodes = list(self.iter_nodes())
        position = {id(node): i for i, node in enumerate(nodes)}

        self.feature_index = np.array([n.feature_index for n in nodes], dtype=np.int64)
        self.raw_threshold = np.array([n.raw_threshold for n in nodes], dtype=np.float64)
        self.left_child = np.array([position[id(n.left)] if n.left else LEAF for n in nodes], dtype=np.int64)
        self.right_child = np.array([position[id(n.right)] if n.right else LEAF for n in nodes], dtype=np.int64)
        self.leaf_value = np.array([n.value if n.is_leaf else 0.0 for n in nodes], dtype=np.float64)
        self.splits = [n.split for n in nodes]

    def iter_nodes(self) -> Iterator[TreeNode]:
        """Nodes in preorder"""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)

    def leaves(self) -> Iterator[TreeNode]:
        return (node for node in self.iter_nodes() if node.is_leaf)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.left_child == LEAF))

    @property
    def n_nodes(self) -> int:
        return self.left_child.size

    @property
    def depth(self) -> int:
        return max(node.depth for node in self.iter_nodes())

    def release_rows(self) -> None:
        """Drop training-time row indices once the boosting round is done"""
        for node in self.iter_nodes():
            node.rows = None

    def structure(self) -> Dict[str, list]:
        """Flattened arrays, as persisted in model files"""
        return {
            'feature_index': self.feature_index.tolist(),
            'raw_threshold': [None if lc == LEAF else float(t) for t, lc in zip(self.raw_threshold, self.left_child)],
            'left_child': self.left_child.tolist(),
            'right_child': self.right_child.tolist(),
            'leaf_value': [float(v) if lc == LEAF else None for v, lc in zip(self.leaf_value, self.left_child)],
        }

    @classmethod
    def from_arrays(cls, left_child: Sequence[int], right_child: Sequence[int], leaf_values: Sequence[float],
                    splits: Sequence[Optional[SplitCandidate]], feature_subset: Sequence[int]) -> "RegressionTree":
        """Rebuild a tree from preorder arrays (node 0 is the root)"""
        n = len(left_child)
        nodes: List[Optional[TreeNode]] = [None] * n

        def build(i: int, depth: int) -> TreeNode:
            node = TreeNode(depth=depth)
            nodes[i] = node
            if left_child[i] == LEAF:
                node.value = float(leaf_values[i])
            else:
                node.split = splits[i]
                node.left = build(int(left_child[i]), depth + 1)
                node.right = build(int(right_child[i]), depth + 1)
            return node

        root = build(0, 0)
        if any(node is None for node in nodes):
            raise ValueError("tree arrays contain unreachable nodes")
        return cls(root=root, feature_subset=feature_subset)


def predict_tree(tree: RegressionTree, row: Sequence[float]) -> float:
    """Descend with x <= threshold -> left and return the leaf value"""
    node = 0
    while tree.left_child[node] != LEAF:
        if row[tree.feature_index[node]] <= tree.raw_threshold[node]:
            node = tree.left_child[node]
        else:
            node = tree.right_child[node]
    return float(tree.leaf_value[node])


def predict_tree_matrix(tree: RegressionTree, features: np.ndarray) -> np.ndarray:
    """Vectorized predict_tree over the rows of a matrix"""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D feature matrix, got shape {features.shape}")
    node = np.zeros(features.shape[0], dtype=np.int64)
    active = np.flatnonzero(tree.left_child[node] != LEAF)
    while active.size:
        current = node[active]
        go_left = features[active, tree.feature_index[current]] <= tree.raw_threshold[current]
        node[active] = np.where(go_left, tree.left_child[current], tree.right_child[current])
        active = active[tree.left_child[node[active]] != LEAF]
    return tree.leaf_value[node]


# ===================
# GROWTH
# ===================
def draw_feature_subset(n_features: int, colsample_bytree: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted random subset of round(colsample * d) features (at least one)"""
    k = max(1, int(np.floor(colsample_bytree * n_features + 0.5)))
    if k >= n_features:
        return np.arange(n_features)
    return np.sort(rng.choice(n_features, size=k, replace=False))


def grow_tree(binned: BinnedDataset, gradients: np.ndarray, config: TrainConfig,
              rng: np.random.Generator, on_split: Optional[SplitCallback] = None) -> RegressionTree:
    """
    Grow one tree best-first on gradient targets

    Args:
        binned: binned training data
        gradients: per-row regression targets of this tree
        config: criterion, L2 term and size limits
        rng: generator driving the colsample_bytree feature subset
        on_split: optional hook called as (hist, node_agg, feature_subset, candidate)
                  whenever a node is expanded

    Returns:
        RegressionTree whose leaves keep their training row indices
    """
    gradients = np.asarray(gradients, dtype=np.float64)
    if gradients.shape != (binned.bins.shape[0],):
        raise DimensionMismatchError(
            f"expected {binned.bins.shape[0]} gradients, got shape {gradients.shape}"
        )

    feature_subset = draw_feature_subset(binned.bins.shape[1], config.colsample_bytree, rng)
    criterion = make_criterion(config)
    l2 = config.l2_regularization
    order = itertools.count()
    frontier: list = []

    def make_node(rows: np.ndarray, depth: int) -> TreeNode:
        agg = node_aggregate(binned, gradients, rows)
        return TreeNode(depth=depth, rows=rows, aggregate=agg, value=leaf_value(agg, l2))

    def consider(node: TreeNode) -> None:
        if config.max_depth is not None and node.depth >= config.max_depth:
            return
        if node.aggregate.count < 2:
            return
        hist = build_histogram(binned, gradients, node.rows)
        candidate = find_best_split(hist, node.aggregate, config, feature_subset, criterion)
        if candidate is None:
            return
        gain_key = -candidate.pooled_gain if criterion.tiebreak_by_gain else 0.0
        heapq.heappush(frontier, (
            -candidate.score, gain_key, next(order), node, candidate,
            hist if on_split is not None else None
        ))

    root = make_node(np.arange(binned.bins.shape[0]), 0)
    consider(root)
    n_leaves = 1

    while frontier and n_leaves < config.max_leaves:
        _, _, _, node, candidate, hist = heapq.heappop(frontier)
        if on_split is not None:
            on_split(hist, node.aggregate, feature_subset, candidate)

        goes_left = binned.bins[node.rows, candidate.feature_index] <= candidate.bin_threshold
        node.split = candidate
        node.left = make_node(node.rows[goes_left], node.depth + 1)
        node.right = make_node(node.rows[~goes_left], node.depth + 1)
        n_leaves += 1
        consider(node.left)
        consider(node.right)

    tree = RegressionTree(root=root, feature_subset=feature_subset)
    logger.debug(f"Grew tree: {tree.n_leaves} leaves, depth {tree.depth}, features {feature_subset.tolist()}")
    return tree


__all__ = [
    'Histogram',
    'RegressionTree',
    'TreeNode',
    'build_candidate_table',
    'build_histogram',
    'draw_feature_subset',
    'find_best_split',
    'grow_tree',
    'leaf_value',
    'node_aggregate',
    'predict_tree',
    'predict_tree_matrix',
]
