"""
Gradient Boosting
=================

Least-squares boosting around the tree grower:

    F_0 = mean(y)
    for m in 1..n_boosting_rounds:
        g_i = y_i - F_{m-1}(x_i)
        h_m = grow_tree(g)
        F_m = F_{m-1} + rho * h_m

plus ensemble prediction and a versioned JSON model file.
"""

import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from config.settings import EraGBDTConfig
from core.binning import FeatureBins, bin_dataset
from core.data_model import UNDEFINED, Dataset, SplitCandidate, TrainConfig
from core.errors import (
    ConfigError,
    DataError,
    DimensionMismatchError,
    ModelFormatError,
    ModelVersionError,
)
from core.tree_grower import LEAF, RegressionTree, grow_tree, predict_tree_matrix
from criteria.split_criteria import is_degenerate

logger = logging.getLogger(__name__)

RoundCallback = Callable[[int, np.ndarray], None]


def squared_error_loss(targets, predictions) -> np.ndarray:
    """Per-row loss 1/2 (y - F)^2"""
    diff = np.asarray(targets, dtype=np.float64) - np.asarray(predictions, dtype=np.float64)
    return 0.5 * diff * diff


def negative_gradient(targets, predictions) -> np.ndarray:
    """-dL/dF of the squared error loss, i.e. the residual y - F"""
    return np.asarray(targets, dtype=np.float64) - np.asarray(predictions, dtype=np.float64)


def initial_prediction(targets) -> float:
    """Target mean, exactly c for a constant target"""
    targets = np.asarray(targets, dtype=np.float64)
    if np.all(targets == targets[0]):
        return float(targets[0])
    return math.fsum(targets) / targets.size


@dataclass(eq=False)
class GBDTModel:
    """Fitted ensemble: prediction = init_value + learning_rate * sum of tree outputs"""
    init_value: float
    trees: List[RegressionTree]
    learning_rate: float
    config: TrainConfig
    bin_edges: Tuple[FeatureBins, ...]
    feature_names: Tuple[str, ...] = ()
    train_loss_history: List[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return len(self.bin_edges)

    @property
    def n_trees(self) -> int:
        return len(self.trees)


# ===================
# TRAINING
# ===================
def fit(dataset: Dataset, config: TrainConfig, on_round: Optional[RoundCallback] = None) -> GBDTModel:
    """
    Train a boosted ensemble

    Args:
        dataset: training data
        config: hyper-parameters and split criterion
        on_round: optional hook called as (round_index, training predictions) after every round

    Returns:
        GBDTModel holding exactly config.n_boosting_rounds trees
    """
    started = time.time()
    binned = bin_dataset(dataset, config.max_bins)
    rng = np.random.default_rng(config.random_seed)
    rho = config.learning_rate

    targets = dataset.targets
    init_value = initial_prediction(targets)
    predictions = np.full(dataset.n_rows, init_value)
    trees: List[RegressionTree] = []
    history: List[float] = []

    for round_index in range(config.n_boosting_rounds):
        residuals = negative_gradient(targets, predictions)
        tree = grow_tree(binned, residuals, config, rng)
        for leaf in tree.leaves():
            predictions[leaf.rows] += rho * leaf.value
        tree.release_rows()
        trees.append(tree)

        history.append(float(np.mean((targets - predictions) ** 2)))
        logger.debug(f"Round {round_index + 1}/{config.n_boosting_rounds}: "
                     f"{tree.n_leaves} leaves, train MSE {history[-1]:.6f}")
        if on_round is not None:
            view = predictions.view()
            view.flags.writeable = False
            on_round(round_index, view)

    logger.info(f"Fitted {config.split_type.value} model: {len(trees)} trees on "
                f"N={dataset.n_rows}, d={dataset.n_features}, M={dataset.n_eras} "
                f"in {time.time() - started:.2f}s (train MSE {history[-1]:.6f})")

    return GBDTModel(
        init_value=init_value,
        trees=trees,
        learning_rate=rho,
        config=config,
        bin_edges=binned.feature_bins,
        feature_names=dataset.feature_names,
        train_loss_history=history
    )


def predict(model: GBDTModel, features) -> np.ndarray:
    """init_value + rho * sum over trees, per row"""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n_features:
        raise DimensionMismatchError(
            f"model expects {model.n_features} feature columns, got shape {features.shape}"
        )
    predictions = np.full(features.shape[0], model.init_value)
    for tree in model.trees:
        predictions += model.learning_rate * predict_tree_matrix(tree, features)
    return predictions


def degenerate_split_stats(model: GBDTModel) -> Tuple[int, int]:
    """(degenerate splits, total splits) over every tree of the model"""
    degenerate = total = 0
    for tree in model.trees:
        for split in tree.splits:
            if split is None:
                continue
            total += 1
            if is_degenerate(split.per_era_gains):
                degenerate += 1
    return degenerate, total


# ===================
# PERSISTENCE
# ===================
def _tree_to_dict(tree: RegressionTree) -> Dict[str, Any]:
    data = tree.structure()
    data['feature_subset'] = tree.feature_subset.tolist()
    data['splits'] = [split.to_dict() if split else None for split in tree.splits]
    return data


def model_to_dict(model: GBDTModel) -> Dict[str, Any]:
    return {
        'format_version': EraGBDTConfig.MODEL_FORMAT_VERSION,
        'init_value': model.init_value,
        'learning_rate': model.learning_rate,
        'config': model.config.to_dict(),
        'feature_names': list(model.feature_names),
        'bin_edges': [fb.edges.tolist() for fb in model.bin_edges],
        'train_loss_history': list(model.train_loss_history),
        'trees': [_tree_to_dict(tree) for tree in model.trees],
    }


def save_model(model: GBDTModel, path: str) -> None:
    """Write the model as a versioned JSON document"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(model_to_dict(model), f, indent=1, allow_nan=False)
    logger.info(f"Saved model with {model.n_trees} trees to {path}")


def _require(data: Dict[str, Any], key: str, location: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise ModelFormatError(f"missing key '{key}'", location)
    return data[key]


def _number(value: Any, location: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ModelFormatError(f"expected a finite number, got {value!r}", location)
    return float(value)


def _split_from_dict(data: Dict[str, Any], location: str) -> SplitCandidate:
    try:
        gains = tuple(UNDEFINED if g is None else float(g) for g in data['per_era_gains'])
        directions = tuple(UNDEFINED if d is None else int(d) for d in data['per_era_directions'])
        return SplitCandidate(**{**data, 'per_era_gains': gains, 'per_era_directions': directions})
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"invalid split record: {e}", location)


def _tree_from_dict(data: Dict[str, Any], location: str) -> RegressionTree:
    arrays = {}
    for key in ('feature_index', 'raw_threshold', 'left_child', 'right_child', 'leaf_value', 'splits'):
        value = _require(data, key, location)
        if not isinstance(value, list):
            raise ModelFormatError("expected a list", f"{location}.{key}")
        arrays[key] = value

    n_nodes = len(arrays['left_child'])
    if n_nodes == 0:
        raise ModelFormatError("tree has no nodes", location)
    for key, value in arrays.items():
        if len(value) != n_nodes:
            raise ModelFormatError(f"expected {n_nodes} entries, got {len(value)}", f"{location}.{key}")

    leaf_values = []
    splits: List[Optional[SplitCandidate]] = []
    for i in range(n_nodes):
        left, right = arrays['left_child'][i], arrays['right_child'][i]
        if left == LEAF:
            leaf_values.append(_number(arrays['leaf_value'][i], f"{location}.leaf_value[{i}]"))
            splits.append(None)
            continue

        for key, child in (('left_child', left), ('right_child', right)):
            if not isinstance(child, int) or not i < child < n_nodes:
                raise ModelFormatError(f"invalid child index {child!r}", f"{location}.{key}[{i}]")
        leaf_values.append(0.0)
        record = arrays['splits'][i]
        if record is None:
            raise ModelFormatError("internal node without a split record", f"{location}.splits[{i}]")
        split = _split_from_dict(record, f"{location}.splits[{i}]")
        threshold = _number(arrays['raw_threshold'][i], f"{location}.raw_threshold[{i}]")
        if split.raw_threshold != threshold or split.feature_index != arrays['feature_index'][i]:
            raise ModelFormatError("split record disagrees with the node arrays", f"{location}.splits[{i}]")
        splits.append(split)

    try:
        return RegressionTree.from_arrays(
            arrays['left_child'], arrays['right_child'], leaf_values, splits,
            _require(data, 'feature_subset', location)
        )
    except (ValueError, IndexError, RecursionError) as e:
        raise ModelFormatError(str(e), location)


def model_from_dict(data: Dict[str, Any]) -> GBDTModel:
    """Rebuild a model from its JSON document, validating structure with key-path locations"""
    version = _require(data, 'format_version', '')
    if version != EraGBDTConfig.MODEL_FORMAT_VERSION:
        raise ModelVersionError(version, EraGBDTConfig.MODEL_FORMAT_VERSION)

    try:
        config = TrainConfig.from_dict(_require(data, 'config', ''))
    except (ConfigError, TypeError) as e:
        raise ModelFormatError(str(e), 'config')

    bin_edges = []
    for f, edges in enumerate(_require(data, 'bin_edges', '')):
        try:
            bin_edges.append(FeatureBins(np.asarray(edges, dtype=np.float64)))
        except (DataError, TypeError, ValueError) as e:
            raise ModelFormatError(str(e), f"bin_edges[{f}]")

    trees = [
        _tree_from_dict(tree, f"trees[{i}]") for i, tree in enumerate(_require(data, 'trees', ''))
    ]
    for i, tree in enumerate(trees):
        if tree.n_nodes > 1 and tree.feature_index[tree.left_child != LEAF].max() >= len(bin_edges):
            raise ModelFormatError("split on a feature the model does not have", f"trees[{i}].feature_index")

    return GBDTModel(
        init_value=_number(_require(data, 'init_value', ''), 'init_value'),
        trees=trees,
        learning_rate=_number(_require(data, 'learning_rate', ''), 'learning_rate'),
        config=config,
        bin_edges=tuple(bin_edges),
        feature_names=tuple(data.get('feature_names') or ()),
        train_loss_history=[float(v) for v in data.get('train_loss_history', [])]
    )


def load_model(path: str) -> GBDTModel:
    """Load a model file written by save_model"""
    if not os.path.exists(path):
        raise DataError(f"Model file not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(e.msg, f"line {e.lineno}, column {e.colno}")
    if not isinstance(data, dict):
        raise ModelFormatError("expected a JSON object at the top level", "line 1, column 1")

    model = model_from_dict(data)
    logger.info(f"Loaded model with {model.n_trees} trees from {path}")
    return model


__all__ = [
    'GBDTModel',
    'degenerate_split_stats',
    'fit',
    'initial_prediction',
    'load_model',
    'model_from_dict',
    'model_to_dict',
    'negative_gradient',
    'predict',
    'save_model',
    'squared_error_loss',
]
