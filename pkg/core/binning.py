"""
Feature Binning
===============

Quantizes each feature column into at most max_bins integer bins so that
split search scans bin boundaries instead of raw values (histogram method).

Edges always sit halfway between two adjacent distinct training values, so
a split "bin <= t" is exactly the raw comparison "x <= edges[t]".
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.data_model import Dataset
from core.errors import DataError

logger = logging.getLogger(__name__)

BIN_DTYPE = np.int32


@dataclass(frozen=True, eq=False)
class FeatureBins:
    """Bin edges of one feature; value x maps to the smallest b with x <= edges[b], else B-1"""
    edges: np.ndarray

    def __post_init__(self):
        edges = np.array(self.edges, dtype=np.float64, copy=True).reshape(-1)
        if not np.all(np.isfinite(edges)):
            raise DataError("bin edges must be finite")
        if np.any(np.diff(edges) <= 0):
            raise DataError("bin edges must be strictly increasing")
        edges.flags.writeable = False
        object.__setattr__(self, 'edges', edges)

    @property
    def n_bins(self) -> int:
        return self.edges.size + 1

    def transform(self, values: np.ndarray) -> np.ndarray:
        """Map raw values to bins; values past the outer edges clamp to the first/last bin"""
        return np.searchsorted(self.edges, np.asarray(values, dtype=np.float64), side='left').astype(BIN_DTYPE)

    def threshold(self, bin_threshold: int) -> float:
        """Raw-value threshold equivalent to 'bin <= bin_threshold'"""
        return float(self.edges[bin_threshold])


@dataclass(frozen=True, eq=False)
class BinnedDataset:
    """Integer-binned copy of a Dataset"""
    bins: np.ndarray                       # N x d, column-major
    feature_bins: Tuple[FeatureBins, ...]
    source: Dataset

    @property
    def n_bins(self) -> np.ndarray:
        """Bin count per feature"""
        return np.array([fb.n_bins for fb in self.feature_bins], dtype=np.int64)

    @property
    def max_n_bins(self) -> int:
        return int(self.n_bins.max()) if self.feature_bins else 1


def compute_bin_edges(values, max_bins: int) -> FeatureBins:
    """
    Compute bin edges for one feature column

    Args:
        values: non-empty finite values
        max_bins: upper bound on the number of bins (>= 2)

    Returns:
        FeatureBins with midpoints between consecutive distinct values when there are
        at most max_bins of them; otherwise edges near the max_bins-1 interior quantiles,
        snapped to the midpoint after the closest distinct value and deduplicated
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise DataError("cannot compute bin edges of an empty column")
    if not np.all(np.isfinite(values)):
        raise DataError("cannot compute bin edges of non-finite values")
    if max_bins < 2:
        raise DataError(f"max_bins must be >= 2, got {max_bins}")

    distinct = np.unique(values)
    midpoints = (distinct[:-1] + distinct[1:]) / 2.0
    if distinct.size <= max_bins:
        return FeatureBins(midpoints)

    quantiles = np.quantile(values, np.arange(1, max_bins) / max_bins)
    # index of the largest distinct value <= quantile; the last distinct value has no edge after it
    positions = np.searchsorted(distinct, quantiles, side='right') - 1
    positions = np.unique(np.clip(positions, 0, distinct.size - 2))
    return FeatureBins(midpoints[positions])


def bin_dataset(dataset: Dataset, max_bins: int) -> BinnedDataset:
    """Bin every feature column of a dataset with edges computed from that column"""
    feature_bins = tuple(
        compute_bin_edges(dataset.features[:, f], max_bins) for f in range(dataset.n_features)
    )
    bins = np.empty(dataset.features.shape, dtype=BIN_DTYPE, order='F')
    for f, fb in enumerate(feature_bins):
        bins[:, f] = fb.transform(dataset.features[:, f])
    bins.flags.writeable = False

    logger.debug(f"Binned {dataset.n_features} features into at most {max_bins} bins")
    return BinnedDataset(bins=bins, feature_bins=feature_bins, source=dataset)


def apply_bins(feature_bins: Tuple[FeatureBins, ...], features: np.ndarray) -> np.ndarray:
    """Bin a new feature matrix with training edges (diagnostics only; prediction uses raw thresholds)"""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != len(feature_bins):
        raise DataError(f"expected {len(feature_bins)} feature columns, got shape {features.shape}")
    return np.column_stack([fb.transform(features[:, f]) for f, fb in enumerate(feature_bins)]).astype(BIN_DTYPE)
