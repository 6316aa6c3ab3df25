"""
Synthetic Memorization
======================

Binary classification where only the first two dimensions carry an invariant
signal: two interlaced spiral arms, one per class. Every other dimension is a
per-era "shortcut": in each era the two classes sit in tight clusters, placed
so that the pooled training eras stay linearly separable along one shared
direction while the per-era offsets differ. At test time the shortcut
dimensions are drawn independently of the label.
"""

import math
from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np

from core.data_model import Dataset
from core.errors import ConfigError

SPIRAL_DIMS = 2
SPIRAL_START_RADIUS = 0.25      # keeps the arms apart at the centre
CLUSTER_SPREAD = 0.1            # cluster std, in units of shortcut_scale
OFFSET_SCALE = 3.0              # per-era cluster-pair offset std
SEPARATION_SCALE = 2.0          # per-era class displacement std, orthogonal to the shared direction


@dataclass(frozen=True)
class MemorizationSpec:
    """Generation parameters for the synthetic memorization dataset"""
    n_train: int = 12288
    n_test: int = 2000
    dims: int = 18
    n_eras: int = 16
    spiral_turns: float = 2.0
    spiral_noise: float = 0.05
    shortcut_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.dims < 3:
            raise ConfigError('dims', f"must be >= 3, got {self.dims}")
        if self.n_eras < 1:
            raise ConfigError('n_eras', f"must be >= 1, got {self.n_eras}")
        if self.n_train < 1 or self.n_train % self.n_eras:
            raise ConfigError('n_train', f"must be a positive multiple of n_eras={self.n_eras}, got {self.n_train}")
        if self.rows_per_era % 2:
            raise ConfigError('n_train', f"rows per era must be even for exact class balance, got {self.rows_per_era}")
        if self.n_test < 1:
            raise ConfigError('n_test', f"must be >= 1, got {self.n_test}")
        if not self.spiral_turns > 0:
            raise ConfigError('spiral_turns', f"must be > 0, got {self.spiral_turns}")
        if not self.spiral_noise >= 0:
            raise ConfigError('spiral_noise', f"must be >= 0, got {self.spiral_noise}")
        if not self.shortcut_scale > 0:
            raise ConfigError('shortcut_scale', f"must be > 0, got {self.shortcut_scale}")
        if self.seed < 0:
            raise ConfigError('seed', f"must be >= 0, got {self.seed}")

    @property
    def rows_per_era(self) -> int:
        return self.n_train // self.n_eras

    @property
    def n_shortcut_dims(self) -> int:
        return self.dims - SPIRAL_DIMS

    def to_dict(self):
        data = asdict(self)
        data['experiment'] = 'memorization'
        return data


def feature_names(spec: MemorizationSpec) -> Tuple[str, ...]:
    return ('spiral_x', 'spiral_y') + tuple(f"shortcut_{i}" for i in range(spec.n_shortcut_dims))


def spiral_points(rng: np.random.Generator, labels: np.ndarray, turns: float, noise: float) -> np.ndarray:
    """Arm of class c is rotated by c * pi; the radius grows one unit per turn plus radial jitter"""
    t = rng.uniform(0.0, 1.0, size=labels.size)
    angle = 2.0 * math.pi * turns * t + math.pi * labels
    radius = SPIRAL_START_RADIUS + turns * t + rng.normal(0.0, 1.0, size=labels.size) * noise
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def _orthogonal(vectors: np.ndarray, direction: np.ndarray) -> np.ndarray:
    return vectors - np.outer(vectors @ direction, direction)


def shortcut_centers(rng: np.random.Generator, spec: MemorizationSpec) -> np.ndarray:
    """
    Cluster centers, shape (n_eras, 2, k) indexed by [era, class]

    Class 1 sits at +a along a shared unit direction w and class 0 at -a, so the pooled
    clusters are split by the hyperplane w . x = 0; per-era offsets and class displacements
    are orthogonal to w and larger than a, so no single era looks like the pooled picture.
    """
    k = spec.n_shortcut_dims
    a = spec.shortcut_scale
    direction = rng.normal(size=k)
    direction /= np.linalg.norm(direction)

    offsets = _orthogonal(rng.normal(0.0, OFFSET_SCALE * a, size=(spec.n_eras, k)), direction)
    displacement = _orthogonal(rng.normal(0.0, SEPARATION_SCALE * a, size=(spec.n_eras, k)), direction)
    class_one = offsets + a * direction + displacement
    class_zero = offsets - a * direction - displacement
    return np.stack([class_zero, class_one], axis=1)


def _balanced_labels(rng: np.random.Generator, n_rows: int) -> np.ndarray:
    labels = np.zeros(n_rows, dtype=np.int64)
    labels[n_rows // 2:] = 1
    return rng.permutation(labels)


def gen_memorization(spec: MemorizationSpec) -> Tuple[Dataset, Dataset]:
    """Training eras 0..n_eras-1 (exactly half of each class per era) and a test set labelled era n_eras"""
    rng = np.random.default_rng(spec.seed)
    centers = shortcut_centers(rng, spec)
    spread = CLUSTER_SPREAD * spec.shortcut_scale
    k = spec.n_shortcut_dims

    blocks, labels = [], []
    for era in range(spec.n_eras):
        era_labels = _balanced_labels(rng, spec.rows_per_era)
        spiral = spiral_points(rng, era_labels, spec.spiral_turns, spec.spiral_noise)
        shortcut = centers[era, era_labels] + rng.normal(0.0, spread, size=(spec.rows_per_era, k))
        blocks.append(np.hstack([spiral, shortcut]))
        labels.append(era_labels)
    train = Dataset.from_arrays(
        np.vstack(blocks),
        np.concatenate(labels).astype(np.float64),
        np.repeat(np.arange(spec.n_eras), spec.rows_per_era),
        feature_names=feature_names(spec)
    )

    test_labels = _balanced_labels(rng, spec.n_test)
    spiral = spiral_points(rng, test_labels, spec.spiral_turns, spec.spiral_noise)
    # shortcut rows come from a random (era, class) cluster chosen independently of the label
    noise_eras = rng.integers(0, spec.n_eras, size=spec.n_test)
    noise_classes = rng.integers(0, 2, size=spec.n_test)
    shortcut = centers[noise_eras, noise_classes] + rng.normal(0.0, spread, size=(spec.n_test, k))
    test = Dataset.from_arrays(
        np.hstack([spiral, shortcut]),
        test_labels.astype(np.float64),
        np.full(spec.n_test, spec.n_eras),
        feature_names=feature_names(spec)
    )
    return train, test


__all__ = ['MemorizationSpec', 'feature_names', 'gen_memorization', 'shortcut_centers', 'spiral_points']
