"""
Shifted Sine Wave
=================

One input x ~ U[0, 2 pi]; target sin(x) + N(0, sigma^2) + shift_j, where the
shift is drawn once per era. The test set is one more era with its own shift.
"""

import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from core.data_model import Dataset
from core.errors import ConfigError


@dataclass(frozen=True)
class SineWaveSpec:
    """Generation parameters for the shifted sine wave"""
    n_eras: int = 8
    rows_per_era: int = 64
    noise_sigma: float = 1.0
    shift_range: Tuple[float, float] = (-3.0, 3.0)
    seed: int = 0
    test_shift: Optional[float] = None   # None = drawn like a training era

    def __post_init__(self):
        if self.n_eras < 1:
            raise ConfigError('n_eras', f"must be >= 1, got {self.n_eras}")
        if self.rows_per_era < 1:
            raise ConfigError('rows_per_era', f"must be >= 1, got {self.rows_per_era}")
        if not self.noise_sigma >= 0:
            raise ConfigError('noise_sigma', f"must be >= 0, got {self.noise_sigma}")
        low, high = self.shift_range
        if not low <= high:
            raise ConfigError('shift_range', f"low must be <= high, got ({low}, {high})")
        if self.seed < 0:
            raise ConfigError('seed', f"must be >= 0, got {self.seed}")
        object.__setattr__(self, 'shift_range', (float(low), float(high)))

    def to_dict(self):
        data = asdict(self)
        data['experiment'] = 'sine'
        data['shift_range'] = list(self.shift_range)
        return data


def era_shifts(spec: SineWaveSpec) -> Tuple[np.ndarray, float]:
    """(training shifts per era, test shift) exactly as gen_sine_wave draws them"""
    rng = np.random.default_rng(spec.seed)
    return _draw_shifts(spec, rng)


def _draw_shifts(spec: SineWaveSpec, rng: np.random.Generator) -> Tuple[np.ndarray, float]:
    low, high = spec.shift_range
    shifts = rng.uniform(low, high, size=spec.n_eras)
    drawn_test_shift = float(rng.uniform(low, high))
    test_shift = drawn_test_shift if spec.test_shift is None else float(spec.test_shift)
    return shifts, test_shift


def _era_rows(rng: np.random.Generator, n_rows: int, noise_sigma: float, shift: float):
    x = rng.uniform(0.0, 2.0 * math.pi, size=n_rows)
    noise = rng.normal(0.0, 1.0, size=n_rows) * noise_sigma
    return x, np.sin(x) + noise + shift


def gen_sine_wave(spec: SineWaveSpec) -> Tuple[Dataset, Dataset]:
    """Training eras 0..n_eras-1 and a test set labelled as era n_eras"""
    rng = np.random.default_rng(spec.seed)
    shifts, test_shift = _draw_shifts(spec, rng)

    xs, ys = [], []
    for shift in shifts:
        x, y = _era_rows(rng, spec.rows_per_era, spec.noise_sigma, shift)
        xs.append(x)
        ys.append(y)
    train = Dataset.from_arrays(
        np.concatenate(xs)[:, np.newaxis],
        np.concatenate(ys),
        np.repeat(np.arange(spec.n_eras), spec.rows_per_era),
        feature_names=('x',)
    )

    x, y = _era_rows(rng, spec.rows_per_era, spec.noise_sigma, test_shift)
    test = Dataset.from_arrays(
        x[:, np.newaxis], y, np.full(spec.rows_per_era, spec.n_eras), feature_names=('x',)
    )
    return train, test


__all__ = ['SineWaveSpec', 'era_shifts', 'gen_sine_wave']
