"""
Experiments Module
==================

Synthetic datasets and experiment drivers:

1. Shifted sine wave (regression, per-era target shift)
2. Synthetic memorization (spiral signal plus per-era shortcut clusters)
3. Four-row degenerate split demonstration
4. Random grid search over all three split types
"""

from .degenerate import check_degenerate_report, degenerate_split_report, four_row_dataset
from .grid_search import GridSpec, RunRecord, run_grid_search, sample_configs, summarize_results
from .memorization import MemorizationSpec, gen_memorization
from .sine_wave import SineWaveSpec, gen_sine_wave

__all__ = [
    'GridSpec',
    'MemorizationSpec',
    'RunRecord',
    'SineWaveSpec',
    'check_degenerate_report',
    'degenerate_split_report',
    'gen_memorization',
    'gen_sine_wave',
    'four_row_dataset',
    'run_grid_search',
    'sample_configs',
    'summarize_results',
]
