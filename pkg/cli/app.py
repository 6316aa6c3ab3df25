#!/usr/bin/env python3
"""
Era Splitting GBDT - Command Line Interface
Data generation, training, prediction, evaluation, grid search and the
degenerate-split demonstration
"""

import json
import logging
import os
import sys
from typing import Any, Callable, Dict, Optional

import click
import pandas as pd

# Add project root to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config.presets import get_grid_preset, get_preset
from config.settings import EraGBDTConfig, setup_logging, validate_config
from core.data_model import TrainConfig, load_dataset, write_dataset
from core.errors import ConfigError, EraGBDTError
from core.evaluation import evaluate_predictions
from core.gbdt import load_model, predict as predict_model, save_model
from experiments.degenerate import check_degenerate_report, degenerate_split_report
from experiments.grid_search import GridSpec, load_results, run_grid_search, summarize_results, train_and_evaluate
from experiments.memorization import MemorizationSpec, gen_memorization
from experiments.sine_wave import SineWaveSpec, gen_sine_wave

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class EraGBDTGroup(click.Group):
    """Command group that maps toolkit exceptions onto process exit codes"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            result = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                                  standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        except EraGBDTError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
        except AssertionError as e:
            click.echo(f"Assertion failed: {e}", err=True)
            sys.exit(EXIT_INTERNAL)
        except OSError as e:
            click.echo(f"I/O error: {e}", err=True)
            sys.exit(EXIT_DATA)
        except Exception as e:
            logger.exception(f"Unexpected error: {e}")
            sys.exit(EXIT_INTERNAL)
        sys.exit(result if isinstance(result, int) else 0)


def _flag(field: str) -> str:
    return '--' + field.replace('_', '-')


def _as_flag_error(e: ConfigError) -> ConfigError:
    return ConfigError(_flag(e.field), e.message)


def _read_json(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigError('config_file', f"file not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError('config_file', f"{path}: line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(data, dict):
        raise ConfigError('config_file', f"{path}: expected a JSON object")
    return data


def _echo_json(data: Any) -> None:
    click.echo(json.dumps(data, indent=2))


def _write_json(data: Any, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2)
        f.write('\n')


# ===================
# TRAIN CONFIG FLAGS
# ===================
TRAIN_CONFIG_OPTIONS = [
    click.option('--split-type', type=str, help='original | era | directional-era'),
    click.option('--boltzmann-alpha', type=float, help='Boltzmann alpha (0 = mean over eras)'),
    click.option('--alpha-limit', type=click.Choice(['none', 'min', 'max']), help='Exact min / max over eras'),
    click.option('--l2-regularization', type=float, help='L2 term lambda'),
    click.option('--learning-rate', type=float, help='Shrinkage rho'),
    click.option('--n-boosting-rounds', type=int, help='Number of trees'),
    click.option('--max-leaves', type=int, help='Leaves per tree'),
    click.option('--max-depth', type=int, help='Depth limit (0 = unlimited)'),
    click.option('--min-child-samples', type=int, help='Minimum rows per child'),
    click.option('--max-bins', type=int, help='Histogram bins per feature'),
    click.option('--colsample-bytree', type=float, help='Fraction of features per tree'),
    click.option('--random-seed', type=int, help='Seed for feature subsampling'),
    click.option('--directional-gain-floor', type=click.BOOL, help='Directional splits also need pooled gain > 0'),
    click.option('--directional-tiebreak-by-gain', type=click.BOOL, help='Break directional ties by pooled gain'),
]


def train_config_options(func: Callable) -> Callable:
    for option in reversed(TRAIN_CONFIG_OPTIONS):
        func = option(func)
    return func


def build_config(preset: Optional[str], config_file: Optional[str], flags: Dict[str, Any]) -> TrainConfig:
    """Defaults < preset < config file < command-line flags"""
    data: Dict[str, Any] = get_preset(preset).to_dict() if preset else {}
    if config_file:
        data.update(_read_json(config_file))
    data.update({name: value for name, value in flags.items() if value is not None})
    if flags.get('max_depth') == 0:
        data['max_depth'] = None
    try:
        return TrainConfig.from_dict(data)
    except ConfigError as e:
        raise _as_flag_error(e)


# ===================
# COMMAND GROUP
# ===================
@click.group(cls=EraGBDTGroup)
@click.option('--log-level', default=None, help='Override ERA_GBDT_LOG_LEVEL')
def cli(log_level):
    """Gradient-boosted trees with era-aware split criteria"""
    setup_logging(log_level)
    if not validate_config():
        raise ConfigError('environment', "invalid ERA_GBDT_* settings (see log)")


# ===================
# DATA GENERATION
# ===================
SINE_FIELDS = ('n_eras', 'rows_per_era', 'noise_sigma', 'shift_range', 'test_shift')
MEMORIZATION_FIELDS = ('n_train', 'n_test', 'dims', 'n_eras', 'spiral_turns', 'spiral_noise', 'shortcut_scale')


@cli.command('gen-data')
@click.argument('experiment', type=click.Choice(['sine', 'memorization']))
@click.option('--out-dir', required=True, type=click.Path(file_okay=False), help='Output directory')
@click.option('--seed', type=int, default=None, help='Generator seed (default ERA_GBDT_DEFAULT_SEED)')
@click.option('--n-eras', type=int, help='Training eras')
@click.option('--rows-per-era', type=int, help='[sine] rows per era')
@click.option('--noise-sigma', type=float, help='[sine] Gaussian noise std')
@click.option('--shift-range', type=float, nargs=2, default=None, help='[sine] LOW HIGH of the per-era shift')
@click.option('--test-shift', type=float, help='[sine] fixed test-era shift (default: drawn)')
@click.option('--n-train', type=int, help='[memorization] training rows')
@click.option('--n-test', type=int, help='[memorization] test rows')
@click.option('--dims', type=int, help='[memorization] input dimensions')
@click.option('--spiral-turns', type=float, help='[memorization] spiral turns')
@click.option('--spiral-noise', type=float, help='[memorization] radial jitter')
@click.option('--shortcut-scale', type=float, help='[memorization] shortcut cluster scale')
def gen_data(experiment, out_dir, seed, **spec_flags):
    """Write train.csv, test.csv and spec.json for a synthetic experiment"""
    given = {name: value for name, value in spec_flags.items() if value is not None and value != ()}
    allowed = SINE_FIELDS if experiment == 'sine' else MEMORIZATION_FIELDS
    unused = sorted(set(given) - set(allowed))
    if unused:
        raise click.UsageError(f"{_flag(unused[0])} does not apply to the {experiment} experiment")

    given['seed'] = EraGBDTConfig.DEFAULT_SEED if seed is None else seed
    try:
        if experiment == 'sine':
            spec = SineWaveSpec(**given)
            train, test = gen_sine_wave(spec)
        else:
            spec = MemorizationSpec(**given)
            train, test = gen_memorization(spec)
    except ConfigError as e:
        raise _as_flag_error(e)

    os.makedirs(out_dir, exist_ok=True)
    write_dataset(train, os.path.join(out_dir, 'train.csv'))
    write_dataset(test, os.path.join(out_dir, 'test.csv'))
    with open(os.path.join(out_dir, 'spec.json'), 'w', encoding='utf-8') as f:
        json.dump(spec.to_dict(), f, indent=2, sort_keys=True)
        f.write('\n')

    click.echo(f"Wrote {experiment} data to {out_dir}: train N={train.n_rows} (M={train.n_eras}), "
               f"test N={test.n_rows}, d={train.n_features}")


# ===================
# TRAIN / PREDICT / EVALUATE
# ===================
def _data_options(func: Callable) -> Callable:
    func = click.option('--target-column', default='target', show_default=True)(func)
    func = click.option('--era-column', default='era', show_default=True)(func)
    return func


@cli.command()
@click.option('--data', 'data_path', required=True, type=click.Path(dir_okay=False), help='Training CSV')
@click.option('--model-out', required=True, type=click.Path(dir_okay=False), help='Model file to write')
@click.option('--test-data', default=None, type=click.Path(dir_okay=False), help='Optional test CSV')
@click.option('--record-out', default=None, type=click.Path(dir_okay=False), help='Also write the run record here')
@click.option('--config-file', default=None, type=click.Path(dir_okay=False), help='TrainConfig JSON')
@click.option('--preset', default=None, help='Named preset, e.g. numerai-benchmark')
@click.option('--training-eras', type=int, default=None, help='Merge eras into this many contiguous folds')
@_data_options
@train_config_options
def train(data_path, model_out, test_data, record_out, config_file, preset, training_eras,
          era_column, target_column, **flags):
    """Fit a model and print its run record as JSON"""
    config = build_config(preset, config_file, flags)
    dataset = load_dataset(data_path, era_column, target_column)
    test = load_dataset(test_data, era_column, target_column) if test_data else None

    model, record = train_and_evaluate(dataset, test, config, training_eras=training_eras)
    save_model(model, model_out)

    result = record.to_dict()
    result['model_path'] = model_out
    if record_out:
        _write_json(result, record_out)
    _echo_json(result)


@cli.command()
@click.option('--model', 'model_path', required=True, type=click.Path(dir_okay=False))
@click.option('--data', 'data_path', required=True, type=click.Path(dir_okay=False))
@click.option('--out', default=None, type=click.Path(dir_okay=False), help='CSV to write (default stdout)')
@_data_options
def predict(model_path, data_path, out, era_column, target_column):
    """Write per-row predictions (era, prediction) as CSV"""
    model = load_model(model_path)
    dataset = load_dataset(data_path, era_column, target_column)
    frame = pd.DataFrame({era_column: dataset.era_ids, 'prediction': predict_model(model, dataset.features)})
    if out:
        frame.to_csv(out, index=False, lineterminator='\n')
        click.echo(f"Wrote {len(frame)} predictions to {out}")
    else:
        click.echo(frame.to_csv(index=False, lineterminator='\n'), nl=False)


@cli.command()
@click.option('--model', 'model_path', required=True, type=click.Path(dir_okay=False))
@click.option('--data', 'data_path', required=True, type=click.Path(dir_okay=False))
@click.option('--report-out', default=None, type=click.Path(dir_okay=False), help='Also write the report here')
@_data_options
def evaluate(model_path, data_path, report_out, era_column, target_column):
    """Print the full metric report of a model on a dataset"""
    model = load_model(model_path)
    dataset = load_dataset(data_path, era_column, target_column)
    report = evaluate_predictions(predict_model(model, dataset.features), dataset.targets, dataset.era_ids)
    if report_out:
        _write_json(report.to_dict(), report_out)
    _echo_json(report.to_dict())


# ===================
# GRID SEARCH
# ===================
@cli.command('grid-search')
@click.option('--train', 'train_path', required=True, type=click.Path(dir_okay=False))
@click.option('--test', 'test_path', required=True, type=click.Path(dir_okay=False))
@click.option('--grid', 'grid_path', default=None, type=click.Path(dir_okay=False), help='Grid JSON file')
@click.option('--grid-preset', default=None, help='standard | sine | memorization')
@click.option('--out', required=True, type=click.Path(dir_okay=False), help='Results CSV')
@click.option('--n-configs', type=int, default=None, help='Override the grid n_configs')
@click.option('--seed', type=int, default=None, help='Override the grid seed')
@click.option('--threads', type=int, default=None, help='Worker threads (default ERA_GBDT_THREADS)')
@click.option('--preset', default=None, help='Base config preset')
@click.option('--config-file', default=None, type=click.Path(dir_okay=False), help='Base TrainConfig JSON')
@click.option('--training-eras', type=int, default=None, help='Merge eras into this many contiguous folds')
@_data_options
def grid_search(train_path, test_path, grid_path, grid_preset, out, n_configs, seed, threads,
                preset, config_file, training_eras, era_column, target_column):
    """Train all split types on random configs and append one CSV row per run"""
    if (grid_path is None) == (grid_preset is None):
        raise click.UsageError("give exactly one of --grid or --grid-preset")
    document = get_grid_preset(grid_preset) if grid_preset else GridSpec.from_file(grid_path).to_dict()
    if n_configs is not None:
        document['n_configs'] = n_configs
    if seed is not None:
        document['seed'] = seed
    try:
        grid = GridSpec.from_dict(document)
    except ConfigError as e:
        raise _as_flag_error(e)

    base = build_config(preset, config_file, {})
    train_data = load_dataset(train_path, era_column, target_column)
    test_data = load_dataset(test_path, era_column, target_column)

    results = run_grid_search(train_data, test_data, grid, out, base_config=base,
                              threads=threads, training_eras=training_eras)
    click.echo(f"Wrote {len(results)} runs to {out}")
    click.echo(summarize_results(results).to_string())


@cli.command()
@click.argument('results_path', type=click.Path(dir_okay=False))
@click.option('--metric', default=None, help='mse | pearson_corr | accuracy | era_corr_mean | corr_sharpe')
@click.option('--json', 'as_json', is_flag=True, help='Machine-readable output')
def summarize(results_path, metric, as_json):
    """Per split type: best test score, mean train / test and the generalization gap"""
    summary = summarize_results(load_results(results_path), metric)
    if as_json:
        _echo_json(summary.astype(object).where(summary.notna(), None).to_dict(orient='index'))
    else:
        click.echo(summary.to_string())


# ===================
# DEGENERATE SPLIT DEMO
# ===================
def _format_per_era(values) -> str:
    return '[' + ', '.join('UNDEFINED' if v is None else f"{v:g}" for v in values) + ']'


@cli.command('demo-degenerate')
@click.option('--json', 'as_json', is_flag=True, help='Machine-readable output')
def demo_degenerate(as_json):
    """Best root split of the four-row, two-era example under every criterion"""
    report = degenerate_split_report()
    check_degenerate_report(report)

    if as_json:
        _echo_json(report)
        return

    click.echo("Four rows, two eras, gradients 1 2 3 4")
    for name, entry in report['criteria'].items():
        split = entry['split']
        click.echo(
            f"  {name:16s} {split['feature_name']} <= {split['raw_threshold']:g}  "
            f"score {split['score']:g}  pooled gain {split['pooled_gain']:g}  "
            f"era gains {_format_per_era(split['per_era_gains'])}  "
            f"directions {_format_per_era(split['per_era_directions'])}"
            + ("  DEGENERATE" if entry['degenerate'] else "")
        )


def main():
    cli(prog_name='era-gbdt')


if __name__ == '__main__':
    main()
