#!/usr/bin/env python3

import argparse
import collections
import io
import logging
import os
import re
import sys
import time
from dataclasses import dataclass

import numpy as np
import pandas as pd

from iontrap.core import ConfigError, DomainError, SchemaMismatchError, validate_seed
from iontrap.param import read_config, resolve
from iontrap.scenarios import SCENARIOS, get_scenario, known_keys

log = logging.getLogger(__name__)

MODULE_DATA_DIR = os.path.join((os.path.split(__file__)[0]), 'data')
DEFAULT_CONFIG = os.path.join(MODULE_DATA_DIR, 'default.cfg')
MANIFEST = 'manifest.txt'
FLOAT_FORMAT = '%.17g'

EXIT_OK = 0
EXIT_OUT_OF_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_IO = 4


@dataclass(frozen=True)
class RunRecord(object):
    """What a run did: resolved parameters with the filled-in defaults, seed and outputs."""
    scenario: str
    seed: int
    parameters: tuple
    filled_defaults: tuple
    outputs: tuple
    wall_time: float


def read_csv(path):
    """
    Read a result table written by :func:`write_csv`.

    Returns
    -------
    DataFrame
        CSV as DataFrame object
    """
    return pd.read_csv(path, float_precision='round_trip')


def write_csv(df, path):
    """
    Write a result table with 17 significant digits and '\\n' line endings.
    """
    csv = df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    with open(path, 'w', newline='') as f:
        f.write(csv)


def write_manifest(record, path):
    """
    Write the run manifest in the INI layout of the configuration.

    Run metadata sits in comment lines, so the manifest can be passed back
    through --config to repeat the run.
    """
    lines = ['# scenario = {}'.format(record.scenario),
             '# seed = {}'.format(record.seed),
             '# defaults_filled = {}'.format(', '.join(record.filled_defaults)),
             '# outputs = {}'.format(', '.join(record.outputs)),
             '# wall_time_s = {:.3f}'.format(record.wall_time)]
    sections = collections.OrderedDict()
    for key, value in record.parameters:
        section, name = key.split('.', 1)
        sections.setdefault(section, []).append('{} = {}'.format(name, value))
    for section, entries in sections.items():
        lines += ['', '[{}]'.format(section)] + entries
    with open(path, 'w', newline='') as f:
        f.write('\n'.join(lines) + '\n')


def read_manifest(path):
    """Manifest as {key: value} text: run metadata plus the section.key parameters."""
    manifest = {}
    with open(path) as f:
        for line in f:
            if line.startswith('#') and '=' in line:
                key, value = line.lstrip('#').split('=', 1)
                manifest[key.strip()] = value.strip()
    manifest.update(read_config(path))
    return manifest


def run(config_path, scenario_name, output_dir, seed=None):
    """
    Execute one scenario and write its CSV files and manifest to output_dir.

    Parameters
    ----------
    config_path : str or None
        INI configuration; None uses the packaged default.cfg
    scenario_name : str
        Name from the scenario table
    output_dir : str
        Created if missing
    seed : int, optional
        Overrides run.seed from the configuration

    Returns
    -------
    RunRecord
    """
    scenario = get_scenario(scenario_name)
    raw = read_config(config_path or DEFAULT_CONFIG)
    values, filled = resolve(scenario.parameters, raw, known_keys())
    if seed is not None:
        values['run.seed'] = seed
    try:
        seed = validate_seed(values['run.seed'])
    except DomainError as e:
        raise ConfigError(str(e))

    start = time.perf_counter()
    outputs = scenario.run(values, seed)
    wall_time = time.perf_counter() - start

    os.makedirs(output_dir, exist_ok=True)
    names = []
    for name, frame in outputs.items():
        filename = name + '.csv'
        write_csv(frame, os.path.join(output_dir, filename))
        names.append(filename)
    parameters = tuple((param.key, param.format(values[param.key]))
                       for param in scenario.parameters)
    record = RunRecord(scenario=scenario.name, seed=seed, parameters=parameters,
                       filled_defaults=tuple(filled), outputs=tuple(names), wall_time=wall_time)
    write_manifest(record, os.path.join(output_dir, MANIFEST))
    log.info('%s finished in %.3f s, wrote %s', scenario.name, wall_time, ', '.join(names))
    return record


def _column_differences(a, b):
    if pd.api.types.is_numeric_dtype(a) and pd.api.types.is_numeric_dtype(b):
        a = a.to_numpy(dtype=float)
        b = b.to_numpy(dtype=float)
        same = (a == b) | (np.isnan(a) & np.isnan(b))
        with np.errstate(invalid='ignore'):
            absolute = np.where(same, 0.0, np.abs(a - b))
            scale = np.maximum(np.abs(a), np.abs(b))
            relative = np.where(same, 0.0, absolute / scale)
        absolute = np.nan_to_num(absolute, nan=np.inf)
        relative = np.nan_to_num(relative, nan=np.inf)
        return float(absolute.max(initial=0.0)), float(relative.max(initial=0.0))
    differ = bool((a.astype(str) != b.astype(str)).any())
    return (np.inf, np.inf) if differ else (0.0, 0.0)


def compare(dir_a, dir_b, tolerance):
    """
    Column-wise maximum absolute and relative differences of two runs.

    :raises SchemaMismatchError: different scenarios, files, columns or row counts
    :return: DataFrame with one row per file and column
    """
    manifest_a = read_manifest(os.path.join(dir_a, MANIFEST))
    manifest_b = read_manifest(os.path.join(dir_b, MANIFEST))
    if manifest_a.get('scenario') != manifest_b.get('scenario'):
        raise SchemaMismatchError('Cannot compare scenario {!r} with {!r}.'.format(
            manifest_a.get('scenario'), manifest_b.get('scenario')))
    if manifest_a.get('outputs') != manifest_b.get('outputs'):
        raise SchemaMismatchError('Runs wrote different files: {!r} and {!r}.'.format(
            manifest_a.get('outputs'), manifest_b.get('outputs')))

    rows = []
    for filename in [name.strip() for name in manifest_a['outputs'].split(',') if name.strip()]:
        a = read_csv(os.path.join(dir_a, filename))
        b = read_csv(os.path.join(dir_b, filename))
        if list(a.columns) != list(b.columns):
            raise SchemaMismatchError('{} has columns {} and {}.'.format(
                filename, list(a.columns), list(b.columns)))
        if len(a) != len(b):
            raise SchemaMismatchError('{} has {} and {} rows.'.format(filename, len(a), len(b)))
        for column in a.columns:
            absolute, relative = _column_differences(a[column], b[column])
            rows.append({'file': filename, 'column': column, 'max_abs_diff': absolute,
                         'max_rel_diff': relative, 'within': relative <= tolerance})
    return pd.DataFrame(rows, columns=['file', 'column', 'max_abs_diff', 'max_rel_diff',
                                       'within'])


# Stolen from pip
def __read(*names, **kwargs):
    with io.open(
            os.path.join(os.path.dirname(__file__), *names),
            encoding=kwargs.get("encoding", "utf8")
    ) as fp:
        return fp.read()


# Stolen from pip
def __find_version(*file_paths):
    version_file = __read(*file_paths)
    version_match = re.search(r"^__version__ = ['\"]([^'\"]*)['\"]", version_file, re.M)
    if version_match:
        return version_match.group(1)
    raise RuntimeError('Unable to find version string.')


def create_parser():
    parser = argparse.ArgumentParser(prog='iontrap-sim',
                                     description='Runs trapped-ion experiments from a scenario '
                                                 'table and writes the results as CSV.')
    parser.add_argument('-V', '--version', action='version',
                        version='%(prog)s ' + __find_version('__init__.py'))
    parser.add_argument('-v', '--verbose', action='store_true', help='print debug messages')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    run_parser = commands.add_parser('run', help='execute one scenario')
    run_parser.add_argument('--config', type=str, default=None,
                            help='INI configuration, replaces the packaged defaults')
    run_parser.add_argument('--scenario', type=str, required=True,
                            help='one of: ' + ', '.join(SCENARIOS))
    run_parser.add_argument('--out', type=str, required=True, help='output directory')
    run_parser.add_argument('--seed', type=int, default=None, help='overrides run.seed')

    compare_parser = commands.add_parser('compare', help='diff the CSV files of two runs')
    compare_parser.add_argument('dir_a', type=str)
    compare_parser.add_argument('dir_b', type=str)
    compare_parser.add_argument('--tol', type=float, default=0.0,
                                help='accepted relative difference per column')

    commands.add_parser('list-scenarios', help='print the scenario table')
    return parser


def main(argv=None):
    parser = create_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s:%(name)s: %(message)s', stream=sys.stderr)
    try:
        if args.command == 'list-scenarios':
            for entry in SCENARIOS.values():
                print(entry)
            return EXIT_OK
        if args.command == 'run':
            record = run(args.config, args.scenario, args.out, args.seed)
            print('Wrote {} to {}'.format(', '.join(record.outputs), args.out))
            return EXIT_OK
        report = compare(args.dir_a, args.dir_b, args.tol)
        print(report.to_string(index=False))
        return EXIT_OK if report['within'].all() else EXIT_OUT_OF_TOLERANCE
    except ConfigError as e:
        print('Configuration error: {}'.format(e), file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as e:
        print('Domain error: {}'.format(e), file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print('I/O error: {}'.format(e), file=sys.stderr)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
