# -*- coding: utf-8 -*-
"""
Tests de punta a punta de los comandos run, verify y baselines
"""

import json

import pandas as pd
import pytest

import explora
from libs import harness

SYNTHETIC = '\n'.join([
    '[algorithm]',
    'alpha = 0.2',
    'alpha_exploit_scale = 0.1',
    'utility = accuracy',
    'penalty_rounds = 2',
    'steps_per_round = 40',
    'seed = 5',
    '[dataset]',
    'source = synthetic',
    'synthetic_rows = 600',
    'synthetic_minority_share = 0.3',
    'iterations = 3',
    '[experiment]',
    'repetitions = 2',
    'variants = no_fairness,both_fairness',
    'fairness_bound = 0.1',
    '[verify]',
    'checks = feasibility',
    'trials = 20',
    'n = 100',
    'iterations = 2',
    '',
])


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / 'synthetic.ini'
    path.write_text(SYNTHETIC, encoding='utf-8')
    return str(path)


def read_bytes(path):
    with open(path, 'rb') as handle:
        return handle.read()


def test_run_writes_tables(config_file, tmp_path):
    out = tmp_path / 'first'

    assert explora.main(['run', '--config', config_file, '--out',
                         str(out)]) == 0

    iterations = pd.read_csv(out / 'iterations.csv')
    assert iterations.columns.tolist() == harness.iteration_columns(2)
    assert len(iterations) == 2 * 2 * 3
    summary = pd.read_csv(out / 'summary.csv')
    assert summary['variant'].tolist() == ['no_fairness', 'both_fairness']
    manifest = json.loads(read_bytes(out / 'manifest.json'))
    assert manifest['command'] == 'run'
    assert manifest['seed'] == 5


def test_run_is_byte_reproducible(config_file, tmp_path):
    for name in ('first', 'second'):
        explora.main(['run', '--config', config_file, '--out',
                      str(tmp_path / name)])

    for output in ('iterations.csv', 'summary.csv', 'manifest.json'):
        assert read_bytes(tmp_path / 'first' / output) == \
            read_bytes(tmp_path / 'second' / output)


def test_run_checkpoints(config_file, tmp_path):
    explora.main(['run', '--config', config_file, '--out', str(tmp_path),
                  '--checkpoint'])

    assert (tmp_path / 'regions_both_fairness_2.json').exists()


def test_run_without_dataset_path(capsys):
    with pytest.raises(SystemExit) as error:
        explora.main(['run'])

    assert error.value.code == 2
    assert '[dataset.path]' in capsys.readouterr().err


def test_verify_without_checks_does_nothing(tmp_path):
    assert explora.main(['verify', '--checks', '', '--out',
                         str(tmp_path)]) == 0
    assert not list(tmp_path.iterdir())


def test_verify_unknown_check():
    with pytest.raises(SystemExit) as error:
        explora.main(['verify', '--checks', 'speed'])

    assert error.value.code == 2


def test_verify_writes_reports(config_file, tmp_path):
    code = explora.main(['verify', '--config', config_file, '--out',
                         str(tmp_path)])

    assert code in (0, 1)
    report = json.loads(read_bytes(tmp_path / 'verify_feasibility.json'))
    assert report['check'] == 'feasibility'
    assert report['passed'] == (code == 0)
    assert (tmp_path / 'manifest.json').exists()


def test_baselines_summary(config_file, tmp_path):
    assert explora.main(['baselines', '--config', config_file, '--out',
                         str(tmp_path)]) == 0

    summary = pd.read_csv(tmp_path / 'summary.csv')
    assert summary['variant'].tolist() == ['opt_offline', 'fair_clf']


def test_baselines_with_imported_table(config_file, tmp_path):
    table = tmp_path / 'ogd.csv'
    pd.DataFrame({'t': [1, 2, 3], 'revenue': [1.0, 2.0, 3.0],
                  'fdr': [0.1, 0.1, 0.2], 'stat_rate': [0.0] * 3,
                  'tpr_disparity': [0.1] * 3}).to_csv(table, index=False)
    out = tmp_path / 'out'

    assert explora.main(['baselines', '--config', config_file, '--out',
                         str(out), '--import', str(table)]) == 0

    summary = pd.read_csv(out / 'summary.csv')
    assert summary['variant'].tolist() == ['opt_offline', 'fair_clf', 'ogd']
    assert summary['revenue_mean'].iloc[2] == pytest.approx(2.0)


def test_baselines_with_malformed_import(config_file, tmp_path):
    table = tmp_path / 'broken.csv'
    table.write_text('t,revenue\n1,2\n')

    with pytest.raises(SystemExit) as error:
        explora.main(['baselines', '--config', config_file, '--out',
                      str(tmp_path / 'out'), '--import', str(table)])

    assert error.value.code == 2
