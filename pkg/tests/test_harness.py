# -*- coding: utf-8 -*-
"""
Tests de la escritura de resultados
"""

import json

import numpy as np
import pandas as pd
import pytest

from libs import harness
from libs.harness import Harness


@pytest.fixture
def output(tmp_path):
    return Harness(False, 'run', str(tmp_path / 'out'))


def test_iteration_columns():
    columns = harness.iteration_columns(3)

    assert columns[:3] == ['variant', 'repetition', 't']
    assert columns[8:11] == ['tpr_group_1', 'tpr_group_2', 'tpr_group_3']
    assert columns[-1] == 'infeasible_fallback'


def test_default_output_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)

    path = Harness(False, 'verify').set_output_path('report.json')

    assert path == 'data/verify/report.json'
    assert (tmp_path / 'data' / 'verify').is_dir()


def test_table_format(output):
    frame = pd.DataFrame({'b': [1.0 / 3, np.nan], 'a': [1, 2]})

    path = output.write_table(frame, 'table.csv', ['a', 'b'])

    with open(path, 'rb') as handle:
        assert handle.read() == b'a,b\n1,0.333333\n2,\n'


def test_json_converts_numpy_types(output):
    path = output.write_json({'count': np.int64(3), 'rate': np.float64(0.5),
                              'missing': np.float64('nan'),
                              'ok': np.bool_(True),
                              'values': np.array([1, 2])}, 'report.json')

    with open(path, encoding='utf-8') as handle:
        assert json.load(handle) == {'count': 3, 'rate': 0.5,
                                     'missing': None, 'ok': True,
                                     'values': [1, 2]}


def test_manifest_is_reproducible(output, tmp_path):
    data = {'command': 'run', 'config': None, 'algorithm': {'seed': 4}}

    with open(output.write_manifest(data, 4), 'rb') as handle:
        first = handle.read()
    with open(output.write_manifest(data, 4), 'rb') as handle:
        second = handle.read()
    manifest = json.loads(first)

    assert first == second
    assert manifest['schema_version'] == harness.SCHEMA_VERSION
    assert manifest['seed'] == 4
    assert set(manifest['versions']) == {'explora', 'python', 'numpy',
                                         'scipy', 'pandas', 'pyarrow'}


def test_manifest_hashes_the_config_file(output, tmp_path):
    config = tmp_path / 'explora.ini'
    config.write_text('[algorithm]\nseed = 1\n')
    data = {'config': str(config), 'algorithm': {'seed': 1}}

    with open(output.write_manifest(data, 1), encoding='utf-8') as handle:
        first = json.load(handle)['config_sha256']
    config.write_text('[algorithm]\nseed = 2\n')
    with open(output.write_manifest(data, 1), encoding='utf-8') as handle:
        second = json.load(handle)['config_sha256']

    assert first != second
