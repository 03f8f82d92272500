# -*- coding: utf-8 -*-
"""
Tests de validación de la configuración
"""

import copy

import pandas as pd
import pytest

from config.config import CONFIG
from libs import validation
from libs.errors import ConfigError, SchemaError


@pytest.fixture
def data():
    values = copy.deepcopy(CONFIG)
    values.update(command='verify', debug=False)
    return values


def test_split_list():
    assert validation.split_list(' a, b,,c ') == ('a', 'b', 'c')
    assert validation.split_list('') == ()
    assert validation.split_list(None) == ()
    assert validation.split_list(['x']) == ('x',)


def test_check_file(tmp_path):
    path = tmp_path / 'data.csv'
    path.write_text('a\n')

    assert validation.check_file(str(path))
    with pytest.raises(ValueError):
        validation.check_file(str(tmp_path / 'missing.csv'))
    with pytest.raises(ValueError):
        validation.check_file(str(tmp_path))


def test_check_columns():
    frame = pd.DataFrame({'t': [1], 'fdr': [0.1]})

    assert validation.check_columns(frame, ('t',), 'table.csv')
    with pytest.raises(SchemaError, match='revenue'):
        validation.check_columns(frame, ('t', 'revenue'), 'table.csv')


def test_defaults_are_valid(data):
    assert validation.check_config(data)


@pytest.mark.parametrize('section, key, value', [
    ('verify', 'trials', 10),
    ('verify', 'delta', 1.5),
    ('verify', 'domain', 'grid99'),
    ('verify', 'checks', 'feasibility,speed'),
    ('verify', 'n', 0),
    ('experiment', 'repetitions', 0),
    ('experiment', 'workers', 2.5),
    ('experiment', 'variants', 'greedy'),
    ('experiment', 'fairness_bound', -0.1),
    ('dataset', 'split_mode', 'kfold'),
    ('dataset', 'source', 'sql'),
    ('dataset', 'positive_share', 1.2),
    ('dataset', 'iterations', True),
])
def test_invalid_values_name_the_key(data, section, key, value):
    data[section][key] = value

    with pytest.raises(ConfigError, match=r'\[{}\.{}\]'.format(section,
                                                                key)):
        validation.check_config(data)


def test_csv_dataset_requires_columns(data, tmp_path):
    path = tmp_path / 'adult.csv'
    path.write_text('age,income,race\n30,1,White\n')
    data['command'] = 'run'
    data['dataset'].update(path=str(path), label='income',
                           label_positive='=1', group='race')

    with pytest.raises(ConfigError, match=r'\[dataset\.features\]'):
        validation.check_config(data)

    data['dataset']['features'] = 'age'
    assert validation.check_config(data)


def test_synthetic_dataset_needs_no_path(data):
    data['command'] = 'run'
    data['dataset']['source'] = 'synthetic'

    assert validation.check_config(data)


def test_debug_must_be_boolean(data):
    data['debug'] = 'yes'

    with pytest.raises(ConfigError, match='debug'):
        validation.check_config(data)


def test_empty_checks_are_valid(data):
    data['verify']['checks'] = ''

    assert validation.check_config(data)
