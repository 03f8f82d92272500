# -*- coding: utf-8 -*-
"""
Tests de opt_offline, fair_clf y las tablas externas
"""

import numpy as np
import pandas as pd
import pytest

from libs import baselines, data, oracle
from libs.core_types import UtilityCoefficients
from libs.data import DatasetSpec
from libs.errors import SchemaError


def write_table(path, frame):
    frame.to_csv(path, index=False)
    return str(path)


@pytest.fixture
def external(tmp_path):
    return pd.DataFrame({'t': [1, 2], 'revenue': [10.0, 12.0],
                         'fdr': [0.1, ''], 'stat_rate': [0.2, 0.1],
                         'tpr_disparity': [0.3, 0.2]}), tmp_path


def test_external_table_is_loaded(external):
    frame, tmp_path = external
    path = write_table(tmp_path / 'ogd.csv', frame)

    table = baselines.load_external_baseline(path)

    assert table['variant'].unique().tolist() == ['ogd']
    assert table['repetition'].tolist() == [1, 1]
    assert np.isnan(table['fdr'].iloc[1])


def test_external_table_custom_name(external):
    frame, tmp_path = external
    path = write_table(tmp_path / 'table.csv', frame)

    assert baselines.load_external_baseline(path, 'greedy')['variant'] \
        .iloc[0] == 'greedy'


def test_external_table_missing_column(external):
    frame, tmp_path = external
    path = write_table(tmp_path / 'table.csv', frame.drop(columns='fdr'))

    with pytest.raises(SchemaError, match='fdr'):
        baselines.load_external_baseline(path)


def test_external_table_non_numeric(external):
    frame, tmp_path = external
    frame['revenue'] = ['high', 'low']
    path = write_table(tmp_path / 'table.csv', frame)

    with pytest.raises(SchemaError):
        baselines.load_external_baseline(path)


def test_external_table_missing_or_empty(tmp_path):
    with pytest.raises(SchemaError):
        baselines.load_external_baseline(str(tmp_path / 'missing.csv'))

    path = tmp_path / 'empty.csv'
    path.write_text('t,revenue,fdr,stat_rate,tpr_disparity\n')
    with pytest.raises(SchemaError):
        baselines.load_external_baseline(str(path))


@pytest.mark.parametrize('gamma', [UtilityCoefficients.accuracy(),
                                   UtilityCoefficients.revenue(500, 200)])
def test_opt_offline_matches_brute_force(domain, gamma):
    initial = domain.sample(8000, np.random.default_rng(11), 0)

    classifier = baselines.train_opt_offline(initial, gamma, 0.15,
                                             n_groups=2)
    learned = domain.utility(domain.accepted(classifier)[None, :], gamma)[0]
    _, optimal = oracle.brute_force_mask(domain, gamma, 0.15)

    assert abs(optimal - learned) / gamma.scale <= 0.02


def test_evaluate_fixed_reports_every_batch(domain, fast_config):
    mask = np.array([True, True, True, False, True, True, False, False])
    classifier = domain.classifier_from_mask(mask)
    rng = np.random.default_rng(2)
    batches = [domain.sample(400, rng, t) for t in (1, 2, 3)]

    reports = baselines.evaluate_fixed(classifier, batches, fast_config)

    assert [report.t for report in reports] == [1, 2, 3]
    for report, batch in zip(reports, batches):
        assert report.n_exploit == int(mask[batch.keys].sum())
        assert report.n_explore == 0
        assert report.fdr_defined
        assert not report.single_group


def test_evaluate_fixed_flags_single_group_batches(fast_config):
    domain = data.ExactDomain(groups=[1, 1], mass=[0.5, 0.5],
                              label_probs=[0.9, 0.2])
    classifier = domain.classifier_from_mask(np.array([True, False]))
    batch = domain.sample(200, np.random.default_rng(4), 1)

    report, = baselines.evaluate_fixed(classifier, [batch], fast_config)

    assert report.single_group
    assert report.stat_rate == 0.0
    assert report.tpr_disparity == 0.0


def test_run_baselines_produces_both_variants(fast_config):
    dataset = data.make_synthetic(800, 0.3, seed=1)
    spec = DatasetSpec(source='synthetic', iterations=3)

    table = baselines.run_baselines(fast_config, dataset, spec,
                                    repetitions=2, fairness_bound=0.1)

    assert table.iterations['variant'].unique().tolist() == ['opt_offline',
                                                             'fair_clf']
    assert len(table.iterations) == 2 * 2 * 3
    assert table.summary['repetitions'].tolist() == [2, 2]
    fair = table.iterations[table.iterations['variant'] == 'fair_clf']
    assert fair['n_explore'].eq(0).all()
