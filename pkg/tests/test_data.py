# -*- coding: utf-8 -*-
"""
Tests de carga de datos, división en iteraciones, L_0 sesgado y dominios
exactos
"""

import numpy as np
import pandas as pd
import pytest

from libs import data
from libs.data import DatasetSpec, parse_label_rule
from libs.errors import DatasetError, DomainError


@pytest.fixture
def adult_like(tmp_path):
    """
    CSV chico con la forma de Adult
    """
    rng = np.random.default_rng(0)
    rows = 120
    frame = pd.DataFrame({
        'age': rng.integers(18, 70, rows),
        'hours': rng.integers(10, 60, rows),
        'constant': np.ones(rows),
        'workclass': rng.choice(['Private', 'State'], rows),
        'race': rng.choice(['White', 'Black', 'Other'], rows),
        'income': rng.choice([20000, 80000], rows),
    })
    path = tmp_path / 'adult.csv'
    frame.to_csv(path, index=False)
    return path, frame


def adult_spec(path, **changes):
    values = dict(path=str(path),
                  features=('age', 'hours', 'constant', 'workclass'),
                  categorical=('workclass',), label='income',
                  label_positive='>50000', group='race',
                  group_map={'White': 1, 'Black': 2}, iterations=3)
    values.update(changes)
    return DatasetSpec(**values)


@pytest.mark.parametrize('rule, values, expected', [
    ('>50000', [20000, 50000, 80000], [0, 0, 1]),
    ('>=50000', [20000, 50000, 80000], [0, 1, 1]),
    ('<=3', [1, 3, 5], [1, 1, 0]),
    ('=good', ['good', 'bad', ' good'], [1, 0, 1]),
    ('!=bad', ['good', 'bad'], [1, 0]),
])
def test_label_rules(rule, values, expected):
    assert parse_label_rule(rule)(pd.Series(values)).tolist() == expected


def test_invalid_label_rules():
    with pytest.raises(DatasetError):
        parse_label_rule('50000')
    with pytest.raises(DatasetError):
        parse_label_rule('>abc')
    with pytest.raises(DatasetError):
        parse_label_rule('>5')(pd.Series(['x']))


def test_load_filters_groups_and_standardizes(adult_like):
    path, frame = adult_like
    dataset = data.load_and_preprocess(adult_spec(path))

    kept = frame[frame['race'].isin(['White', 'Black'])]
    assert dataset.size == len(kept)
    assert set(dataset.groups.tolist()) <= {1, 2}
    assert dataset.labels.tolist() == (kept['income'] > 50000).astype(int) \
        .tolist()
    # La columna constante se descarta
    assert 'constant' not in dataset.columns
    assert any(column.startswith('workclass_') for column in dataset.columns)
    assert np.allclose(dataset.features.mean(axis=0), 0.0, atol=1e-9)


def test_load_reports_missing_columns(adult_like):
    path, _ = adult_like
    with pytest.raises(DatasetError):
        data.load_and_preprocess(adult_spec(path, label='salary'))


def test_load_missing_file(tmp_path):
    with pytest.raises(DatasetError):
        data.load_and_preprocess(adult_spec(tmp_path / 'missing.csv'))


def test_columnar_cache_round_trip(adult_like, tmp_path):
    path, _ = adult_like
    spec = adult_spec(path, cache=str(tmp_path / 'cache' / 'adult.parquet'))

    first = data.load_and_preprocess(spec)
    second = data.load_and_preprocess(spec)

    assert (tmp_path / 'cache' / 'adult.parquet').exists()
    assert np.array_equal(first.features, second.features)
    assert first.columns == second.columns
    assert first.labels.tolist() == second.labels.tolist()


def test_dataset_spec_validation():
    with pytest.raises(DatasetError):
        DatasetSpec(iterations=0)
    with pytest.raises(DatasetError):
        DatasetSpec(split_mode='kfold')
    assert DatasetSpec(source='synthetic').n_groups == 2


def test_synthetic_dataset_shape():
    dataset = data.make_synthetic(500, 0.3, seed=1)

    assert dataset.size == 500
    assert dataset.n_groups == 2
    assert set(np.unique(dataset.groups).tolist()) == {1, 2}
    assert set(np.unique(dataset.labels).tolist()) == {0, 1}


def test_partition_stream_is_disjoint():
    dataset = data.make_synthetic(103, 0.3, seed=2)
    spec = DatasetSpec(source='synthetic', iterations=4)
    stream = data.make_stream(dataset, spec, seed=5)

    keys = [stream.initial.keys] + [batch.keys for batch in stream.batches]
    assert [len(part) for part in keys] == [20] * 5
    assert len(np.unique(np.concatenate(keys))) == 100
    assert [batch.t for batch in stream.batches] == [1, 2, 3, 4]


def test_bootstrap_stream_sizes():
    dataset = data.make_synthetic(300, 0.3, seed=2)
    spec = DatasetSpec(source='synthetic', split_mode='bootstrap',
                       iterations=3, initial_size=50, bootstrap_size=80)
    stream = data.make_stream(dataset, spec, seed=5)

    assert stream.initial.size == 50
    assert [batch.size for batch in stream.batches] == [80, 80, 80]
    initial = set(stream.initial.keys.tolist())
    for batch in stream.batches:
        assert not initial & set(batch.keys.tolist())


def test_stream_is_seeded():
    dataset = data.make_synthetic(200, 0.3, seed=2)
    spec = DatasetSpec(source='synthetic', iterations=2)

    first = data.make_stream(dataset, spec, seed=8)
    second = data.make_stream(dataset, spec, seed=8)
    assert first.initial.keys.tolist() == second.initial.keys.tolist()


def test_stream_too_small():
    dataset = data.make_synthetic(3, 0.5, seed=2)
    with pytest.raises(DatasetError):
        data.make_stream(dataset, DatasetSpec(source='synthetic',
                                              iterations=5), 0)


def test_biased_initial_shares(batch_factory):
    labels = np.array([1] * 50 + [0] * 50)
    groups = np.array([1, 2] * 50)
    initial = batch_factory(0, np.zeros((100, 1)), groups, labels,
                            keys=np.arange(100))

    labeled, unlabeled, inclusion = data.build_biased_initial(initial, 0.9,
                                                              seed=3)

    assert labeled.size + unlabeled.size == 100
    assert int(labeled.labels.sum()) == 45
    assert int((labeled.labels == 0).sum()) == 5
    assert inclusion == {(1, 1): 0.9, (1, 0): pytest.approx(0.1),
                         (2, 1): 0.9, (2, 0): pytest.approx(0.1)}


def test_hidden_groups_keep_positives_out(batch_factory):
    labels = np.array([1] * 50 + [0] * 50)
    groups = np.array([1, 2] * 50)
    initial = batch_factory(0, np.zeros((100, 1)), groups, labels)

    labeled, _, inclusion = data.build_biased_initial(
        initial, 0.9, seed=3, hidden_groups=(2,))

    assert not np.any((labeled.groups == 2) & (labeled.labels == 1))
    assert inclusion[(2, 1)] == 0.0


def test_biased_initial_requires_both_labels(batch_factory):
    initial = batch_factory(0, np.zeros((4, 1)), [1, 1, 2, 2], [1, 1, 1, 1])
    with pytest.raises(DatasetError):
        data.build_biased_initial(initial, 0.9, seed=0)


def test_exact_domain_validation():
    with pytest.raises(DomainError):
        data.ExactDomain([1, 1], [0.5, 0.4], [0.5, 0.5])
    with pytest.raises(DomainError):
        data.make_exact_domain(17, 2, [0.5] * 17)
    with pytest.raises(DomainError):
        data.make_exact_domain(4, 2, [0.5] * 3)


def test_exact_domain_enumerates_subsets(domain):
    masks = domain.hypotheses()

    assert masks.shape == (256, 8)
    assert domain.n_groups == 2
    assert domain.groups.tolist() == [1] * 4 + [2] * 4


def test_threshold_family_counts():
    domain = data.make_exact_domain(6, 2, [0.9, 0.6, 0.2, 0.8, 0.5, 0.1],
                                    family='thresholds')

    # (3 + 1) umbrales por grupo
    assert domain.hypotheses().shape == (16, 6)


def test_mask_classifier_accepts_exactly_the_mask(domain):
    mask = np.array([True, False, True, False, False, True, False, False])
    classifier = domain.classifier_from_mask(mask)

    assert domain.accepted(classifier).tolist() == mask.tolist()
    assert domain.accepted(domain.f0()).tolist() == domain.f0_mask.tolist()


def test_exact_quantities(domain):
    mask = np.array([True, True] + [False] * 6)

    assert domain.fdr(mask)[0] == pytest.approx(0.06)
    assert domain.selection_rate(mask)[0] == pytest.approx(0.25)
    assert sum(domain.mu.values()) == pytest.approx(1.0)
    assert np.isnan(domain.fdr(np.zeros(8, dtype=bool))[0])
    assert not domain.low_mass.any()


def test_domain_sample_uses_point_keys(domain, rng):
    batch = domain.sample(500, rng, t=2)

    assert batch.t == 2
    assert np.array_equal(batch.features, np.eye(8)[batch.keys])
    assert batch.groups.tolist() == domain.groups[batch.keys].tolist()


def test_fixture_lookup():
    assert data.fixture('grid16').size == 16
    assert data.fixture('single_cell').size == 2
    with pytest.raises(DomainError):
        data.fixture('unknown')
