# -*- coding: utf-8 -*-
"""
Tests de los tipos básicos: muestras, lotes, coeficientes de utilidad,
clasificador lineal y configuración del algoritmo
"""

import numpy as np
import pytest

from libs.core_types import (AlgorithmConfig, IterationBatch, LabeledSet,
                             LinearClassifier, Sample, UtilityCoefficients,
                             predict, score)
from libs.errors import ConfigError, DimensionError, EngineOrderError


def test_sample_validates_group_and_label():
    assert Sample((1, 2), 1).features == (1.0, 2.0)
    with pytest.raises(ValueError):
        Sample((0.0,), 0)
    with pytest.raises(ValueError):
        Sample((0.0,), 1, 2)


def test_batch_rejects_misaligned_columns():
    with pytest.raises(DimensionError):
        IterationBatch(1, np.zeros((3, 2)), [1, 1], [0, 1, 0])


def test_batch_is_read_only(batch_factory):
    batch = batch_factory(1, [[0.0], [1.0]], [1, 2], [0, 1])
    with pytest.raises(ValueError):
        batch.features[0, 0] = 5.0


def test_reveal_requires_positive_prediction(batch_factory):
    batch = batch_factory(1, [[0.0], [1.0], [2.0]], [1, 1, 2], [1, 0, 1])
    predicted = np.array([1, 0, 1])

    assert batch.reveal([0, 2], predicted).tolist() == [1, 1]
    with pytest.raises(EngineOrderError):
        batch.reveal([1], predicted)


def test_labeled_set_keeps_keys(batch_factory):
    batch = batch_factory(2, [[0.0], [1.0], [2.0]], [1, 2, 2], [1, 0, 1],
                          keys=[7, 8, 9])
    labeled = LabeledSet.from_batch(batch, [0, 2], [1, 1])

    assert labeled.t == 2
    assert labeled.keys.tolist() == [7, 9]
    assert labeled.groups.tolist() == [1, 2]


def test_utility_coefficients_matrix_layout():
    gamma = UtilityCoefficients.revenue(500, 200)

    assert gamma.as_matrix().tolist() == [[0.0, -500.0], [0.0, 200.0]]
    assert gamma.scale == 500.0
    assert UtilityCoefficients.accuracy().as_matrix().tolist() == \
        [[1.0, 0.0], [0.0, 1.0]]
    assert UtilityCoefficients.tpr(0.25).g11 == 4.0


def test_revenue_rejects_non_positive_costs():
    with pytest.raises(ConfigError):
        UtilityCoefficients.revenue(0, 200)


def test_classifier_group_specific_rows():
    classifier = LinearClassifier(np.array([[1.0], [-1.0]]), [0.0, 0.0])
    features = np.array([[2.0], [2.0]])

    assert classifier.group_specific
    assert classifier.predictions(features, [1, 2]).tolist() == [1, 0]
    with pytest.raises(DimensionError):
        classifier.predictions(features, [1, 3])


def test_classifier_threshold_ties_are_positive():
    classifier = LinearClassifier.zeros(2, threshold=0.5)

    assert predict(classifier, Sample((1.0, -1.0), 1)) == 1
    assert score(classifier, Sample((1.0, -1.0), 1)) == pytest.approx(0.5)


def test_classifier_dimension_mismatch(shared_classifier):
    with pytest.raises(DimensionError):
        shared_classifier.scores(np.zeros((1, 3)), [1])


def test_classifier_dict_round_trip(shared_classifier):
    restored = LinearClassifier.from_dict(
        shared_classifier.with_threshold(0.7).to_dict())

    assert restored == shared_classifier.with_threshold(0.7)
    assert restored != shared_classifier


def test_alpha_exploit_schedule_is_capped():
    config = AlgorithmConfig(alpha=0.15, alpha_exploit_scale=0.075,
                             alpha_exploit_exponent=0.2, epsilon=1e-3)

    assert config.alpha_exploit(1) == pytest.approx(0.075)
    assert config.alpha_exploit(40) == pytest.approx(
        min(0.075 * 40 ** 0.2, 0.149))
    assert config.alpha_exploit(10 ** 6) == pytest.approx(0.149)
    with pytest.raises(ValueError):
        config.alpha_exploit(0)


@pytest.mark.parametrize('field, value', [
    ('alpha', 0.0),
    ('epsilon', 0.2),
    ('lambda_', 1.5),
    ('exploration_strategy', 'greedy'),
    ('utility', 'profit'),
    ('budget_form', 'other'),
])
def test_config_rejects_invalid_values(field, value):
    with pytest.raises(ConfigError) as error:
        AlgorithmConfig(**{field: value})

    assert '[algorithm.' in str(error.value)


def test_config_gamma_follows_utility():
    assert AlgorithmConfig(utility='accuracy').gamma() == \
        UtilityCoefficients.accuracy()
    assert AlgorithmConfig(c1=10, c2=5).gamma() == \
        UtilityCoefficients(0.0, -10.0, 0.0, 5.0)
