# -*- coding: utf-8 -*-
"""
Fixtures compartidas por los tests
"""

import numpy as np
import pytest

from libs.core_types import AlgorithmConfig, IterationBatch, LinearClassifier
from libs.data import two_group8


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def domain():
    return two_group8()


@pytest.fixture
def fast_config():
    """
    Configuración con pocos pasos de descenso para que los tests corran
    rápido
    """
    return AlgorithmConfig(alpha=0.2, alpha_exploit_scale=0.1,
                           alpha_exploit_exponent=0.2, epsilon=1e-3,
                           exploration_strategy='clf', utility='accuracy',
                           penalty_rounds=2, steps_per_round=60, seed=3)


@pytest.fixture
def shared_classifier():
    """
    Clasificador compartido por los grupos sobre dos features
    """
    return LinearClassifier(np.array([[2.0, -1.0]]), np.array([0.0]), 0.5)


def make_batch(t, features, groups, labels, keys=None):
    return IterationBatch(t, np.asarray(features, dtype=float),
                          np.asarray(groups), np.asarray(labels), keys)


@pytest.fixture
def batch_factory():
    return make_batch
