# -*- coding: utf-8 -*-
"""
Tests de las estrategias de exploración, el presupuesto y el muestreo
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from libs import exploration
from libs.core_types import Sample
from libs.errors import StrategyError
from libs.exploration import (G_FLOOR, UNBOUNDED, ExplorationStrategy,
                              explore_budget, group_proportions,
                              sample_explore, sigma, sigma_of_values)


def test_uniform_strategy_is_constant():
    strategy = ExplorationStrategy('uniform')

    assert strategy.evaluate([0.1, 0.9], [1, 2]).tolist() == [1.0, 1.0]
    assert exploration.evaluate(strategy, Sample((0.0,), 1), 0.3) == 1.0


def test_clf_strategy_mixes_beta_and_score():
    strategy = ExplorationStrategy('clf', beta=0.2)

    assert strategy.evaluate([0.5], [1])[0] == pytest.approx(0.6)


def test_clf_strategy_is_floored():
    strategy = ExplorationStrategy('clf')

    assert strategy.evaluate([0.0], [1])[0] == G_FLOOR


def test_fair_strategy_scales_by_explore_share():
    strategy = ExplorationStrategy('fair')
    values = strategy.evaluate([0.5, 0.5], [1, 2], {1: 0.75, 2: 0.25})

    assert values.tolist() == pytest.approx([0.375, 0.125])


def test_inverse_strategies_favor_small_groups():
    props = {1: 0.8, 2: 0.2}
    inverse = ExplorationStrategy('inverse').evaluate([0.1, 0.1], [1, 2],
                                                      props)
    normalized = ExplorationStrategy('inverse').evaluate(
        [0.1, 0.1], [1, 2], props, normalized=True)
    mixed = ExplorationStrategy('inverse_clf').evaluate([0.5, 0.5], [1, 2],
                                                        props)

    assert inverse.tolist() == pytest.approx([1.25, 5.0])
    assert normalized.tolist() == pytest.approx([0.25, 1.0])
    assert mixed.tolist() == pytest.approx([0.625, 2.5])


def test_group_strategies_require_proportions():
    with pytest.raises(StrategyError):
        ExplorationStrategy('fair').evaluate([0.5], [1])
    with pytest.raises(StrategyError):
        ExplorationStrategy('inverse').evaluate([0.5], [2], {1: 1.0})


def test_unknown_strategy():
    with pytest.raises(StrategyError):
        ExplorationStrategy('greedy')


def test_group_proportions():
    assert group_proportions([1, 1, 2, 1]) == {1: 0.75, 2: 0.25}
    assert group_proportions([]) == {}


@pytest.mark.parametrize('n_exploit, alpha, alpha_exploit, epsilon, expected',
                         [(100, 0.15, 0.075, 0.001, 8),
                          (0, 0.15, 0.075, 0.001, 0),
                          (10, 0.15, 0.15, 0.001, 0),
                          (5, 1.0, 0.5, 0.0, UNBOUNDED)])
def test_explore_budget(n_exploit, alpha, alpha_exploit, epsilon, expected):
    assert explore_budget(n_exploit, alpha, alpha_exploit, epsilon) == \
        expected


def test_explore_budget_without_epsilon():
    assert explore_budget(100, 0.2, 0.1, 0.05, include_epsilon=False) == 12
    assert explore_budget(100, 0.2, 0.1, 0.05) == 6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 5000), st.floats(0.01, 0.99),
       st.floats(0.0, 1.0), st.floats(0.0, 0.05))
def test_budget_keeps_worst_case_fdr(n_exploit, alpha, share, epsilon):
    alpha_exploit = share * alpha
    budget = explore_budget(n_exploit, alpha, alpha_exploit, epsilon)

    assert budget >= 0
    assert budget <= max(0, math.floor(
        (alpha - alpha_exploit - epsilon) * n_exploit / (1 - alpha)))
    if n_exploit + budget:
        worst = ((alpha_exploit + epsilon) * n_exploit + budget) / \
            (n_exploit + budget)
        assert worst <= alpha + 1e-9 or budget == 0


def test_sample_explore_returns_distinct_sorted_positions(rng):
    chosen = sample_explore(np.arange(10), np.ones(10), 4, rng)

    assert len(chosen) == 4
    assert len(set(chosen.tolist())) == 4
    assert chosen.tolist() == sorted(chosen.tolist())


def test_sample_explore_edge_cases(rng):
    assert sample_explore(np.arange(3), np.ones(3), 0, rng).size == 0
    assert sample_explore(np.arange(3), np.ones(3), 5, rng).tolist() == \
        [0, 1, 2]
    with pytest.raises(StrategyError):
        sample_explore(np.arange(3), np.ones(2), 1, rng)
    with pytest.raises(StrategyError):
        sample_explore(np.arange(2), np.array([1.0, 0.0]), 1, rng)


def test_sample_explore_follows_weights():
    rng = np.random.default_rng(0)
    weights = np.array([1.0, 1.0, 8.0])
    counts = np.zeros(3)
    for _ in range(4000):
        counts[sample_explore(None, weights, 1, rng)] += 1

    assert counts / counts.sum() == pytest.approx([0.1, 0.1, 0.8], abs=0.03)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=2, max_size=30),
       st.floats(0.1, 100.0), st.integers(0, 2 ** 32 - 1), st.data())
def test_sampling_is_invariant_to_scaling_g(values, factor, seed, data):
    values = np.array(values)
    n_explore = data.draw(st.integers(1, len(values)))

    first = sample_explore(None, values, n_explore,
                           np.random.default_rng(seed))
    second = sample_explore(None, values * factor, n_explore,
                            np.random.default_rng(seed))

    assert first.tolist() == second.tolist()


def test_sigma_of_uniform_domain():
    overall, per_group = sigma_of_values(np.ones(8), [1] * 4 + [2] * 4)

    assert overall == 0.125
    assert per_group == {1: 0.125, 2: 0.125}


def test_sigma_requires_classifier_for_score_strategies(shared_classifier):
    features = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(StrategyError):
        sigma(ExplorationStrategy('clf'), features, [1, 2])

    overall, _ = sigma(ExplorationStrategy('clf'), features, [1, 2],
                       shared_classifier)
    assert 0 < overall <= 0.5


def test_strategy_dict_round_trip():
    strategy = ExplorationStrategy('inverse_clf', 0.3)

    assert ExplorationStrategy.from_dict(strategy.to_dict()) == strategy
