#!/usr/bin/env python
# -*- coding: utf-8 -*-
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 3, or (at your option)
# any later version.
#
# This program is distributed in the hope that it will be useful, but
# WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTIBILITY or FITNESS FOR A PARTICULAR PURPOSE. See the GNU
# General Public License for more details.
"""
Módulo de aprendizaje:
    - build_eta_weights: arma el pool reponderado eta_w a partir de las
      muestras etiquetadas, con peso = indicador de Exploit / propensión
    - train_constrained: entrena un clasificador logístico con penalidades
      cuadráticas para las restricciones de FDR, tasa de selección y
      paridad, y elige el umbral con un barrido sobre los scores
    - train_f0: clasificador histórico L_0 contra U_0
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.special import expit, log_expit

from .core_types import (REJECT_ALL, LinearClassifier, Sample,
                         UtilityCoefficients)
from .errors import ConfigError, DegeneratePoolError, InfeasibleError

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"

# Norma máxima del gradiente en cada paso
GRADIENT_CLIP = 10.0

# Holgura numérica al verificar restricciones en el barrido de umbrales
FEASIBILITY_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ReweightedPool:
    """
    Muestras etiquetadas con su peso en eta_w
    """
    features: np.ndarray
    groups: np.ndarray
    labels: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(len(features), -1)
        weights = np.asarray(self.weights, dtype=float)
        if weights.size and (not np.all(np.isfinite(weights))
                             or weights.min() < 0):
            raise ValueError('Los pesos deben ser finitos y no negativos')

        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'groups', np.asarray(self.groups, dtype=int))
        object.__setattr__(self, 'labels', np.asarray(self.labels, dtype=int))
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def empty(cls, dimension=0):
        return cls(np.zeros((0, dimension)), [], [], [])

    @property
    def size(self):
        return len(self.labels)

    @property
    def total_weight(self):
        return float(self.weights.sum())

    @property
    def entries(self):
        """
        Lista de (muestra con etiqueta, peso)
        """
        return [(Sample(tuple(row), int(group), int(label)), float(weight))
                for row, group, label, weight in zip(
                    self.features, self.groups, self.labels, self.weights)]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=int)
        return ReweightedPool(self.features[indices], self.groups[indices],
                              self.labels[indices], self.weights[indices])

    def nonzero(self):
        return self.subset(np.flatnonzero(self.weights > 0))

    def compressed(self):
        """
        Agrupa las filas idénticas (features, grupo, etiqueta) sumando sus
        pesos. Descarta las filas con peso 0
        """
        pool = self.nonzero()
        if not pool.size:
            return pool

        table = np.column_stack([pool.features, pool.groups, pool.labels])
        unique, inverse = np.unique(table, axis=0, return_inverse=True)
        weights = np.zeros(len(unique))
        np.add.at(weights, inverse.reshape(-1), pool.weights)

        return ReweightedPool(unique[:, :-2], unique[:, -2].astype(int),
                              unique[:, -1].astype(int), weights)


@dataclass(frozen=True, eq=False)
class TrainingProblem:
    """
    Programa: maximizar Util sobre el pool sujeto a
        Pr[h=1] >= lambda - epsilon
        Pr[Y=0 | h=1] <= alpha_exploit + epsilon
        disparidad de tasa de selección <= fairness_bound (opcional)
    """
    pool: ReweightedPool
    gamma: object
    alpha_exploit: float
    lambda_: float = 0.0
    epsilon: float = 0.0
    fairness_bound: Optional[float] = None
    n_groups: Optional[int] = None
    group_specific: bool = True
    learning_rate: float = 0.1
    penalty_start: float = 0.01
    penalty_growth: float = 10.0
    penalty_rounds: int = 5
    steps_per_round: int = 500
    tolerance: float = 1e-3
    seed: int = 0
    split: Optional[bool] = field(default=None)

    def __post_init__(self):
        if self.alpha_exploit + self.epsilon > 1:
            raise ConfigError('alpha_exploit + epsilon debe ser a lo sumo 1')
        if self.lambda_ - self.epsilon > 1:
            raise ConfigError('lambda - epsilon debe ser a lo sumo 1')

    @classmethod
    def from_config(cls, pool, config, alpha_exploit, n_groups,
                    fairness_bound=None, seed=None):
        """
        Arma el problema con los parámetros del algoritmo
        """
        return cls(pool, config.gamma(), alpha_exploit, config.lambda_,
                   config.epsilon, fairness_bound, n_groups,
                   config.group_specific, config.learning_rate,
                   config.penalty_start, config.penalty_growth,
                   config.penalty_rounds, config.steps_per_round,
                   config.tolerance, config.seed if seed is None else seed)

    @property
    def fdr_bound(self):
        return self.alpha_exploit + self.epsilon

    @property
    def rate_bound(self):
        return self.lambda_ - self.epsilon

    @property
    def rows(self):
        """
        Cantidad de filas de pesos del clasificador
        """
        if not self.group_specific:
            return 1
        if self.n_groups:
            return int(self.n_groups)
        return int(self.pool.groups.max()) if self.pool.size else 1

    @property
    def uses_split(self):
        """
        Con la utilidad de ingresos se ajusta en una mitad y se elige el
        umbral en la otra
        """
        if self.split is not None:
            return self.split
        return self.gamma.g01 < 0


def build_eta_weights(labeled_history, arrival_history, exploit_membership,
                      propensity_fn, pooled=True):
    """
    Arma el pool eta_w con todas las muestras etiquetadas L_0..L_{t-1}.

    exploit_membership(features, groups, keys) devuelve la máscara de
    Exploit_t y propensity_fn(features, groups, labels, keys) la matriz
    (t, n) con la probabilidad de etiquetado de cada muestra en cada
    iteración 0..t-1. arrival_history son los lotes S_0..S_{t-1} (o sus
    tamaños).

    Con pooled=True el peso es media(n_i) / suma_i n_i * pi_i(x), la forma
    combinada de todas las iteraciones. Con pooled=False el peso es
    1 / pi_j(x) con j la iteración en que se etiquetó la muestra
    """
    labeled_history = list(labeled_history)
    if not labeled_history or not sum(item.size for item in labeled_history):
        dimension = labeled_history[0].features.shape[1] \
            if labeled_history else 0
        return ReweightedPool.empty(dimension)

    sizes = np.array([getattr(item, 'size', item)
                      for item in arrival_history], dtype=float)

    features = np.vstack([item.features for item in labeled_history])
    groups = np.concatenate([item.groups for item in labeled_history])
    labels = np.concatenate([item.labels for item in labeled_history])
    origins = np.concatenate([np.full(item.size, position)
                              for position, item in
                              enumerate(labeled_history)])
    keys = None
    if all(item.keys is not None for item in labeled_history):
        keys = np.concatenate([item.keys for item in labeled_history])

    membership = np.asarray(exploit_membership(features, groups, keys),
                            dtype=bool)
    propensities = np.asarray(propensity_fn(features, groups, labels, keys),
                              dtype=float)
    iterations = propensities.shape[0]
    if len(sizes) < iterations:
        raise ValueError('La historia de arribos es más corta que la de '
                         'etiquetas')
    sizes = sizes[:iterations]

    weights = np.zeros(len(labels))
    if pooled:
        # Suma de propensiones ponderada por el tamaño de cada arribo
        denominator = sizes @ propensities
        positive = membership & (denominator > 0)
        weights[positive] = sizes.mean() / denominator[positive]
    else:
        own = propensities[origins, np.arange(len(labels))]
        positive = membership & (own > 0)
        weights[positive] = 1.0 / own[positive]

    return ReweightedPool(features, groups, labels, weights)


def _design(features):
    """
    Agrega la columna del intercepto
    """
    return np.column_stack([features, np.ones(len(features))])


def _one_hot(rows, size):
    matrix = np.zeros((len(rows), size))
    matrix[np.arange(len(rows)), rows] = 1.0
    return matrix


def _class_costs(gamma):
    """
    Peso de cada clase en la log-verosimilitud según la utilidad: el costo
    de equivocarse con un negativo (g00 - g01) y con un positivo (g11 - g10)
    """
    costs = np.array([max(gamma.g00 - gamma.g01, 0.0),
                      max(gamma.g11 - gamma.g10, 0.0)])
    if not costs.max() > 0:
        return np.ones(2)
    return costs / costs.max()


def _objective(problem, design, rows, labels, weights, group_masks,
               costs, penalty):
    """
    Devuelve la función fg(W) -> (pérdida, gradiente, violación)
    """
    sample_costs = costs[labels] * weights
    cost_total = sample_costs.sum()
    weight_total = weights.sum()
    group_totals = [weights[mask].sum() for mask in group_masks]
    row_matrix = _one_hot(rows, problem.rows)

    def fg(coefficients):
        logits = np.einsum('ij,ij->i', design, coefficients[rows])
        scores = expit(logits)
        slope = scores * (1.0 - scores)

        # Log-verosimilitud ponderada por costo
        loss = -np.sum(sample_costs * (labels * log_expit(logits)
                                       + (1 - labels) * log_expit(-logits))) \
            / cost_total
        dlogits = sample_costs * (scores - labels) / cost_total
        violation = 0.0

        # FDR suave F = A / B
        soft_positive = np.sum(weights * scores)
        if soft_positive > 0:
            false_mass = np.sum(weights * scores * (1 - labels))
            excess = false_mass / soft_positive - problem.fdr_bound
            if excess > 0:
                violation = max(violation, excess)
                loss += penalty * excess ** 2
                dfdr = weights * slope * ((1 - labels) * soft_positive
                                          - false_mass) / soft_positive ** 2
                dlogits = dlogits + 2 * penalty * excess * dfdr

        # Tasa de selección
        if problem.rate_bound > 0:
            deficit = problem.rate_bound - soft_positive / weight_total
            if deficit > 0:
                violation = max(violation, deficit)
                loss += penalty * deficit ** 2
                dlogits = dlogits - 2 * penalty * deficit * weights * slope \
                    / weight_total

        # Paridad de tasas de selección entre pares de grupos
        if problem.fairness_bound is not None and len(group_masks) > 1:
            rates = [np.sum(weights[mask] * scores[mask]) / total
                     for mask, total in zip(group_masks, group_totals)]
            for first, second in combinations(range(len(group_masks)), 2):
                gap = rates[first] - rates[second]
                excess = abs(gap) - problem.fairness_bound
                if excess <= 0:
                    continue
                violation = max(violation, excess)
                loss += penalty * excess ** 2
                direction = np.zeros(len(labels))
                direction[group_masks[first]] = \
                    weights[group_masks[first]] / group_totals[first]
                direction[group_masks[second]] -= \
                    weights[group_masks[second]] / group_totals[second]
                dlogits = dlogits + 2 * penalty * excess * np.sign(gap) \
                    * direction * slope

        gradient = row_matrix.T @ (dlogits[:, None] * design)
        return float(loss), gradient, float(violation)

    return fg


def _fit(problem, pool):
    """
    Descenso por gradiente con paso fijo sobre la pérdida penalizada. Cada
    ronda multiplica el coeficiente de penalidad por penalty_growth
    """
    design = _design(pool.features)
    rows = pool.groups - 1 if problem.rows > 1 else \
        np.zeros(pool.size, dtype=int)
    group_masks = [pool.groups == z for z in np.unique(pool.groups)]
    costs = _class_costs(problem.gamma)
    coefficients = np.zeros((problem.rows, design.shape[1]))

    penalty = problem.penalty_start
    previous = np.inf
    for _ in range(problem.penalty_rounds):
        fg = _objective(problem, design, rows, pool.labels, pool.weights,
                        group_masks, costs, penalty)
        for _ in range(problem.steps_per_round):
            loss, gradient, violation = fg(coefficients)
            norm = float(np.linalg.norm(gradient))
            if norm <= problem.tolerance:
                break
            if norm > GRADIENT_CLIP:
                gradient = gradient * (GRADIENT_CLIP / norm)
            coefficients = coefficients - problem.learning_rate * gradient

        loss, _, violation = fg(coefficients)
        if violation <= problem.tolerance and \
                abs(previous - loss) < problem.tolerance:
            break
        previous = loss
        penalty *= problem.penalty_growth

    return LinearClassifier(coefficients[:, :-1], coefficients[:, -1])


def _threshold_stats(scores, labels, groups, weights, thresholds, group_ids):
    """
    Para cada umbral calcula las masas ponderadas de verdaderos y falsos
    positivos, y la tasa de aceptación por grupo
    """
    order = np.argsort(-scores, kind='stable')
    ordered = scores[order]
    # Cantidad de scores >= umbral
    counts = np.searchsorted(-ordered, -thresholds, side='right')

    def cumulative(values):
        return np.concatenate([[0.0], np.cumsum(values[order])])[counts]

    stats = {
        'tp': cumulative(weights * labels),
        'fp': cumulative(weights * (1 - labels)),
        'positives': float(np.sum(weights * labels)),
        'negatives': float(np.sum(weights * (1 - labels))),
        'total': float(weights.sum()),
        'rates': [],
    }
    for z in group_ids:
        mask = groups == z
        total = weights[mask].sum()
        if total > 0:
            stats['rates'].append(cumulative(weights * mask) / total)

    return stats


def _feasible(problem, stats):
    """
    Máscara de umbrales que cumplen FDR, tasa de selección y paridad
    """
    selected = stats['tp'] + stats['fp']
    with np.errstate(invalid='ignore', divide='ignore'):
        fdr = np.where(selected > 0, stats['fp'] / selected, 0.0)

    feasible = fdr <= problem.fdr_bound + FEASIBILITY_SLACK
    feasible &= selected / stats['total'] >= \
        problem.rate_bound - FEASIBILITY_SLACK

    if problem.fairness_bound is not None and len(stats['rates']) > 1:
        rates = np.vstack(stats['rates'])
        gap = rates.max(axis=0) - rates.min(axis=0)
        feasible &= gap <= problem.fairness_bound + FEASIBILITY_SLACK

    return feasible


def _utility(gamma, stats):
    """
    Utilidad ponderada de cada umbral
    """
    tp, fp = stats['tp'], stats['fp']
    value = gamma.g11 * tp + gamma.g01 * fp + \
        gamma.g10 * (stats['positives'] - tp) + \
        gamma.g00 * (stats['negatives'] - fp)
    return value / stats['total']


def select_threshold(problem, classifier, tuning, pool):
    """
    Recorre los umbrales candidatos (scores del conjunto de ajuste más el
    umbral REJECT_ALL) y devuelve el de mayor utilidad entre los que
    cumplen las restricciones en el conjunto de ajuste y en el pool completo
    """
    group_ids = np.unique(pool.groups)
    tuning_scores = classifier.scores(tuning.features, tuning.groups)
    pool_scores = classifier.scores(pool.features, pool.groups)

    candidates = np.unique(tuning_scores)[::-1]
    if problem.rate_bound <= 0:
        candidates = np.concatenate([[REJECT_ALL], candidates])

    tuning_stats = _threshold_stats(tuning_scores, tuning.labels,
                                    tuning.groups, tuning.weights,
                                    candidates, group_ids)
    pool_stats = _threshold_stats(pool_scores, pool.labels, pool.groups,
                                  pool.weights, candidates, group_ids)

    feasible = _feasible(problem, tuning_stats) & \
        _feasible(problem, pool_stats)
    if not feasible.any():
        raise InfeasibleError('Ningún umbral cumple las restricciones de FDR '
                              '{:.4f}, tasa de selección {:.4f} y '
                              'paridad'.format(problem.fdr_bound,
                                               problem.rate_bound))

    utilities = np.where(feasible, _utility(problem.gamma, tuning_stats),
                         -np.inf)
    # Los candidatos están en orden decreciente: ante empates gana el
    # umbral más alto
    best = int(np.argmax(utilities))

    return classifier.with_threshold(float(candidates[best]))


def split_pool(pool, seed):
    """
    Mezcla el pool con la semilla y lo divide en dos mitades alternando
    posiciones
    """
    order = np.random.default_rng(seed).permutation(pool.size)
    return pool.subset(order[0::2]), pool.subset(order[1::2])


def _check_pool(pool):
    if not pool.size or pool.total_weight <= 0:
        raise DegeneratePoolError('El pool de entrenamiento está vacío')
    if len(np.unique(pool.labels)) < 2:
        raise DegeneratePoolError('El pool de entrenamiento tiene una única '
                                  'clase')


def train_constrained(problem):
    """
    Entrena f_t. Con la utilidad de ingresos ajusta la regresión en una
    mitad del pool y elige el umbral en la otra; en otro caso usa el pool
    completo para ambas etapas
    """
    pool = problem.pool.nonzero()
    _check_pool(pool)

    fit_pool = tuning = pool.compressed()
    if problem.uses_split:
        first, second = split_pool(pool, problem.seed)
        if len(np.unique(first.labels)) == 2 and \
                len(np.unique(second.labels)) == 2:
            fit_pool, tuning = first.compressed(), second.compressed()
        else:
            logging.debug('Una mitad del pool tiene una única clase: se usa '
                          'el pool completo')

    classifier = _fit(problem, fit_pool)
    return select_threshold(problem, classifier, tuning, pool.compressed())


def train_f0(labeled, unlabeled, n_groups=None, group_specific=True,
             learning_rate=0.1, steps=2500, tolerance=1e-6):
    """
    Clasificador histórico: regresión logística con etiqueta ficticia 1 para
    L_0 y 0 para U_0, umbral 0.5
    """
    if not labeled.size or not unlabeled.size:
        raise DegeneratePoolError('L_0 y U_0 deben ser no vacíos')

    features = np.vstack([labeled.features, unlabeled.features])
    groups = np.concatenate([labeled.groups, unlabeled.groups])
    membership = np.concatenate([np.ones(labeled.size, dtype=int),
                                 np.zeros(unlabeled.size, dtype=int)])
    pool = ReweightedPool(features, groups, membership,
                          np.ones(len(membership))).compressed()

    problem = TrainingProblem(pool, UtilityCoefficients.accuracy(), 1.0,
                              n_groups=n_groups,
                              group_specific=group_specific,
                              learning_rate=learning_rate, penalty_rounds=1,
                              steps_per_round=steps, tolerance=tolerance)

    return _fit(problem, pool).with_threshold(0.5)
