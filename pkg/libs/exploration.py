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
Módulo con las estrategias de exploración g, el presupuesto de exploración,
el muestreo ponderado sin reemplazo y el diagnóstico sigma

Estrategias:
    - uniform: g = 1
    - clf: g = beta + (1 - beta) * score
    - fair: g = g_clf * Pr[Z=z | Explore_t]
    - inverse: g = 1 / Pr[Z=z | S_t]
    - inverse_clf: g = g_clf / Pr[Z=z | S_t]
"""

import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from .core_types import STRATEGIES
from .errors import StrategyError

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"

# Piso de g para que todas las muestras tengan probabilidad positiva
G_FLOOR = 1e-6

# Presupuesto sin cota (alpha = 1)
UNBOUNDED = sys.maxsize


@dataclass(frozen=True)
class ExplorationStrategy:
    kind: str = 'uniform'
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise StrategyError('Estrategia de exploración no soportada: '
                                '{}'.format(self.kind))
        if not 0.0 <= self.beta <= 1.0:
            raise StrategyError('beta debe estar en [0, 1]')

    @property
    def uses_scores(self):
        return self.kind in ('clf', 'fair', 'inverse_clf')

    @property
    def proportion_source(self):
        """
        Población sobre la que se miden las proporciones de grupo: la región
        de exploración (fair), el lote completo (inverse) o ninguna
        """
        if self.kind == 'fair':
            return 'explore'
        if self.kind in ('inverse', 'inverse_clf'):
            return 'batch'
        return None

    def evaluate(self, scores, groups, group_props=None, normalized=False):
        """
        Evalúa g sobre un conjunto de muestras. scores es la verosimilitud
        del clasificador vigente y group_props el mapa grupo -> proporción.

        Con normalized=True las estrategias inversas se escalan por la menor
        proporción positiva para que g quede en (0, 1], que es la escala con
        la que se acumula la masa de las regiones
        """
        groups = np.asarray(groups, dtype=int)

        if self.kind == 'uniform':
            values = np.ones(len(groups))
        else:
            values = self.beta + (1.0 - self.beta) * \
                np.asarray(scores, dtype=float)

        if self.proportion_source:
            shares = self.__shares(groups, group_props)
            if self.kind == 'fair':
                values = values * np.maximum(shares, G_FLOOR)
            else:
                if normalized:
                    smallest = min(share for share in group_props.values()
                                   if share > 0)
                    inverse = smallest / np.maximum(shares, smallest)
                else:
                    inverse = 1.0 / np.maximum(shares, G_FLOOR)
                values = inverse if self.kind == 'inverse' \
                    else values * inverse

        return np.maximum(values, G_FLOOR)

    def __shares(self, groups, group_props):
        """
        Devuelve la proporción del grupo de cada muestra
        """
        if not group_props or not any(v > 0 for v in group_props.values()):
            raise StrategyError('La estrategia {} requiere proporciones de '
                                'grupo'.format(self.kind))

        missing = set(np.unique(groups).tolist()) - set(group_props)
        if missing:
            raise StrategyError('Faltan proporciones para los grupos '
                                '{}'.format(sorted(missing)))

        lookup = np.zeros(max(max(group_props), int(groups.max(initial=0)))
                          + 1)
        for group, share in group_props.items():
            lookup[group] = share

        return lookup[groups]

    def to_dict(self):
        return {'kind': self.kind, 'beta': self.beta}

    @classmethod
    def from_dict(cls, data):
        return cls(data['kind'], data['beta'])


def evaluate(strategy, sample, score, group_props=None):
    """
    Valor de g para una única muestra
    """
    return float(strategy.evaluate([score], [sample.group], group_props)[0])


def group_proportions(groups):
    """
    Proporción de cada grupo presente en el arreglo recibido
    """
    groups = np.asarray(groups, dtype=int)
    if not groups.size:
        return {}

    values, counts = np.unique(groups, return_counts=True)
    return {int(z): float(c) / groups.size for z, c in zip(values, counts)}


def explore_budget(n_exploit, alpha, alpha_exploit, epsilon,
                   include_epsilon=True):
    """
    n_explore = piso((alpha - alpha_exploit - epsilon) * n_exploit
                     / (1 - alpha))

    Con include_epsilon=False se usa la forma sin epsilon
    """
    if n_exploit <= 0:
        return 0
    if alpha >= 1.0:
        return UNBOUNDED

    slack = alpha - alpha_exploit - (epsilon if include_epsilon else 0.0)
    value = slack * n_exploit / (1.0 - alpha)
    if value < 0:
        logging.warning('Presupuesto de exploración negativo (%.4f): se '
                        'usa 0', value)
        return 0

    return int(math.floor(value))


def sample_explore(explore_samples, g_values, n_explore, rng):
    """
    Elige n_explore posiciones distintas de explore_samples con
    probabilidad proporcional a g, sin reemplazo (claves exponenciales).
    Devuelve las posiciones elegidas en orden creciente
    """
    g_values = np.asarray(g_values, dtype=float)
    size = len(g_values)
    if explore_samples is not None and len(explore_samples) != size:
        raise StrategyError('g_values no está alineado con las muestras')
    if size and not np.all(g_values > 0):
        raise StrategyError('Los valores de g deben ser positivos')

    if n_explore <= 0 or not size:
        return np.array([], dtype=int)
    if n_explore >= size:
        return np.arange(size)

    # La menor clave E_i / g_i equivale a extracciones sucesivas
    # renormalizadas
    keys = rng.exponential(size=size) / g_values
    chosen = np.argpartition(keys, n_explore - 1)[:n_explore]

    return np.sort(chosen)


def sigma_of_values(g_values, groups):
    """
    sigma = min g / suma g y sigma(z) = min de g en el grupo z / suma g
    """
    g_values = np.asarray(g_values, dtype=float)
    groups = np.asarray(groups, dtype=int)
    if not g_values.size:
        raise StrategyError('sigma requiere un dominio no vacío')

    total = g_values.sum()
    per_group = {int(z): float(g_values[groups == z].min() / total)
                 for z in np.unique(groups)}

    return float(g_values.min() / total), per_group


def sigma(strategy, features, groups, classifier=None, group_props=None):
    """
    Calcula sigma y sigma(z) de la estrategia sobre un dominio o lote
    """
    groups = np.asarray(groups, dtype=int)
    if not groups.size:
        raise StrategyError('sigma requiere un dominio no vacío')

    if strategy.uses_scores:
        if classifier is None:
            raise StrategyError('La estrategia {} requiere un '
                                'clasificador'.format(strategy.kind))
        scores = classifier.scores(features, groups)
    else:
        scores = np.zeros(len(groups))

    if strategy.proportion_source and group_props is None:
        group_props = group_proportions(groups)

    return sigma_of_values(strategy.evaluate(scores, groups, group_props),
                           groups)
