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
Módulo que mantiene la partición Exploit / Explore del dominio.

La masa acumulada de una muestra es w_t(x, z) = suma de g_i(x, z) sobre las
iteraciones registradas. Sobre un dominio finito D cada g_i se divide por su
masa total en D, de modo que una muestra suma al menos sigma por iteración
y todo D está en Exploit luego de 1 / sigma iteraciones si tau < 1. Cada
g_i se recalcula a partir del clasificador y la estrategia guardados en la
iteración i, por lo que no hace falta discretizar el espacio de features.
Sin dominio finito (datasets) g se suma sin normalizar. En modo discreto
(dominios finitos) las masas se guardan en un cache por clave de muestra.

La muestra está en Exploit cuando su masa acumulada supera tau. Como g es
siempre positiva la masa nunca decrece y la región de explotación sólo
crece.
"""

import json
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

import numpy as np

from .core_types import LinearClassifier
from .errors import EngineOrderError
from .exploration import ExplorationStrategy

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"

# Versión del formato de checkpoint
CHECKPOINT_VERSION = 2


@dataclass(frozen=True, eq=False)
class IterationSnapshot:
    """
    Estado congelado de una iteración: clasificador f_t, estrategia g y
    proporciones de grupo usadas para evaluarla, más la masa total de g
    sobre la región de exploración y la cantidad de muestras exploradas.

    normalizer es la masa de g sobre el dominio finito D en la iteración
    (1 si no hay dominio): cada iteración suma g / normalizer a w_t
    """
    t: int
    classifier: LinearClassifier
    strategy: ExplorationStrategy
    group_props: Dict[int, float] = field(default_factory=dict)
    g_total: float = 0.0
    n_explore: int = 0
    normalizer: float = 1.0

    def values(self, features, groups):
        """
        Valores de g de la iteración sobre las muestras recibidas
        """
        groups = np.asarray(groups, dtype=int)
        if not groups.size:
            return np.zeros(0)

        if self.strategy.uses_scores:
            scores = self.classifier.scores(features, groups)
        else:
            scores = np.zeros(len(groups))

        props = None
        if self.strategy.proportion_source:
            # Los grupos ausentes en la iteración tienen proporción 0
            props = {int(z): 0.0 for z in np.unique(groups)}
            props.update(self.group_props)

        return self.strategy.evaluate(scores, groups, props, normalized=True)

    def masses(self, features, groups):
        """
        Masa que la iteración suma a w_t: g normalizada sobre D
        """
        return self.values(features, groups) / self.normalizer

    def explore_probability(self, features, groups):
        """
        Probabilidad de que una muestra de la región de exploración haya
        sido elegida: 1 - (1 - g / g_total) ^ n_explore
        """
        groups = np.asarray(groups, dtype=int)
        if self.n_explore <= 0 or self.g_total <= 0:
            return np.zeros(len(groups))

        share = np.minimum(self.values(features, groups) / self.g_total, 1.0)
        # share == 1: la muestra era la única candidata
        with np.errstate(divide='ignore'):
            missed = self.n_explore * np.log1p(-share)
        return np.where(share >= 1.0, 1.0, -np.expm1(missed))

    def to_dict(self):
        return {
            't': self.t,
            'classifier': self.classifier.to_dict(),
            'strategy': self.strategy.to_dict(),
            'group_props': {str(z): v for z, v in self.group_props.items()},
            'g_total': self.g_total,
            'n_explore': self.n_explore,
            'normalizer': self.normalizer,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['t'],
                   LinearClassifier.from_dict(data['classifier']),
                   ExplorationStrategy.from_dict(data['strategy']),
                   {int(z): v for z, v in data['group_props'].items()},
                   data['g_total'], data['n_explore'], data['normalizer'])


@dataclass(frozen=True, eq=False)
class RegionState:
    """
    Historia de iteraciones y umbral tau. Cada advance devuelve un estado
    nuevo; las lecturas no modifican la historia
    """
    tau: float = 0.5
    history: Tuple[IterationSnapshot, ...] = ()
    discrete: bool = False
    cache: Dict[int, Tuple[int, float]] = field(default_factory=dict,
                                                repr=False)

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError('tau debe ser mayor o igual a 0')
        object.__setattr__(self, 'history', tuple(self.history))

    @property
    def iterations(self):
        return len(self.history)

    def iteration_masses(self, index, features, groups):
        """
        g de la iteración index (1..t) sobre las muestras recibidas
        """
        return self.history[index - 1].masses(features, groups)

    def weights(self, features, groups, keys=None, upto=None):
        """
        Masa acumulada de cada muestra sobre las primeras upto iteraciones
        (todas por defecto)
        """
        features = np.asarray(features, dtype=float)
        groups = np.asarray(groups, dtype=int)
        upto = self.iterations if upto is None else upto

        if self.discrete and keys is not None and upto == self.iterations:
            return self.__cached_weights(features, groups, keys)

        total = np.zeros(len(groups))
        for index in range(1, upto + 1):
            total = total + self.iteration_masses(index, features, groups)

        return total

    def __cached_weights(self, features, groups, keys):
        """
        Suma incremental de masas usando el cache por clave. La suma se hace
        en el mismo orden que sin cache para obtener valores idénticos
        """
        keys = np.asarray(keys, dtype=int)
        counts = np.zeros(len(keys), dtype=int)
        total = np.zeros(len(keys))
        for row, key in enumerate(keys.tolist()):
            count, mass = self.cache.get(key, (0, 0.0))
            if count <= self.iterations:
                counts[row], total[row] = count, mass

        start = int(counts.min()) if counts.size else self.iterations
        for index in range(start + 1, self.iterations + 1):
            pending = counts < index
            if not pending.any():
                continue
            masses = self.iteration_masses(index, features[pending],
                                           groups[pending])
            total[pending] = total[pending] + masses

        for key, mass in zip(keys.tolist(), total.tolist()):
            self.cache[key] = (self.iterations, mass)

        return total

    def in_exploit(self, features, groups, keys=None):
        return self.weights(features, groups, keys) > self.tau

    def weight_of(self, sample):
        """
        Masa acumulada de una única muestra
        """
        return float(self.weights(np.array([sample.features]),
                                  [sample.group])[0])

    def split(self, batch):
        """
        Devuelve las posiciones del lote en Exploit y en Explore
        """
        exploit = self.in_exploit(batch.features, batch.groups, batch.keys)
        return np.flatnonzero(exploit), np.flatnonzero(~exploit)

    def labeling_probabilities(self, features, groups, keys=None):
        """
        Matriz (t, n) con la probabilidad de que cada muestra hubiera sido
        etiquetada en cada iteración registrada: la predicción de f_i si
        estaba en Exploit_i o su probabilidad de exploración si no
        """
        features = np.asarray(features, dtype=float)
        groups = np.asarray(groups, dtype=int)
        probabilities = np.zeros((self.iterations, len(groups)))

        total = np.zeros(len(groups))
        for index, snapshot in enumerate(self.history, start=1):
            exploit = total > self.tau
            if exploit.any():
                probabilities[index - 1, exploit] = \
                    snapshot.classifier.predictions(features[exploit],
                                                    groups[exploit])
            if (~exploit).any():
                probabilities[index - 1, ~exploit] = \
                    snapshot.explore_probability(features[~exploit],
                                                 groups[~exploit])
            total = total + snapshot.masses(features, groups)

        return probabilities

    def advance(self, t, classifier, strategy, group_props=None, g_total=0.0,
                n_explore=0, support=None):
        """
        Registra la iteración t y devuelve el nuevo estado. support es el
        dominio finito (features, grupos) sobre el que se normaliza g
        """
        if t != self.iterations + 1:
            raise EngineOrderError('Se esperaba registrar la iteración {} y '
                                   'se recibió la {}'.format(
                                       self.iterations + 1, t))

        snapshot = IterationSnapshot(
            t, classifier, strategy,
            {int(z): float(v) for z, v in (group_props or {}).items()},
            float(g_total), int(n_explore))
        if support is not None:
            total = float(snapshot.values(*support).sum())
            if total <= 0:
                raise ValueError('La masa de g sobre el dominio debe ser '
                                 'positiva')
            snapshot = replace(snapshot, normalizer=total)

        return RegionState(self.tau, self.history + (snapshot,),
                           self.discrete, dict(self.cache))

    def to_json(self):
        """
        Serializa el estado en JSON versionado. El cache no se guarda
        porque se reconstruye con los mismos valores
        """
        return json.dumps({
            'version': CHECKPOINT_VERSION,
            'tau': self.tau,
            'discrete': self.discrete,
            'history': [snapshot.to_dict() for snapshot in self.history],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        if data.get('version') != CHECKPOINT_VERSION:
            raise ValueError('Versión de checkpoint no soportada: '
                             '{}'.format(data.get('version')))

        return cls(data['tau'],
                   tuple(IterationSnapshot.from_dict(item)
                         for item in data['history']),
                   data['discrete'])


def weight_of(state, sample):
    return state.weight_of(sample)


def partition(state, batch):
    """
    Divide el lote en (S_t ∩ Exploit_t, S_t ∩ Explore_t)
    """
    exploit, explore = state.split(batch)
    return batch.subset(exploit), batch.subset(explore)


def advance(state, t, classifier, strategy, group_props=None, g_total=0.0,
            n_explore=0, support=None):
    return state.advance(t, classifier, strategy, group_props, g_total,
                         n_explore, support)
