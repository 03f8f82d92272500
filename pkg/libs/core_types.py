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
Módulo con el vocabulario compartido de la aplicación:
    - Sample e IterationBatch: muestras y lotes de arribos por iteración
    - LabeledSet: muestras cuyo resultado ya fue observado
    - UtilityCoefficients: coeficientes de las métricas de utilidad
    - LinearClassifier: clasificador logístico con umbral de decisión
    - AlgorithmConfig: parámetros del algoritmo de recolección y predicción

Todos los tipos son inmutables y pueden compartirse entre hilos
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DimensionError, EngineOrderError

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"

# Estrategias de exploración soportadas
STRATEGIES = ('uniform', 'clf', 'fair', 'inverse', 'inverse_clf')

# Utilidades que pueden optimizarse en el aprendizaje
UTILITIES = ('revenue', 'accuracy')

# Umbral que rechaza todo: mayor que cualquier score, incluso expit = 1.0
REJECT_ALL = float(np.nextafter(1.0, 2.0))


def _frozen(array, dtype):
    """
    Devuelve una copia de solo lectura del array recibido
    """
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Sample:
    """
    Vector de features estandarizado, grupo protegido (1..p) y resultado
    opcional (None hasta que se observa)
    """
    features: Tuple[float, ...]
    group: int
    label: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'features',
                           tuple(float(value) for value in self.features))
        if int(self.group) < 1:
            raise ValueError('El grupo debe ser un entero mayor o igual a 1')
        if self.label not in (None, 0, 1):
            raise ValueError('La etiqueta debe ser 0, 1 o None')


@dataclass(frozen=True, eq=False)
class IterationBatch:
    """
    Conjunto S_t de muestras que arriban en la iteración t. Las etiquetas
    existen (simulación) pero el motor sólo puede leerlas mediante reveal,
    que exige una predicción positiva previa
    """
    t: int
    features: np.ndarray
    groups: np.ndarray
    hidden_labels: np.ndarray = field(repr=False)
    keys: Optional[np.ndarray] = None

    def __post_init__(self):
        features = _frozen(self.features, float)
        if features.ndim == 1:
            features = _frozen(features.reshape(len(features), -1), float)
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'groups', _frozen(self.groups, int))
        object.__setattr__(self, 'hidden_labels',
                           _frozen(self.hidden_labels, int))
        if self.keys is not None:
            object.__setattr__(self, 'keys', _frozen(self.keys, int))

        size = len(self.features)
        if len(self.groups) != size or len(self.hidden_labels) != size:
            raise DimensionError('features, grupos y etiquetas deben tener '
                                 'la misma cantidad de filas')
        if size and self.groups.min() < 1:
            raise ValueError('Los grupos deben numerarse desde 1')

    @property
    def size(self):
        return len(self.features)

    @property
    def dimension(self):
        return self.features.shape[1]

    @property
    def samples(self) -> List[Sample]:
        """
        Devuelve las muestras del lote sin sus etiquetas
        """
        return [Sample(tuple(row), int(group))
                for row, group in zip(self.features, self.groups)]

    def subset(self, indices):
        """
        Devuelve un nuevo lote con las filas indicadas
        """
        indices = np.asarray(indices, dtype=int)
        keys = None if self.keys is None else self.keys[indices]
        return IterationBatch(self.t, self.features[indices],
                              self.groups[indices],
                              self.hidden_labels[indices], keys)

    def reveal(self, indices, predicted):
        """
        Devuelve las etiquetas de las filas indicadas. Sólo pueden revelarse
        muestras clasificadas positivamente (contrato de feedback parcial)
        """
        indices = np.asarray(indices, dtype=int)
        predicted = np.asarray(predicted)

        if indices.size and not np.all(predicted[indices] == 1):
            raise EngineOrderError('Se intentó observar la etiqueta de una '
                                   'muestra que no fue clasificada positiva')

        return self.hidden_labels[indices].copy()

    def ground_truth(self):
        """
        Devuelve todas las etiquetas. Uso exclusivo de reportes y baselines
        con privilegio de etiquetas completas
        """
        return self.hidden_labels.copy()


@dataclass(frozen=True, eq=False)
class LabeledSet:
    """
    Conjunto L_t de muestras observadas en la iteración t
    """
    t: int
    features: np.ndarray
    groups: np.ndarray
    labels: np.ndarray
    keys: Optional[np.ndarray] = None

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(len(features), -1)
        object.__setattr__(self, 'features', _frozen(features, float))
        object.__setattr__(self, 'groups', _frozen(self.groups, int))
        object.__setattr__(self, 'labels', _frozen(self.labels, int))
        if self.keys is not None:
            object.__setattr__(self, 'keys', _frozen(self.keys, int))

    @property
    def size(self):
        return len(self.labels)

    @classmethod
    def from_batch(cls, batch, indices, labels):
        """
        Arma el conjunto observado a partir de las filas reveladas del lote
        """
        indices = np.asarray(indices, dtype=int)
        keys = None if batch.keys is None else batch.keys[indices]
        return cls(batch.t, batch.features[indices], batch.groups[indices],
                   labels, keys)


@dataclass(frozen=True)
class UtilityCoefficients:
    """
    Tupla gamma de la métrica de utilidad. El campo g<y><f> es el pago de la
    celda con resultado y y predicción f: g01 es un falso positivo y g11 un
    verdadero positivo
    """
    g00: float
    g01: float
    g10: float
    g11: float

    @classmethod
    def accuracy(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def positive_rate(cls):
        return cls(0.0, 1.0, 0.0, 1.0)

    @classmethod
    def error_rate(cls):
        return cls(0.0, 1.0, 1.0, 0.0)

    @classmethod
    def revenue(cls, c1, c2):
        """
        Coeficientes (0, -c1, 0, c2). c1 y c2 son magnitudes positivas
        """
        if c1 <= 0 or c2 <= 0:
            raise ConfigError('Los coeficientes c1 y c2 deben ser positivos')
        return cls(0.0, -float(c1), 0.0, float(c2))

    @classmethod
    def tpr(cls, positive_rate):
        """
        Coeficientes de la tasa de verdaderos positivos de un grupo con
        Pr[Y=1 | Z=z] = positive_rate
        """
        if positive_rate <= 0:
            raise ValueError('El grupo no tiene resultados positivos')
        return cls(0.0, 0.0, 0.0, 1.0 / positive_rate)

    def as_matrix(self):
        """
        Devuelve la matriz 2x2 indexada por [resultado][predicción]
        """
        return np.array([[self.g00, self.g01], [self.g10, self.g11]])

    @property
    def scale(self):
        """
        Mayor coeficiente en valor absoluto, útil para comparar utilidades
        """
        return float(np.abs(self.as_matrix()).max()) or 1.0


@dataclass(frozen=True, eq=False)
class LinearClassifier:
    """
    Clasificador logístico con umbral. weights tiene una fila por grupo
    (clase derivada de una clase base por grupo) o una única fila
    compartida por todos los grupos
    """
    weights: np.ndarray
    intercepts: np.ndarray
    threshold: float = 0.5

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim == 1:
            weights = weights.reshape(1, -1)
        intercepts = np.atleast_1d(np.asarray(self.intercepts, dtype=float))
        if intercepts.shape[0] != weights.shape[0]:
            raise DimensionError('Se requiere un intercepto por fila de pesos')
        if not 0.0 <= float(self.threshold) <= REJECT_ALL:
            raise ValueError('El umbral debe estar en [0, 1] o ser '
                             'REJECT_ALL')

        object.__setattr__(self, 'weights', _frozen(weights, float))
        object.__setattr__(self, 'intercepts', _frozen(intercepts, float))
        object.__setattr__(self, 'threshold', float(self.threshold))

    @classmethod
    def zeros(cls, dimension, groups=1, threshold=0.5):
        return cls(np.zeros((groups, dimension)), np.zeros(groups), threshold)

    @property
    def dimension(self):
        return self.weights.shape[1]

    @property
    def group_specific(self):
        return self.weights.shape[0] > 1

    def rows(self, groups):
        """
        Devuelve la fila de pesos que corresponde a cada grupo
        """
        groups = np.asarray(groups, dtype=int)
        if not self.group_specific:
            return np.zeros(len(groups), dtype=int)
        if groups.size and groups.max() > self.weights.shape[0]:
            raise DimensionError('El clasificador no tiene pesos para el '
                                 'grupo {}'.format(int(groups.max())))
        return groups - 1

    def decision_function(self, features, groups):
        features = np.asarray(features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(1, -1)
        if features.shape[1] != self.dimension:
            raise DimensionError(
                'Dimensión de features {} distinta a la del clasificador '
                '{}'.format(features.shape[1], self.dimension))

        rows = self.rows(groups)
        return np.einsum('ij,ij->i', features, self.weights[rows]) \
            + self.intercepts[rows]

    def scores(self, features, groups):
        """
        Devuelve la verosimilitud logística de cada fila
        """
        return expit(self.decision_function(features, groups))

    def predictions(self, features, groups):
        """
        Clasifica positivo cuando el score alcanza el umbral (los empates
        son positivos)
        """
        return (self.scores(features, groups) >= self.threshold).astype(int)

    def with_threshold(self, threshold):
        return LinearClassifier(self.weights, self.intercepts, threshold)

    def to_dict(self):
        return {
            'weights': self.weights.tolist(),
            'intercepts': self.intercepts.tolist(),
            'threshold': self.threshold,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(np.array(data['weights'], dtype=float),
                   np.array(data['intercepts'], dtype=float),
                   data['threshold'])

    def __eq__(self, other):
        if not isinstance(other, LinearClassifier):
            return NotImplemented
        return (np.array_equal(self.weights, other.weights)
                and np.array_equal(self.intercepts, other.intercepts)
                and self.threshold == other.threshold)

    __hash__ = None


def score(classifier, sample):
    """
    Score logístico de una muestra en (0, 1)
    """
    return float(classifier.scores(np.array([sample.features]),
                                   [sample.group])[0])


def predict(classifier, sample):
    """
    Predicción binaria de una muestra
    """
    return int(score(classifier, sample) >= classifier.threshold)


@dataclass(frozen=True)
class AlgorithmConfig:
    """
    Parámetros del algoritmo. alpha_exploit(t) = min(a * t^b, alpha - epsilon)

    budget_form = text usa el presupuesto sin epsilon. Puede superar la cota
    de FDR en el peor caso, por eso las verificaciones exactas sólo aceptan
    step
    """
    alpha: float = 0.15
    alpha_exploit_scale: float = 0.075
    alpha_exploit_exponent: float = 0.2
    epsilon: float = 1e-3
    lambda_: float = 0.0
    tau: float = 0.5
    beta: float = 0.0
    exploration_strategy: str = 'clf'
    exploit_fairness: Optional[float] = None
    seed: int = 0
    group_specific: bool = True
    budget_form: str = 'step'
    exploration_enabled: bool = True
    utility: str = 'revenue'
    c1: float = 500.0
    c2: float = 200.0
    learning_rate: float = 0.1
    penalty_start: float = 0.01
    penalty_growth: float = 10.0
    penalty_rounds: int = 5
    steps_per_round: int = 500
    tolerance: float = 1e-3

    def __post_init__(self):
        checks = (
            ('alpha', 0 < self.alpha <= 1, 'debe estar en (0, 1]'),
            ('epsilon', 0 <= self.epsilon < self.alpha,
             'debe estar en [0, alpha)'),
            ('lambda', 0 <= self.lambda_ <= 1, 'debe estar en [0, 1]'),
            ('tau', 0 < self.tau <= 1, 'debe estar en (0, 1]'),
            ('beta', 0 <= self.beta <= 1, 'debe estar en [0, 1]'),
            ('alpha_exploit_scale', self.alpha_exploit_scale > 0,
             'debe ser positivo'),
            ('exploration_strategy', self.exploration_strategy in STRATEGIES,
             'no es una estrategia soportada'),
            ('exploit_fairness', self.exploit_fairness is None
             or 0 <= self.exploit_fairness <= 1, 'debe estar en [0, 1]'),
            ('budget_form', self.budget_form in ('step', 'text'),
             'debe ser step o text'),
            ('utility', self.utility in UTILITIES,
             'no es una utilidad soportada'),
            ('c1', self.c1 > 0, 'debe ser positivo'),
            ('c2', self.c2 > 0, 'debe ser positivo'),
            ('learning_rate', self.learning_rate > 0, 'debe ser positivo'),
            ('penalty_rounds', self.penalty_rounds >= 1,
             'debe ser al menos 1'),
            ('steps_per_round', self.steps_per_round >= 1,
             'debe ser al menos 1'),
        )
        for name, valid, message in checks:
            if not valid:
                raise ConfigError('Error de configuración en '
                                  '[algorithm.{}]: {}'.format(name, message))

    @property
    def alpha_exploit_schedule(self):
        return (self.alpha_exploit_scale, self.alpha_exploit_exponent)

    def alpha_exploit(self, t):
        """
        Cota de FDR de la explotación en la iteración t
        """
        if t < 1:
            raise ValueError('La iteración debe ser mayor o igual a 1')
        scheduled = self.alpha_exploit_scale * float(t) ** \
            self.alpha_exploit_exponent
        return min(scheduled, self.alpha - self.epsilon)

    def gamma(self):
        """
        Coeficientes de la utilidad optimizada
        """
        if self.utility == 'revenue':
            return UtilityCoefficients.revenue(self.c1, self.c2)
        return UtilityCoefficients.accuracy()

    def evolve(self, **changes):
        return replace(self, **changes)
