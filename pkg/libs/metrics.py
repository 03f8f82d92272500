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
Módulo con las métricas de utilidad, error y equidad:
    - utility / group_utility: utilidad dada una tupla gamma
    - revenue: ingresos c2 * TP - c1 * FP
    - empirical_fdr: tasa de falsos descubrimientos
    - statistical_rate_disparity / tpr_disparity: disparidades entre grupos

Las disparidades con más de dos grupos se agregan con el máximo sobre pares
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .errors import EmptyRecordsError, GroupAbsentError, UndefinedFDRError

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"


@dataclass(frozen=True)
class PredictionRecord:
    predicted: int
    actual: int
    group: int


@dataclass(frozen=True, eq=False)
class RecordSet:
    """
    Registros de predicción en forma de columnas
    """
    predicted: np.ndarray
    actual: np.ndarray
    groups: np.ndarray

    @classmethod
    def from_records(cls, records):
        records = list(records)
        return cls(np.array([r.predicted for r in records], dtype=int),
                   np.array([r.actual for r in records], dtype=int),
                   np.array([r.group for r in records], dtype=int))

    @property
    def size(self):
        return len(self.predicted)

    def where(self, mask):
        return RecordSet(self.predicted[mask], self.actual[mask],
                         self.groups[mask])


def as_record_set(records):
    """
    Acepta una lista de PredictionRecord o un RecordSet
    """
    if isinstance(records, RecordSet):
        return records
    return RecordSet.from_records(records)


def confusion(records, weights=None):
    """
    Devuelve la matriz 2x2 de conteos (o pesos) indexada por
    [resultado][predicción]
    """
    records = as_record_set(records)
    weights = np.ones(records.size) if weights is None else \
        np.asarray(weights, dtype=float)

    matrix = np.zeros((2, 2))
    np.add.at(matrix, (records.actual, records.predicted), weights)

    return matrix


def utility(records, gamma):
    """
    Util(f, gamma) = suma de gamma_ij * Pr[celda ij] con probabilidades
    empíricas sobre los registros
    """
    records = as_record_set(records)
    if not records.size:
        raise EmptyRecordsError('No hay registros para calcular la utilidad')

    return float((gamma.as_matrix() * confusion(records)).sum()
                 / records.size)


def group_utility(records, gamma, z):
    """
    Utilidad restringida a los registros del grupo z
    """
    records = as_record_set(records)
    subset = records.where(records.groups == z)
    if not subset.size:
        raise GroupAbsentError('El grupo {} no tiene registros'.format(z))

    return utility(subset, gamma)


def revenue(records, c1, c2):
    """
    Ingresos c2 * TP - c1 * FP, es decir Util(f, gamma_rev) por la cantidad
    de registros
    """
    records = as_record_set(records)
    if not records.size:
        raise EmptyRecordsError('No hay registros para calcular ingresos')

    positive = records.predicted == 1
    true_positives = int(np.sum(positive & (records.actual == 1)))
    false_positives = int(np.sum(positive & (records.actual == 0)))

    return float(c2 * true_positives - c1 * false_positives)


def empirical_fdr(records):
    """
    Proporción de falsos positivos entre las predicciones positivas
    """
    records = as_record_set(records)
    positive = records.predicted == 1
    if not positive.any():
        raise UndefinedFDRError('FDR indefinido: no hay predicciones '
                                'positivas')

    return float(np.sum(positive & (records.actual == 0)) / positive.sum())


def acceptance_rates(records):
    """
    Tasa de aceptación de cada grupo presente
    """
    records = as_record_set(records)
    return {int(z): float(records.predicted[records.groups == z].mean())
            for z in np.unique(records.groups)}


def true_positive_rates(records):
    """
    Tasa de verdaderos positivos de cada grupo con al menos un positivo real.
    Los grupos sin positivos reales se excluyen
    """
    records = as_record_set(records)
    rates = {}
    for z in np.unique(records.groups):
        actual = (records.groups == z) & (records.actual == 1)
        if not actual.any():
            logging.warning('El grupo %s no tiene positivos reales y se '
                            'excluye de la disparidad de TPR', int(z))
            continue
        rates[int(z)] = float(records.predicted[actual].mean())

    return rates


def max_pairwise_gap(rates):
    """
    Máxima diferencia absoluta entre pares de grupos
    """
    values = list(rates.values())
    if len(values) < 2:
        return 0.0

    return float(max(abs(a - b) for a, b in combinations(values, 2)))


class Disparity(NamedTuple):
    """
    Disparidad entre grupos. single_group indica que no había dos grupos
    para comparar y el valor 0 es convencional
    """
    value: float
    single_group: bool


def statistical_rate_disparity(records):
    rates = acceptance_rates(records)
    if len(rates) < 2:
        logging.warning('Un único grupo presente: statistical rate = 0')

    return Disparity(max_pairwise_gap(rates), len(rates) < 2)


def tpr_disparity(records):
    rates = true_positive_rates(records)
    if len(rates) < 2:
        logging.warning('Menos de dos grupos con positivos reales: '
                        'disparidad de TPR = 0')

    return Disparity(max_pairwise_gap(rates), len(rates) < 2)
