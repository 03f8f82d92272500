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
Módulo de datos:
    - load_and_preprocess: lectura de CSV, filtro de grupos, etiqueta
      binaria, one-hot de categóricas y estandarización
    - make_synthetic: dataset sintético de dos grupos
    - make_stream: división en S_0 y lotes S_1..S_T
    - build_biased_initial: L_0 / U_0 sesgados hacia la etiqueta 1
    - make_exact_domain: dominios finitos con mu exacta para verificación
"""

import json
import logging
import os
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit

from .core_types import IterationBatch, LabeledSet, LinearClassifier
from .errors import DatasetError, DomainError
from .validation import check_columns

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"

# Modos de división del dataset en iteraciones
SPLIT_MODES = ('partition', 'bootstrap')

# Peso de las features one-hot en los clasificadores de dominios exactos
MASK_LOGIT = 10.0

# Cantidad máxima de puntos para enumerar todos los subconjuntos
MAX_SUBSET_POINTS = 16

# Reglas de etiqueta positiva, de la más larga a la más corta
_RULES = ('>=', '<=', '!=', '>', '<', '=')


@dataclass(frozen=True)
class DatasetSpec:
    """
    Descripción del dataset y de su división en iteraciones
    """
    path: str = ''
    features: Tuple[str, ...] = ()
    categorical: Tuple[str, ...] = ()
    label: str = ''
    label_positive: str = ''
    group: str = ''
    group_map: Dict[str, int] = field(default_factory=dict)
    split_mode: str = 'partition'
    iterations: int = 40
    bootstrap_size: int = 500
    initial_size: int = 500
    positive_share: float = 0.9
    hidden_groups: Tuple[int, ...] = ()
    source: str = 'csv'
    synthetic_rows: int = 20000
    synthetic_minority_share: float = 0.2
    cache: str = ''

    def __post_init__(self):
        if self.iterations < 1:
            raise DatasetError('La cantidad de iteraciones debe ser al '
                               'menos 1')
        if self.split_mode not in SPLIT_MODES:
            raise DatasetError('Modo de división no soportado: '
                               '{}'.format(self.split_mode))
        if self.source == 'csv' and self.group_map and self.n_groups < 2:
            logging.warning('Un único grupo protegido: las disparidades '
                            'serán 0')

    @property
    def n_groups(self):
        if self.source == 'synthetic' or not self.group_map:
            return 2
        return len(set(self.group_map.values()))


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Features estandarizadas, grupos 1..p y etiquetas binarias
    """
    features: np.ndarray
    groups: np.ndarray
    labels: np.ndarray
    columns: Tuple[str, ...] = ()
    scaling: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    n_groups: int = 2

    @property
    def size(self):
        return len(self.labels)

    @property
    def dimension(self):
        return self.features.shape[1]

    def batch(self, t, indices):
        """
        Lote de la iteración t con las filas indicadas. La clave de cada
        muestra es su número de fila
        """
        indices = np.asarray(indices, dtype=int)
        return IterationBatch(t, self.features[indices], self.groups[indices],
                              self.labels[indices], indices)


@dataclass(frozen=True, eq=False)
class Stream:
    """
    S_0 y los lotes S_1..S_T de una repetición
    """
    initial: IterationBatch
    batches: Tuple[IterationBatch, ...]

    @property
    def iterations(self):
        return len(self.batches)


def parse_label_rule(rule):
    """
    Devuelve una función que convierte la columna de etiquetas en 0/1 según
    la regla: >50000, >=x, <x, <=x, =good o !=bad
    """
    rule = str(rule).strip()
    for operator in _RULES:
        if rule.startswith(operator):
            value = rule[len(operator):].strip()
            break
    else:
        raise DatasetError('Regla de etiqueta positiva inválida: '
                           '{}'.format(rule))

    if operator in ('=', '!='):
        def apply(column):
            matches = column.astype(str).str.strip() == value
            return (matches if operator == '=' else ~matches).astype(int)
        return apply

    try:
        threshold = float(value)
    except ValueError:
        raise DatasetError('La regla {} requiere un valor '
                           'numérico'.format(rule))

    compare = {
        '>': np.greater, '>=': np.greater_equal,
        '<': np.less, '<=': np.less_equal,
    }[operator]

    def apply(column):
        values = pd.to_numeric(column, errors='coerce')
        if values.isna().any():
            raise DatasetError('La columna de etiquetas tiene valores no '
                               'numéricos')
        return compare(values, threshold).astype(int)

    return apply


def standardize(frame, scaling=None):
    """
    Escala cada columna a media 0 y desvío 1 (ddof=0). Sin parámetros
    guardados los calcula y descarta las columnas de varianza nula. Devuelve
    el frame escalado y los parámetros usados
    """
    if scaling is None:
        scaling = {}
        for column in frame.columns:
            mean = float(frame[column].mean())
            std = float(frame[column].std(ddof=0))
            if not std > 0:
                logging.warning('La columna %s tiene varianza nula y se '
                                'descarta', column)
                continue
            scaling[column] = (mean, std)

    missing = set(scaling) - set(frame.columns)
    if missing:
        raise DatasetError('Faltan columnas para estandarizar: '
                           '{}'.format(sorted(missing)))

    scaled = pd.DataFrame({column: (frame[column] - mean) / std
                           for column, (mean, std) in scaling.items()},
                          index=frame.index)
    return scaled, scaling


def _read_cache(spec):
    """
    Lee el snapshot columnar y sus parámetros si existen
    """
    if not spec.cache or not os.path.exists(spec.cache):
        return None

    frame = pd.read_parquet(spec.cache)
    with open(spec.cache + '.json', 'r', encoding='utf-8') as handle:
        meta = json.load(handle)

    columns = tuple(meta['columns'])
    return Dataset(frame[list(columns)].to_numpy(dtype=float),
                   frame['__group'].to_numpy(dtype=int),
                   frame['__label'].to_numpy(dtype=int), columns,
                   {key: tuple(value) for key, value in
                    meta['scaling'].items()},
                   meta['n_groups'])


def _write_cache(spec, dataset):
    directory = os.path.dirname(spec.cache)
    if directory:
        os.makedirs(directory, exist_ok=True)

    frame = pd.DataFrame(dataset.features, columns=list(dataset.columns))
    frame['__group'] = dataset.groups
    frame['__label'] = dataset.labels
    frame.to_parquet(spec.cache, index=False)

    with open(spec.cache + '.json', 'w', encoding='utf-8') as handle:
        json.dump({'columns': list(dataset.columns),
                   'scaling': {key: list(value) for key, value in
                               dataset.scaling.items()},
                   'n_groups': dataset.n_groups}, handle, sort_keys=True)


def load_and_preprocess(spec, seed=0):
    """
    Carga el dataset descripto por spec
    """
    if spec.source == 'synthetic':
        return make_synthetic(spec.synthetic_rows,
                              spec.synthetic_minority_share, seed)

    cached = _read_cache(spec)
    if cached is not None:
        logging.debug('Dataset leído del cache %s', spec.cache)
        return cached

    if not spec.path or not os.path.exists(spec.path):
        raise DatasetError('No se encontró el dataset: {}'.format(spec.path))

    frame = pd.read_csv(spec.path, skipinitialspace=True)
    check_columns(frame, list(spec.features) + [spec.label, spec.group],
                  spec.path, DatasetError)

    # Me quedo con las filas de los grupos mapeados
    group_values = frame[spec.group].astype(str).str.strip()
    if spec.group_map:
        frame = frame[group_values.isin(spec.group_map)]
        group_values = group_values[frame.index]
    if frame.empty:
        raise DatasetError('El dataset quedó vacío luego del filtro de '
                           'grupos')

    if spec.group_map:
        groups = group_values.map(spec.group_map).to_numpy(dtype=int)
    else:
        codes = {value: position + 1 for position, value in
                 enumerate(sorted(group_values.unique()))}
        groups = group_values.map(codes).to_numpy(dtype=int)

    labels = np.asarray(parse_label_rule(spec.label_positive)(
        frame[spec.label]), dtype=int)

    numeric = [column for column in spec.features
               if column not in spec.categorical]
    categorical = [column for column in spec.features
                   if column in spec.categorical]
    table = frame[numeric].apply(pd.to_numeric, errors='coerce')
    if table.isna().any().any():
        raise DatasetError('Las columnas numéricas tienen valores no '
                           'numéricos')
    if categorical:
        dummies = pd.get_dummies(frame[categorical].astype(str),
                                 dtype=float)
        table = pd.concat([table, dummies], axis=1)

    scaled, scaling = standardize(table.astype(float))
    if scaled.shape[1] == 0:
        raise DatasetError('No quedaron features luego de la '
                           'estandarización')

    dataset = Dataset(scaled.to_numpy(dtype=float), groups, labels,
                      tuple(scaled.columns), scaling,
                      max(spec.n_groups, int(groups.max())))

    if spec.cache:
        _write_cache(spec, dataset)

    return dataset


def make_synthetic(rows=20000, minority_share=0.2, seed=0, dimension=4):
    """
    Dataset sintético de dos grupos. El grupo 2 (minoritario) tiene las
    features desplazadas, de modo que un clasificador aprendido sobre el
    grupo mayoritario lo subestima
    """
    if rows < 2 or not 0 < minority_share < 1:
        raise DatasetError('Parámetros inválidos para el dataset sintético')

    rng = np.random.default_rng(seed)
    groups = np.where(rng.random(rows) < minority_share, 2, 1)
    features = rng.normal(size=(rows, dimension))
    features[groups == 2] -= 0.75

    coefficients = np.linspace(1.5, 0.5, dimension)
    logits = features @ coefficients + np.where(groups == 2, 1.5, 0.5)
    labels = (rng.random(rows) < expit(logits)).astype(int)

    columns = tuple('x{}'.format(i + 1) for i in range(dimension))
    frame = pd.DataFrame(features, columns=list(columns))
    scaled, scaling = standardize(frame)

    return Dataset(scaled.to_numpy(dtype=float), groups, labels,
                   tuple(scaled.columns), scaling, 2)


def make_stream(dataset, spec, seed):
    """
    Divide el dataset en S_0 y T lotes. En modo partition son T+1 partes
    iguales y disjuntas (el resto se descarta); en modo bootstrap S_0 es
    una extracción sin reemplazo de initial_size filas y cada lote una
    extracción con reemplazo de bootstrap_size filas del resto
    """
    rng = np.random.default_rng(seed)
    order = rng.permutation(dataset.size)
    iterations = spec.iterations

    if spec.split_mode == 'partition':
        part = dataset.size // (iterations + 1)
        if part < 1:
            raise DatasetError('El dataset tiene {} filas, insuficientes '
                               'para {} partes'.format(dataset.size,
                                                       iterations + 1))
        parts = [order[i * part:(i + 1) * part]
                 for i in range(iterations + 1)]
        return Stream(dataset.batch(0, parts[0]),
                      tuple(dataset.batch(t, parts[t])
                            for t in range(1, iterations + 1)))

    if dataset.size <= spec.initial_size:
        raise DatasetError('El dataset tiene {} filas, insuficientes para '
                           'S_0 de {} filas'.format(dataset.size,
                                                    spec.initial_size))

    initial, rest = order[:spec.initial_size], order[spec.initial_size:]
    batches = tuple(
        dataset.batch(t, rest[rng.integers(0, len(rest),
                                           size=spec.bootstrap_size)])
        for t in range(1, iterations + 1))

    return Stream(dataset.batch(0, initial), batches)


def initial_inclusion(positive_share, n_groups, hidden_groups=()):
    """
    Probabilidad de que una muestra de S_0 con grupo z y etiqueta y haya
    entrado en L_0
    """
    table = {}
    for z in range(1, n_groups + 1):
        table[(z, 1)] = 0.0 if z in hidden_groups else float(positive_share)
        table[(z, 0)] = 1.0 - float(positive_share)
    return table


def build_biased_initial(initial, positive_share, seed, hidden_groups=(),
                         n_groups=None):
    """
    Arma L_0 con positive_share de las filas con etiqueta 1 y
    1 - positive_share de las filas con etiqueta 0. Devuelve (L_0, U_0,
    tabla de inclusión). Las filas positivas de hidden_groups nunca entran
    en L_0
    """
    if not 0 <= positive_share <= 1:
        raise DatasetError('positive_share debe estar en [0, 1]')

    labels = initial.ground_truth()
    if not (labels == 1).any() or not (labels == 0).any():
        raise DatasetError('S_0 debe contener ambas etiquetas')

    rng = np.random.default_rng(seed)
    hidden = np.isin(initial.groups, list(hidden_groups))

    chosen = []
    for label, share in ((1, positive_share), (0, 1.0 - positive_share)):
        excluded = hidden if label == 1 else np.zeros_like(hidden)
        candidates = np.flatnonzero((labels == label) & ~excluded)
        count = int(round(share * len(candidates)))
        chosen.append(rng.choice(candidates, size=count, replace=False))

    selected = np.sort(np.concatenate(chosen)).astype(int)
    remaining = np.setdiff1d(np.arange(initial.size), selected)

    labeled = LabeledSet.from_batch(initial, selected, labels[selected])
    unlabeled = initial.subset(remaining)

    groups = n_groups or int(initial.groups.max())
    return labeled, unlabeled, initial_inclusion(positive_share, groups,
                                                 hidden_groups)


@dataclass(frozen=True, eq=False)
class ExactDomain:
    """
    Dominio finito D con masa mu(x, z) y probabilidad Pr[Y=1 | x, z] por
    punto. Las features son one-hot sobre los puntos, de modo que un
    clasificador lineal puede representar cualquier subconjunto
    """
    groups: np.ndarray
    mass: np.ndarray
    label_probs: np.ndarray
    family: str = 'subsets'
    epsilon: float = 1e-3
    f0_mask: Optional[np.ndarray] = None
    name: str = ''

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        label_probs = np.asarray(self.label_probs, dtype=float)
        groups = np.asarray(self.groups, dtype=int)

        if not len(mass) == len(label_probs) == len(groups) or not len(mass):
            raise DomainError('mass, label_probs y groups deben tener el '
                              'mismo largo no nulo')
        if mass.min() < 0 or abs(mass.sum() - 1.0) > 1e-9:
            raise DomainError('mu debe ser no negativa y sumar 1')
        if label_probs.min() < 0 or label_probs.max() > 1:
            raise DomainError('Las probabilidades de etiqueta deben estar en '
                              '[0, 1]')
        if groups.min() < 1:
            raise DomainError('Los grupos deben numerarse desde 1')
        if self.family not in ('subsets', 'thresholds'):
            raise DomainError('Familia de hipótesis no soportada: '
                              '{}'.format(self.family))
        if self.family == 'subsets' and len(mass) > MAX_SUBSET_POINTS:
            raise DomainError('La familia de subconjuntos admite hasta {} '
                              'puntos'.format(MAX_SUBSET_POINTS))

        object.__setattr__(self, 'mass', mass)
        object.__setattr__(self, 'label_probs', label_probs)
        object.__setattr__(self, 'groups', groups)
        if self.f0_mask is not None:
            object.__setattr__(self, 'f0_mask',
                               np.asarray(self.f0_mask, dtype=bool))

    @property
    def size(self):
        return len(self.mass)

    @property
    def n_groups(self):
        return int(self.groups.max())

    @property
    def features(self):
        return np.eye(self.size)

    @property
    def points(self):
        """
        Lista de (clave, grupo) de cada punto
        """
        return [(key, int(group)) for key, group in enumerate(self.groups)]

    @property
    def mu(self):
        """
        Probabilidad exacta de cada (punto, etiqueta)
        """
        table = {}
        for key, (mass, prob) in enumerate(zip(self.mass, self.label_probs)):
            table[(key, 1)] = float(mass * prob)
            table[(key, 0)] = float(mass * (1 - prob))
        return table

    @property
    def low_mass(self):
        """
        Puntos con mu(x, z) <= epsilon / |D|
        """
        return self.mass <= self.epsilon / self.size

    def hypotheses(self):
        """
        Matriz booleana con una fila por clasificador enumerable: todos los
        subconjuntos de puntos o umbrales 1-D por grupo (los puntos de cada
        grupo se ordenan por clave)
        """
        if self.family == 'subsets':
            codes = np.arange(2 ** self.size)[:, None]
            return (codes >> np.arange(self.size)) & 1 == 1

        per_group = []
        for z in range(1, self.n_groups + 1):
            members = np.flatnonzero(self.groups == z)
            per_group.append([members[k:] for k in range(len(members) + 1)])

        masks = []
        for choice in product(*per_group):
            mask = np.zeros(self.size, dtype=bool)
            for members in choice:
                mask[members] = True
            masks.append(mask)
        return np.array(masks)

    def classifier_from_mask(self, mask, group_specific=True):
        """
        Clasificador lineal que acepta exactamente los puntos de mask
        """
        mask = np.asarray(mask, dtype=bool)
        logits = np.where(mask, MASK_LOGIT, -MASK_LOGIT)
        rows = self.n_groups if group_specific else 1
        return LinearClassifier(np.tile(logits, (rows, 1)), np.zeros(rows),
                                0.5)

    def f0(self, group_specific=True):
        if self.f0_mask is None:
            raise DomainError('El dominio no tiene clasificador histórico')
        return self.classifier_from_mask(self.f0_mask, group_specific)

    def accepted(self, classifier):
        """
        Máscara de puntos aceptados por un clasificador
        """
        return classifier.predictions(self.features, self.groups) == 1

    def cells(self, masks, region=None, group=None):
        """
        Masas exactas (tp, fp, fn, tn) de cada fila de masks, restringidas a
        la región y al grupo indicados
        """
        masks = np.atleast_2d(np.asarray(masks, dtype=float))
        weight = self.mass.copy()
        if region is not None:
            weight = weight * np.asarray(region, dtype=float)
        if group is not None:
            weight = weight * (self.groups == group)

        positive = weight * self.label_probs
        negative = weight * (1 - self.label_probs)
        tp = masks @ positive
        fp = masks @ negative
        return tp, fp, positive.sum() - tp, negative.sum() - fp

    def utility(self, masks, gamma, region=None, group=None):
        """
        Util_mu de cada máscara condicionada a la región y al grupo. Devuelve
        nan si la región no tiene masa
        """
        tp, fp, fn, tn = self.cells(masks, region, group)
        total = tp + fp + fn + tn
        value = gamma.g11 * tp + gamma.g01 * fp + gamma.g10 * fn + \
            gamma.g00 * tn
        with np.errstate(invalid='ignore', divide='ignore'):
            return np.where(total > 0, value / total, np.nan)

    def fdr(self, masks):
        """
        FDR exacto de cada máscara; nan si no acepta masa
        """
        tp, fp, _, _ = self.cells(masks)
        selected = tp + fp
        with np.errstate(invalid='ignore', divide='ignore'):
            return np.where(selected > 0, fp / selected, np.nan)

    def selection_rate(self, masks):
        tp, fp, _, _ = self.cells(masks)
        return tp + fp

    def sample(self, n, rng, t=0):
        """
        Lote de n muestras iid de mu. La clave es el índice del punto
        """
        points = rng.choice(self.size, size=n, p=self.mass)
        labels = (rng.random(n) < self.label_probs[points]).astype(int)
        return IterationBatch(t, self.features[points], self.groups[points],
                              labels, points)


def make_exact_domain(num_points, p, label_probs, mass=None,
                      family='subsets', epsilon=1e-3, f0_mask=None, name=''):
    """
    Arma un dominio exacto de num_points puntos repartidos en p grupos
    contiguos. Sin mass se usa masa uniforme
    """
    if num_points < 1 or p < 1 or p > num_points:
        raise DomainError('Se requieren al menos un punto por grupo')
    if len(label_probs) != num_points:
        raise DomainError('Se requiere una probabilidad de etiqueta por '
                          'punto')

    if mass is None:
        mass = np.full(num_points, 1.0 / num_points)
    groups = np.array_split(np.arange(num_points), p)
    membership = np.zeros(num_points, dtype=int)
    for z, members in enumerate(groups, start=1):
        membership[members] = z

    return ExactDomain(membership, mass, label_probs, family, epsilon,
                       f0_mask, name)


def two_group8():
    """
    Dos grupos de cuatro puntos con masa uniforme. f_0 acepta los dos
    puntos más seguros del grupo 1. Cada grupo tiene dos puntos con
    Pr[Y=1] >= 0.9 y dos con Pr[Y=1] <= 0.3, así que f_opt acepta los
    cuatro puntos seguros con FDR 0.0675
    """
    return make_exact_domain(
        8, 2, [0.98, 0.9, 0.3, 0.2, 0.95, 0.9, 0.25, 0.1],
        f0_mask=[True, True, False, False, False, False, False, False],
        name='two_group8')


def grid16():
    """
    Dos grupos de ocho puntos con masa uniforme
    """
    return make_exact_domain(
        16, 2, [0.99, 0.97, 0.93, 0.9, 0.8, 0.6, 0.4, 0.1,
                0.98, 0.95, 0.9, 0.85, 0.7, 0.5, 0.3, 0.05],
        f0_mask=[True, True] + [False] * 14, name='grid16')


def single_cell():
    """
    Un punto por grupo
    """
    return make_exact_domain(2, 2, [0.95, 0.9], f0_mask=[True, False],
                             name='single_cell')


# Dominios exactos disponibles por nombre
FIXTURES = {
    'two_group8': two_group8,
    'grid16': grid16,
    'single_cell': single_cell,
}


def fixture(name):
    if name not in FIXTURES:
        raise DomainError('Dominio desconocido: {}'.format(name))
    return FIXTURES[name]()
