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
Módulo con las políticas de comparación:
    - opt_offline: clasificador entrenado con todas las etiquetas de S_0
      bajo la restricción de FDR (inalcanzable con feedback parcial)
    - fair_clf: reentrenado en cada iteración con los datos etiquetados
      disponibles, con restricciones de FDR y paridad y sin exploración
    - tablas externas importadas desde CSV
"""

import concurrent.futures
import multiprocessing as mp
import os

import numpy as np
import pandas as pd

from . import data, engine, metrics
from .errors import SchemaError, UndefinedFDRError
from .learner import ReweightedPool, TrainingProblem, train_constrained
from .validation import check_columns

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"

# Columnas obligatorias de una tabla externa
EXTERNAL_COLUMNS = ('t', 'revenue', 'fdr', 'stat_rate', 'tpr_disparity')


def train_opt_offline(initial, gamma, alpha, config=None, n_groups=None,
                      seed=0):
    """
    Entrena sobre S_0 con todas sus etiquetas y pesos uniformes. initial es
    un IterationBatch (se usa su verdad completa) o un LabeledSet
    """
    labels = initial.ground_truth() if hasattr(initial, 'ground_truth') \
        else initial.labels
    pool = ReweightedPool(initial.features, initial.groups, labels,
                          np.ones(len(labels)))

    if config is None:
        return train_constrained(TrainingProblem(
            pool, gamma, alpha, n_groups=n_groups, seed=seed))

    return train_constrained(TrainingProblem(
        pool, gamma, alpha, 0.0, 0.0, None, n_groups,
        config.group_specific, config.learning_rate, config.penalty_start,
        config.penalty_growth, config.penalty_rounds, config.steps_per_round,
        config.tolerance, seed))


def evaluate_fixed(classifier, batches, config):
    """
    Reportes por iteración de un clasificador fijo sobre los lotes
    """
    reports = []
    for batch in batches:
        predicted = classifier.predictions(batch.features, batch.groups)
        records = metrics.RecordSet(predicted, batch.ground_truth(),
                                    batch.groups)
        try:
            fdr, defined = metrics.empirical_fdr(records), True
        except UndefinedFDRError:
            fdr, defined = np.nan, False

        stat_rate = metrics.statistical_rate_disparity(records)
        tpr_gap = metrics.tpr_disparity(records)
        reports.append(engine.IterationReport(
            batch.t, metrics.revenue(records, config.c1, config.c2), fdr,
            defined, stat_rate.value, tpr_gap.value,
            metrics.true_positive_rates(records), int(predicted.sum()), 0,
            False, 1.0,
            single_group=stat_rate.single_group or tpr_gap.single_group))

    return reports


def run_opt_offline(config, dataset, spec, seed):
    """
    Entrena opt_offline sobre S_0 de una repetición y lo evalúa en cada S_t
    """
    stream = data.make_stream(dataset, spec, seed)
    classifier = train_opt_offline(stream.initial, config.gamma(),
                                   config.alpha, config, dataset.n_groups,
                                   seed)
    return evaluate_fixed(classifier, stream.batches, config)


def run_fair_clf(config, episode, fairness_bound):
    """
    Mismo ciclo que el algoritmo con presupuesto de exploración nulo y la
    cota de paridad siempre activa
    """
    config = config.evolve(exploration_enabled=False)
    return engine.run_episode(config, episode, fairness_bound)


def _run_baselines(task):
    """
    Corre opt_offline y fair_clf en una repetición
    """
    config, dataset, spec, seed, repetition, bound = task
    config = config.evolve(seed=seed)

    rows = []
    for report in run_opt_offline(config, dataset, spec, seed):
        row = {'variant': 'opt_offline', 'repetition': repetition}
        row.update(report.to_row(dataset.n_groups))
        rows.append(row)

    episode = engine.prepare_episode(dataset, spec, seed,
                                     config.group_specific)
    reports, _ = run_fair_clf(config, episode, bound)
    for report in reports:
        row = {'variant': 'fair_clf', 'repetition': repetition}
        row.update(report.to_row(dataset.n_groups))
        rows.append(row)

    return rows


def run_baselines(config, dataset, spec, repetitions, fairness_bound,
                  seed=None, workers=1):
    """
    Tabla por iteración y resumen de ambos baselines
    """
    seed = config.seed if seed is None else seed
    tasks = [(config, dataset, spec, child, repetition, fairness_bound)
             for repetition, child in enumerate(
                 engine.repetition_seeds(seed, repetitions), start=1)]

    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=workers,
                mp_context=mp.get_context('spawn')) as executor:
            results = list(executor.map(_run_baselines, tasks))
    else:
        results = [_run_baselines(task) for task in tasks]
    rows = [row for result in results for row in result]

    table = pd.DataFrame(rows)
    return engine.ExperimentTable(table, engine.summarize(table))


def load_external_baseline(path, name=None):
    """
    Lee una tabla externa y valida su esquema. Devuelve un DataFrame con las
    columnas de la tabla por iteración
    """
    if not os.path.exists(path):
        raise SchemaError('No se encontró la tabla externa {}'.format(path))

    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeError) \
            as error:
        raise SchemaError('La tabla externa {} no es un CSV válido: '
                          '{}'.format(path, error))

    check_columns(frame, EXTERNAL_COLUMNS, path, SchemaError)
    for column in EXTERNAL_COLUMNS:
        values = pd.to_numeric(frame[column], errors='coerce')
        if values[frame[column].notna()].isna().any():
            raise SchemaError('La columna {} de {} tiene valores no '
                              'numéricos'.format(column, path))
        frame[column] = values

    if frame.empty:
        raise SchemaError('La tabla externa {} está vacía'.format(path))

    name = name or os.path.splitext(os.path.basename(path))[0]
    frame = frame.copy()
    frame['variant'] = name
    if 'repetition' not in frame.columns:
        frame['repetition'] = 1

    return frame
