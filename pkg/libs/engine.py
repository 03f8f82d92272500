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
Módulo con el ciclo de recolección y predicción. Cada iteración:
    1. entrena f_t sobre eta_w (f_0 en t = 1)
    2. clasifica con f_t las muestras de Exploit_t
    3. calcula el presupuesto de exploración
    4. elige muestras de Explore_t con probabilidad proporcional a g
    5. observa los resultados de todas las predicciones positivas
    6. actualiza la región de explotación

run_experiment repite el ciclo sobre varias divisiones del dataset y
arma las tablas de resultados
"""

import concurrent.futures
import logging
import multiprocessing as mp
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from . import data, metrics
from .core_types import LabeledSet, LinearClassifier
from .errors import (DegeneratePoolError, EngineOrderError, ExploraError,
                     InfeasibleError, UndefinedFDRError)
from .exploration import (ExplorationStrategy, explore_budget,
                          group_proportions, sample_explore)
from .learner import (ReweightedPool, TrainingProblem, build_eta_weights,
                      train_constrained, train_f0)
from .regions import RegionState

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"

# Variantes del algoritmo: (restricción de paridad en la explotación,
# estrategia de exploración fair)
VARIANTS = {
    'no_fairness': (False, False),
    'exploit_fairness': (True, False),
    'explore_fairness': (False, True),
    'both_fairness': (True, True),
}

# Métricas resumidas por variante
SUMMARY_METRICS = ('revenue', 'fdr', 'stat_rate', 'tpr_disparity')


@dataclass(frozen=True)
class IterationReport:
    t: int
    revenue: float
    fdr: float
    fdr_defined: bool
    stat_rate: float
    tpr_disparity: float
    tpr_by_group: Dict[int, float]
    n_exploit: int
    n_explore: int
    infeasible_fallback: bool
    coverage: float = 0.0
    worst_case_fdr: float = 0.0
    alpha_exploit: float = 0.0
    single_group: bool = False

    def to_row(self, n_groups):
        """
        Fila de la tabla por iteración
        """
        row = {
            't': self.t,
            'revenue': self.revenue,
            'fdr': self.fdr if self.fdr_defined else np.nan,
            'fdr_defined': int(self.fdr_defined),
            'stat_rate': self.stat_rate,
            'tpr_disparity': self.tpr_disparity,
        }
        for z in range(1, n_groups + 1):
            row['tpr_group_{}'.format(z)] = self.tpr_by_group.get(z, np.nan)
        row.update({
            'n_exploit': self.n_exploit,
            'n_explore': self.n_explore,
            'infeasible_fallback': int(self.infeasible_fallback),
        })
        return row


@dataclass(frozen=True, eq=False)
class EngineState:
    """
    Estado del ciclo luego de la iteración t
    """
    config: object
    f0: LinearClassifier
    regions: RegionState
    n_groups: int
    t: int = 0
    classifiers: Tuple[LinearClassifier, ...] = ()
    labeled: Tuple[LabeledSet, ...] = ()
    arrivals: Tuple[int, ...] = ()
    inclusion: Dict[Tuple[int, int], float] = field(default_factory=dict)
    fairness_bound: Optional[float] = None
    support: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def classifier(self):
        """
        Último clasificador usado (f_0 antes de la primera iteración)
        """
        return self.classifiers[-1]

    @property
    def strategy(self):
        return ExplorationStrategy(self.config.exploration_strategy,
                                   self.config.beta)


@dataclass(frozen=True, eq=False)
class Episode:
    """
    Datos de una repetición: f_0, L_0, tamaño de S_0, tabla de inclusión de
    L_0 y los lotes S_1..S_T. support son las features y grupos del dominio
    finito cuando la repetición corre sobre uno
    """
    f0: LinearClassifier
    labeled: LabeledSet
    initial_size: int
    inclusion: Dict[Tuple[int, int], float]
    n_groups: int
    batches: Tuple
    discrete: bool = False
    support: Optional[Tuple[np.ndarray, np.ndarray]] = None


def init_state(config, f0, labeled, initial_size, inclusion, n_groups,
               fairness_bound=None, discrete=False, support=None):
    """
    Estado inicial: Exploit_1 vacío, L_0 como primera entrada de la
    historia etiquetada
    """
    bound = config.exploit_fairness if fairness_bound is None \
        else fairness_bound
    return EngineState(config, f0, RegionState(config.tau, (), discrete),
                       n_groups, 0, (f0,), (labeled,), (int(initial_size),),
                       dict(inclusion), bound, support)


def _iteration_seed(seed, t):
    return int(np.random.SeedSequence([seed, t]).generate_state(1)[0])


def _propensities(state):
    """
    Función de propensión para build_eta_weights: fila 0 con la tabla de
    inclusión de L_0, filas 1..t-1 con la historia de regiones
    """
    def propensity_fn(features, groups, labels, keys):
        initial = np.array([state.inclusion.get((int(z), int(y)), 0.0)
                            for z, y in zip(groups, labels)])
        later = state.regions.labeling_probabilities(features, groups, keys)
        return np.vstack([initial[None, :], later])

    return propensity_fn


def build_pool(state):
    """
    Pool de entrenamiento de la iteración t = state.t + 1
    """
    if not state.config.exploration_enabled:
        # Sin exploración se usan los datos etiquetados tal cual
        features = np.vstack([item.features for item in state.labeled])
        groups = np.concatenate([item.groups for item in state.labeled])
        labels = np.concatenate([item.labels for item in state.labeled])
        return ReweightedPool(features, groups, labels, np.ones(len(labels)))

    return build_eta_weights(state.labeled, state.arrivals,
                             state.regions.in_exploit, _propensities(state))


def learn(state, t):
    """
    Devuelve (f_t, fallback). Ante un pool degenerado o restricciones
    infactibles se reutiliza el clasificador anterior
    """
    if t == 1:
        return state.f0, False

    config = state.config
    pool = build_pool(state)
    try:
        problem = TrainingProblem.from_config(
            pool, config, config.alpha_exploit(t), state.n_groups,
            state.fairness_bound, _iteration_seed(config.seed, t))
        return train_constrained(problem), False
    except (InfeasibleError, DegeneratePoolError) as error:
        logging.warning('Iteración %s: %s. Se reutiliza el clasificador '
                        'anterior', t, error)
        return state.classifier, True


def _strategy_props(strategy, batch, explore):
    """
    Proporciones de grupo de la estrategia: región de exploración para fair
    y lote completo para las inversas. Si la región está vacía se usa el
    lote
    """
    if strategy.proportion_source == 'explore' and explore.size:
        return group_proportions(batch.groups[explore])
    if strategy.proportion_source:
        return group_proportions(batch.groups)
    return {}


def _report(state, batch, predicted, t, n_exploit, n_explore, fallback,
            coverage, alpha_exploit):
    """
    Métricas de la iteración contra la verdad completa del lote
    """
    config = state.config
    records = metrics.RecordSet(predicted, batch.ground_truth(), batch.groups)

    try:
        fdr, defined = metrics.empirical_fdr(records), True
    except UndefinedFDRError:
        fdr, defined = np.nan, False

    positives = n_exploit + n_explore
    worst = (alpha_exploit + config.epsilon) * n_exploit + n_explore
    worst_case = worst / positives if positives else 0.0

    empty = metrics.Disparity(0.0, False)
    stat_rate = metrics.statistical_rate_disparity(records) if records.size \
        else empty
    tpr_gap = metrics.tpr_disparity(records) if records.size else empty

    return IterationReport(
        t, metrics.revenue(records, config.c1, config.c2) if records.size
        else 0.0, fdr, defined, stat_rate.value, tpr_gap.value,
        metrics.true_positive_rates(records) if records.size else {},
        n_exploit, n_explore, fallback, coverage, worst_case, alpha_exploit,
        stat_rate.single_group or tpr_gap.single_group)


def run_iteration(state, batch, rng=None):
    """
    Ejecuta la iteración t = state.t + 1 sobre el lote S_t. Devuelve
    (reporte, L_t, nuevo estado)
    """
    t = state.t + 1
    if batch.t != t:
        raise EngineOrderError('El lote corresponde a la iteración {} y se '
                               'esperaba la {}'.format(batch.t, t))

    config = state.config
    rng = rng if rng is not None else \
        np.random.default_rng([config.seed, t])
    strategy = state.strategy

    # Obtengo f_t
    classifier, fallback = learn(state, t)

    # Particiono el lote en Exploit_t y Explore_t
    if config.exploration_enabled:
        exploit, explore = state.regions.split(batch)
    else:
        exploit = np.arange(batch.size)
        explore = np.array([], dtype=int)

    predicted = np.zeros(batch.size, dtype=int)
    if exploit.size:
        predicted[exploit] = classifier.predictions(batch.features[exploit],
                                                    batch.groups[exploit])
    n_exploit = int(predicted.sum())

    # Calculo el presupuesto de exploración
    alpha_exploit = config.alpha_exploit(t)
    budget = explore_budget(n_exploit, config.alpha, alpha_exploit,
                            config.epsilon, config.budget_form == 'step')
    n_explore = min(budget, explore.size) if config.exploration_enabled \
        else 0

    # Evalúo g sobre Explore_t y elijo las muestras a explorar
    props = _strategy_props(strategy, batch, explore)
    g_total = 0.0
    if explore.size:
        snapshot_scores = classifier.scores(batch.features[explore],
                                            batch.groups[explore]) \
            if strategy.uses_scores else np.zeros(explore.size)
        g_values = strategy.evaluate(snapshot_scores, batch.groups[explore],
                                     props, normalized=True)
        g_total = float(g_values.sum())
        chosen = sample_explore(explore, g_values, n_explore, rng)
        predicted[explore[chosen]] = 1

    if n_explore > budget:
        raise AssertionError('n_explore {} supera el presupuesto '
                             '{}'.format(n_explore, budget))

    # Observo los resultados de las predicciones positivas
    revealed = np.flatnonzero(predicted == 1)
    labels = batch.reveal(revealed, predicted)
    if len(revealed) != n_exploit + n_explore:
        raise AssertionError('Las etiquetas leídas no coinciden con las '
                             'predicciones positivas')
    labeled = LabeledSet.from_batch(batch, revealed, labels)

    coverage = exploit.size / batch.size if batch.size else 0.0
    report = _report(state, batch, predicted, t, n_exploit, n_explore,
                     fallback, coverage, alpha_exploit)

    regions = state.regions.advance(t, classifier, strategy, props, g_total,
                                    n_explore, state.support)

    logging.debug('| t=%s exploit=%s explore=%s fdr=%s fallback=%s', t,
                  n_exploit, n_explore, report.fdr, fallback)

    new_state = replace(state, regions=regions, t=t,
                        classifiers=state.classifiers + (classifier,),
                        labeled=state.labeled + (labeled,),
                        arrivals=state.arrivals + (batch.size,))

    return report, labeled, new_state


def prepare_episode(dataset, spec, seed, group_specific=True):
    """
    Arma una repetición sobre un dataset: división aleatoria, L_0 sesgado y
    f_0 entrenado como L_0 contra U_0
    """
    stream = data.make_stream(dataset, spec, seed)
    labeled, unlabeled, inclusion = data.build_biased_initial(
        stream.initial, spec.positive_share, seed, spec.hidden_groups,
        dataset.n_groups)
    f0 = train_f0(labeled, unlabeled, dataset.n_groups, group_specific)

    return Episode(f0, labeled, stream.initial.size, inclusion,
                   dataset.n_groups, stream.batches)


def variant_config(config, variant, fairness_bound):
    """
    Configuración y cota de paridad de una variante
    """
    if variant == 'fair_clf':
        return config.evolve(exploration_enabled=False), fairness_bound
    if variant not in VARIANTS:
        raise ExploraError('Variante desconocida: {}'.format(variant))

    exploit_fair, explore_fair = VARIANTS[variant]
    if explore_fair:
        config = config.evolve(exploration_strategy='fair')
    return config, fairness_bound if exploit_fair else None


def run_episode(config, episode, fairness_bound=None):
    """
    Corre el ciclo completo sobre una repetición. Devuelve los reportes y
    el estado final
    """
    state = init_state(config, episode.f0, episode.labeled,
                       episode.initial_size, episode.inclusion,
                       episode.n_groups, fairness_bound, episode.discrete,
                       episode.support)
    reports = []
    for batch in episode.batches:
        report, _, state = run_iteration(state, batch)
        reports.append(report)

    return reports, state


def repetition_seeds(seed, repetitions):
    children = np.random.SeedSequence(seed).spawn(repetitions)
    return [int(child.generate_state(1)[0]) for child in children]


def _run_repetition(task):
    """
    Corre todas las variantes de una repetición. Función de nivel de módulo
    para poder enviarla a otro proceso
    """
    config, factory, seed, repetition, variants, bound, checkpoint = task
    episode = factory(seed)
    config = config.evolve(seed=seed)

    rows, checkpoints = [], []
    for variant in variants:
        variant_conf, variant_bound = variant_config(config, variant, bound)
        reports, state = run_episode(variant_conf, episode, variant_bound)
        for report in reports:
            row = {'variant': variant, 'repetition': repetition}
            row.update(report.to_row(episode.n_groups))
            rows.append(row)
        if checkpoint:
            checkpoints.append((variant, repetition, state.regions.to_json()))

    return rows, checkpoints


def summarize(table):
    """
    Promedio por repetición de cada métrica y luego media y error estándar
    entre repeticiones, por variante
    """
    rows = []
    for variant, frame in table.groupby('variant', sort=False):
        per_repetition = frame.groupby('repetition')[list(SUMMARY_METRICS)] \
            .mean()
        row = {'variant': variant, 'repetitions': len(per_repetition)}
        for metric in SUMMARY_METRICS:
            values = per_repetition[metric].dropna().to_numpy()
            row[metric + '_mean'] = float(values.mean()) if values.size \
                else np.nan
            row[metric + '_se'] = float(stats.sem(values)) \
                if values.size > 1 else np.nan
        rows.append(row)

    return pd.DataFrame(rows)


@dataclass(frozen=True, eq=False)
class ExperimentTable:
    iterations: pd.DataFrame
    summary: pd.DataFrame
    checkpoints: Tuple = ()


def run_experiment(config, factory, repetitions=1, variants=('no_fairness',),
                   fairness_bound=None, seed=None, workers=1,
                   checkpoint=False):
    """
    Corre repetitions repeticiones de cada variante. factory(seed) devuelve
    el Episode de una repetición
    """
    if repetitions < 1:
        raise ExploraError('Se requiere al menos una repetición')

    seed = config.seed if seed is None else seed
    tasks = [(config, factory, child, repetition, tuple(variants),
              fairness_bound, checkpoint)
             for repetition, child in
             enumerate(repetition_seeds(seed, repetitions), start=1)]

    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=workers,
                mp_context=mp.get_context('spawn')) as executor:
            results = list(executor.map(_run_repetition, tasks))
    else:
        results = [_run_repetition(task) for task in tasks]

    rows = [row for result, _ in results for row in result]
    if not rows:
        raise ExploraError('El stream no tiene iteraciones')

    table = pd.DataFrame(rows)
    checkpoints = tuple(item for _, result in results for item in result)

    return ExperimentTable(table, summarize(table), checkpoints)
