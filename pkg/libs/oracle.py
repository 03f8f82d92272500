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
Módulo de verificación por fuerza bruta sobre dominios exactos:
    - brute_force_fopt: clasificador de máxima utilidad bajo alpha-FDR
    - verify_feasibility: frecuencia de iteraciones con FDR > alpha + tol
    - verify_convergence: utilidad por grupo contra f_opt a partir de
      t >= 1 / sigma(z)
    - verify_monotonicity: f_t no empeora respecto de los clasificadores
      anteriores sobre la región de explotación
    - verify_reweighting: distancia de variación total entre eta_w y mu
      restringida a Exploit_t
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List

import numpy as np

from . import engine
from .data import build_biased_initial
from .errors import ConfigError, DomainError
from .exploration import ExplorationStrategy, sigma
from .learner import ReweightedPool

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"

# Holgura numérica en las comparaciones exactas
EXACT_SLACK = 1e-12


@dataclass(frozen=True)
class VerificationConfig:
    trials: int = 50
    delta: float = 0.05
    tolerance: float = 0.05
    n: int = 2000
    iterations: int = 12
    reweighting_n: int = 5000
    tv_tolerance: float = 0.10
    positive_share: float = 0.9
    seed: int = 0
    steps_per_round: int = 200

    def __post_init__(self):
        checks = (
            ('trials', self.trials >= 20, 'debe ser al menos 20'),
            ('delta', 0 < self.delta <= 1, 'debe estar en (0, 1]'),
            ('tolerance', self.tolerance >= 0, 'debe ser no negativa'),
            ('n', self.n >= 1, 'debe ser positivo'),
            ('iterations', self.iterations >= 1, 'debe ser positivo'),
            ('reweighting_n', self.reweighting_n >= 1, 'debe ser positivo'),
            ('steps_per_round', self.steps_per_round >= 1,
             'debe ser al menos 1'),
        )
        for name, valid, message in checks:
            if not valid:
                raise ConfigError('Error de configuración en '
                                  '[verify.{}]: {}'.format(name, message))


@dataclass
class CheckReport:
    """
    Resultado de una verificación con las cantidades medidas
    """
    check: str
    passed: bool
    domain: str
    trials: int
    n: int
    iterations: int
    measured: Dict = field(default_factory=dict)
    per_iteration: List = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def brute_force_mask(domain, gamma, alpha):
    """
    Máscara de la hipótesis factible de mayor utilidad y su utilidad. Las
    hipótesis sin masa positiva cumplen el FDR trivialmente
    """
    masks = domain.hypotheses()
    utilities = domain.utility(masks, gamma)
    fdr = domain.fdr(masks)
    feasible = np.isnan(fdr) | (fdr <= alpha + EXACT_SLACK)

    best = int(np.argmax(np.where(feasible, utilities, -np.inf)))
    return masks[best], float(utilities[best])


def brute_force_fopt(domain, gamma, alpha, group_specific=True):
    """
    f_opt^alpha por enumeración exhaustiva
    """
    mask, value = brute_force_mask(domain, gamma, alpha)
    return domain.classifier_from_mask(mask, group_specific), value


def check_f0(domain, config):
    """
    f_0 debe cumplir alpha-FDR y la tasa de selección lambda sobre mu
    """
    mask = domain.f0_mask
    fdr = float(domain.fdr(mask)[0])
    rate = float(domain.selection_rate(mask)[0])
    if (not np.isnan(fdr) and fdr > config.alpha + EXACT_SLACK) or \
            rate + EXACT_SLACK < config.lambda_:
        raise DomainError('f_0 no es factible en {}: FDR {:.4f}, tasa de '
                          'selección {:.4f}'.format(domain.name, fdr, rate))


def check_budget_form(config):
    """
    La verificación de factibilidad controla el presupuesto de la forma step
    """
    if config.budget_form != 'step':
        raise ConfigError('Error de configuración en [algorithm.budget_form]: '
                          'las verificaciones requieren la forma step')


def trial_config(config, vconfig, seed):
    """
    Configuración de un ensayo: semilla propia y a lo sumo
    vconfig.steps_per_round pasos por ronda de penalidad
    """
    return config.evolve(seed=seed, steps_per_round=min(
        config.steps_per_round, vconfig.steps_per_round))


def domain_episode(domain, config, n, iterations, seed, positive_share=0.9):
    """
    Repetición sobre un dominio exacto: S_0 y los lotes son muestras iid de
    mu y f_0 es el clasificador histórico del dominio. Las masas de cada
    iteración se normalizan sobre los puntos de D
    """
    rng = np.random.default_rng(seed)
    initial = domain.sample(n, rng, 0)
    labeled, _, inclusion = build_biased_initial(initial, positive_share,
                                                 seed, (), domain.n_groups)
    batches = tuple(domain.sample(n, rng, t)
                    for t in range(1, iterations + 1))

    return engine.Episode(domain.f0(config.group_specific), labeled,
                          initial.size, inclusion, domain.n_groups, batches,
                          discrete=True,
                          support=(domain.features, domain.groups))


def _trials(domain, vconfig, config, n=None):
    """
    Corre el motor en cada ensayo y devuelve (reportes, estado final)
    """
    check_budget_form(config)
    check_f0(domain, config)
    n = vconfig.n if n is None else n
    for seed in engine.repetition_seeds(vconfig.seed, vconfig.trials):
        episode = domain_episode(domain, config, n, vconfig.iterations, seed,
                                 vconfig.positive_share)
        yield engine.run_episode(trial_config(config, vconfig, seed), episode)


def theorem_config(config):
    """
    Configuración de convergencia: estrategia uniforme y alpha_exploit
    constante igual a alpha - epsilon. El presupuesto queda en
    epsilon * n_exploit / (1 - alpha)
    """
    return config.evolve(exploration_strategy='uniform',
                         alpha_exploit_scale=config.alpha - config.epsilon,
                         alpha_exploit_exponent=0.0, epsilon=0.0)


def _accepted(domain, classifier):
    return domain.accepted(classifier)[None, :]


def verify_feasibility(domain, vconfig, config):
    """
    Fracción de iteraciones con FDR definido mayor a alpha + tolerancia
    """
    violations = total = 0
    budget_ok = True
    per_iteration = np.zeros(vconfig.iterations)

    for reports, _ in _trials(domain, vconfig, config):
        for report in reports:
            total += 1
            if report.fdr_defined and \
                    report.fdr > config.alpha + vconfig.tolerance:
                violations += 1
                per_iteration[report.t - 1] += 1
            if report.worst_case_fdr > config.alpha + 1e-9:
                budget_ok = False

    fraction = violations / total if total else 0.0
    return CheckReport(
        'feasibility', fraction <= vconfig.delta and budget_ok, domain.name,
        vconfig.trials, vconfig.n, vconfig.iterations,
        {'violation_fraction': fraction, 'violations': violations,
         'iterations_checked': total, 'budget_identity': budget_ok,
         'alpha': config.alpha},
        [{'t': t + 1, 'violations': int(count)}
         for t, count in enumerate(per_iteration)])


def verify_convergence(domain, vconfig, config):
    """
    Para cada grupo z y t >= ceil(1 / sigma(z)), Util(f_t, z) debe estar a
    menos de la tolerancia de Util(f_opt, z)
    """
    config = theorem_config(config)
    gamma = config.gamma()
    optimal, _ = brute_force_mask(domain, gamma, config.alpha)

    _, per_group = sigma(ExplorationStrategy('uniform'), domain.features,
                         domain.groups)
    start = {z: math.ceil(1.0 / value - 1e-9)
             for z, value in per_group.items()}
    reference = {z: float(domain.utility(optimal, gamma, group=z)[0])
                 for z in per_group}

    passed_trials = 0
    gaps = []
    for _, state in _trials(domain, vconfig, config):
        trial_ok = True
        for t in range(1, state.t + 1):
            mask = _accepted(domain, state.classifiers[t])
            for z, first in start.items():
                if t < first:
                    continue
                value = float(domain.utility(mask, gamma, group=z)[0])
                gap = reference[z] - value
                gaps.append(gap)
                if gap > vconfig.tolerance:
                    trial_ok = False
        passed_trials += trial_ok

    success = passed_trials / vconfig.trials
    return CheckReport(
        'convergence', success >= 1 - vconfig.delta, domain.name,
        vconfig.trials, vconfig.n, vconfig.iterations,
        {'success_fraction': success, 'start_iteration': start,
         'optimal_utility': reference,
         'max_gap': max(gaps) if gaps else 0.0})


def verify_monotonicity(domain, vconfig, config):
    """
    Util sobre Exploit_t de f_t contra el mejor clasificador anterior, por
    grupo
    """
    gamma = config.gamma()
    passed_trials = 0
    worst = 0.0

    for _, state in _trials(domain, vconfig, config):
        trial_ok = True
        masks = np.vstack([_accepted(domain, classifier)
                           for classifier in state.classifiers])
        for t in range(2, state.t + 1):
            region = state.regions.weights(domain.features, domain.groups,
                                           upto=t - 1) > state.regions.tau
            for z in range(1, domain.n_groups + 1):
                values = domain.utility(masks[:t + 1], gamma, region, z)
                if np.isnan(values[t]):
                    continue
                gap = float(np.nanmax(values[:t]) - values[t])
                worst = max(worst, gap)
                if gap > vconfig.tolerance:
                    trial_ok = False
        passed_trials += trial_ok

    success = passed_trials / vconfig.trials
    return CheckReport(
        'monotonicity', success >= 1 - vconfig.delta, domain.name,
        vconfig.trials, vconfig.n, vconfig.iterations,
        {'success_fraction': success, 'max_gap': worst})


def pool_distribution(domain, pool):
    """
    Distribución normalizada del pool sobre (punto, etiqueta). Devuelve una
    matriz (|D|, 2)
    """
    distribution = np.zeros((domain.size, 2))
    if pool.size:
        keys = np.argmax(pool.features, axis=1)
        np.add.at(distribution, (keys, pool.labels), pool.weights)
    total = distribution.sum()
    return distribution / total if total > 0 else distribution


def restricted_mu(domain, region):
    """
    mu restringida a la región (sin los puntos de masa baja), normalizada
    """
    keep = region & ~domain.low_mass
    distribution = np.column_stack([domain.mass * (1 - domain.label_probs),
                                    domain.mass * domain.label_probs])
    distribution[~keep] = 0.0
    total = distribution.sum()
    return distribution / total if total > 0 else distribution


def total_variation(first, second):
    return 0.5 * float(np.abs(first - second).sum())


def reweighting_distances(domain, state):
    """
    Distancia TV del pool ponderado y sin ponderar contra mu|Exploit_t para
    el pool de la iteración state.t + 1
    """
    region = state.regions.in_exploit(domain.features, domain.groups)
    keep = region & ~domain.low_mass
    if not keep.any():
        return None

    pool = engine.build_pool(state)
    key = np.argmax(pool.features, axis=1) if pool.size else \
        np.zeros(0, dtype=int)
    inside = keep[key] if pool.size else np.zeros(0, dtype=bool)
    weighted = pool.subset(np.flatnonzero(inside))
    unweighted = ReweightedPool(weighted.features, weighted.groups,
                                weighted.labels,
                                (weighted.weights > 0).astype(float))

    target = restricted_mu(domain, region)
    return (total_variation(pool_distribution(domain, weighted), target),
            total_variation(pool_distribution(domain, unweighted), target))


def verify_reweighting(domain, vconfig, config):
    """
    TV entre eta_w normalizado y mu|Exploit_t por iteración. Debe quedar por
    debajo de tv_tolerance al final
    """
    passed_trials = 0
    finals = []
    history = {}

    check_budget_form(config)
    check_f0(domain, config)
    for seed in engine.repetition_seeds(vconfig.seed, vconfig.trials):
        episode = domain_episode(domain, config, vconfig.reweighting_n,
                                 vconfig.iterations, seed,
                                 vconfig.positive_share)
        state = engine.init_state(trial_config(config, vconfig, seed),
                                  episode.f0,
                                  episode.labeled, episode.initial_size,
                                  episode.inclusion, episode.n_groups,
                                  discrete=True, support=episode.support)
        distances = None
        for batch in episode.batches:
            _, _, state = engine.run_iteration(state, batch)
            distances = reweighting_distances(domain, state)
            if distances is not None:
                history.setdefault(state.t + 1, []).append(distances)

        if distances is not None:
            finals.append(distances)
            passed_trials += distances[0] <= vconfig.tv_tolerance

    success = passed_trials / vconfig.trials
    per_iteration = [{'t': t, 'tv_weighted': float(np.mean([d[0] for d in
                                                            values])),
                      'tv_unweighted': float(np.mean([d[1] for d in
                                                      values]))}
                     for t, values in sorted(history.items())]
    logging.debug('TV final promedio: %s', per_iteration[-1:]
                  if per_iteration else None)

    return CheckReport(
        'reweighting', success >= 1 - vconfig.delta, domain.name,
        vconfig.trials, vconfig.reweighting_n, vconfig.iterations,
        {'success_fraction': success,
         'final_tv_weighted': float(np.mean([d[0] for d in finals]))
         if finals else None,
         'final_tv_unweighted': float(np.mean([d[1] for d in finals]))
         if finals else None},
        per_iteration)


# Verificaciones disponibles por nombre
CHECKS = {
    'feasibility': verify_feasibility,
    'convergence': verify_convergence,
    'monotonicity': verify_monotonicity,
    'reweighting': verify_reweighting,
}


def run_checks(names, domain, vconfig, config):
    """
    Corre las verificaciones pedidas en orden
    """
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise ConfigError('Error de configuración en [verify.checks]: '
                          'verificaciones desconocidas {}'.format(unknown))

    return [CHECKS[name](domain, vconfig, config) for name in names]
