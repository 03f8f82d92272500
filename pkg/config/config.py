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
Módulo de configuración de la aplicación explora
"""

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"


# Activa o desactiva el modo DEBUG
DEBUG = False

# Diccionario con los valores de configuración por defecto. Las claves de
# cada sección son las que se aceptan en el archivo de configuración
CONFIG = {
    'algorithm': {
        'alpha': 0.15,
        'alpha_exploit_scale': 0.075,
        'alpha_exploit_exponent': 0.2,
        'epsilon': 1e-3,
        'lambda': 0.0,
        'tau': 0.5,
        'beta': 0.0,
        'exploration_strategy': 'clf',
        'exploit_fairness': None,
        'seed': 0,
        'group_specific': True,
        'budget_form': 'step',
        'utility': 'revenue',
        'c1': 500.0,
        'c2': 200.0,
        'learning_rate': 0.1,
        'penalty_start': 0.01,
        'penalty_growth': 10.0,
        'penalty_rounds': 5,
        'steps_per_round': 500,
        'tolerance': 1e-3,
    },
    'dataset': {
        'source': 'csv',
        'path': '',
        'features': '',
        'categorical': '',
        'label': '',
        'label_positive': '',
        'group': '',
        'group_map': '',
        'split_mode': 'partition',
        'iterations': 40,
        'bootstrap_size': 500,
        'initial_size': 500,
        'positive_share': 0.9,
        'hidden_groups': '',
        'synthetic_rows': 20000,
        'synthetic_minority_share': 0.2,
        'cache': '',
    },
    'experiment': {
        'repetitions': 50,
        'variants': 'no_fairness,exploit_fairness,explore_fairness,'
                    'both_fairness',
        'fairness_bound': 0.05,
        'workers': 1,
        'checkpoint': False,
    },
    'verify': {
        'checks': 'feasibility,convergence,monotonicity,reweighting',
        'domain': 'two_group8',
        'trials': 50,
        'delta': 0.05,
        'tolerance': 0.05,
        'n': 2000,
        'iterations': 12,
        'reweighting_n': 5000,
        'tv_tolerance': 0.10,
        'steps_per_round': 200,
        # Parámetros del algoritmo que se usan en la verificación
        'utility': 'accuracy',
        'exploration_strategy': 'uniform',
        'lambda': 0.05,
    },
    'baselines': {
        'imports': '',
    },
}

# Directorio donde se guardan los archivos de resultados
OUTPUT_DIR = 'data/'
