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
Script que corre el simulador de recolección de datos con feedback parcial.

Los comandos disponibles son:
    - run: corre las cuatro variantes del algoritmo sobre un dataset y
      escribe la tabla por iteración, el resumen y el manifiesto
    - verify: corre las verificaciones sobre un dominio exacto y escribe un
      reporte JSON por verificación
    - baselines: corre opt_offline y fair_clf, importa tablas externas y
      escribe el resumen conjunto

Códigos de salida: 0 éxito, 1 error de ejecución, 2 error de configuración
"""

import functools
import logging
import sys

import pandas as pd

from libs import baselines, engine, harness, oracle, utility
from libs.data import fixture, load_and_preprocess
from libs.errors import ConfigError, ExploraError, SchemaError
from libs.validation import split_list

__author__ = 'Alejandro Naifuino (alenaifuino@gmail.com)'
__copyright__ = 'Copyright (C) 2017 Alejandro Naifuino'
__license__ = 'GPL 3.0'
__version__ = '1.0.0'


class Experiment(harness.Harness):
    """
    Clase que corre el comando run
    """

    def __init__(self, data):
        super().__init__(data['debug'], 'run', data['out'])
        self.data = data
        self.config = utility.experiment_config(data)
        self.n_groups = None
        self.table = None

    def run(self):
        """
        Corre las repeticiones de cada variante
        """
        algorithm = self.config.algorithm
        dataset = load_and_preprocess(self.config.dataset, algorithm.seed)
        self.n_groups = dataset.n_groups

        # factory(seed) arma el Episode de cada repetición
        factory = functools.partial(engine.prepare_episode, dataset,
                                    self.config.dataset,
                                    group_specific=algorithm.group_specific)

        self.table = engine.run_experiment(
            algorithm, factory, self.config.repetitions,
            self.config.variants, self.config.fairness_bound,
            workers=self.config.workers,
            checkpoint=self.config.checkpoint)

        self.print_block('Resumen', [
            (row['variant'], '{:.6g} / {:.6g}'.format(row['revenue_mean'],
                                                      row['fdr_mean']))
            for row in self.table.summary.to_dict('records')])

        return self.table

    def write(self):
        self.write_table(self.table.iterations, 'iterations.csv',
                         harness.iteration_columns(self.n_groups))
        self.write_table(self.table.summary, 'summary.csv')

        for variant, repetition, payload in self.table.checkpoints:
            self.write_text(payload, 'regions_{}_{}.json'.format(
                variant, repetition))

        self.write_manifest(self.data, self.config.algorithm.seed)


class Verification(harness.Harness):
    """
    Clase que corre el comando verify
    """

    def __init__(self, data):
        super().__init__(data['debug'], 'verify', data['out'])
        self.data = data
        self.vconfig, self.config = utility.verification_config(data)
        self.checks = split_list(data['verify']['checks'])
        self.domain = data['verify']['domain']
        self.reports = []

    @property
    def passed(self):
        return all(report.passed for report in self.reports)

    def run(self):
        self.reports = oracle.run_checks(self.checks, fixture(self.domain),
                                         self.vconfig, self.config)

        self.print_block('Verificaciones', [
            (report.check, 'ok' if report.passed else 'FALLA')
            for report in self.reports])

        return self.reports

    def write(self):
        for report in self.reports:
            self.write_json(report.to_dict(),
                            'verify_{}.json'.format(report.check))

        self.write_manifest(self.data, self.vconfig.seed)


class BaselineComparison(harness.Harness):
    """
    Clase que corre el comando baselines
    """

    def __init__(self, data):
        super().__init__(data['debug'], 'baselines', data['out'])
        self.data = data
        self.config = utility.experiment_config(data)
        self.imports = split_list(data['baselines']['imports'])
        self.n_groups = None
        self.table = None
        self.summary = None

    def run(self):
        # Valido las tablas externas antes de correr las simulaciones
        imported = [baselines.load_external_baseline(path)
                    for path in self.imports]

        algorithm = self.config.algorithm
        dataset = load_and_preprocess(self.config.dataset, algorithm.seed)
        self.n_groups = dataset.n_groups

        self.table = baselines.run_baselines(
            algorithm, dataset, self.config.dataset, self.config.repetitions,
            self.config.fairness_bound, workers=self.config.workers)

        self.summary = self.table.summary
        if imported:
            self.summary = engine.summarize(pd.concat(
                [self.table.iterations] + imported, ignore_index=True,
                sort=False))

        return self.summary

    def write(self):
        self.write_table(self.table.iterations, 'iterations.csv',
                         harness.iteration_columns(self.n_groups))
        self.write_table(self.summary, 'summary.csv')
        self.write_manifest(self.data, self.config.algorithm.seed)


def cmd_run(data):
    """
    Comando run
    """
    experiment = Experiment(data)
    experiment.run()
    experiment.write()

    return 0


def cmd_verify(data):
    """
    Comando verify. Sin verificaciones no hace nada
    """
    verification = Verification(data)
    if not verification.checks:
        logging.info('No hay verificaciones para correr')
        return 0

    verification.run()
    verification.write()

    return 0 if verification.passed else 1


def cmd_baselines(data):
    """
    Comando baselines
    """
    comparison = BaselineComparison(data)
    comparison.run()
    comparison.write()

    return 0


def main(argv=None):
    """
    Función utilizada para la ejecución del script por línea de comandos
    """
    # Obtengo los parámetros pasados por línea de comandos
    args = utility.cli_parser(__version__, argv)

    # Obtengo los datos de configuración
    try:
        config_data = utility.get_config_data(args)
    except ValueError as error:
        print(error, file=sys.stderr)
        raise SystemExit(2)

    # Muestro las opciones de configuración via stdout
    if config_data['debug']:
        utility.print_config(config_data)
        logging.getLogger().setLevel(logging.DEBUG)

    # Llamo al comando solicitado
    command = getattr(sys.modules[__name__],
                      'cmd_%s' % config_data['command'])
    try:
        return command(config_data)
    except (ConfigError, SchemaError) as error:
        print(error, file=sys.stderr)
        raise SystemExit(2)
    except (ExploraError, ValueError, OSError) as error:
        raise SystemExit('Error: {}'.format(error))


if __name__ == '__main__':
    raise SystemExit(main())
