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
Módulo con funciones auxiliares para la gestión de:
    - Archivo de configuración
    - CLI
    - Construcción de los objetos de configuración de cada comando
"""

import configparser
import copy
import logging
import sys
from dataclasses import dataclass
from typing import Optional, Tuple

from config.config import CONFIG, DEBUG

from . import validation
from .core_types import AlgorithmConfig
from .data import FIXTURES, DatasetSpec
from .errors import ConfigError
from .oracle import VerificationConfig

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "2.0.0"

# Comandos soportados por la línea de comandos
COMMANDS = {
    'run': 'corre el algoritmo y sus variantes sobre un dataset',
    'verify': 'corre las verificaciones sobre dominios exactos',
    'baselines': 'corre opt_offline y fair_clf e importa tablas externas',
}


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Configuración de un experimento: dataset, algoritmo, repeticiones,
    directorio de salida y variantes
    """
    dataset: DatasetSpec
    algorithm: AlgorithmConfig
    repetitions: int
    output_dir: Optional[str]
    variants: Tuple[str, ...]
    fairness_bound: float
    workers: int = 1
    checkpoint: bool = False


# Archivo de configuración
def convert_value(value, default, section, key):
    """
    Convierte el texto leído del archivo al tipo del valor por defecto
    """
    value = value.strip()
    try:
        if isinstance(default, bool):
            if value.lower() not in configparser.ConfigParser.BOOLEAN_STATES:
                raise ValueError(value)
            return configparser.ConfigParser.BOOLEAN_STATES[value.lower()]
        if isinstance(default, int):
            return int(value)
        if default is None and value.lower() in ('', 'none'):
            return None
        if isinstance(default, float) or default is None:
            return float(value)
    except ValueError:
        raise ConfigError('Error de configuración en [{}.{}]: valor '
                          'inválido {!r}'.format(section, key, value))

    return value


def read_config_file(path, data):
    """
    Lee el archivo INI y sobreescribe los valores de data
    """
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=('#', ';'))
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            parser.read_file(handle)
    except OSError as error:
        raise ConfigError('Error de configuración en [config]: no se pudo '
                          'leer el archivo {} ({})'.format(path, error))
    except configparser.Error as error:
        raise ConfigError('Error de configuración en [config]: formato '
                          'inválido ({})'.format(
                              str(error).splitlines()[0]))

    for section in parser.sections():
        if not isinstance(CONFIG.get(section), dict):
            raise ConfigError('Error de configuración en [{}]: sección '
                              'desconocida'.format(section))
        for key, value in parser.items(section, raw=True):
            if key not in CONFIG[section]:
                raise ConfigError('Error de configuración en [{}.{}]: '
                                  'clave desconocida'.format(section, key))
            data[section][key] = convert_value(value, CONFIG[section][key],
                                               section, key)

    return data


def get_config_data(args):
    """
    Obtengo los datos de configuración y devuelvo un diccionario con los mismos
    """
    # Parto de una copia de los valores por defecto
    data = copy.deepcopy(CONFIG)

    # El archivo sobreescribe CONFIG
    if args.get('config'):
        read_config_file(args['config'], data)

    # Los argumentos de la línea de comandos sobreescriben el archivo
    if args.get('seed') is not None:
        data['algorithm']['seed'] = args['seed']
    if args.get('workers') is not None:
        data['experiment']['workers'] = args['workers']
    if args.get('checkpoint'):
        data['experiment']['checkpoint'] = True
    if args.get('checks') is not None:
        data['verify']['checks'] = args['checks']
    if args.get('domain'):
        data['verify']['domain'] = args['domain']
    if args.get('imports'):
        data['baselines']['imports'] = ','.join(
            validation.split_list(data['baselines']['imports']) +
            tuple(args['imports']))

    # Actualizo debug
    data['debug'] = bool(args.get('debug')) or DEBUG

    data['command'] = args.get('command')
    data['config'] = args.get('config')
    data['out'] = args.get('out')

    # Valido los datos del diccionario de configuración
    validation.check_config(data)

    return data


def algorithm_config(data):
    """
    AlgorithmConfig a partir de la sección [algorithm]
    """
    values = dict(data['algorithm'])
    values['lambda_'] = values.pop('lambda')

    return AlgorithmConfig(**values)


def _group_map(value):
    """
    Convierte 'White:1,Black:2' en {'White': 1, 'Black': 2}
    """
    mapping = {}
    for item in validation.split_list(value):
        name, separator, number = item.rpartition(':')
        try:
            if not separator or not name.strip():
                raise ValueError(item)
            mapping[name.strip()] = int(number)
        except ValueError:
            raise ConfigError('Error de configuración en [dataset.group_map]:'
                              ' el par {!r} no tiene la forma '
                              'valor:grupo'.format(item))
        if mapping[name.strip()] < 1:
            raise ConfigError('Error de configuración en [dataset.group_map]:'
                              ' los grupos se numeran desde 1')

    return mapping


def dataset_spec(data):
    """
    DatasetSpec a partir de la sección [dataset]
    """
    section = data['dataset']
    try:
        hidden = tuple(int(item) for item in
                       validation.split_list(section['hidden_groups']))
    except ValueError:
        raise ConfigError('Error de configuración en [dataset.hidden_groups]:'
                          ' debe ser una lista de grupos')

    return DatasetSpec(
        path=section['path'],
        features=validation.split_list(section['features']),
        categorical=validation.split_list(section['categorical']),
        label=section['label'],
        label_positive=section['label_positive'],
        group=section['group'],
        group_map=_group_map(section['group_map']),
        split_mode=section['split_mode'],
        iterations=section['iterations'],
        bootstrap_size=section['bootstrap_size'],
        initial_size=section['initial_size'],
        positive_share=section['positive_share'],
        hidden_groups=hidden,
        source=section['source'],
        synthetic_rows=section['synthetic_rows'],
        synthetic_minority_share=section['synthetic_minority_share'],
        cache=section['cache'])


def experiment_config(data):
    """
    ExperimentConfig de los comandos run y baselines
    """
    section = data['experiment']

    return ExperimentConfig(
        dataset=dataset_spec(data),
        algorithm=algorithm_config(data),
        repetitions=section['repetitions'],
        output_dir=data.get('out'),
        variants=validation.split_list(section['variants']),
        fairness_bound=section['fairness_bound'],
        workers=section['workers'],
        checkpoint=section['checkpoint'])


def verification_config(data):
    """
    VerificationConfig y AlgorithmConfig del comando verify. La sección
    [verify] fija la utilidad, la estrategia y lambda
    """
    section = data['verify']
    vconfig = VerificationConfig(
        trials=section['trials'], delta=section['delta'],
        tolerance=section['tolerance'], n=section['n'],
        iterations=section['iterations'],
        reweighting_n=section['reweighting_n'],
        tv_tolerance=section['tv_tolerance'],
        steps_per_round=section['steps_per_round'],
        positive_share=data['dataset']['positive_share'],
        seed=data['algorithm']['seed'])
    config = algorithm_config(data).evolve(
        utility=section['utility'],
        exploration_strategy=section['exploration_strategy'],
        lambda_=section['lambda'])

    return vconfig, config


def print_config(data):
    """
    Imprime los datos básicos de configuración
    """
    logging.basicConfig(stream=sys.stdout, level=logging.INFO)
    logging.info('|============  Configuración  ============')
    logging.info('| Comando:       %s', data['command'])
    logging.info('| Archivo:       %s', data['config'])
    logging.info('| Semilla:       %s', data['algorithm']['seed'])
    logging.info('| Alpha:         %s', data['algorithm']['alpha'])
    logging.info('| Estrategia:    %s',
                 data['algorithm']['exploration_strategy'])
    logging.info('| Utilidad:      %s', data['algorithm']['utility'])
    logging.info('| Dataset:       %s', data['dataset']['path'] or
                 data['dataset']['source'])
    logging.info('| Repeticiones:  %s', data['experiment']['repetitions'])
    logging.info('| Procesos:      %s', data['experiment']['workers'])
    logging.info('| Salida:        %s', data['out'])
    logging.info('|=================  ---  =================')


# CLI
def arg_gettext(message):
    """
    Traduce cadenas de argparse al español
    """
    messages = {
        'positional arguments': 'argumentos posicionales',
        'optional arguments': 'argumentos opcionales',
        'options': 'opciones',
        'show this help message and exit': 'mostrar esta ayuda y salir',
        'invalid %(type)s value: %(value)r': 'valor inválido: %(value)r',
        'invalid choice: %(value)r (choose from %(choices)s)':
            'valor inválido %(value)r. Opciones posibles: %(choices)s',
        'usage: ': 'uso: ',
        'the following arguments are required: %s':
            'argumentos requeridos: %s',
        'expected one argument': 'se espera un valor para el parámetro',
        'expected at most one argument': 'se espera como máximo un argumento',
        'expected at least one argument':
            'se espera al menos un valor para el parámetro',
        'one of the arguments %s is required':
            'al menos uno de los siguientes argumentos %s es requerido',
        'not allowed with argument %s': 'no permitido con el argumento %s'
    }

    if message in messages:
        return messages[message]

    return message


def common_arguments(parser):
    """
    Argumentos comunes a todos los comandos
    """
    parser.add_argument(
        '--config',
        type=lambda x: validation.check_cli(
            parser, type='file', value=x, name='config'),
        help='archivo INI de configuración',
        metavar='PATH')
    parser.add_argument(
        '--out',
        help='directorio donde se guardan los resultados',
        metavar='DIR')
    parser.add_argument(
        '--seed',
        type=lambda x: validation.check_cli(
            parser, type='int', value=x, name='seed', minimum=0),
        help='semilla (sobreescribe la del archivo de configuración)',
        metavar='N')
    parser.add_argument(
        '--workers',
        type=lambda x: validation.check_cli(
            parser, type='int', value=x, name='workers', minimum=1),
        help='cantidad de procesos para las repeticiones',
        metavar='N')
    parser.add_argument(
        '--debug',
        action='store_true',
        help='muestra los mensajes de debug en stdout')

    return parser


def base_parser(version):
    """
    Parser base con un subparser por comando
    """
    import argparse

    # Creo el parser de la línea de comandos
    base = argparse.ArgumentParser(
        prog='explora.py',
        formatter_class=argparse.RawTextHelpFormatter)
    base.add_argument(
        '--version',
        action='version',
        version='%(prog)s ' + version,
        help='muestra la versión del programa y sale')

    commands = base.add_subparsers(dest='command', metavar='comando',
                                   title='comandos')
    commands.required = True

    # Llamo a la función del parser según el comando
    for command, description in COMMANDS.items():
        parser = commands.add_parser(
            command, help=description, description=description,
            formatter_class=argparse.RawTextHelpFormatter)
        common_arguments(parser)
        getattr(sys.modules[__name__], '%s_parser' % command)(parser)

    return base


def run_parser(parser):
    """
    Argumentos específicos del comando run
    """
    parser.add_argument(
        '--checkpoint',
        action='store_const',
        const=True,
        default=None,
        help='guarda el estado final de las regiones de cada variante')

    return parser


def verify_parser(parser):
    """
    Argumentos específicos del comando verify
    """
    parser.add_argument(
        '--checks',
        help='verificaciones separadas por coma (sobreescribe [verify] '
             'checks). Una lista vacía no corre ninguna',
        metavar='LISTA')
    parser.add_argument(
        '--domain',
        type=lambda x: validation.check_cli(
            parser, type='list', value=x, name='domain', list=FIXTURES),
        help='dominio exacto. Valores soportados:\n- ' +
             '\n- '.join(FIXTURES),
        metavar='')

    return parser


def baselines_parser(parser):
    """
    Argumentos específicos del comando baselines
    """
    parser.add_argument(
        '--import',
        action='append',
        default=[],
        dest='imports',
        help='tabla CSV externa a incorporar al resumen (repetible)',
        metavar='CSV')

    return parser


def cli_parser(version, argv=None):
    """
    Parsea la línea de comandos buscando argumentos requeridos y soportados
    """
    import gettext

    # Obtengo las traducciones al español
    gettext.gettext = arg_gettext

    # Obtengo el parser base
    parser = base_parser(version)

    args = parser.parse_args(argv)

    # Realizo las validaciones que no puedo hacer via argparse
    try:
        validation.check_parser(args)
    except ValueError as error:
        raise parser.error(str(error))

    return vars(args)
