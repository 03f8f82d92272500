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
Módulo con funciones auxiliares para la gestión de validación de input
"""

from .errors import ConfigError, SchemaError

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"


def split_list(value):
    """
    Convierte una cadena separada por comas en una tupla sin vacíos
    """
    if isinstance(value, (list, tuple)):
        return tuple(value)

    return tuple(item.strip() for item in str(value or '').split(',')
                 if item.strip())


def check_file(file, permission='r'):
    """
    Valida que un archivo exista y que tenga los permisos requeridos
    """
    try:
        with open(file, permission):
            pass
    except (FileNotFoundError, IsADirectoryError):
        raise ValueError('No se encontró el archivo solicitado')
    except PermissionError:
        raise ValueError('El archivo no tiene los permisos requeridos')

    return True


def check_columns(frame, required, source, error=SchemaError):
    """
    Valida que un DataFrame tenga las columnas requeridas
    """
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise error('Faltan las columnas {} en {}'.format(
            ', '.join(str(column) for column in missing), source))

    return True


def _fail(section, key, message):
    raise ConfigError('Error de configuración en [{}.{}]: {}'.format(
        section, key, message))


def _check_range(data, section, key, low=None, high=None, integer=False):
    """
    Valida que data[section][key] sea numérico y esté en [low, high]
    """
    value = data[section][key]
    kind = int if integer else (int, float)
    if isinstance(value, bool) or not isinstance(value, kind):
        _fail(section, key, 'no es un número válido')
    if low is not None and value < low:
        _fail(section, key, 'debe ser mayor o igual a {}'.format(low))
    if high is not None and value > high:
        _fail(section, key, 'debe ser menor o igual a {}'.format(high))


def _check_choices(data, section, key, choices):
    """
    Valida que todos los elementos de la lista estén entre las opciones
    """
    unknown = [item for item in split_list(data[section][key])
               if item not in choices]
    if unknown:
        _fail(section, key, 'valores desconocidos {}. Opciones posibles: '
              '{}'.format(', '.join(unknown), ', '.join(choices)))


def check_dataset(data, command):
    """
    Valida la sección [dataset]
    """
    from .data import SPLIT_MODES

    section = data['dataset']
    if section['source'] not in ('csv', 'synthetic'):
        _fail('dataset', 'source', 'debe ser csv o synthetic')
    if section['split_mode'] not in SPLIT_MODES:
        _fail('dataset', 'split_mode', 'debe ser partition o bootstrap')
    for key in ('iterations', 'bootstrap_size', 'initial_size',
                'synthetic_rows'):
        _check_range(data, 'dataset', key, low=1, integer=True)
    _check_range(data, 'dataset', 'positive_share', 0, 1)
    _check_range(data, 'dataset', 'synthetic_minority_share', 0, 1)

    # Con datos sintéticos no hace falta describir el CSV
    if section['source'] != 'csv' or command not in ('run', 'baselines'):
        return

    if not section['path']:
        _fail('dataset', 'path', 'falta la ruta del dataset')
    try:
        check_file(section['path'])
    except ValueError as error:
        _fail('dataset', 'path', str(error).lower())

    for key in ('label', 'label_positive', 'group'):
        if not section[key]:
            _fail('dataset', key, 'no puede estar vacío')
    if not split_list(section['features']):
        _fail('dataset', 'features', 'debe indicar al menos una columna')


def check_config(data):
    """
    Valida los datos de configuración
    """
    from .engine import VARIANTS
    from .oracle import CHECKS

    command = data.get('command')

    check_dataset(data, command)

    # Valida la sección [experiment]
    _check_range(data, 'experiment', 'repetitions', low=1, integer=True)
    _check_range(data, 'experiment', 'workers', low=1, integer=True)
    _check_range(data, 'experiment', 'fairness_bound', 0, 1)
    _check_choices(data, 'experiment', 'variants',
                   tuple(VARIANTS) + ('fair_clf',))

    # Valida la sección [verify]
    from .data import FIXTURES

    _check_choices(data, 'verify', 'checks', tuple(CHECKS))
    if data['verify']['domain'] not in FIXTURES:
        _fail('verify', 'domain', 'dominio desconocido. Opciones posibles: '
              '{}'.format(', '.join(FIXTURES)))
    _check_range(data, 'verify', 'trials', low=20, integer=True)
    _check_range(data, 'verify', 'delta', 0, 1)
    _check_range(data, 'verify', 'tolerance', low=0)
    _check_range(data, 'verify', 'tv_tolerance', low=0)
    for key in ('n', 'iterations', 'reweighting_n', 'steps_per_round'):
        _check_range(data, 'verify', key, low=1, integer=True)

    # Valida el modo debug
    if not isinstance(data['debug'], bool):
        raise ConfigError('Error de configuración en [debug]: el modo no es '
                          'válido')

    return True


def check_cli(parser, **kwargs):
    """
    Wrapper que valida los valores de los argumentos de la línea de comandos
    """
    # Verifico los tipos de la línea de comandos
    if kwargs['type'] == 'file':
        try:
            check_file(kwargs['value'])
        except ValueError as error:
            raise parser.error(kwargs['name'] + ': ' + str(error).lower())
    elif kwargs['type'] == 'int':
        try:
            value = int(kwargs['value'])
        except ValueError:
            raise parser.error(kwargs['name'] + ': no es un número entero')
        if value < kwargs.get('minimum', 0):
            raise parser.error('{}: debe ser mayor o igual a {}'.format(
                kwargs['name'], kwargs.get('minimum', 0)))
        return value
    elif kwargs['type'] == 'list':
        if kwargs['value'] not in kwargs['list']:
            raise parser.error(kwargs['name'] + ': no es un valor válido')

    return kwargs['value']


def check_parser(args):
    """
    Valida las combinaciones de argumentos que no pueden ser verificadas
    mediante argparse
    """
    import os

    if args.out and os.path.isfile(args.out):
        raise ValueError('--out debe ser un directorio, no un archivo')

    return True
