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
Módulo con la clase base de los comandos: gestión del directorio de salida,
escritura de tablas CSV y reportes JSON, y manifiesto de la corrida
"""

import hashlib
import json
import logging
import os
import platform

import numpy as np

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"

# Versión del esquema de los archivos de salida
SCHEMA_VERSION = 1

# Formato de los números reales en los CSV (6 dígitos significativos)
FLOAT_FORMAT = '%.6g'


def iteration_columns(n_groups):
    """
    Orden de columnas de la tabla por iteración
    """
    return (['variant', 'repetition', 't', 'revenue', 'fdr', 'fdr_defined',
             'stat_rate', 'tpr_disparity'] +
            ['tpr_group_{}'.format(z) for z in range(1, n_groups + 1)] +
            ['n_exploit', 'n_explore', 'infeasible_fallback'])


def _json_default(value):
    """
    Convierte tipos de numpy a tipos nativos
    """
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return None if np.isnan(value) else float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError('Tipo no serializable: {}'.format(type(value)))


def package_versions():
    """
    Versiones de las dependencias numéricas
    """
    import pandas
    import pyarrow
    import scipy

    from config.config import __version__ as explora_version

    return {
        'explora': explora_version,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pandas.__version__,
        'pyarrow': pyarrow.__version__,
    }


class Harness():
    """
    Clase que se usa como base para los comandos run, verify y baselines
    """

    def __init__(self, debug, command, output_dir=None):
        self.debug = debug
        self.command = command
        self.output_dir = output_dir
        self.output = None

    def set_output_path(self, output_file):
        """
        Devuelve el path y archivo donde se almacena la salida y crea los
        directorios si estos no existen
        """
        from config.config import OUTPUT_DIR

        # Defino el nombre del directorio de salida
        output_dir = self.output_dir or OUTPUT_DIR + self.command + '/'

        # Creo el directorio si este no existe
        os.makedirs(output_dir, exist_ok=True)

        # Defino el archivo y ruta donde se guardará la salida
        self.output = os.path.join(output_dir, output_file)

        return self.output

    def write_table(self, frame, output_file, columns=None):
        """
        Escribe un DataFrame como CSV con encabezado, UTF-8 y reales con 6
        dígitos significativos. Los valores indefinidos quedan vacíos
        """
        if columns is not None:
            frame = frame.reindex(columns=columns)

        frame.to_csv(self.set_output_path(output_file), index=False,
                     float_format=FLOAT_FORMAT, na_rep='', encoding='utf-8',
                     lineterminator='\n')

        return self.output

    def write_json(self, data, output_file):
        with open(self.set_output_path(output_file), 'w',
                  encoding='utf-8') as handle:
            handle.write(json.dumps(data, sort_keys=True, indent=2,
                                    default=_json_default) + '\n')

        return self.output

    def write_text(self, text, output_file):
        with open(self.set_output_path(output_file), 'w',
                  encoding='utf-8') as handle:
            handle.write(text.rstrip('\n') + '\n')

        return self.output

    def write_manifest(self, data, seed):
        """
        Manifiesto de la corrida: semilla, hash de la configuración y
        versiones. No incluye fechas para que dos corridas iguales generen
        archivos idénticos
        """
        if data.get('config'):
            with open(data['config'], 'rb') as handle:
                digest = hashlib.sha256(handle.read()).hexdigest()
        else:
            sections = {key: value for key, value in data.items()
                        if isinstance(value, dict)}
            digest = hashlib.sha256(json.dumps(
                sections, sort_keys=True, default=str).encode('utf-8')) \
                .hexdigest()

        return self.write_json({
            'schema_version': SCHEMA_VERSION,
            'command': self.command,
            'seed': seed,
            'config_sha256': digest,
            'versions': package_versions(),
        }, 'manifest.json')

    def print_block(self, title, items):
        """
        Imprime un bloque de valores en modo debug
        """
        if not self.debug:
            return

        logging.info('|============  %s  ============', title)
        for key, value in items:
            logging.info('| %-22s %s', key + ':', value)
        logging.info('|=================  ---  =================')
