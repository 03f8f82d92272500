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
Módulo con las excepciones de la aplicación. Los errores de dominio heredan
de ValueError para que puedan tratarse igual que los errores de validación
"""

__author__ = "Alejandro Naifuino <alenaifuino@gmail.com>"
__copyright__ = "Copyright (C) 2017 Alejandro Naifuino"
__license__ = "GPL 3.0"
__version__ = "1.0.0"


class ExploraError(Exception):
    """
    Clase base de todas las excepciones de la aplicación
    """


class ConfigError(ExploraError, ValueError):
    """
    Error en el archivo de configuración o en la línea de comandos
    """


class SchemaError(ExploraError, ValueError):
    """
    Un archivo importado no respeta el esquema de columnas esperado
    """


class DimensionError(ExploraError, ValueError):
    """
    La dimensión de las features no coincide con la del clasificador
    """


class EmptyRecordsError(ExploraError, ValueError):
    """
    Se pidió una métrica sobre un conjunto de registros vacío
    """


class GroupAbsentError(ExploraError, ValueError):
    """
    El grupo solicitado no tiene registros
    """


class UndefinedFDRError(ExploraError, ValueError):
    """
    La tasa de falsos descubrimientos no está definida porque no hubo
    predicciones positivas
    """


class InfeasibleError(ExploraError, ValueError):
    """
    Ningún umbral del clasificador entrenado satisface las restricciones
    """


class DegeneratePoolError(ExploraError, ValueError):
    """
    El pool de entrenamiento está vacío o tiene una única clase
    """


class EngineOrderError(ExploraError, ValueError):
    """
    Llamadas fuera de orden al motor o a la actualización de regiones
    """


class StrategyError(ExploraError, ValueError):
    """
    La estrategia de exploración no puede evaluarse con los datos recibidos
    """


class DatasetError(ExploraError, ValueError):
    """
    El dataset no existe, le faltan columnas o no tiene filas suficientes
    """


class DomainError(ExploraError, ValueError):
    """
    Los parámetros del dominio exacto no son válidos
    """
