"""
Subpaquete que contiene funciones y clases para la gestión de:
- validación de input
- archivo de configuración y línea de comandos
- errores
- algoritmo, baselines, datos y verificaciones
"""
