"""
Paquete que contiene el simulador de recolección de datos con feedback
parcial: explotación con cota de FDR, exploración y reentrenamiento con
pesos por propensión
"""
