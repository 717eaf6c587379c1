"""Numerical checks for sufficient conditions of discrete Schrödinger spectrum.

Finite measure spaces and rearrangements, the optimal-cover functional,
capacity constants of balls, the distorted-capacity measure on a ball,
dense systems of parallelepipeds, an explicit oscillating potential family,
condition traces and a finite-difference spectral proxy.
"""
__version__ = "0.1.0"
