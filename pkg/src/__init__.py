# Radial Euler-Poisson period & critical-threshold toolkit

__version__ = "1.0.0"
