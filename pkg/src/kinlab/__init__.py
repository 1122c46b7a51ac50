"""Numerical laboratory for a density-dependent BGK-type kinetic equation and its diffusive limit."""
__version__ = "0.1.0"
