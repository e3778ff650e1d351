"""Finite-size catalysis toolkit: second-order rates, catalyst sizing and
exact classical simulation of the correlated-catalytic construction."""

__version__ = "0.1.0"
