"""Stochastic matching on hypergraphs: simulation and stability analysis."""

__version__ = "0.1.0"
