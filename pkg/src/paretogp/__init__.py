"""Pareto genetic-programming symbolic regression with model analysis and ensembles."""

__version__ = "0.1.0"
